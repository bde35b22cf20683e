#include <string>

#include "rulemix/rules.hpp"

// Registry text content. Byte-exact copies live under tests/golden/ and are
// checksum-verified against this table.

namespace rulemix::rules {

const std::string& base_rewrite_prompt() {
    static const std::string text = R"__(I want you to act as a Prompt Rewriter. Your objective is to rewrite a given prompt into a more complex version to make those famous AI systems (e.g., chatgpt and GPT4) a bit harder to handle. But the rewritten prompt must be reasonable and must be understood and responded by humans. Your rewriting cannot omit the non-text parts such as the table and code in the original prompt. Also, please do not omit the input in the original prompt. You SHOULD complicate the given prompt using the following method: [Rule-specific prompt] You should try your best NOT to make the rewritten prompt become verbose; the rewritten prompt can only add 10 to 20 words into the original prompt. You should ensure that any names of people or entities are retained. Certain terms like 'original prompt', 'rewritten prompt', and related phrases are NOT allowed to appear in the rewritten prompt. It is also NOT allowed to include reference choices content in the rewritten prompt.)__";
    return text;
}

const std::vector<Rule>& builtin_rules() {
    static const std::vector<Rule> all = {
        Rule{
            "social-phenomena-pun-buzzwords",
            "Social Phenomena, Pun, or Buzzwords",
            "Humorous Social Commentary",
            R"__(Please rewrite #The Given Prompt# using puns based on social phenomena, pun or buzzwords, while preserving the original intent as much as possible. Note that I prefer you to refer to the relevant knowledge rather than directly using specific terms. Regarding using puns based on social phenomena or buzzwords, here are some examples for your reference:)__",
            {
                R"__(Experts suggest reducing the use of electronic devices, but isn’t there no material in the world that doesn’t contain electronics?)__",
                R"__(I bought a set of toys with the 26 letters of the alphabet, but I only received 23 of them. When I contacted the seller about it, they said I didn't purchase the DLC.)__",
                R"__(The saying goes, "Only with pressure comes motivation." So, can atmospheric pressure also provide motivation?)__",
            },
        },
        Rule{
            "exaggerating-everyday-phenomena",
            "Exaggerating Everyday Phenomena",
            "Humorous Social Commentary",
            R"__(Please rewrite #The Given Prompt# by exaggerating everyday phenomena, while preserving the original intent as much as possible. Note that I prefer you to refer to the relevant knowledge rather than directly using specific terms. Regarding exaggerating everyday phenomena, here are some examples for your reference:)__",
            {
                R"__(If concentrated sulfuric acid contains 2% water, does drinking 50 cups of sulfuric acid mean I would have consumed a cup of pure water?)__",
                R"__(Is it a violation to run after drinking all the water during a swimming competition?)__",
                R"__(If a couple keeps getting married and divorced repeatedly, does that count as contributing to the marriage rate?)__",
            },
        },
        Rule{
            "blurring-conceptual-boundaries",
            "Blurring the Conceptual Boundaries",
            "Conceptual Flexibility",
            R"__(Please rewrite #The Given Prompt# by blurring the conceptual boundaries, while preserving the original intent as much as possible. Note that I prefer you to refer to the relevant knowledge rather than directly using specific terms. Regarding blurring the conceptual boundaries, here are some examples for your reference:)__",
            {
                R"__(After intense exercise, one should avoid drinking ice-cold water and taking cold showers. So what should one do if they're engaging in vigorous activity in the water?)__",
                R"__(Since a rusty knife can cause tetanus when used to cut someone, why didn't ancient people simply use rusty weapons?)__",
                R"__(Everyone works to make money, so who is losing money?)__",
            },
        },
        Rule{
            "counterintuitive-thinking",
            "Counterintuitive Thinking",
            "Conceptual Flexibility",
            R"__(Please rewrite #The Given Prompt# using counterintuitive thinking, while preserving the original intent as much as possible. Note that I prefer you to refer to the relevant knowledge rather than directly using specific terms. Regarding using counterintuitive thinking, here are some examples for your reference:)__",
            {
                R"__(Since the prison is full of criminals, why don't the police go into the prison to arrest people?)__",
                R"__(A person should look for cars when crossing the street, but what should they do if there are no cars on the road?)__",
                R"__(If a surgery has a success rate of only 50%, then doing it twice would result in a success rate of just 25%. So, if we only perform half of the surgery, wouldn't that give us a 100% success rate?)__",
            },
        },
        Rule{
            "absurd-but-reasonable-analogies",
            "Analogies That Appear Absurd but Are Actually Reasonable",
            "Conceptual Flexibility",
            R"__(Please #The Given Prompt# using an analogy that appears absurd but is actually reasonable, while preserving the original intent as much as possible. Note that I prefer you to refer to the relevant knowledge rather than directly using specific terms. Regarding using an analogy that appears absurd but is actually reasonable, here are some examples for your reference:)__",
            {
                R"__(On a rainy day, I stepped into a puddle and accidentally shattered the sky.)__",
                R"__(We are all blind people in life, groping the elephant named the world.)__",
                R"__(If I shatter the nightmare, am I the destroyer of dreams or the guardian of happiness?)__",
            },
        },
        Rule{
            "interdisciplinary-integration",
            "Interdisciplinary Knowledge Integration",
            "Conceptual Flexibility",
            R"__(Please rewrite #The Given Prompt# by integrating interdisciplinary knowledge, while preserving the original intent as much as possible. Note that I prefer you to refer to the relevant knowledge rather than directly using specific terms. Regarding integrating interdisciplinary knowledge, here are some examples for your reference:)__",
            {
                R"__(It's clearly food-grade stainless steel—so why is it still so hard to swallow?)__",
                R"__(The baby raised by wolves can understand wolf language, so will a baby raised by robots know C language?)__",
                R"__(Many girls tend to exaggerate their age, so why not just look at their annual rings?)__",
            },
        },
        Rule{
            "philosophical-thinking",
            "Philosophical Thinking",
            "Human-like Reflections",
            R"__(Please rewrite #The Given Prompt# by incorporating philosophical thinking, while preserving the original intent as much as possible. Note that I prefer you to refer to the relevant knowledge rather than directly using specific terms. Regarding incorporating philosophical thinking, here are some examples for your reference:)__",
            {
                R"__(The alarm clock shatters the dream; does it also shatter the life of another world?)__",
                R"__(The cry of a newborn baby—is it a joyful expression of life, or a fear of the world?)__",
                R"__(The meaning of life is to find happiness, so why does everyone seem to live in a sea of suffering?)__",
            },
        },
        Rule{
            "anthropomorphic-expressions",
            "Anthropomorphic Expressions",
            "Human-like Reflections",
            R"__(Please rewrite #The Given Prompt# using anthropomorphic expressions, while preserving the original intent as much as possible. Note that I prefer you to refer to the relevant knowledge rather than directly using specific terms. Regarding using anthropomorphic expressions, here are some examples for your reference:)__",
            {
                R"__(Since 70% of the human body is water, does that mean 7 out of every 10 people are just water disguised as humans?)__",
                R"__(When a person is away from money, they are useless; when money is away from a person, it is just a piece of paper. So why do people work hard to earn money instead of money working hard to find people?)__",
                R"__(Why do we take medicine when we are sick, but the world seems to resort to sacrificing people when it is unwell? Can a person heal through medication, while the world can only be cured by taking lives?)__",
            },
        },
    };
    return all;
}

}  // namespace rulemix::rules

namespace rulemix::scoring {

const std::string& judge_prompt_skeleton() {
    static const std::string text = R"__(I want you to act as a Data Synthesis Evaluator. Your objective is to evaluate synthesized data against given standards to ensure quality and relevance. You will be provided with an original question, the answer, the synthesis rule, and the synthesized question. Your evaluation should be based on the following criteria, each rated on a scale of 1-10:

1. Consistency: Does the synthesized question align with the original question?

2. Correctness: Is the synthesized question accurate and free of errors?

3. Alignment: Does the synthesized question adhere to the specified synthesis rules?

Original Question: [Original Question]

Answer: [Answer]

Synthesis Rule: [Synthesis Rule]

Synthesized Question: [Synthesized Question]

Please provide your evaluation in the following structured format:

---

Consistency: [Score 1-10]

Correctness: [Score 1-10]

Alignment: [Score 1-10]

---)__";
    return text;
}

}  // namespace rulemix::scoring
