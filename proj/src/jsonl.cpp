#include "rulemix/jsonl.hpp"

#include <fstream>

#include "rulemix/errors.hpp"

namespace rulemix::jsonl {

void for_each(const std::filesystem::path& path,
              const std::function<void(std::size_t, const ordered_json&)>& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        ordered_json obj;
        try {
            obj = ordered_json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        fn(lineno, obj);
    }
}

struct Writer::Impl {
    std::ofstream out;
    std::filesystem::path path;
};

Writer::Writer(const std::filesystem::path& path) : impl_(new Impl) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    impl_->path = path;
    impl_->out.open(path, std::ios::binary | std::ios::trunc);
    if (!impl_->out) {
        delete impl_;
        throw ConfigError("cannot write " + path.string());
    }
}

Writer::~Writer() {
    close();
    delete impl_;
}

void Writer::write(const ordered_json& obj) {
    impl_->out << obj.dump() << '\n';
    if (!impl_->out) throw PipelineError("write failed: " + impl_->path.string());
    ++lines_;
}

void Writer::close() {
    if (impl_->out.is_open()) impl_->out.close();
}

}  // namespace rulemix::jsonl
