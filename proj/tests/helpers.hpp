#pragma once

// Shared fixtures: the bundled model files, parsed once, with name lookup.

#include "ascm/ascm.hpp"

#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#ifndef ASCM_MODELS_DIR
#define ASCM_MODELS_DIR "models"
#endif

namespace testutil {

using namespace ascm;

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Bundle {
    std::vector<SourceFile> files;

    static const Bundle& get() {
        static Bundle b = [] {
            Bundle out;
            for (const char* f : {"face.scm", "barmnist.scm", "barmnist_chain.scm"})
                out.files.push_back(parse_source(slurp(std::string(ASCM_MODELS_DIR) + "/" + f)));
            return out;
        }();
        return b;
    }

    const ScmBlock& scm(const std::string& name) const {
        for (const auto& f : files)
            for (const auto& s : f.scms)
                if (s.name == name) return s;
        throw std::runtime_error("no bundled model '" + name + "'");
    }
    const QueryBlock& query(const std::string& name) const {
        for (const auto& f : files)
            for (const auto& q : f.queries)
                if (q.name == name) return q;
        throw std::runtime_error("no bundled query '" + name + "'");
    }
};

inline Scm load_scm(const std::string& name) { return Scm(Bundle::get().scm(name)); }
inline Query load_query(const std::string& name) {
    return query_from_block(Bundle::get().query(name));
}

}  // namespace testutil
