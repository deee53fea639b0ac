#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "modules.hpp"

namespace vortex {

// Plain-text module config.
//
//   kind = module_b            # aspp | aspp_plus | module_a | module_b
//   pyramid_impl = cascaded    # naive | cascaded (module_b only)
//   include_image_level = true
//   branch_out_c = 256
//
//   [branch pool3]
//   pool_kernel = 3
//   pool_dilation = 1
//   conv_kernel = 3
//   conv_dilation = 3
//
// '#' starts a comment; blank lines are ignored; branch blocks keep file
// order. Top-level keys must precede the first branch block.

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline int parse_int(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        int x = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw ConfigError("bad integer '" + v + "' for key '" + key + "'");
    }
}

inline bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("bad boolean '" + v + "' for key '" + key + "'");
}

}  // namespace detail

inline ModuleConfig config_parse(std::istream& is) {
    ModuleConfig cfg;
    cfg.branches.clear();
    BranchSpec* cur = nullptr;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": unterminated section");
            std::string inner = detail::trim(line.substr(1, line.size() - 2));
            if (inner.rfind("branch ", 0) != 0)
                throw ConfigError("line " + std::to_string(lineno) +
                                  ": unknown section '" + inner + "'");
            std::string name = detail::trim(inner.substr(7));
            if (name.empty())
                throw ConfigError("line " + std::to_string(lineno) + ": empty branch name");
            cfg.branches.push_back(BranchSpec{name, 1, 1, 1, 1});
            cur = &cfg.branches.back();
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = detail::trim(line.substr(0, eq));
        std::string val = detail::trim(line.substr(eq + 1));
        if (cur == nullptr) {
            if (key == "kind") {
                if (val == "aspp") cfg.kind = ModuleKind::aspp;
                else if (val == "aspp_plus") cfg.kind = ModuleKind::aspp_plus;
                else if (val == "module_a") cfg.kind = ModuleKind::module_a;
                else if (val == "module_b") cfg.kind = ModuleKind::module_b;
                else throw ConfigError("unknown kind '" + val + "'");
            } else if (key == "pyramid_impl") {
                if (val == "naive") cfg.pyramid_impl = PyramidImpl::naive;
                else if (val == "cascaded") cfg.pyramid_impl = PyramidImpl::cascaded;
                else throw ConfigError("unknown pyramid_impl '" + val + "'");
            } else if (key == "include_image_level") {
                cfg.include_image_level = detail::parse_bool(val, key);
            } else if (key == "branch_out_c") {
                cfg.branch_out_c = detail::parse_int(val, key);
            } else {
                throw ConfigError("line " + std::to_string(lineno) +
                                  ": unknown top-level key '" + key + "'");
            }
        } else {
            if (key == "pool_kernel") cur->pool_kernel = detail::parse_int(val, key);
            else if (key == "pool_dilation") cur->pool_dilation = detail::parse_int(val, key);
            else if (key == "conv_kernel") cur->conv_kernel = detail::parse_int(val, key);
            else if (key == "conv_dilation") cur->conv_dilation = detail::parse_int(val, key);
            else
                throw ConfigError("line " + std::to_string(lineno) +
                                  ": unknown branch key '" + key + "'");
        }
    }
    validate_config(cfg);
    return cfg;
}

inline ModuleConfig config_load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config '" + path + "'");
    return config_parse(is);
}

inline std::string config_serialize(const ModuleConfig& cfg) {
    std::ostringstream os;
    os << "kind = " << kind_name(cfg.kind) << "\n";
    if (cfg.kind == ModuleKind::module_b)
        os << "pyramid_impl = "
           << (cfg.pyramid_impl == PyramidImpl::cascaded ? "cascaded" : "naive") << "\n";
    os << "include_image_level = " << (cfg.include_image_level ? "true" : "false") << "\n";
    os << "branch_out_c = " << cfg.branch_out_c << "\n";
    for (const BranchSpec& b : cfg.branches) {
        os << "\n[branch " << b.name << "]\n";
        os << "pool_kernel = " << b.pool_kernel << "\n";
        os << "pool_dilation = " << b.pool_dilation << "\n";
        os << "conv_kernel = " << b.conv_kernel << "\n";
        os << "conv_dilation = " << b.conv_dilation << "\n";
    }
    return os.str();
}

}  // namespace vortex
