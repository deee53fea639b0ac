#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace vortex {

// FMAP: "VPFM" | u32 version=1 | u8 dtype (0=f32,1=f64) | 3 pad bytes |
//       u32 h,w,c | payload, little-endian IEEE-754 in layout order.
// VPWB: "VPWB" | u32 version=1 | u32 count | per entry:
//       u16 name_len | name | u8 dtype | u32 out_c,in_c,kh,kw |
//       weights payload | bias payload.

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; big-endian hosts unsupported");

inline void put_u32(std::ostream& os, std::uint32_t v) {
    char buf[4];
    std::memcpy(buf, &v, 4);
    os.write(buf, 4);
}

inline void put_u16(std::ostream& os, std::uint16_t v) {
    char buf[2];
    std::memcpy(buf, &v, 2);
    os.write(buf, 2);
}

inline std::uint32_t get_u32(std::istream& is, const char* what) {
    char buf[4];
    if (!is.read(buf, 4)) throw IoError(std::string("truncated file reading ") + what);
    std::uint32_t v;
    std::memcpy(&v, buf, 4);
    return v;
}

inline std::uint16_t get_u16(std::istream& is, const char* what) {
    char buf[2];
    if (!is.read(buf, 2)) throw IoError(std::string("truncated file reading ") + what);
    std::uint16_t v;
    std::memcpy(&v, buf, 2);
    return v;
}

inline void put_payload(std::ostream& os, const std::vector<double>& data, Dtype dt) {
    if (dt == Dtype::f64) {
        os.write(reinterpret_cast<const char*>(data.data()),
                 static_cast<std::streamsize>(data.size() * 8));
    } else {
        std::vector<float> tmp(data.begin(), data.end());
        os.write(reinterpret_cast<const char*>(tmp.data()),
                 static_cast<std::streamsize>(tmp.size() * 4));
    }
}

inline void get_payload(std::istream& is, std::vector<double>& data, Dtype dt,
                        std::size_t n, const char* what) {
    data.resize(n);
    if (dt == Dtype::f64) {
        if (!is.read(reinterpret_cast<char*>(data.data()),
                     static_cast<std::streamsize>(n * 8)))
            throw IoError(std::string("truncated payload in ") + what);
    } else {
        std::vector<float> tmp(n);
        if (!is.read(reinterpret_cast<char*>(tmp.data()),
                     static_cast<std::streamsize>(n * 4)))
            throw IoError(std::string("truncated payload in ") + what);
        for (std::size_t i = 0; i < n; ++i) data[i] = tmp[i];
    }
}

inline Dtype decode_dtype(int code, const char* what) {
    if (code == 0) return Dtype::f32;
    if (code == 1) return Dtype::f64;
    throw IoError(std::string("bad dtype code ") + std::to_string(code) + " in " + what);
}

}  // namespace detail

inline void fmap_write(const FeatureMap& m, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    os.write("VPFM", 4);
    detail::put_u32(os, 1);
    char dt_pad[4] = {static_cast<char>(m.dtype), 0, 0, 0};
    os.write(dt_pad, 4);
    detail::put_u32(os, static_cast<std::uint32_t>(m.h));
    detail::put_u32(os, static_cast<std::uint32_t>(m.w));
    detail::put_u32(os, static_cast<std::uint32_t>(m.c));
    detail::put_payload(os, m.data, m.dtype);
    if (!os) throw IoError("write failed for '" + path + "'");
}

inline FeatureMap fmap_read(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path + "'");
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "VPFM", 4) != 0)
        throw IoError("bad magic in '" + path + "' (expected VPFM)");
    std::uint32_t version = detail::get_u32(is, "version");
    if (version != 1)
        throw IoError("unsupported FMAP version " + std::to_string(version));
    char dt_pad[4];
    if (!is.read(dt_pad, 4)) throw IoError("truncated header in '" + path + "'");
    Dtype dt = detail::decode_dtype(static_cast<unsigned char>(dt_pad[0]), path.c_str());
    std::uint32_t h = detail::get_u32(is, "h");
    std::uint32_t w = detail::get_u32(is, "w");
    std::uint32_t c = detail::get_u32(is, "c");
    if (h == 0 || w == 0 || c == 0)
        throw IoError("zero dimension in '" + path + "'");
    FeatureMap m(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c), dt);
    detail::get_payload(is, m.data, dt, m.size(), path.c_str());
    return m;
}

inline void wbank_write(const WeightBank& bank, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    os.write("VPWB", 4);
    detail::put_u32(os, 1);
    detail::put_u32(os, static_cast<std::uint32_t>(bank.entries.size()));
    for (const auto& [name, wt] : bank.entries) {
        if (name.size() > std::numeric_limits<std::uint16_t>::max())
            throw IoError("weight name too long: " + name);
        detail::put_u16(os, static_cast<std::uint16_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        char dt = static_cast<char>(wt.dtype);
        os.write(&dt, 1);
        detail::put_u32(os, static_cast<std::uint32_t>(wt.out_c));
        detail::put_u32(os, static_cast<std::uint32_t>(wt.in_c));
        detail::put_u32(os, static_cast<std::uint32_t>(wt.kh));
        detail::put_u32(os, static_cast<std::uint32_t>(wt.kw));
        detail::put_payload(os, wt.weights, wt.dtype);
        detail::put_payload(os, wt.bias, wt.dtype);
    }
    if (!os) throw IoError("write failed for '" + path + "'");
}

inline WeightBank wbank_read(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path + "'");
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "VPWB", 4) != 0)
        throw IoError("bad magic in '" + path + "' (expected VPWB)");
    std::uint32_t version = detail::get_u32(is, "version");
    if (version != 1)
        throw IoError("unsupported VPWB version " + std::to_string(version));
    std::uint32_t count = detail::get_u32(is, "entry count");
    WeightBank bank;
    for (std::uint32_t e = 0; e < count; ++e) {
        std::uint16_t name_len = detail::get_u16(is, "name length");
        std::string name(name_len, '\0');
        if (!is.read(name.data(), name_len)) throw IoError("truncated name in '" + path + "'");
        char dt_c;
        if (!is.read(&dt_c, 1)) throw IoError("truncated entry in '" + path + "'");
        Dtype dt = detail::decode_dtype(static_cast<unsigned char>(dt_c), path.c_str());
        std::uint32_t oc = detail::get_u32(is, "out_c");
        std::uint32_t ic = detail::get_u32(is, "in_c");
        std::uint32_t kh = detail::get_u32(is, "kh");
        std::uint32_t kw = detail::get_u32(is, "kw");
        if (oc == 0 || ic == 0 || kh == 0 || kw == 0)
            throw IoError("zero dimension in weight '" + name + "'");
        WeightTensor wt(static_cast<int>(oc), static_cast<int>(ic),
                        static_cast<int>(kh), static_cast<int>(kw), dt);
        detail::get_payload(is, wt.weights, dt, wt.weights.size(), path.c_str());
        detail::get_payload(is, wt.bias, dt, wt.bias.size(), path.c_str());
        bank.put(name, std::move(wt));
    }
    return bank;
}

}  // namespace vortex
