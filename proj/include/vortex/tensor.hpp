#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace vortex {

enum class Dtype : std::uint8_t { f32 = 0, f64 = 1 };

inline const char* dtype_name(Dtype d) { return d == Dtype::f32 ? "f32" : "f64"; }

// Dense h x w x c map, row-major with channels innermost, so the
// c-dimensional descriptor of each position is contiguous.
//
// Values are held as f64 regardless of dtype; f32 tensors store values that
// are exactly representable as float (enforced at every producer), so file
// round-trips stay bit-exact.
struct FeatureMap {
    int h = 0;
    int w = 0;
    int c = 0;
    Dtype dtype = Dtype::f64;
    std::vector<double> data;

    FeatureMap() = default;
    FeatureMap(int h_, int w_, int c_, Dtype dt = Dtype::f64)
        : h(h_), w(w_), c(c_), dtype(dt) {
        if (h <= 0 || w <= 0 || c <= 0)
            throw std::invalid_argument("FeatureMap: dimensions must be positive");
        data.assign(static_cast<std::size_t>(h) * w * c, 0.0);
    }

    std::size_t size() const { return data.size(); }

    std::size_t index(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * w + j) * c + k;
    }
    double& at(int i, int j, int k) { return data[index(i, j, k)]; }
    double at(int i, int j, int k) const { return data[index(i, j, k)]; }

    // Round to the storage dtype. Call after writing raw f64 results into a
    // map whose dtype is f32.
    void quantize() {
        if (dtype == Dtype::f32)
            for (double& v : data) v = static_cast<double>(static_cast<float>(v));
    }
};

struct WeightTensor {
    int out_c = 0;
    int in_c = 0;
    int kh = 0;
    int kw = 0;
    Dtype dtype = Dtype::f64;
    std::vector<double> weights;  // [out_c][in_c][kh][kw]
    std::vector<double> bias;     // [out_c]

    WeightTensor() = default;
    WeightTensor(int oc, int ic, int kh_, int kw_, Dtype dt = Dtype::f64)
        : out_c(oc), in_c(ic), kh(kh_), kw(kw_), dtype(dt) {
        if (oc <= 0 || ic <= 0 || kh <= 0 || kw <= 0)
            throw std::invalid_argument("WeightTensor: dimensions must be positive");
        if (kh % 2 == 0 || kw % 2 == 0)
            throw std::invalid_argument("WeightTensor: kernel dims must be odd");
        weights.assign(static_cast<std::size_t>(oc) * ic * kh * kw, 0.0);
        bias.assign(static_cast<std::size_t>(oc), 0.0);
    }

    std::size_t windex(int o, int ci, int a, int b) const {
        return ((static_cast<std::size_t>(o) * in_c + ci) * kh + a) * kw + b;
    }
    double& wat(int o, int ci, int a, int b) { return weights[windex(o, ci, a, b)]; }
    double wat(int o, int ci, int a, int b) const { return weights[windex(o, ci, a, b)]; }
};

// Named weight collection for a configured module. Insertion order is kept
// for serialization; lookup is by name.
struct WeightBank {
    std::vector<std::pair<std::string, WeightTensor>> entries;

    void put(const std::string& name, WeightTensor w) {
        for (auto& e : entries)
            if (e.first == name) { e.second = std::move(w); return; }
        entries.emplace_back(name, std::move(w));
    }

    const WeightTensor& get(const std::string& name) const {
        for (const auto& e : entries)
            if (e.first == name) return e.second;
        throw std::out_of_range("WeightBank: no entry named '" + name + "'");
    }

    bool has(const std::string& name) const {
        for (const auto& e : entries)
            if (e.first == name) return true;
        return false;
    }
};

inline FeatureMap concat_channels(const std::vector<const FeatureMap*>& maps) {
    if (maps.empty())
        throw std::invalid_argument("concat_channels: empty input list");
    const FeatureMap& first = *maps[0];
    int total_c = 0;
    for (const FeatureMap* m : maps) {
        if (m->h != first.h || m->w != first.w)
            throw std::invalid_argument("concat_channels: spatial size mismatch");
        if (m->dtype != first.dtype)
            throw std::invalid_argument("concat_channels: dtype mismatch");
        total_c += m->c;
    }
    FeatureMap out(first.h, first.w, total_c, first.dtype);
    for (int i = 0; i < first.h; ++i)
        for (int j = 0; j < first.w; ++j) {
            int off = 0;
            for (const FeatureMap* m : maps) {
                for (int k = 0; k < m->c; ++k)
                    out.at(i, j, off + k) = m->at(i, j, k);
                off += m->c;
            }
        }
    return out;
}

inline FeatureMap concat_channels(const std::vector<FeatureMap>& maps) {
    std::vector<const FeatureMap*> ptrs;
    ptrs.reserve(maps.size());
    for (const FeatureMap& m : maps) ptrs.push_back(&m);
    return concat_channels(ptrs);
}

}  // namespace vortex
