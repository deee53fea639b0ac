#pragma once

#include <cstdint>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "modules.hpp"
#include "pooling.hpp"
#include "rng.hpp"
#include "tensor.hpp"

namespace vortex {

enum class FootprintMode { unclipped, clipped };

// Dependency set of one output descriptor and the derived utilization ratio
// r = u / (h*w). unclipped counts the full offset set regardless of the map
// boundary (the convention behind the published reference ratios); clipped
// intersects with the map at a concrete pixel.
struct FootprintReport {
    std::uint64_t u = 0;
    int h = 0;
    int w = 0;
    double r = 0.0;
    FootprintMode mode = FootprintMode::clipped;
    int pixel_row = 0;
    int pixel_col = 0;
};

// Input offsets influencing one output position: per branch the Minkowski sum
// of the conv tap offsets with the pooling window offsets, unioned over
// branches. The image-level branch is excluded; it touches every descriptor
// and the reference descriptor counts leave it out.
inline std::set<std::pair<int, int>> footprint_offsets(const ModuleConfig& cfg) {
    std::set<std::pair<int, int>> offsets;
    for (const BranchSpec& b : cfg.branches) {
        const int cr = (b.conv_kernel - 1) / 2;
        const int pr = (b.pool_kernel - 1) / 2;
        for (int ca = -cr; ca <= cr; ++ca)
            for (int cb = -cr; cb <= cr; ++cb)
                for (int pa = -pr; pa <= pr; ++pa)
                    for (int pb = -pr; pb <= pr; ++pb)
                        offsets.emplace(b.conv_dilation * ca + b.pool_dilation * pa,
                                        b.conv_dilation * cb + b.pool_dilation * pb);
    }
    return offsets;
}

inline FootprintReport footprint(const ModuleConfig& cfg, int h, int w,
                                 std::pair<int, int> pixel, FootprintMode mode) {
    if (h < 1 || w < 1) throw std::invalid_argument("footprint: dims must be positive");
    FootprintReport rep;
    rep.h = h;
    rep.w = w;
    rep.mode = mode;
    rep.pixel_row = pixel.first;
    rep.pixel_col = pixel.second;
    const std::set<std::pair<int, int>> offsets = footprint_offsets(cfg);
    if (mode == FootprintMode::unclipped) {
        rep.u = offsets.size();
    } else {
        if (pixel.first < 0 || pixel.first >= h || pixel.second < 0 || pixel.second >= w)
            throw std::invalid_argument("footprint: pixel out of bounds");
        for (const auto& [di, dj] : offsets) {
            const int i = pixel.first + di, j = pixel.second + dj;
            if (i >= 0 && i < h && j >= 0 && j < w) ++rep.u;
        }
    }
    rep.r = static_cast<double>(rep.u) / (static_cast<double>(h) * w);
    return rep;
}

inline FootprintReport footprint(const ModuleConfig& cfg, int h, int w,
                                 FootprintMode mode = FootprintMode::clipped) {
    return footprint(cfg, h, w, {h / 2, w / 2}, mode);
}

// Brute-force influence oracle: run the real forward path with all-ones
// weights and zero bias on a unit impulse at `pixel` and collect the output
// positions with nonzero response. Weights and data are nonnegative, so no
// cancellation can hide a dependency. Every configured tap set is centered
// and symmetric, so this equals the Minkowski footprint (clipped) whenever
// the pooling windows centered within reach of `pixel` stay inside the map,
// which always holds at the default center pixel for the shipped configs.
inline std::set<std::pair<int, int>> footprint_oracle(const ModuleConfig& cfg, int h,
                                                      int w, std::pair<int, int> pixel) {
    if (pixel.first < 0 || pixel.first >= h || pixel.second < 0 || pixel.second >= w)
        throw std::invalid_argument("footprint_oracle: pixel out of bounds");
    ModuleConfig probe = cfg;
    probe.branch_out_c = 1;
    probe.include_image_level = false;
    WeightBank bank;
    for (const BranchSpec& b : probe.branches) {
        WeightTensor wt(1, 1, b.conv_kernel, b.conv_kernel, Dtype::f64);
        for (double& v : wt.weights) v = 1.0;
        bank.put(b.name, std::move(wt));
    }
    FeatureMap X(h, w, 1, Dtype::f64);
    X.at(pixel.first, pixel.second, 0) = 1.0;
    FeatureMap Y = detail::forward_branches(X, probe, bank);
    std::set<std::pair<int, int>> hit;
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j)
            for (int ch = 0; ch < Y.c; ++ch)
                if (Y.at(i, j, ch) != 0.0) hit.emplace(i, j);
    return hit;
}

// Arithmetic cost of a full forward pass, counted the way the reference
// loops count: one pool_add per window tap per channel (out-of-bounds taps
// included), matching the instrumented counters in the pyramid code exactly.
struct CostModel {
    std::uint64_t pool_adds = 0;
    std::uint64_t pool_divides = 0;
    std::uint64_t conv_mults = 0;
    std::uint64_t conv_adds = 0;
};

// Per-output-element pooling adds of the two pyramid algorithms, boundary
// extension ignored (the interior/asymptotic figure): k^2 + k^4 + ... vs L*k^2.
inline std::uint64_t pyramid_adds_per_element_naive(int base_k, int levels) {
    std::uint64_t total = 0;
    for (int i = 1; i <= levels; ++i) {
        const std::uint64_t k = static_cast<std::uint64_t>(pow_checked(base_k, i));
        total += k * k;
    }
    return total;
}

inline std::uint64_t pyramid_adds_per_element_cascaded(int base_k, int levels) {
    return static_cast<std::uint64_t>(levels) *
           static_cast<std::uint64_t>(base_k) * static_cast<std::uint64_t>(base_k);
}

inline CostModel op_count_pyramid(int base_k, int levels, int h, int w, int c,
                                  PyramidImpl impl) {
    CostModel m;
    const std::uint64_t hw = static_cast<std::uint64_t>(h) * static_cast<std::uint64_t>(w);
    if (impl == PyramidImpl::naive) {
        for (int i = 1; i <= levels; ++i) {
            const std::uint64_t k = static_cast<std::uint64_t>(pow_checked(base_k, i));
            m.pool_adds += hw * c * k * k;
            m.pool_divides += hw * c;
        }
    } else {
        const std::vector<int> ext = cascade_extents(base_k, levels);
        const std::uint64_t k2 =
            static_cast<std::uint64_t>(base_k) * static_cast<std::uint64_t>(base_k);
        for (int i = 1; i <= levels; ++i) {
            const std::uint64_t eh = static_cast<std::uint64_t>(h) +
                                     2u * static_cast<std::uint64_t>(ext[static_cast<std::size_t>(i)]);
            const std::uint64_t ew = static_cast<std::uint64_t>(w) +
                                     2u * static_cast<std::uint64_t>(ext[static_cast<std::size_t>(i)]);
            m.pool_adds += eh * ew * c * k2;
            m.pool_divides += hw * c;
        }
    }
    return m;
}

inline CostModel op_count(const ModuleConfig& cfg, int h, int w, int c) {
    CostModel m;
    const std::uint64_t hw = static_cast<std::uint64_t>(h) * static_cast<std::uint64_t>(w);
    if (cfg.kind == ModuleKind::module_b && cfg.pyramid_impl == PyramidImpl::cascaded) {
        CostModel pyr = op_count_pyramid(3, 3, h, w, c, PyramidImpl::cascaded);
        m.pool_adds += pyr.pool_adds;
        m.pool_divides += pyr.pool_divides;
    } else {
        for (const BranchSpec& b : cfg.branches) {
            if (b.pool_kernel == 1) continue;
            const std::uint64_t k2 = static_cast<std::uint64_t>(b.pool_kernel) *
                                     static_cast<std::uint64_t>(b.pool_kernel);
            m.pool_adds += hw * c * k2;
            m.pool_divides += hw * c;
        }
    }
    for (const BranchSpec& b : cfg.branches) {
        const std::uint64_t k2 = static_cast<std::uint64_t>(b.conv_kernel) *
                                 static_cast<std::uint64_t>(b.conv_kernel);
        const std::uint64_t per_out = k2 * static_cast<std::uint64_t>(c);
        m.conv_mults += hw * cfg.branch_out_c * per_out;
        m.conv_adds += hw * cfg.branch_out_c * (per_out + 1);  // +1 for the bias
    }
    return m;
}

}  // namespace vortex
