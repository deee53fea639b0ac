#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "analysis.hpp"
#include "pooling.hpp"
#include "rng.hpp"
#include "tensor.hpp"

namespace vortex {

struct BenchResult {
    std::string impl_name;
    int h = 0, w = 0, c = 0;
    Dtype dtype = Dtype::f64;
    int reps = 0;
    int threads = 1;
    std::uint64_t median_ns = 0;
    double per_element_ns = 0.0;
    std::uint64_t add_count = 0;
    double speedup_vs_naive = 1.0;
};

// Integral-image pyramid: one summed-area table per level input, window sums
// via four corner lookups. Third timed contender only; pyramid_naive stays
// the oracle.
inline Pyramid pyramid_integral(const FeatureMap& X, int base_k, int levels,
                                std::uint64_t* adds = nullptr) {
    detail::check_pyramid_args(base_k, levels);
    const int h = X.h, w = X.w, c = X.c;
    std::uint64_t local_adds = 0;

    // sat(i,j,ch) = sum of X over rows < i, cols < j
    std::vector<double> sat(static_cast<std::size_t>(h + 1) * (w + 1) * c, 0.0);
    auto sat_at = [&](int i, int j, int ch) -> double& {
        return sat[(static_cast<std::size_t>(i) * (w + 1) + j) * c + ch];
    };
    for (int i = 1; i <= h; ++i)
        for (int j = 1; j <= w; ++j)
            for (int ch = 0; ch < c; ++ch) {
                sat_at(i, j, ch) = X.at(i - 1, j - 1, ch) + sat_at(i - 1, j, ch) +
                                   sat_at(i, j - 1, ch) - sat_at(i - 1, j - 1, ch);
                local_adds += 3;
            }

    Pyramid pyr{base_k, levels, {}};
    for (int l = 1; l <= levels; ++l) {
        const int r = (static_cast<int>(pow_checked(base_k, l)) - 1) / 2;
        FeatureMap out(h, w, c, X.dtype);
        for (int i = 0; i < h; ++i) {
            const int i0 = std::max(0, i - r), i1 = std::min(h - 1, i + r);
            for (int j = 0; j < w; ++j) {
                const int j0 = std::max(0, j - r), j1 = std::min(w - 1, j + r);
                const double inv = 1.0 / (static_cast<double>(i1 - i0 + 1) * (j1 - j0 + 1));
                for (int ch = 0; ch < c; ++ch) {
                    const double s = sat_at(i1 + 1, j1 + 1, ch) - sat_at(i0, j1 + 1, ch) -
                                     sat_at(i1 + 1, j0, ch) + sat_at(i0, j0, ch);
                    out.at(i, j, ch) = s * inv;
                    local_adds += 3;
                }
            }
        }
        out.quantize();
        pyr.maps.push_back(std::move(out));
    }
    if (adds) *adds += local_adds;
    return pyr;
}

namespace detail {

inline double max_abs_diff(const Pyramid& a, const Pyramid& b) {
    double worst = 0.0;
    for (std::size_t l = 0; l < a.maps.size(); ++l)
        for (std::size_t t = 0; t < a.maps[l].data.size(); ++t)
            worst = std::max(worst,
                             std::fabs(a.maps[l].data[t] - b.maps[l].data[t]));
    return worst;
}

template <typename F>
std::uint64_t median_time_ns(F&& run, int warmups, int reps) {
    for (int i = 0; i < warmups; ++i) run();
    std::vector<std::uint64_t> times;
    times.reserve(static_cast<std::size_t>(reps));
    for (int i = 0; i < reps; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        run();
        const auto t1 = std::chrono::steady_clock::now();
        times.push_back(static_cast<std::uint64_t>(
            std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count()));
    }
    std::sort(times.begin(), times.end());
    return times[times.size() / 2];
}

}  // namespace detail

struct BenchMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Times naive / cascaded / integral-image pyramids on identical rng input.
// Outputs are cross-checked in f64 at 1e-9 before any timing is reported;
// a mismatch aborts the benchmark.
inline std::vector<BenchResult> bench_pyramid(int k, int levels, int h, int w, int c,
                                              Dtype dtype, int reps,
                                              bool include_integral = true,
                                              int threads = 1,
                                              std::uint64_t seed = 0xBE7C4) {
    if (reps < 5) throw std::invalid_argument("bench_pyramid: reps must be >= 5");
    detail::check_pyramid_args(k, levels);

    // correctness gate, always f64
    std::uint64_t adds_naive = 0, adds_cascaded = 0, adds_integral = 0;
    {
        FeatureMap Xv = rng_fill(seed, h, w, c, Dtype::f64);
        Pyramid ref = pyramid_naive(Xv, k, levels, &adds_naive);
        Pyramid cas = pyramid_cascaded(Xv, k, levels, &adds_cascaded);
        const double diff = detail::max_abs_diff(ref, cas);
        if (diff > 1e-9)
            throw BenchMismatch("cascaded output disagrees with naive by " +
                                std::to_string(diff));
        if (include_integral) {
            Pyramid ii = pyramid_integral(Xv, k, levels, &adds_integral);
            const double diff2 = detail::max_abs_diff(ref, ii);
            if (diff2 > 1e-9)
                throw BenchMismatch("integral-image output disagrees with naive by " +
                                    std::to_string(diff2));
        }
    }

    FeatureMap X = rng_fill(seed, h, w, c, dtype);
    const double elems = static_cast<double>(h) * w * c;

    std::vector<BenchResult> results;
    auto push = [&](const std::string& name, std::uint64_t ns, std::uint64_t adds) {
        BenchResult r;
        r.impl_name = name;
        r.h = h;
        r.w = w;
        r.c = c;
        r.dtype = dtype;
        r.reps = reps;
        r.threads = threads;
        r.median_ns = ns;
        r.per_element_ns = static_cast<double>(ns) / elems;
        r.add_count = adds;
        results.push_back(r);
    };

    push("naive",
         detail::median_time_ns([&] { pyramid_naive(X, k, levels, nullptr, threads); },
                                3, reps),
         adds_naive);
    push("cascaded",
         detail::median_time_ns(
             [&] { pyramid_cascaded(X, k, levels, nullptr, threads); }, 3, reps),
         adds_cascaded);
    if (include_integral)
        push("integral",
             detail::median_time_ns([&] { pyramid_integral(X, k, levels); }, 3, reps),
             adds_integral);

    const double naive_ns = static_cast<double>(results[0].median_ns);
    for (BenchResult& r : results)
        r.speedup_vs_naive = naive_ns / std::max<double>(1.0, static_cast<double>(r.median_ns));
    return results;
}

}  // namespace vortex
