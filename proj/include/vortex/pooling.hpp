#pragma once

#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

#include "tensor.hpp"

namespace vortex {

enum class PoolNorm { sum, avg_valid_count, avg_include_pad };

struct PoolSpec {
    int kernel = 1;
    int dilation = 1;
    PoolNorm norm = PoolNorm::avg_valid_count;

    void validate() const {
        if (kernel <= 0 || kernel % 2 == 0)
            throw std::invalid_argument("PoolSpec: kernel must be odd positive");
        if (dilation < 1)
            throw std::invalid_argument("PoolSpec: dilation must be >= 1");
    }
};

inline std::int64_t pow_checked(int base, int exp) {
    std::int64_t v = 1;
    for (int i = 0; i < exp; ++i) {
        v *= base;
        if (v > 100000)
            throw std::overflow_error("effective pooling kernel overflows sane bounds");
    }
    return v;
}

namespace detail {

inline std::uint64_t sum_pool_rows(const FeatureMap& X, FeatureMap& out, int shift,
                                   int k, int d, int row0, int row1) {
    const int r = (k - 1) / 2;
    const int c = X.c;
    const int out_w = out.w;
    std::uint64_t local_adds = 0;
    for (int i = row0; i < row1; ++i) {
        for (int j = 0; j < out_w; ++j) {
            double* acc = &out.data[(static_cast<std::size_t>(i) * out_w + j) * c];
            for (int a = 0; a < k; ++a) {
                const int ii = i + shift + d * (a - r);
                if (ii < 0 || ii >= X.h) {
                    local_adds += static_cast<std::uint64_t>(k) * c;
                    continue;
                }
                for (int b = 0; b < k; ++b) {
                    local_adds += c;
                    const int jj = j + shift + d * (b - r);
                    if (jj < 0 || jj >= X.w) continue;
                    const double* src =
                        &X.data[(static_cast<std::size_t>(ii) * X.w + jj) * c];
                    for (int ch = 0; ch < c; ++ch) acc[ch] += src[ch];
                }
            }
        }
    }
    return local_adds;
}

}  // namespace detail

// Stride-1 window sum with zero padding, on a translated output grid:
//   out(i,j,ch) = sum over taps (a,b) in [0,k)^2 of
//                 X(i + shift + d*(a-(k-1)/2), j + shift + d*(b-(k-1)/2), ch)
// with out-of-bounds reads as 0. shift=0 and out dims = in dims gives plain
// same-size pooling; nonzero shift maps between the zero-padded domains the
// cascaded pyramid runs on. In-window summation order is fixed row-major, and
// output rows are independent, so `threads` > 1 cannot change any result.
//
// `adds`, when given, accumulates one count per window tap per channel
// (k*k*c per output position, out-of-bounds taps included).
inline FeatureMap shifted_sum_pool(const FeatureMap& X, int out_h, int out_w,
                                   int shift, int k, int d,
                                   std::uint64_t* adds = nullptr, int threads = 1) {
    FeatureMap out(out_h, out_w, X.c, X.dtype);
    std::uint64_t local_adds = 0;
    if (threads <= 1 || out_h < 2 * threads) {
        local_adds = detail::sum_pool_rows(X, out, shift, k, d, 0, out_h);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::uint64_t> counts(static_cast<std::size_t>(threads), 0);
        for (int t = 0; t < threads; ++t) {
            const int row0 = static_cast<int>(static_cast<std::int64_t>(out_h) * t / threads);
            const int row1 =
                static_cast<int>(static_cast<std::int64_t>(out_h) * (t + 1) / threads);
            pool.emplace_back([&, t, row0, row1] {
                counts[static_cast<std::size_t>(t)] =
                    detail::sum_pool_rows(X, out, shift, k, d, row0, row1);
            });
        }
        for (std::thread& th : pool) th.join();
        for (std::uint64_t v : counts) local_adds += v;
    }
    if (adds) *adds += local_adds;
    out.quantize();
    return out;
}

inline FeatureMap sum_pool(const FeatureMap& X, const PoolSpec& spec,
                           std::uint64_t* adds = nullptr) {
    spec.validate();
    return shifted_sum_pool(X, X.h, X.w, 0, spec.kernel, spec.dilation, adds);
}

// Number of in-bounds taps of the window centered at each position (f64, c=1).
inline FeatureMap count_map(int h, int w, const PoolSpec& spec) {
    spec.validate();
    const int k = spec.kernel, d = spec.dilation, r = (k - 1) / 2;
    FeatureMap out(h, w, 1, Dtype::f64);
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
            int cnt = 0;
            for (int a = 0; a < k; ++a) {
                const int ii = i + d * (a - r);
                if (ii < 0 || ii >= h) continue;
                for (int b = 0; b < k; ++b) {
                    const int jj = j + d * (b - r);
                    if (jj >= 0 && jj < w) ++cnt;
                }
            }
            out.at(i, j, 0) = static_cast<double>(cnt);
        }
    return out;
}

inline FeatureMap avg_pool(const FeatureMap& X, const PoolSpec& spec,
                           std::uint64_t* adds = nullptr, int threads = 1) {
    spec.validate();
    if (spec.norm == PoolNorm::sum)
        throw std::invalid_argument("avg_pool: norm must be an averaging mode");
    if (spec.kernel == 1) return X;
    FeatureMap out =
        shifted_sum_pool(X, X.h, X.w, 0, spec.kernel, spec.dilation, adds, threads);
    if (spec.norm == PoolNorm::avg_include_pad) {
        const double inv = 1.0 / (static_cast<double>(spec.kernel) * spec.kernel);
        for (double& v : out.data) v *= inv;
    } else {
        // true division (not reciprocal multiply) so constant inputs come back
        // bit-exact: (n*v)/n == v whenever n*v is exact
        FeatureMap cnt = count_map(X.h, X.w, spec);
        for (int i = 0; i < X.h; ++i)
            for (int j = 0; j < X.w; ++j) {
                const double n = cnt.at(i, j, 0);
                double* p = &out.data[(static_cast<std::size_t>(i) * X.w + j) * X.c];
                for (int ch = 0; ch < X.c; ++ch) p[ch] /= n;
            }
    }
    out.quantize();
    return out;
}

struct Pyramid {
    int base_k = 3;
    int levels = 0;
    std::vector<FeatureMap> maps;  // level i (1-based) ~ effective kernel base_k^i
};

// Per-level zero-padding margins the cascaded pyramid runs on: level i is
// computed on a domain extended by (base_k^L - base_k^i)/2 on each side, so
// that every dilated window it feeds upward from is fully materialized.
inline std::vector<int> cascade_extents(int base_k, int levels) {
    const std::int64_t k_top = pow_checked(base_k, levels);
    std::vector<int> e(static_cast<std::size_t>(levels) + 1, 0);
    for (int i = 1; i <= levels; ++i)
        e[static_cast<std::size_t>(i)] =
            static_cast<int>((k_top - pow_checked(base_k, i)) / 2);
    return e;
}

namespace detail {

inline void check_pyramid_args(int base_k, int levels) {
    if (base_k < 3 || base_k % 2 == 0)
        throw std::invalid_argument("pyramid: base_k must be odd and >= 3");
    if (levels < 1) throw std::invalid_argument("pyramid: levels must be >= 1");
    pow_checked(base_k, levels);
}

inline FeatureMap crop_center(const FeatureMap& X, int margin, int h, int w) {
    FeatureMap out(h, w, X.c, X.dtype);
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j)
            for (int ch = 0; ch < X.c; ++ch)
                out.at(i, j, ch) = X.at(i + margin, j + margin, ch);
    return out;
}

inline FeatureMap divide_by_counts(const FeatureMap& S, const FeatureMap& N,
                                   Dtype dtype) {
    FeatureMap out(S.h, S.w, S.c, dtype);
    for (int i = 0; i < S.h; ++i)
        for (int j = 0; j < S.w; ++j) {
            const double n = N.at(i, j, 0);
            for (int ch = 0; ch < S.c; ++ch) out.at(i, j, ch) = S.at(i, j, ch) / n;
        }
    out.quantize();
    return out;
}

}  // namespace detail

// Direct big-window evaluation: level i = valid-count average over the full
// base_k^i x base_k^i window. This is the trust anchor the cascade is checked
// against; it stays a plain triple loop on purpose.
inline Pyramid pyramid_naive(const FeatureMap& X, int base_k, int levels,
                             std::uint64_t* adds = nullptr, int threads = 1) {
    detail::check_pyramid_args(base_k, levels);
    Pyramid pyr{base_k, levels, {}};
    for (int i = 1; i <= levels; ++i) {
        PoolSpec spec{static_cast<int>(pow_checked(base_k, i)), 1,
                      PoolNorm::avg_valid_count};
        pyr.maps.push_back(avg_pool(X, spec, adds, threads));
    }
    return pyr;
}

// Cascaded evaluation: a running sum tensor and a running count tensor are
// pooled with a small base_k x base_k window, dilation base_k^(i-1), on a
// zero-padded extended domain. Level i output is the center crop of S_i/N_i.
// The count tensor carries the exact border coefficients, so this equals
// pyramid_naive up to rounding everywhere, borders and corners included.
inline Pyramid pyramid_cascaded(const FeatureMap& X, int base_k, int levels,
                                std::uint64_t* adds = nullptr, int threads = 1) {
    detail::check_pyramid_args(base_k, levels);
    const std::vector<int> ext = cascade_extents(base_k, levels);
    const int h = X.h, w = X.w;

    FeatureMap ones(h, w, 1, Dtype::f64);
    for (double& v : ones.data) v = 1.0;

    Pyramid pyr{base_k, levels, {}};
    const int e1 = ext[1];
    FeatureMap S =
        shifted_sum_pool(X, h + 2 * e1, w + 2 * e1, -e1, base_k, 1, adds, threads);
    FeatureMap N = shifted_sum_pool(ones, h + 2 * e1, w + 2 * e1, -e1, base_k, 1);
    pyr.maps.push_back(detail::divide_by_counts(detail::crop_center(S, e1, h, w),
                                                detail::crop_center(N, e1, h, w),
                                                X.dtype));
    for (int i = 2; i <= levels; ++i) {
        const int ei = ext[static_cast<std::size_t>(i)];
        const int shift = ext[static_cast<std::size_t>(i) - 1] - ei;
        const int d = static_cast<int>(pow_checked(base_k, i - 1));
        S = shifted_sum_pool(S, h + 2 * ei, w + 2 * ei, shift, base_k, d, adds, threads);
        N = shifted_sum_pool(N, h + 2 * ei, w + 2 * ei, shift, base_k, d);
        pyr.maps.push_back(detail::divide_by_counts(detail::crop_center(S, ei, h, w),
                                                    detail::crop_center(N, ei, h, w),
                                                    X.dtype));
    }
    return pyr;
}

inline std::vector<double> global_avg_pool(const FeatureMap& X) {
    std::vector<double> out(static_cast<std::size_t>(X.c), 0.0);
    for (int i = 0; i < X.h; ++i)
        for (int j = 0; j < X.w; ++j)
            for (int ch = 0; ch < X.c; ++ch)
                out[static_cast<std::size_t>(ch)] += X.at(i, j, ch);
    const double inv = 1.0 / (static_cast<double>(X.h) * X.w);
    for (double& v : out) v *= inv;
    return out;
}

}  // namespace vortex
