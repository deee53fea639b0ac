#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "conv.hpp"
#include "modules.hpp"
#include "pooling.hpp"
#include "rng.hpp"
#include "tensor.hpp"

namespace vortex {

// Adjoint of avg_pool. Same-size stride-1 pooling with a symmetric window is
// self-adjoint up to the normalization, so the backward pass is the forward
// sum pool applied to the per-position-normalized cotangent.
inline FeatureMap avg_pool_backward(const FeatureMap& dY, const PoolSpec& spec) {
    spec.validate();
    if (spec.norm == PoolNorm::sum)
        throw std::invalid_argument("avg_pool_backward: norm must be an averaging mode");
    if (spec.kernel == 1) return dY;
    FeatureMap scaled = dY;
    if (spec.norm == PoolNorm::avg_include_pad) {
        const double inv = 1.0 / (static_cast<double>(spec.kernel) * spec.kernel);
        for (double& v : scaled.data) v *= inv;
    } else {
        FeatureMap cnt = count_map(dY.h, dY.w, spec);
        for (int i = 0; i < dY.h; ++i)
            for (int j = 0; j < dY.w; ++j) {
                const double inv = 1.0 / cnt.at(i, j, 0);
                for (int ch = 0; ch < dY.c; ++ch) scaled.at(i, j, ch) *= inv;
            }
    }
    return shifted_sum_pool(scaled, dY.h, dY.w, 0, spec.kernel, spec.dilation);
}

inline FeatureMap sum_pool_backward(const FeatureMap& dY, const PoolSpec& spec) {
    spec.validate();
    return shifted_sum_pool(dY, dY.h, dY.w, 0, spec.kernel, spec.dilation);
}

struct ConvGrads {
    FeatureMap dX;
    WeightTensor dW;  // bias gradient in dW.bias
};

inline ConvGrads conv2d_backward(const FeatureMap& dY, const FeatureMap& X,
                                 const WeightTensor& W, const ConvSpec& spec) {
    spec.validate();
    if (W.in_c != X.c || dY.c != W.out_c || dY.h != X.h || dY.w != X.w)
        throw std::invalid_argument("conv2d_backward: shape mismatch");
    const int rh = (W.kh - 1) / 2, rw = (W.kw - 1) / 2, d = spec.dilation;
    ConvGrads g{FeatureMap(X.h, X.w, X.c, Dtype::f64),
                WeightTensor(W.out_c, W.in_c, W.kh, W.kw, Dtype::f64)};
    for (int i = 0; i < X.h; ++i)
        for (int j = 0; j < X.w; ++j)
            for (int o = 0; o < W.out_c; ++o) {
                const double dy = dY.at(i, j, o);
                if (dy == 0.0) continue;
                g.dW.bias[static_cast<std::size_t>(o)] += dy;
                for (int a = 0; a < W.kh; ++a) {
                    const int ii = i + d * (a - rh);
                    if (ii < 0 || ii >= X.h) continue;
                    for (int b = 0; b < W.kw; ++b) {
                        const int jj = j + d * (b - rw);
                        if (jj < 0 || jj >= X.w) continue;
                        for (int ci = 0; ci < X.c; ++ci) {
                            g.dX.at(ii, jj, ci) += W.wat(o, ci, a, b) * dy;
                            g.dW.wat(o, ci, a, b) += X.at(ii, jj, ci) * dy;
                        }
                    }
                }
            }
    return g;
}

// Adjoint of align-corners bilinear_upsample: scatter each output cotangent
// back to its four source taps.
inline FeatureMap bilinear_upsample_backward(const FeatureMap& dY, int in_h, int in_w) {
    FeatureMap dX(in_h, in_w, dY.c, Dtype::f64);
    for (int i = 0; i < dY.h; ++i) {
        const double si =
            dY.h == 1 ? 0.0 : static_cast<double>(i) * (in_h - 1) / (dY.h - 1);
        int i0 = static_cast<int>(std::floor(si));
        if (i0 > in_h - 1) i0 = in_h - 1;
        const int i1 = i0 + 1 > in_h - 1 ? in_h - 1 : i0 + 1;
        const double fi = si - i0;
        for (int j = 0; j < dY.w; ++j) {
            const double sj =
                dY.w == 1 ? 0.0 : static_cast<double>(j) * (in_w - 1) / (dY.w - 1);
            int j0 = static_cast<int>(std::floor(sj));
            if (j0 > in_w - 1) j0 = in_w - 1;
            const int j1 = j0 + 1 > in_w - 1 ? in_w - 1 : j0 + 1;
            const double fj = sj - j0;
            for (int ch = 0; ch < dY.c; ++ch) {
                const double dy = dY.at(i, j, ch);
                dX.at(i0, j0, ch) += dy * (1.0 - fi) * (1.0 - fj);
                dX.at(i0, j1, ch) += dy * (1.0 - fi) * fj;
                dX.at(i1, j0, ch) += dy * fi * (1.0 - fj);
                dX.at(i1, j1, ch) += dy * fi * fj;
            }
        }
    }
    return dX;
}

namespace detail {

inline FeatureMap embed_center(const FeatureMap& X, int margin) {
    FeatureMap out(X.h + 2 * margin, X.w + 2 * margin, X.c, Dtype::f64);
    for (int i = 0; i < X.h; ++i)
        for (int j = 0; j < X.w; ++j)
            for (int ch = 0; ch < X.c; ++ch)
                out.at(i + margin, j + margin, ch) = X.at(i, j, ch);
    return out;
}

}  // namespace detail

inline FeatureMap pyramid_naive_backward(const std::vector<FeatureMap>& dLevels,
                                         int base_k) {
    if (dLevels.empty())
        throw std::invalid_argument("pyramid_naive_backward: no level cotangents");
    FeatureMap dX(dLevels[0].h, dLevels[0].w, dLevels[0].c, Dtype::f64);
    for (std::size_t l = 0; l < dLevels.size(); ++l) {
        PoolSpec spec{static_cast<int>(pow_checked(base_k, static_cast<int>(l) + 1)),
                      1, PoolNorm::avg_valid_count};
        FeatureMap d = avg_pool_backward(dLevels[l], spec);
        for (std::size_t t = 0; t < dX.data.size(); ++t) dX.data[t] += d.data[t];
    }
    return dX;
}

// Adjoint of pyramid_cascaded: the level cotangents are divided by the exact
// count maps, injected into the extended domains, and pulled back down the
// cascade with the transposed (negated-shift) pooling.
inline FeatureMap pyramid_cascaded_backward(const std::vector<FeatureMap>& dLevels,
                                            int base_k) {
    if (dLevels.empty())
        throw std::invalid_argument("pyramid_cascaded_backward: no level cotangents");
    const int levels = static_cast<int>(dLevels.size());
    const int h = dLevels[0].h, w = dLevels[0].w;
    detail::check_pyramid_args(base_k, levels);
    const std::vector<int> ext = cascade_extents(base_k, levels);

    // Rebuild the count cascade (cropped per level).
    FeatureMap ones(h, w, 1, Dtype::f64);
    for (double& v : ones.data) v = 1.0;
    std::vector<FeatureMap> counts;
    {
        const int e1 = ext[1];
        FeatureMap N = shifted_sum_pool(ones, h + 2 * e1, w + 2 * e1, -e1, base_k, 1);
        counts.push_back(detail::crop_center(N, e1, h, w));
        for (int i = 2; i <= levels; ++i) {
            const int ei = ext[static_cast<std::size_t>(i)];
            const int shift = ext[static_cast<std::size_t>(i) - 1] - ei;
            const int d = static_cast<int>(pow_checked(base_k, i - 1));
            N = shifted_sum_pool(N, h + 2 * ei, w + 2 * ei, shift, base_k, d);
            counts.push_back(detail::crop_center(N, ei, h, w));
        }
    }

    auto normalized = [&](int level) {
        FeatureMap d = dLevels[static_cast<std::size_t>(level - 1)];
        const FeatureMap& cnt = counts[static_cast<std::size_t>(level - 1)];
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j) {
                const double inv = 1.0 / cnt.at(i, j, 0);
                for (int ch = 0; ch < d.c; ++ch) d.at(i, j, ch) *= inv;
            }
        return detail::embed_center(d, ext[static_cast<std::size_t>(level)]);
    };

    FeatureMap dS = normalized(levels);
    for (int i = levels; i >= 2; --i) {
        const int ei = ext[static_cast<std::size_t>(i)];
        const int eprev = ext[static_cast<std::size_t>(i) - 1];
        const int d = static_cast<int>(pow_checked(base_k, i - 1));
        dS = shifted_sum_pool(dS, h + 2 * eprev, w + 2 * eprev, -(eprev - ei), base_k, d);
        if (i - 1 >= 1) {
            FeatureMap inj = normalized(i - 1);
            for (std::size_t t = 0; t < dS.data.size(); ++t) dS.data[t] += inj.data[t];
        }
    }
    return shifted_sum_pool(dS, h, w, ext[1], base_k, 1);
}

struct BranchGrads {
    std::string name;
    WeightTensor dW;  // bias gradient in dW.bias
};

struct ModuleGrads {
    FeatureMap dX;
    std::vector<BranchGrads> branches;
};

inline ModuleGrads module_backward(const FeatureMap& dY, const FeatureMap& X,
                                   const ModuleConfig& cfg, const WeightBank& bank) {
    validate_config(cfg);
    const int n = static_cast<int>(cfg.branches.size());
    if (dY.c != cfg.branch_out_c * n || dY.h != X.h || dY.w != X.w)
        throw std::invalid_argument("module_backward: cotangent shape mismatch");

    std::vector<FeatureMap> pooled = branch_pooled_maps(X, cfg);

    ModuleGrads g{FeatureMap(X.h, X.w, X.c, Dtype::f64), {}};
    std::vector<FeatureMap> dPooled;
    dPooled.reserve(static_cast<std::size_t>(n));
    for (int bi = 0; bi < n; ++bi) {
        const BranchSpec& b = cfg.branches[static_cast<std::size_t>(bi)];
        const WeightTensor& w = detail::branch_weights(bank, b, X.c, cfg.branch_out_c);
        FeatureMap dSlice(X.h, X.w, cfg.branch_out_c, Dtype::f64);
        const int off = bi * cfg.branch_out_c;
        for (int i = 0; i < X.h; ++i)
            for (int j = 0; j < X.w; ++j)
                for (int ch = 0; ch < cfg.branch_out_c; ++ch)
                    dSlice.at(i, j, ch) = dY.at(i, j, off + ch);
        ConvGrads cg = conv2d_backward(dSlice, pooled[static_cast<std::size_t>(bi)], w,
                                       ConvSpec{b.conv_dilation});
        g.branches.push_back(BranchGrads{b.name, std::move(cg.dW)});
        dPooled.push_back(std::move(cg.dX));
    }

    if (cfg.kind == ModuleKind::module_b && cfg.pyramid_impl == PyramidImpl::cascaded) {
        // branch 0 is the unpooled identity branch; 1..3 are cascade levels
        for (std::size_t t = 0; t < g.dX.data.size(); ++t)
            g.dX.data[t] += dPooled[0].data[t];
        std::vector<FeatureMap> dLevels(dPooled.begin() + 1, dPooled.end());
        FeatureMap dCascade = pyramid_cascaded_backward(dLevels, 3);
        for (std::size_t t = 0; t < g.dX.data.size(); ++t)
            g.dX.data[t] += dCascade.data[t];
        return g;
    }

    for (int bi = 0; bi < n; ++bi) {
        const BranchSpec& b = cfg.branches[static_cast<std::size_t>(bi)];
        PoolSpec spec{b.pool_kernel, b.pool_dilation, PoolNorm::avg_valid_count};
        FeatureMap d = avg_pool_backward(dPooled[static_cast<std::size_t>(bi)], spec);
        for (std::size_t t = 0; t < g.dX.data.size(); ++t) g.dX.data[t] += d.data[t];
    }
    return g;
}

struct GradCheckReport {
    std::string op_name;
    double max_rel_err = 0.0;
    std::size_t worst_index = 0;
    bool passed = false;
};

// Central-difference check of an analytic input gradient. `op` must be
// scalar-valued (contract tensor outputs with a fixed cotangent first, see
// contract_with below). Probes a seeded sample of at most `max_probes`
// coordinates.
inline GradCheckReport finite_diff_check(
    const std::string& op_name, const std::function<double(const FeatureMap&)>& op,
    const FeatureMap& X, const FeatureMap& analytic_grad, double eps = 1e-5,
    double tol = 1e-6, int max_probes = 200, std::uint64_t probe_seed = 0xFD5EED) {
    if (eps <= 0.0) throw std::invalid_argument("finite_diff_check: eps must be > 0");
    if (analytic_grad.data.size() != X.data.size())
        throw std::invalid_argument("finite_diff_check: gradient shape mismatch");

    std::vector<std::size_t> probes;
    const std::size_t n = X.data.size();
    if (n <= static_cast<std::size_t>(max_probes)) {
        for (std::size_t t = 0; t < n; ++t) probes.push_back(t);
    } else {
        SplitMix64 rng(probe_seed);
        for (int t = 0; t < max_probes; ++t) probes.push_back(rng.next() % n);
    }

    GradCheckReport rep{op_name, 0.0, 0, false};
    FeatureMap Xp = X;
    for (std::size_t idx : probes) {
        const double orig = Xp.data[idx];
        Xp.data[idx] = orig + eps;
        const double fp = op(Xp);
        Xp.data[idx] = orig - eps;
        const double fm = op(Xp);
        Xp.data[idx] = orig;
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw std::runtime_error("finite_diff_check: non-finite op value");
        const double fd = (fp - fm) / (2.0 * eps);
        const double a = analytic_grad.data[idx];
        const double denom = std::max({std::fabs(a), std::fabs(fd), 1e-8});
        const double rel = std::fabs(a - fd) / denom;
        if (rel > rep.max_rel_err) {
            rep.max_rel_err = rel;
            rep.worst_index = idx;
        }
    }
    rep.passed = rep.max_rel_err <= tol;
    return rep;
}

// <T, U> over all elements.
inline double contract_with(const FeatureMap& t, const FeatureMap& u) {
    if (t.data.size() != u.data.size())
        throw std::invalid_argument("contract_with: size mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < t.data.size(); ++i) acc += t.data[i] * u.data[i];
    return acc;
}

}  // namespace vortex
