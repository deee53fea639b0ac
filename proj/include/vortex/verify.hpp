#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "gradients.hpp"
#include "modules.hpp"
#include "pooling.hpp"
#include "rng.hpp"

namespace vortex {

struct EquivalenceResult {
    int cases = 0;
    double worst_diff = 0.0;
    std::string worst_case;
    bool passed = false;
};

// Cascaded-vs-naive pyramid agreement over seeded random shapes:
// h, w in [1, max_size], c in [1, 8], values in [-1, 1), k in {3, 5},
// L in {1..3} with k^L <= 125.
inline EquivalenceResult run_pyramid_equivalence(int cases, std::uint64_t seed,
                                                 int max_size = 64,
                                                 double tol = 1e-9) {
    SplitMix64 rng(seed);
    EquivalenceResult res;
    res.cases = cases;
    for (int t = 0; t < cases; ++t) {
        const int h = 1 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(max_size));
        const int w = 1 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(max_size));
        const int c = 1 + static_cast<int>(rng.next() % 8);
        const int k = (rng.next() % 2 == 0) ? 3 : 5;
        const int max_l = k == 3 ? 3 : 2;  // k^L <= 125
        const int l = 1 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(max_l));
        FeatureMap X = rng_fill(rng.next(), h, w, c, Dtype::f64);
        Pyramid a = pyramid_naive(X, k, l);
        Pyramid b = pyramid_cascaded(X, k, l);
        for (std::size_t lv = 0; lv < a.maps.size(); ++lv)
            for (std::size_t i = 0; i < a.maps[lv].data.size(); ++i) {
                const double d = std::fabs(a.maps[lv].data[i] - b.maps[lv].data[i]);
                if (d > res.worst_diff) {
                    res.worst_diff = d;
                    res.worst_case = "h=" + std::to_string(h) + " w=" + std::to_string(w) +
                                     " c=" + std::to_string(c) + " k=" + std::to_string(k) +
                                     " L=" + std::to_string(l) +
                                     " level=" + std::to_string(lv + 1);
                }
            }
    }
    res.passed = res.worst_diff <= tol;
    return res;
}

inline WeightBank make_rng_bank(const ModuleConfig& cfg, int in_c, std::uint64_t seed) {
    WeightBank bank;
    SplitMix64 rng(seed);
    for (const BranchSpec& b : cfg.branches)
        bank.put(b.name, rng_weights(rng.next(), cfg.branch_out_c, in_c,
                                     b.conv_kernel, b.conv_kernel));
    if (cfg.include_image_level)
        bank.put("image_level", rng_weights(rng.next(), cfg.branch_out_c, in_c, 1, 1));
    return bank;
}

// module_forward(module_b, naive) vs (module_b, cascaded) over seeded random
// cases: sizes in [min_size, max_size], channels in [1, 16].
inline EquivalenceResult run_module_equivalence(int cases, std::uint64_t seed,
                                                int min_size = 8, int max_size = 64,
                                                double tol = 1e-9) {
    SplitMix64 rng(seed);
    EquivalenceResult res;
    res.cases = cases;
    const int span = max_size - min_size + 1;
    for (int t = 0; t < cases; ++t) {
        const int h = min_size + static_cast<int>(rng.next() % static_cast<std::uint64_t>(span));
        const int w = min_size + static_cast<int>(rng.next() % static_cast<std::uint64_t>(span));
        const int c = 1 + static_cast<int>(rng.next() % 16);
        ModuleConfig naive_cfg = make_module_b(PyramidImpl::naive, false, 4);
        ModuleConfig casc_cfg = make_module_b(PyramidImpl::cascaded, false, 4);
        WeightBank bank = make_rng_bank(naive_cfg, c, rng.next());
        FeatureMap X = rng_fill(rng.next(), h, w, c, Dtype::f64);
        FeatureMap a = module_forward(X, naive_cfg, bank);
        FeatureMap b = module_forward(X, casc_cfg, bank);
        for (std::size_t i = 0; i < a.data.size(); ++i) {
            const double d = std::fabs(a.data[i] - b.data[i]);
            if (d > res.worst_diff) {
                res.worst_diff = d;
                res.worst_case = "h=" + std::to_string(h) + " w=" + std::to_string(w) +
                                 " c=" + std::to_string(c);
            }
        }
    }
    res.passed = res.worst_diff <= tol;
    return res;
}

// The fixed finite-difference suite behind `vortex gradcheck`: every shipped
// backward op checked against central differences through a seeded cotangent
// contraction, plus adjoint of the upsampler.
inline std::vector<GradCheckReport> run_gradcheck_suite(double eps = 1e-5,
                                                        double tol = 1e-6) {
    std::vector<GradCheckReport> reports;

    auto check_pool = [&](const std::string& name, int h, int w, int c,
                          const PoolSpec& spec, std::uint64_t seed) {
        FeatureMap X = rng_fill(seed, h, w, c, Dtype::f64);
        FeatureMap U = rng_fill(seed + 1, h, w, c, Dtype::f64);
        FeatureMap grad = avg_pool_backward(U, spec);
        reports.push_back(finite_diff_check(
            name, [&](const FeatureMap& x) { return contract_with(avg_pool(x, spec), U); },
            X, grad, eps, tol));
    };
    check_pool("avg_pool k3 d1 valid_count", 7, 6, 2,
               {3, 1, PoolNorm::avg_valid_count}, 101);
    check_pool("avg_pool k3 d2 valid_count", 8, 8, 1,
               {3, 2, PoolNorm::avg_valid_count}, 103);
    check_pool("avg_pool k5 d1 include_pad", 7, 7, 2,
               {5, 1, PoolNorm::avg_include_pad}, 105);

    {
        FeatureMap X = rng_fill(51, 7, 7, 2, Dtype::f64);
        WeightTensor W = rng_weights(52, 2, 2, 3, 3);
        ConvSpec spec{2};
        FeatureMap U = rng_fill(53, 7, 7, 2, Dtype::f64);
        ConvGrads g = conv2d_backward(U, X, W, spec);
        reports.push_back(finite_diff_check(
            "conv2d 3x3 d2 (dX)",
            [&](const FeatureMap& x) { return contract_with(conv2d(x, W, spec), U); }, X,
            g.dX, eps, tol));

        // dW / db via a weight-space probe: pack weights+bias into a FeatureMap
        FeatureMap Wflat(1, 1, static_cast<int>(W.weights.size() + W.bias.size()),
                         Dtype::f64);
        FeatureMap Gflat = Wflat;
        for (std::size_t i = 0; i < W.weights.size(); ++i) {
            Wflat.data[i] = W.weights[i];
            Gflat.data[i] = g.dW.weights[i];
        }
        for (std::size_t i = 0; i < W.bias.size(); ++i) {
            Wflat.data[W.weights.size() + i] = W.bias[i];
            Gflat.data[W.weights.size() + i] = g.dW.bias[i];
        }
        reports.push_back(finite_diff_check(
            "conv2d 3x3 d2 (dW,db)",
            [&](const FeatureMap& wf) {
                WeightTensor Wp = W;
                for (std::size_t i = 0; i < Wp.weights.size(); ++i)
                    Wp.weights[i] = wf.data[i];
                for (std::size_t i = 0; i < Wp.bias.size(); ++i)
                    Wp.bias[i] = wf.data[Wp.weights.size() + i];
                return contract_with(conv2d(X, Wp, spec), U);
            },
            Wflat, Gflat, eps, tol));
    }

    {
        FeatureMap X = rng_fill(61, 10, 10, 3, Dtype::f64);
        for (PyramidImpl impl : {PyramidImpl::naive, PyramidImpl::cascaded}) {
            ModuleConfig cfg = make_module_b(impl, false, 2);
            WeightBank bank = make_rng_bank(cfg, X.c, 62);
            FeatureMap U = rng_fill(63, 10, 10, 8, Dtype::f64);
            ModuleGrads g = module_backward(U, X, cfg, bank);
            reports.push_back(finite_diff_check(
                std::string("module_b ") +
                    (impl == PyramidImpl::naive ? "naive" : "cascaded") + " (dX)",
                [&](const FeatureMap& x) {
                    return contract_with(module_forward(x, cfg, bank), U);
                },
                X, g.dX, eps, tol));
        }
    }

    {
        FeatureMap X = rng_fill(71, 5, 4, 2, Dtype::f64);
        FeatureMap U = rng_fill(72, 11, 9, 2, Dtype::f64);
        FeatureMap grad = bilinear_upsample_backward(U, 5, 4);
        reports.push_back(finite_diff_check(
            "bilinear_upsample 5x4 -> 11x9",
            [&](const FeatureMap& x) {
                return contract_with(bilinear_upsample(x, 11, 9), U);
            },
            X, grad, eps, tol));
    }

    return reports;
}

}  // namespace vortex
