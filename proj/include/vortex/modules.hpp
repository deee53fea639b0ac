#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "conv.hpp"
#include "pooling.hpp"
#include "tensor.hpp"

namespace vortex {

struct BranchSpec {
    std::string name;
    int pool_kernel = 1;  // 1 = no pooling
    int pool_dilation = 1;
    int conv_kernel = 1;  // 1 or 3
    int conv_dilation = 1;
};

enum class ModuleKind { aspp, aspp_plus, module_a, module_b };

enum class PyramidImpl { naive, cascaded };

struct ModuleConfig {
    ModuleKind kind = ModuleKind::aspp;
    std::vector<BranchSpec> branches;
    PyramidImpl pyramid_impl = PyramidImpl::naive;  // module_b only
    bool include_image_level = false;
    int branch_out_c = 256;
};

inline const char* kind_name(ModuleKind k) {
    switch (k) {
        case ModuleKind::aspp: return "aspp";
        case ModuleKind::aspp_plus: return "aspp_plus";
        case ModuleKind::module_a: return "module_a";
        case ModuleKind::module_b: return "module_b";
    }
    return "?";
}

// Canonical branch sets. ASPP: 1x1 conv plus 3x3 convs at dilations
// (12, 24, 36). ASPP+ swaps the leading 1x1 for a 3x3. Module A pools each
// branch with a shared k x k window first. Module B (vortex pooling) pools
// with kernels (1, 3, 9, 27) and pairs each with a 3x3 conv whose dilation
// equals the pool kernel, so the branch windows tile without gaps.
inline ModuleConfig make_aspp(bool image_level = true, int branch_out_c = 256) {
    ModuleConfig cfg;
    cfg.kind = ModuleKind::aspp;
    cfg.include_image_level = image_level;
    cfg.branch_out_c = branch_out_c;
    cfg.branches = {{"conv1x1", 1, 1, 1, 1},
                    {"conv3x3_d12", 1, 1, 3, 12},
                    {"conv3x3_d24", 1, 1, 3, 24},
                    {"conv3x3_d36", 1, 1, 3, 36}};
    return cfg;
}

inline ModuleConfig make_aspp_plus(bool image_level = true, int branch_out_c = 256) {
    ModuleConfig cfg = make_aspp(image_level, branch_out_c);
    cfg.kind = ModuleKind::aspp_plus;
    cfg.branches[0] = {"conv3x3_d1", 1, 1, 3, 1};
    return cfg;
}

inline ModuleConfig make_module_a(int pool_k, bool image_level = true,
                                  int branch_out_c = 256) {
    ModuleConfig cfg = make_aspp(image_level, branch_out_c);
    cfg.kind = ModuleKind::module_a;
    for (BranchSpec& b : cfg.branches) {
        b.pool_kernel = pool_k;
        b.pool_dilation = 1;
    }
    return cfg;
}

inline ModuleConfig make_module_b(PyramidImpl impl = PyramidImpl::naive,
                                  bool image_level = true, int branch_out_c = 256) {
    ModuleConfig cfg;
    cfg.kind = ModuleKind::module_b;
    cfg.pyramid_impl = impl;
    cfg.include_image_level = image_level;
    cfg.branch_out_c = branch_out_c;
    cfg.branches = {{"pool1", 1, 1, 3, 1},
                    {"pool3", 3, 1, 3, 3},
                    {"pool9", 9, 1, 3, 9},
                    {"pool27", 27, 1, 3, 27}};
    return cfg;
}

inline void validate_config(const ModuleConfig& cfg) {
    if (cfg.branches.empty())
        throw std::invalid_argument("ModuleConfig: no branches");
    if (cfg.branch_out_c < 1)
        throw std::invalid_argument("ModuleConfig: branch_out_c must be positive");
    for (const BranchSpec& b : cfg.branches) {
        if (b.name.empty())
            throw std::invalid_argument("ModuleConfig: branch with empty name");
        if (b.pool_kernel < 1 || b.pool_kernel % 2 == 0)
            throw std::invalid_argument("branch " + b.name + ": pool_kernel must be odd");
        if (b.pool_dilation < 1 || b.conv_dilation < 1)
            throw std::invalid_argument("branch " + b.name + ": dilations must be >= 1");
        if (b.conv_kernel != 1 && b.conv_kernel != 3)
            throw std::invalid_argument("branch " + b.name + ": conv_kernel must be 1 or 3");
    }
    if (cfg.kind == ModuleKind::module_b) {
        if (cfg.branches.size() != 4)
            throw std::invalid_argument("module_b needs exactly 4 branches");
        const int want_k[4] = {1, 3, 9, 27};
        for (int i = 0; i < 4; ++i)
            if (cfg.branches[static_cast<std::size_t>(i)].pool_kernel != want_k[i])
                throw std::invalid_argument(
                    "module_b branch pool kernels must be (1, 3, 9, 27) in order");
        return;
    }

    // aspp / aspp_plus / module_a: the four-branch atrous set, order-free.
    if (cfg.branches.size() != 4)
        throw std::invalid_argument(std::string(kind_name(cfg.kind)) +
                                    " needs exactly 4 branches");
    auto has_conv = [&](int ck, int cd) {
        for (const BranchSpec& b : cfg.branches)
            if (b.conv_kernel == ck && b.conv_dilation == cd) return true;
        return false;
    };
    const int first_conv_k = cfg.kind == ModuleKind::aspp_plus ? 3 : 1;
    if (!has_conv(first_conv_k, 1) || !has_conv(3, 12) || !has_conv(3, 24) ||
        !has_conv(3, 36))
        throw std::invalid_argument(std::string(kind_name(cfg.kind)) +
                                    ": branch convs must be the (1, 12, 24, 36) set");
    if (cfg.kind == ModuleKind::module_a) {
        const int k = cfg.branches[0].pool_kernel;
        if (k < 3)
            throw std::invalid_argument("module_a: pool_kernel must be >= 3");
        for (const BranchSpec& b : cfg.branches)
            if (b.pool_kernel != k || b.pool_dilation != 1)
                throw std::invalid_argument(
                    "module_a: all branches share one k x k dense pooling");
    } else {
        for (const BranchSpec& b : cfg.branches)
            if (b.pool_kernel != 1)
                throw std::invalid_argument(std::string(kind_name(cfg.kind)) +
                                            ": branches must not pool");
    }
}

namespace detail {

inline const WeightTensor& branch_weights(const WeightBank& bank,
                                          const BranchSpec& b, int in_c, int out_c) {
    if (!bank.has(b.name))
        throw std::invalid_argument("missing weights for branch '" + b.name + "'");
    const WeightTensor& w = bank.get(b.name);
    if (w.in_c != in_c)
        throw std::invalid_argument("branch '" + b.name + "': weight in_c mismatch");
    if (w.out_c != out_c)
        throw std::invalid_argument("branch '" + b.name + "': weight out_c mismatch");
    if (w.kh != b.conv_kernel || w.kw != b.conv_kernel)
        throw std::invalid_argument("branch '" + b.name + "': kernel size mismatch");
    return w;
}

}  // namespace detail

// Per-branch pooled map, before the branch convolution. With the cascaded
// impl the module_b maps for kernels (3, 9, 27) come from one shared pooling
// cascade instead of three independent big windows.
inline std::vector<FeatureMap> branch_pooled_maps(const FeatureMap& X,
                                                  const ModuleConfig& cfg) {
    std::vector<FeatureMap> pooled;
    pooled.reserve(cfg.branches.size());
    if (cfg.kind == ModuleKind::module_b && cfg.pyramid_impl == PyramidImpl::cascaded) {
        Pyramid pyr = pyramid_cascaded(X, 3, 3);
        pooled.push_back(X);
        for (FeatureMap& m : pyr.maps) pooled.push_back(std::move(m));
        return pooled;
    }
    for (const BranchSpec& b : cfg.branches) {
        PoolSpec spec{b.pool_kernel, b.pool_dilation, PoolNorm::avg_valid_count};
        pooled.push_back(avg_pool(X, spec));
    }
    return pooled;
}

namespace detail {

// Shared forward core; callers are responsible for config validation.
inline FeatureMap forward_branches(const FeatureMap& X, const ModuleConfig& cfg,
                                   const WeightBank& bank) {
    std::vector<FeatureMap> pooled = branch_pooled_maps(X, cfg);
    std::vector<FeatureMap> outputs;
    outputs.reserve(cfg.branches.size());
    for (std::size_t bi = 0; bi < cfg.branches.size(); ++bi) {
        const BranchSpec& b = cfg.branches[bi];
        const WeightTensor& w = branch_weights(bank, b, X.c, cfg.branch_out_c);
        outputs.push_back(conv2d(pooled[bi], w, ConvSpec{b.conv_dilation}));
    }
    return concat_channels(outputs);
}

}  // namespace detail

inline FeatureMap module_forward(const FeatureMap& X, const ModuleConfig& cfg,
                                 const WeightBank& bank) {
    validate_config(cfg);
    return detail::forward_branches(X, cfg, bank);
}

// Y_g: global average pool -> 1x1 conv -> broadcast back to h x w.
inline FeatureMap image_level_feature(const FeatureMap& X, const WeightTensor& W,
                                      int h, int w) {
    if (W.kh != 1 || W.kw != 1)
        throw std::invalid_argument("image_level_feature: weights must be 1x1");
    if (W.in_c != X.c)
        throw std::invalid_argument("image_level_feature: channel mismatch");
    const std::vector<double> v = global_avg_pool(X);
    std::vector<double> y(static_cast<std::size_t>(W.out_c), 0.0);
    for (int o = 0; o < W.out_c; ++o) {
        double acc = W.bias[static_cast<std::size_t>(o)];
        for (int ci = 0; ci < W.in_c; ++ci)
            acc += W.wat(o, ci, 0, 0) * v[static_cast<std::size_t>(ci)];
        y[static_cast<std::size_t>(o)] = acc;
    }
    return broadcast_spatial(y, h, w, X.dtype);
}

struct HeadConfig {
    WeightTensor proj;  // 1x1, in_c = total concatenated channels
    int out_h = 0;
    int out_w = 0;

    void validate() const {
        if (proj.kh != 1 || proj.kw != 1)
            throw std::invalid_argument("HeadConfig: proj must be a 1x1 conv");
        if (out_h < 1 || out_w < 1)
            throw std::invalid_argument("HeadConfig: output dims must be positive");
    }
};

inline FeatureMap seg_head(const FeatureMap& Y, const FeatureMap& Yg,
                           const HeadConfig& head) {
    head.validate();
    if (Y.h != Yg.h || Y.w != Yg.w)
        throw std::invalid_argument("seg_head: Y and Yg spatial sizes differ");
    if (head.proj.in_c != Y.c + Yg.c)
        throw std::invalid_argument("seg_head: proj in_c != concatenated channels");
    FeatureMap cat = concat_channels(std::vector<const FeatureMap*>{&Y, &Yg});
    FeatureMap logits = conv2d(cat, head.proj, ConvSpec{1});
    return bilinear_upsample(logits, head.out_h, head.out_w);
}

// seg_head without an image-level branch.
inline FeatureMap seg_head(const FeatureMap& Y, const HeadConfig& head) {
    head.validate();
    if (head.proj.in_c != Y.c)
        throw std::invalid_argument("seg_head: proj in_c != input channels");
    FeatureMap logits = conv2d(Y, head.proj, ConvSpec{1});
    return bilinear_upsample(logits, head.out_h, head.out_w);
}

// Per-position argmax over channels; ties go to the lowest channel index.
inline std::vector<int> argmax_labels(const FeatureMap& logits) {
    std::vector<int> labels(static_cast<std::size_t>(logits.h) * logits.w, 0);
    for (int i = 0; i < logits.h; ++i)
        for (int j = 0; j < logits.w; ++j) {
            int best = 0;
            double best_v = logits.at(i, j, 0);
            for (int ch = 1; ch < logits.c; ++ch)
                if (logits.at(i, j, ch) > best_v) {
                    best_v = logits.at(i, j, ch);
                    best = ch;
                }
            labels[static_cast<std::size_t>(i) * logits.w + j] = best;
        }
    return labels;
}

}  // namespace vortex
