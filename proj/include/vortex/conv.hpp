#pragma once

#include <cmath>
#include <stdexcept>

#include "tensor.hpp"

namespace vortex {

struct ConvSpec {
    int dilation = 1;  // padding is always "same"

    void validate() const {
        if (dilation < 1)
            throw std::invalid_argument("ConvSpec: dilation must be >= 1");
    }
};

// Same-padded dilated 2D convolution (cross-correlation tap order), zero fill
// outside the map, f64 accumulation.
inline FeatureMap conv2d(const FeatureMap& X, const WeightTensor& W,
                         const ConvSpec& spec) {
    spec.validate();
    if (W.in_c != X.c)
        throw std::invalid_argument("conv2d: weight in_c does not match input channels");
    const int rh = (W.kh - 1) / 2, rw = (W.kw - 1) / 2, d = spec.dilation;
    FeatureMap out(X.h, X.w, W.out_c, X.dtype);
    for (int i = 0; i < X.h; ++i)
        for (int j = 0; j < X.w; ++j)
            for (int o = 0; o < W.out_c; ++o) {
                double acc = W.bias[static_cast<std::size_t>(o)];
                for (int a = 0; a < W.kh; ++a) {
                    const int ii = i + d * (a - rh);
                    if (ii < 0 || ii >= X.h) continue;
                    for (int b = 0; b < W.kw; ++b) {
                        const int jj = j + d * (b - rw);
                        if (jj < 0 || jj >= X.w) continue;
                        for (int ci = 0; ci < X.c; ++ci)
                            acc += W.wat(o, ci, a, b) * X.at(ii, jj, ci);
                    }
                }
                out.at(i, j, o) = acc;
            }
    out.quantize();
    return out;
}

// Align-corners bilinear resize. Output row i samples source row
// i*(h-1)/(out_h-1) (0 when out_h == 1); identity when sizes match.
inline FeatureMap bilinear_upsample(const FeatureMap& X, int out_h, int out_w) {
    if (out_h < 1 || out_w < 1)
        throw std::invalid_argument("bilinear_upsample: output dims must be positive");
    FeatureMap out(out_h, out_w, X.c, X.dtype);
    for (int i = 0; i < out_h; ++i) {
        const double si = out_h == 1 ? 0.0
                                     : static_cast<double>(i) * (X.h - 1) / (out_h - 1);
        int i0 = static_cast<int>(std::floor(si));
        if (i0 > X.h - 1) i0 = X.h - 1;
        const int i1 = i0 + 1 > X.h - 1 ? X.h - 1 : i0 + 1;
        const double fi = si - i0;
        for (int j = 0; j < out_w; ++j) {
            const double sj =
                out_w == 1 ? 0.0 : static_cast<double>(j) * (X.w - 1) / (out_w - 1);
            int j0 = static_cast<int>(std::floor(sj));
            if (j0 > X.w - 1) j0 = X.w - 1;
            const int j1 = j0 + 1 > X.w - 1 ? X.w - 1 : j0 + 1;
            const double fj = sj - j0;
            for (int ch = 0; ch < X.c; ++ch)
                out.at(i, j, ch) = X.at(i0, j0, ch) * (1.0 - fi) * (1.0 - fj) +
                                   X.at(i0, j1, ch) * (1.0 - fi) * fj +
                                   X.at(i1, j0, ch) * fi * (1.0 - fj) +
                                   X.at(i1, j1, ch) * fi * fj;
        }
    }
    out.quantize();
    return out;
}

inline FeatureMap broadcast_spatial(const std::vector<double>& v, int h, int w,
                                    Dtype dtype = Dtype::f64) {
    FeatureMap out(h, w, static_cast<int>(v.size()), dtype);
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j)
            for (int ch = 0; ch < out.c; ++ch)
                out.at(i, j, ch) = v[static_cast<std::size_t>(ch)];
    out.quantize();
    return out;
}

}  // namespace vortex
