#pragma once

#include <cstdint>

#include "tensor.hpp"

namespace vortex {

// splitmix64, after Sebastiano Vigna's public domain reference. Chosen for
// cross-language reproducibility of test inputs.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // top 53 bits -> uniform [0,1) -> [-1,1)
    double next_unit() {
        return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0) * 2.0 - 1.0;
    }

private:
    std::uint64_t state_;
};

inline FeatureMap rng_fill(std::uint64_t seed, int h, int w, int c,
                           Dtype dtype = Dtype::f64) {
    FeatureMap out(h, w, c, dtype);
    SplitMix64 rng(seed);
    for (double& v : out.data) v = rng.next_unit();
    out.quantize();
    return out;
}

// Weights then biases drawn from the same stream, in storage order.
inline WeightTensor rng_weights(std::uint64_t seed, int out_c, int in_c, int kh,
                                int kw, Dtype dtype = Dtype::f64) {
    WeightTensor w(out_c, in_c, kh, kw, dtype);
    SplitMix64 rng(seed);
    for (double& v : w.weights) v = rng.next_unit();
    for (double& v : w.bias) v = rng.next_unit();
    if (dtype == Dtype::f32) {
        for (double& v : w.weights) v = static_cast<double>(static_cast<float>(v));
        for (double& v : w.bias) v = static_cast<double>(static_cast<float>(v));
    }
    return w;
}

}  // namespace vortex
