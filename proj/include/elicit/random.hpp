#pragma once

// Seedable random source. The generator algorithm is fixed (mt19937_64) and
// recorded in experiment outputs; categorical sampling uses an explicit
// inverse-CDF walk so draws are identical across standard library
// implementations.

#include <cstdint>
#include <random>
#include <vector>

#include "elicit/model.hpp"

namespace elicit {

class Rng {
  public:
    static constexpr const char* kAlgorithm = "mt19937_64";

    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n).
    int uniform_int(int n) {
        int v = static_cast<int>(uniform() * n);
        return v < n ? v : n - 1;
    }

    // Index sampled proportionally to the (normalized) weights.
    int categorical(const std::vector<double>& probs) {
        double u = uniform();
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(probs.size()) - 1;
    }

  private:
    std::mt19937_64 gen_;
};

}  // namespace elicit
