/**
 * Copyright 2026, the mangrove-toolkit authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef MANGROVE_RNG_HPP
#define MANGROVE_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace mangrove {

// Deterministic RNG wrapper. std::mt19937_64 has a standardized sequence,
// but the std distributions do not, so bounded ints, uniforms and normals
// are generated here with fixed algorithms. Identical seeds give identical
// streams on every platform and standard library.
class Rng {
public:
    explicit Rng(uint64_t seed) : seed_(seed), gen_(seed_mix(seed)) {}

    uint64_t seed() const { return seed_; }

    uint64_t next_u64() { return gen_(); }

    /// Uniform in [0, 1) with 53 bits of precision.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). Multiplicative range reduction; n must be > 0.
    uint64_t uniform_int(uint64_t n) {
        return static_cast<uint64_t>((static_cast<__uint128_t>(gen_()) * n) >> 64);
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via Box-Muller (one value per call, no caching).
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Fisher-Yates shuffle with this stream.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    /// Child stream keyed by (a, b). Depends only on the original seed and the
    /// key, never on how many values were drawn from this stream; this is what
    /// makes per-(epoch, sample) augmentation independent of worker layout.
    Rng derive(uint64_t a, uint64_t b = 0) const {
        return Rng(seed_mix(seed_mix(seed_ ^ a) + b));
    }

    static uint64_t seed_mix(uint64_t x) {
        // splitmix64 finalizer
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

private:
    uint64_t seed_;
    std::mt19937_64 gen_;
};

} // namespace mangrove

#endif
