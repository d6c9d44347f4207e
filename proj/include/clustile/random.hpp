/*
 Copyright 2026 The Clustile Authors
 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#pragma once

#include <cstdint>
#include <random>

namespace clustile {

/// Portable random source. The engine is std::mt19937_64, whose output sequence
/// the standard fixes; every distribution below is computed here rather than
/// through <random>'s distributions, whose algorithms vary between libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [lo, hi], by rejection.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
    /// Standard normal by the Box-Muller transform (one value per call).
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }
    double log_normal(double median, double sigma);
    /// Kumaraswamy(a, b) by its closed-form inverse CDF.
    double kumaraswamy(double a, double b);
    /// Knuth's product method; intended for small means.
    int poisson(double mean);

private:
    std::mt19937_64 engine_;
};

/// SplitMix64 finalizer (Steele, Lea, Flood 2014):
///   z = (x + 0x9E3779B97F4A7C15); z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB; return z ^ (z >> 31).
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Folds values into a seed: h = mix64(h ^ mix64(v)) for each v.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> values) noexcept;

}  // namespace clustile
