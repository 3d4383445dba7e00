#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace tvpqr {

/// Random stream passed explicitly to every sampler. A fixed seed yields a
/// bit-identical sequence on a given standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0x5eedULL) : engine_(seed) {}

    /// Uniform on the open interval (0, 1).
    double uniform();
    double normal() { return normal_(engine_); }
    /// Exponential with unit mean.
    double exponential() { return -std::log(uniform()); }
    /// Gamma with the given shape and unit scale.
    double gamma(double shape);

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// SplitMix64 finalizer; used to mix identifiers into independent chain seeds.
std::uint64_t mix64(std::uint64_t x);

/// Chain seed from (master seed, model id, quantile index, origin). Independent
/// of scheduling, so results do not depend on the worker count.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t model_id, std::uint64_t quantile_index,
                          std::uint64_t origin);

/// Stable 64-bit FNV-1a hash of a string (model identifiers).
std::uint64_t hash_string(std::string_view s);

}  // namespace tvpqr
