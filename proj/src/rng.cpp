#include "tvpqr/rng.hpp"

#include <cmath>

namespace tvpqr {

double Rng::uniform() {
    // 53 random bits, shifted off zero.
    for (;;) {
        const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        if (u > 0.0) return u;
    }
}

double Rng::gamma(double shape) {
    std::gamma_distribution<double> g(shape, 1.0);
    return g(engine_);
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t model_id, std::uint64_t quantile_index,
                          std::uint64_t origin) {
    std::uint64_t h = mix64(master);
    h = mix64(h ^ model_id);
    h = mix64(h ^ (quantile_index + 0x51ULL));
    h = mix64(h ^ (origin + 0x0A11ULL));
    return h;
}

std::uint64_t hash_string(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace tvpqr
