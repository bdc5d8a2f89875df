#include "xlate/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace xlate {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace

std::uint64_t Rng::derive_seed(std::uint64_t seed, std::string_view name) {
    return splitmix64(splitmix64(seed) ^ fnv1a(name));
}

Rng Rng::stream(std::uint64_t seed, std::string_view name) {
    return Rng(derive_seed(seed, name));
}

double Rng::uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
}

double Rng::normal() {
    return normal_(engine_);
}

double Rng::gamma(double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0)) {
        throw std::invalid_argument("gamma: shape and rate must be positive");
    }
    return std::gamma_distribution<double>(shape, 1.0 / rate)(engine_);
}

double Rng::beta(double a, double b) {
    const double x = gamma(a, 1.0);
    const double y = gamma(b, 1.0);
    return x / (x + y);
}

int Rng::uniform_int(int n) {
    if (n <= 0) {
        throw std::invalid_argument("uniform_int: empty range");
    }
    return std::uniform_int_distribution<int>(0, n - 1)(engine_);
}

int Rng::categorical_log(std::span<const double> log_weights) {
    if (log_weights.empty()) {
        throw std::invalid_argument("categorical_log: no categories");
    }
    const double top = *std::max_element(log_weights.begin(), log_weights.end());
    if (!std::isfinite(top)) {
        throw std::runtime_error("categorical_log: no finite weight");
    }
    double total = 0.0;
    for (double w : log_weights) total += std::exp(w - top);
    double u = uniform() * total;
    for (std::size_t i = 0; i < log_weights.size(); ++i) {
        u -= std::exp(log_weights[i] - top);
        if (u <= 0.0) return static_cast<int>(i);
    }
    // Round-off: fall back to the last category with nonzero weight.
    for (std::size_t i = log_weights.size(); i-- > 0;) {
        if (std::isfinite(log_weights[i])) return static_cast<int>(i);
    }
    return static_cast<int>(log_weights.size()) - 1;
}

} // namespace xlate
