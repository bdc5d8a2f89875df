#ifndef XLATE_RANDOM_HPP
#define XLATE_RANDOM_HPP

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace xlate {

/// Seeded random source. Every stochastic routine takes one by reference;
/// independent consumers get independent named streams split off a single
/// run seed, so reordering work between streams never changes a stream's
/// draws.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Stream derived from (seed, name) by hashing the name into the seed.
    static Rng stream(std::uint64_t seed, std::string_view name);

    /// Child seed for a named sub-run (e.g. one chain of several).
    static std::uint64_t derive_seed(std::uint64_t seed, std::string_view name);

    double uniform();
    double normal();
    double normal(double mean, double sd) { return mean + sd * normal(); }
    /// Gamma with shape/rate parameterization.
    double gamma(double shape, double rate);
    double inverse_gamma(double shape, double rate) { return 1.0 / gamma(shape, rate); }
    double beta(double a, double b);
    bool bernoulli(double p) { return uniform() < p; }
    /// Uniform integer in [0, n).
    int uniform_int(int n);
    /// Index drawn proportionally to exp(log_weights[i]).
    int categorical_log(std::span<const double> log_weights);

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace xlate

#endif // XLATE_RANDOM_HPP
