#include "xlate/checks.hpp"

#include <cmath>
#include <vector>

#include "xlate/effects.hpp"
#include "xlate/hmm.hpp"
#include "xlate/matching.hpp"

namespace xlate {

HmmOracleResult hmm_oracle_check(int n_sweeps, std::uint64_t seed, PathKernel kernel) {
    constexpr int T = 4;
    constexpr int S = 3;
    ChainParams chain{S, Eigen::Vector2d(0.35, 0.6)};
    Eigen::MatrixXd means(S, 2);
    means << 0.0, 0.0, 0.8, -0.4, 1.5, 0.3;
    Eigen::MatrixXd latent(T, 2);
    latent << 0.1, -0.2, 0.9, -0.1, 0.7, -0.6, 1.6, 0.5;

    HmmOracleResult out;
    out.exact = brute_force_path_posterior(T, chain, latent, means);
    out.empirical = Eigen::MatrixXd::Zero(T, S);

    Rng rng = Rng::stream(seed, "hmm-oracle");
    StatePath path = stretched_path(T, S);
    for (int sweep = 0; sweep < n_sweeps; ++sweep) {
        if (kernel == PathKernel::ffbs) {
            path = sample_path_ffbs(chain, latent, means, rng);
        } else {
            sweep_path_single_site(path, chain, latent, means, rng);
        }
        for (int t = 0; t < T; ++t) out.empirical(t, path[static_cast<std::size_t>(t)]) += 1.0;
    }
    out.empirical /= static_cast<double>(n_sweeps);
    out.tv = 0.5 * (out.empirical - out.exact).cwiseAbs().rowwise().sum();
    return out;
}

MatchingOracleResult matching_oracle_check(int n_moves, std::uint64_t seed) {
    const EffectLayout layout{3, true};
    const EffectPriors priors;

    // Frozen latents: both clusters follow a weak common time trend.
    Rng data_rng(20240517);
    const double trend[3] = {0.0, 0.45, 0.9};
    std::vector<CellStats> x_stats(1, CellStats(layout.n_states));
    std::vector<CellStats> y_stats(1, CellStats(layout.n_states));
    for (int s = 0; s < layout.n_states; ++s) {
        for (int b = 0; b < 2; ++b) {
            for (int r = 0; r < 2; ++r) {
                x_stats[0].add(s, b, trend[s] + data_rng.normal());
                y_stats[0].add(s, b, trend[s] + data_rng.normal());
            }
        }
    }

    MatchingOracleResult out;
    out.log_ratio = pair_marginal_loglik(x_stats[0], y_stats[0], true, layout, priors) -
                    pair_marginal_loglik(x_stats[0], y_stats[0], false, layout, priors);
    // Uniform prior over the two matchings.
    out.exact = 1.0 / (1.0 + std::exp(-out.log_ratio));

    Rng rng = Rng::stream(seed, "matching-oracle");
    MatchingState matching(1, 1);
    EffectDecomposition effects = EffectDecomposition::zeros(layout.n_states, 1, 1);
    long linked = 0;
    for (int move = 0; move < n_moves; ++move) {
        matching_sweep(matching, x_stats, y_stats, layout, priors, effects, rng);
        linked += matching.n_links();
    }
    out.empirical = static_cast<double>(linked) / static_cast<double>(n_moves);
    return out;
}

} // namespace xlate
