#ifndef XLATE_MATCHING_HPP
#define XLATE_MATCHING_HPP

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "xlate/effects.hpp"
#include "xlate/matching_state.hpp"
#include "xlate/random.hpp"

namespace xlate {

/// log marginal likelihood of the latent values of X cluster and Y cluster
/// with every effect touching them integrated out. Linked: shared plus both
/// specific sets; unlinked: the two specific sets independently.
double pair_marginal_loglik(const CellStats& x_stats, const CellStats& y_stats, bool linked,
                            const EffectLayout& layout, const EffectPriors& priors);

struct MoveOutcome {
    bool accepted = false;
    double log_acceptance = 0.0; // log of the Metropolis-Hastings ratio before min(1, .)
};

/// Collapsed Metropolis-Hastings move linking two unmatched clusters. The
/// proposal picks the Y partner uniformly from the unmatched Y clusters,
/// the reverse break is deterministic, so the ratio carries a factor equal
/// to the number of unmatched Y clusters. On acceptance the effects of the
/// new pair are redrawn from their joint conditional.
MoveOutcome propose_link(MatchingState& matching, int kx, int ky, std::span<const CellStats> x_stats,
                         std::span<const CellStats> y_stats, const EffectLayout& layout,
                         const EffectPriors& priors, EffectDecomposition& effects, Rng& rng);

/// Reverse of propose_link for the link held by X cluster kx.
MoveOutcome propose_break(MatchingState& matching, int kx, std::span<const CellStats> x_stats,
                          std::span<const CellStats> y_stats, const EffectLayout& layout,
                          const EffectPriors& priors, EffectDecomposition& effects, Rng& rng);

/// One move per X cluster in random order: break if matched, otherwise try
/// a link to a uniformly chosen unmatched Y cluster. Returns accepted moves.
int matching_sweep(MatchingState& matching, std::span<const CellStats> x_stats,
                   std::span<const CellStats> y_stats, const EffectLayout& layout, const EffectPriors& priors,
                   EffectDecomposition& effects, Rng& rng);

/// Number of partial injective matchings between n_x and n_y clusters.
double count_matchings(int n_x, int n_y);

/// Uniform draw from all partial injective matchings.
MatchingState sample_matching_prior(int n_x, int n_y, Rng& rng);

struct PairingTable {
    Eigen::MatrixXd link_freq;   // K_x x K_y
    Eigen::VectorXd unmatched_x; // K_x
    Eigen::VectorXd unmatched_y; // K_y
};

/// Link and unmatched frequencies over a trace of matchings.
PairingTable pairing_posterior(std::span<const MatchingState> trace);

} // namespace xlate

#endif // XLATE_MATCHING_HPP
