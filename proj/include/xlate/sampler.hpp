#ifndef XLATE_SAMPLER_HPP
#define XLATE_SAMPLER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "xlate/data.hpp"
#include "xlate/effects.hpp"
#include "xlate/factor_model.hpp"
#include "xlate/hmm.hpp"
#include "xlate/matching_state.hpp"
#include "xlate/random.hpp"

namespace xlate {

enum class PathKernel { single_site, ffbs };

/// Deliberate sampler defects used to check that the Geweke test has power.
enum class Fault { none, residual_shape };

struct GibbsConfig {
    int n_burn_in = 1000;
    int n_samples = 1000;
    int thinning = 1;
    std::uint64_t seed = 1;
    int n_states = 5;
    int k_x = 3;
    int k_y = 3;
    FactorPriors factor;
    TransitionPrior transition;
    EffectPriors effects;
    bool shared_transitions = false;
    bool log1p = false; // applied when loading files
    bool enforce_sign = true;
    PathKernel path_kernel = PathKernel::single_site;
    Fault fault = Fault::none;

    EffectLayout layout() const { return {n_states, effects.include_disease}; }
    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

struct DatasetState {
    FactorParams factor;
    Eigen::MatrixXd latent;        // n x K
    ChainParams chain;
    std::vector<StatePath> paths;  // one per individual, same order as Dataset::individuals
};

struct ModelState {
    DatasetState x;
    DatasetState y;
    EffectDecomposition effects;
    MatchingState matching;
};

/// State of every row, read off the per-individual paths.
std::vector<int> row_states(const Dataset& data, const std::vector<StatePath>& paths);

/// Deterministic seeded split of the columns into k groups by absolute
/// correlation (k-means with sign-aligned centres).
Eigen::VectorXi correlation_kmeans(const Eigen::MatrixXd& values, int k, Rng& rng, int max_iter = 50);

/// Starting point: k-means assignments, unit loadings and residual
/// variances, column-mean grand means, stretched paths, zero effects,
/// empty matching.
ModelState initialize(const StudyPair& pair, const GibbsConfig& config);

/// One independent random stream per sweep step.
struct SweepStreams {
    Rng latent, assignment, residual, grand_mean, paths, chain, effects, matching;
    explicit SweepStreams(std::uint64_t seed);
};

/// One full Gibbs sweep in the fixed order: latents, assignments with
/// loadings, residual variances, grand means, state paths, transitions,
/// effects, matching moves, sign convention.
void gibbs_sweep(ModelState& state, const StudyPair& pair, const GibbsConfig& config, SweepStreams& rng);

/// Flip clusters into the canonical sign: an unmatched cluster is flipped
/// when its loading sum is negative, a linked pair is flipped together when
/// the sum over both clusters is negative. The joint density is unchanged.
void enforce_sign_convention(ModelState& state);

/// Exact log joint density of parameters, latents, paths and data.
double log_joint(const ModelState& state, const StudyPair& pair, const GibbsConfig& config);

/// Independent draw of every unobserved quantity from the prior.
ModelState sample_prior_state(const StudyPair& design, const GibbsConfig& config, Rng& rng);

/// Replace the observed values of both datasets with a draw from the likelihood.
void resample_data(StudyPair& pair, const ModelState& state, Rng& rng);

} // namespace xlate

#endif // XLATE_SAMPLER_HPP
