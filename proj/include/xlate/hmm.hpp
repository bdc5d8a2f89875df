#ifndef XLATE_HMM_HPP
#define XLATE_HMM_HPP

#include <algorithm>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "xlate/random.hpp"

namespace xlate {

// States are 0-based in memory (state 0 is the first development state) and
// 1-based in every file and report.

/// Left-to-right chain: from state s the only moves are stay or advance to
/// s+1; the last state is absorbing; every series starts in state 0.
struct ChainParams {
    int n_states = 1;
    Eigen::VectorXd advance_prob; // length n_states - 1

    static ChainParams uniform(int n_states, double advance = 0.5) {
        return {n_states, Eigen::VectorXd::Constant(std::max(0, n_states - 1), advance)};
    }

    /// log p(next | prev); -inf for moves the topology forbids.
    double log_transition(int prev, int next) const;
};

using StatePath = std::vector<int>;

struct TransitionPrior {
    double advance = 1.0; // Beta first shape, counts advances
    double stay = 1.0;    // Beta second shape, counts self-transitions
};

/// Per-state advance / self-transition counts, excluding the absorbing state.
struct TransitionCounts {
    Eigen::VectorXd advances;
    Eigen::VectorXd stays;

    explicit TransitionCounts(int n_states)
        : advances(Eigen::VectorXd::Zero(std::max(0, n_states - 1))),
          stays(Eigen::VectorXd::Zero(std::max(0, n_states - 1))) {}

    void add(const StatePath& path);
    TransitionCounts& operator+=(const TransitionCounts& other);
};

bool is_valid_path(const StatePath& path, int n_states);

/// Emission log-density of one latent row under the unit-variance Gaussian
/// centred at the given state mean.
template <typename DerivedA, typename DerivedB>
double emission_log_density(const Eigen::MatrixBase<DerivedA>& latent_row,
                            const Eigen::MatrixBase<DerivedB>& state_mean) {
    constexpr double log_2pi = 1.8378770664093454835606594728112;
    const double k = static_cast<double>(latent_row.size());
    return -0.5 * (k * log_2pi + (latent_row - state_mean).squaredNorm());
}

/// Unnormalized log full-conditional weights of site t given its neighbours,
/// as (state, log weight) over the admissible window. Throws std::logic_error
/// when the neighbours themselves violate monotonicity.
std::vector<std::pair<int, double>> site_log_weights(const StatePath& path, int t, const ChainParams& chain,
                                                     const Eigen::MatrixXd& latent_rows,
                                                     const Eigen::MatrixXd& state_means);

/// Draw state t from its full conditional (transition-in x emission x
/// transition-out). latent_rows is T x K for this individual, state_means
/// is S x K for this individual's disease level.
int sample_state_single_site(const StatePath& path, int t, const ChainParams& chain,
                             const Eigen::MatrixXd& latent_rows, const Eigen::MatrixXd& state_means,
                             Rng& rng);

/// One left-to-right pass of single-site updates over every time point.
void sweep_path_single_site(StatePath& path, const ChainParams& chain, const Eigen::MatrixXd& latent_rows,
                            const Eigen::MatrixXd& state_means, Rng& rng);

/// Exact draw of a whole path by forward filtering, backward sampling.
StatePath sample_path_ffbs(const ChainParams& chain, const Eigen::MatrixXd& latent_rows,
                           const Eigen::MatrixXd& state_means, Rng& rng);

/// Conjugate Beta update of each advance probability.
ChainParams sample_transition_params(const TransitionCounts& counts, const TransitionPrior& prior, Rng& rng);

double log_transition_prior(const ChainParams& chain, const TransitionPrior& prior);

/// log p(path | chain) + sum_t log N(latent_t; mean_{path_t}, I).
/// Throws std::invalid_argument for an invalid path.
double path_log_density(const StatePath& path, const ChainParams& chain, const Eigen::MatrixXd& latent_rows,
                        const Eigen::MatrixXd& state_means);

/// Only the transition part of path_log_density.
double path_log_prior(const StatePath& path, const ChainParams& chain);

/// Every monotone unit-step path of length T starting at state 0.
std::vector<StatePath> enumerate_paths(int length, int n_states);

/// Exact T x S posterior marginals by enumerating every admissible path.
/// Throws std::invalid_argument when T > 12 or S > 6.
Eigen::MatrixXd brute_force_path_posterior(int length, const ChainParams& chain,
                                           const Eigen::MatrixXd& latent_rows,
                                           const Eigen::MatrixXd& state_means);

/// Initial path spreading a series of the given length evenly over the states.
StatePath stretched_path(int length, int n_states);

StatePath sample_path_prior(int length, const ChainParams& chain, Rng& rng);

} // namespace xlate

#endif // XLATE_HMM_HPP
