#ifndef XLATE_EFFECTS_HPP
#define XLATE_EFFECTS_HPP

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "xlate/matching_state.hpp"
#include "xlate/random.hpp"

namespace xlate {

enum class Side { x, y };

struct EffectPriors {
    double shared_var = 1.0;       // prior variance of shared entries
    double specific_ratio = 0.125; // specific prior variance = specific_ratio * shared_var
    bool include_disease = true;  // false drops the static disease term

    double specific_var() const { return specific_ratio * shared_var; }
};

/// Time, disease and time-by-disease effects for K clusters over S states.
/// Reference levels are state 0 and disease 0: time.row(0) and
/// interaction.row(0) stay zero, and the disease-0 terms are not stored.
struct EffectSet {
    Eigen::MatrixXd time;        // S x K
    Eigen::VectorXd disease;     // K, the disease-1 level
    Eigen::MatrixXd interaction; // S x K, at disease 1

    static EffectSet zeros(int n_states, int n_clusters) {
        return {Eigen::MatrixXd::Zero(n_states, n_clusters), Eigen::VectorXd::Zero(n_clusters),
                Eigen::MatrixXd::Zero(n_states, n_clusters)};
    }

    int n_states() const { return static_cast<int>(time.rows()); }
    int n_clusters() const { return static_cast<int>(time.cols()); }

    double mean(int state, int disease_level, int cluster) const {
        double m = time(state, cluster);
        if (disease_level == 1) m += disease(cluster) + interaction(state, cluster);
        return m;
    }
};

/// Shared effects are stored per X cluster and used only while that X
/// cluster is linked; the linked Y cluster reads them through the matching.
struct EffectDecomposition {
    EffectSet shared;     // S x K_x
    EffectSet specific_x; // S x K_x
    EffectSet specific_y; // S x K_y

    static EffectDecomposition zeros(int n_states, int k_x, int k_y) {
        return {EffectSet::zeros(n_states, k_x), EffectSet::zeros(n_states, k_x), EffectSet::zeros(n_states, k_y)};
    }
};

/// Ordering of the free entries of one cluster's effects in a parameter
/// vector: time at states 1..S-1, disease (if enabled), interaction at
/// states 1..S-1.
struct EffectLayout {
    int n_states = 1;
    bool include_disease = true;

    int dim() const { return 2 * (n_states - 1) + (include_disease ? 1 : 0); }
    Eigen::VectorXd design_row(int state, int disease_level) const;
    Eigen::VectorXd pack(const EffectSet& set, int cluster) const;
    void unpack(const Eigen::VectorXd& theta, EffectSet& set, int cluster) const;
};

/// Sufficient statistics of one cluster's latent values per (state, disease) cell.
struct CellStats {
    Eigen::MatrixXd count; // S x 2
    Eigen::MatrixXd sum;   // S x 2
    double sum_sq = 0.0;

    explicit CellStats(int n_states = 1)
        : count(Eigen::MatrixXd::Zero(n_states, 2)), sum(Eigen::MatrixXd::Zero(n_states, 2)) {}

    void add(int state, int disease_level, double value) {
        count(state, disease_level) += 1.0;
        sum(state, disease_level) += value;
        sum_sq += value * value;
    }
    double total() const { return count.sum(); }
};

/// One CellStats per cluster from latent rows and per-row state/disease.
std::vector<CellStats> cell_stats(const Eigen::MatrixXd& latent, std::span<const int> row_state,
                                  std::span<const int> row_disease, int n_states);

/// Conjugate Gaussian linear system z = A theta + N(0, I), theta ~ N(0, diag(prior_var)),
/// accumulated through A'A, A'z, z'z.
class GaussianBlock {
public:
    explicit GaussianBlock(Eigen::VectorXd prior_var);

    /// Adds one cluster's cells; its design row for cell (s,b) is
    /// layout.design_row(s,b) placed at each listed offset.
    void add(const CellStats& stats, const EffectLayout& layout, std::span<const int> offsets);
    /// Adds raw sufficient statistics directly.
    void add_raw(const Eigen::MatrixXd& ata, const Eigen::VectorXd& atz, double ztz, double n);

    int dim() const { return static_cast<int>(prior_var_.size()); }
    Eigen::MatrixXd precision() const;
    Eigen::VectorXd posterior_mean() const;
    Eigen::MatrixXd posterior_cov() const;
    Eigen::VectorXd sample(Rng& rng) const;
    /// log p(z) with theta integrated out.
    double log_marginal() const;

private:
    Eigen::VectorXd prior_var_;
    Eigen::MatrixXd ata_;
    Eigen::VectorXd atz_;
    double ztz_ = 0.0;
    double n_ = 0.0;
};

/// Per-disease S x K latent-mean tables for one side.
using StateMeans = std::array<Eigen::MatrixXd, 2>;

StateMeans state_means(const EffectDecomposition& effects, const MatchingState& matching, Side side);

/// Latent mean vector (length K of the side) of a sample at (state, disease).
Eigen::VectorXd latent_mean_for_sample(int state, int disease_level, const EffectDecomposition& effects,
                                       const MatchingState& matching, Side side);

/// n x K latent means for every row of one side.
Eigen::MatrixXd latent_mean_matrix(const StateMeans& means, std::span<const int> row_state,
                                   std::span<const int> row_disease);

/// log marginal of one cluster's latents with only its specific effects.
double specific_log_marginal(const CellStats& stats, const EffectLayout& layout, const EffectPriors& priors);

/// Redraw the entries that touch X cluster kx: when linked, shared, specific
/// X and the partner's specific Y jointly; otherwise specific X from its
/// conditional and the unused shared column from the prior.
void resample_x_cluster_effects(EffectDecomposition& effects, int kx, const MatchingState& matching,
                                std::span<const CellStats> x_stats, std::span<const CellStats> y_stats,
                                const EffectLayout& layout, const EffectPriors& priors, Rng& rng);

/// Redraw the specific effects of an unmatched Y cluster.
void resample_unmatched_y_effects(EffectDecomposition& effects, int ky, std::span<const CellStats> y_stats,
                                  const EffectLayout& layout, const EffectPriors& priors, Rng& rng);

/// Full sweep over every effect entry, each drawn from its conditional
/// given latents, states and matching.
void sample_effects(EffectDecomposition& effects, const MatchingState& matching,
                    std::span<const CellStats> x_stats, std::span<const CellStats> y_stats,
                    const EffectLayout& layout, const EffectPriors& priors, Rng& rng);

double effects_log_prior(const EffectDecomposition& effects, const EffectLayout& layout,
                         const EffectPriors& priors);

/// Negate all effect entries of one cluster column.
void negate_cluster(EffectSet& set, int cluster);

enum class Verdict { significant_pos, significant_neg, null };

const char* to_string(Verdict v);

struct EffectVerdict {
    Verdict verdict = Verdict::null;
    double found_fraction = 0.0;
    double mean = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

/// Central credible interval at `level`; significant when it excludes 0.
/// found_fraction counts draws with |value| > threshold.
EffectVerdict effect_significance(std::span<const double> trace, double level = 0.90, double threshold = 0.1);

/// Linear-interpolation quantile of an unsorted sample.
double quantile(std::vector<double> values, double q);

} // namespace xlate

#endif // XLATE_EFFECTS_HPP
