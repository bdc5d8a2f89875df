#ifndef XLATE_SYNTH_HPP
#define XLATE_SYNTH_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "xlate/data.hpp"
#include "xlate/effects.hpp"
#include "xlate/hmm.hpp"
#include "xlate/matching_state.hpp"
#include "xlate/random.hpp"

namespace xlate {

enum class EffectKind {
    shared_time,
    shared_interaction,
    shared_disease,
    specific_time_x,
    specific_time_y,
    specific_interaction_x,
    specific_interaction_y,
    specific_disease_x,
    specific_disease_y,
};

const char* to_string(EffectKind kind);
std::optional<EffectKind> parse_effect_kind(std::string_view name);

/// Shared kinds use both cluster_x and cluster_y; specific kinds only the
/// cluster of their side. Time and interaction values have one entry per
/// state with the first entry 0; disease values have a single entry.
struct PlantedEffect {
    EffectKind kind = EffectKind::shared_time;
    int cluster_x = -1;
    int cluster_y = -1;
    std::vector<double> values;
};

struct SynthConfig {
    int n_individuals_x = 11;
    int n_individuals_y = 11;
    int min_length = 5;
    int max_length = 15;
    int p_x = 200;
    int p_y = 210;
    int k_x = 3;
    int k_y = 4;
    int n_states = 5;
    double advance_prob = 0.5;
    std::vector<PlantedEffect> planted;
    double residual_sd = 1.0;
    double loading_magnitude = 1.0;
    double negative_loading_prob = 0.2;
    std::uint64_t seed = 1;

    /// Throws std::invalid_argument describing the first violation.
    void validate() const;

    /// Two shared pairs (a rising time effect and a falling interaction)
    /// plus a falling time effect specific to one further Y cluster.
    static SynthConfig benchmark();
};

struct GroundTruth {
    Eigen::VectorXi assignment_x, assignment_y;
    Eigen::VectorXd loading_x, loading_y;
    Eigen::VectorXd grand_mean_x, grand_mean_y;
    std::vector<StatePath> paths_x, paths_y;
    Eigen::MatrixXd latent_x, latent_y;
    EffectDecomposition effects;
    MatchingState pairing; // clusters sharing a planted effect
    std::vector<PlantedEffect> planted;
    double residual_sd = 1.0;
    double loading_magnitude = 1.0;
};

/// Raw (unstandardized) draws from the generative model.
std::pair<StudyPair, GroundTruth> generate(const SynthConfig& config);

/// Random split of the individuals into two halves with each disease group
/// divided as evenly as possible. Returns individual indices per half.
std::pair<std::vector<int>, std::vector<int>> split_individuals(const Dataset& data, Rng& rng);

/// Structured-text ground truth with 1-based clusters and states.
void write_ground_truth(const GroundTruth& truth, const std::filesystem::path& path);

} // namespace xlate

#endif // XLATE_SYNTH_HPP
