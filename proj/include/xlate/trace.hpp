#ifndef XLATE_TRACE_HPP
#define XLATE_TRACE_HPP

#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "xlate/data.hpp"
#include "xlate/effects.hpp"
#include "xlate/hmm.hpp"
#include "xlate/matching_state.hpp"
#include "xlate/sampler.hpp"

namespace xlate {

struct Snapshot {
    int sweep = 0;
    double log_joint = 0.0;
    EffectDecomposition effects;
    MatchingState matching;
    ChainParams chain_x;
    ChainParams chain_y;
    Eigen::VectorXi assignment_x;
    Eigen::VectorXi assignment_y;
    std::vector<int> states_x; // per row
    std::vector<int> states_y;
};

struct SweepScalars {
    int sweep = 0;
    bool burn_in = false;
    double log_joint = 0.0;
    int n_links = 0;
};

struct TraceInfo {
    int n_states = 1;
    int k_x = 1;
    int k_y = 1;
    bool include_disease = true;
    std::uint64_t seed = 0;
    std::vector<SampleMeta> meta_x;
    std::vector<SampleMeta> meta_y;
};

struct Trace {
    TraceInfo info;
    std::vector<Snapshot> snapshots;
    std::vector<SweepScalars> scalars;
};

/// Runs burn-in then n_samples sweeps, keeping every thinning-th
/// post-burn-in sweep. Throws std::runtime_error when the log joint turns
/// non-finite.
Trace run_chain(const StudyPair& pair, const GibbsConfig& config);

/// Directory layout: trace.json (info), snapshots.jsonl (one record per
/// snapshot), scalars.csv (one row per sweep).
void write_trace(const Trace& trace, const std::filesystem::path& dir);
Trace read_trace(const std::filesystem::path& dir);

/// Potential scale reduction factor of a scalar over several chains.
double gelman_rubin(const std::vector<std::vector<double>>& chains);

} // namespace xlate

#endif // XLATE_TRACE_HPP
