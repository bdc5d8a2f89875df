#ifndef XLATE_SUMMARIZE_HPP
#define XLATE_SUMMARIZE_HPP

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "xlate/effects.hpp"
#include "xlate/matching.hpp"
#include "xlate/trace.hpp"

namespace xlate {

/// Posterior summary of one effect entry. Clusters and states are 1-based
/// here because these records go straight to files. For shared entries
/// the cluster label is "kx-ky" and the value in a snapshot is the shared
/// entry when kx is linked to ky there, 0 otherwise. Disease entries have
/// state 0.
struct EffectEntry {
    std::string group;  // shared, x, y
    std::string effect; // time, disease, interaction
    std::string cluster;
    int state = 0;
    std::vector<double> values; // one per snapshot
    EffectVerdict verdict;
};

/// Per (side, individual, time index): fraction of snapshots in each state.
struct OccupancyRow {
    std::string side;
    std::string individual_id;
    int time_index = 1;
    Eigen::VectorXd freq;
};

struct TraceSummary {
    int n_states = 0;
    int n_snapshots = 0;
    double level = 0.90;
    double threshold = 0.1;
    PairingTable pairing;
    std::vector<EffectEntry> effects;
    std::vector<OccupancyRow> occupancy;

    const EffectEntry* find(const std::string& group, const std::string& effect, const std::string& cluster,
                            int state) const;
};

/// Throws std::invalid_argument("empty trace") for a trace without snapshots.
TraceSummary summarize_trace(const Trace& trace, double level = 0.90, double threshold = 0.1);

/// Writes pairing.csv, effects/<group>/<effect>/<cluster>.csv, states.csv
/// and report.txt under out_dir. A default-constructed summary produces
/// header-only files.
void export_plot_data(const TraceSummary& summary, const std::filesystem::path& out_dir);

void write_pairing_csv(const PairingTable& table, const std::filesystem::path& path);
PairingTable read_pairing_csv(const std::filesystem::path& path);

/// Rank (1 = largest) of each entry among link frequencies, row-major ties.
Eigen::MatrixXi link_ranks(const Eigen::MatrixXd& link_freq);

/// Label permutation mapping true cluster c to fitted cluster perm[c] that
/// maximises the number of variables on which the two labellings agree.
/// Exhaustive, for k <= 8.
std::vector<int> align_clusters(const Eigen::VectorXi& truth, const Eigen::VectorXi& fitted, int k);

} // namespace xlate

#endif // XLATE_SUMMARIZE_HPP
