#include "xlate/summarize.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace xlate {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    return f;
}

EffectEntry make_entry(std::string group, std::string effect, std::string cluster, int state,
                       std::vector<double> values, double level, double threshold) {
    EffectEntry e{std::move(group), std::move(effect), std::move(cluster), state, std::move(values), {}};
    e.verdict = effect_significance(e.values, level, threshold);
    return e;
}

// Appends time (states 2..S), disease and interaction entries of one cluster
// column, reading values through `get`.
template <typename Get>
void add_cluster_entries(std::vector<EffectEntry>& out, const std::string& group, const std::string& label,
                         const Trace& trace, bool include_disease, double level, double threshold, Get get) {
    const int S = trace.info.n_states;
    const auto n = trace.snapshots.size();
    for (int s = 1; s < S; ++s) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = get(trace.snapshots[i], 0, s);
        out.push_back(make_entry(group, "time", label, s + 1, std::move(v), level, threshold));
    }
    if (include_disease) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = get(trace.snapshots[i], 1, 0);
        out.push_back(make_entry(group, "disease", label, 0, std::move(v), level, threshold));
    }
    for (int s = 1; s < S; ++s) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = get(trace.snapshots[i], 2, s);
        out.push_back(make_entry(group, "interaction", label, s + 1, std::move(v), level, threshold));
    }
}

double entry_of(const EffectSet& set, int which, int state, int cluster) {
    switch (which) {
    case 0: return set.time(state, cluster);
    case 1: return set.disease(cluster);
    default: return set.interaction(state, cluster);
    }
}

std::vector<OccupancyRow> occupancy(const Trace& trace) {
    std::vector<OccupancyRow> rows;
    const int S = trace.info.n_states;
    auto side = [&](const std::string& tag, const std::vector<SampleMeta>& meta, bool is_x) {
        std::vector<OccupancyRow> part;
        for (const auto& m : meta) part.push_back({tag, m.individual_id, m.time_index, Eigen::VectorXd::Zero(S)});
        for (const auto& snap : trace.snapshots) {
            const auto& states = is_x ? snap.states_x : snap.states_y;
            if (states.size() != meta.size()) throw std::runtime_error("trace: state record length mismatch");
            for (std::size_t r = 0; r < states.size(); ++r) part[r].freq(states[r]) += 1.0;
        }
        for (auto& p : part) p.freq /= static_cast<double>(trace.snapshots.size());
        std::stable_sort(part.begin(), part.end(), [](const OccupancyRow& a, const OccupancyRow& b) {
            return a.individual_id != b.individual_id ? a.individual_id < b.individual_id
                                                      : a.time_index < b.time_index;
        });
        rows.insert(rows.end(), part.begin(), part.end());
    };
    side("x", trace.info.meta_x, true);
    side("y", trace.info.meta_y, false);
    return rows;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

} // namespace

const EffectEntry* TraceSummary::find(const std::string& group, const std::string& effect,
                                      const std::string& cluster, int state) const {
    for (const auto& e : effects) {
        if (e.group == group && e.effect == effect && e.cluster == cluster && e.state == state) return &e;
    }
    return nullptr;
}

TraceSummary summarize_trace(const Trace& trace, double level, double threshold) {
    if (trace.snapshots.empty()) throw std::invalid_argument("empty trace");
    TraceSummary out;
    const auto& info = trace.info;
    out.n_states = info.n_states;
    out.n_snapshots = static_cast<int>(trace.snapshots.size());
    out.level = level;
    out.threshold = threshold;

    std::vector<MatchingState> matchings;
    matchings.reserve(trace.snapshots.size());
    for (const auto& s : trace.snapshots) matchings.push_back(s.matching);
    out.pairing = pairing_posterior(matchings);

    for (int kx = 0; kx < info.k_x; ++kx) {
        for (int ky = 0; ky < info.k_y; ++ky) {
            const std::string label = std::to_string(kx + 1) + "-" + std::to_string(ky + 1);
            add_cluster_entries(out.effects, "shared", label, trace, info.include_disease, level, threshold,
                                [&](const Snapshot& s, int which, int st) {
                                    return s.matching.partner_of_x(kx) == ky
                                               ? entry_of(s.effects.shared, which, st, kx)
                                               : 0.0;
                                });
        }
    }
    for (int kx = 0; kx < info.k_x; ++kx) {
        add_cluster_entries(out.effects, "x", std::to_string(kx + 1), trace, info.include_disease, level, threshold,
                            [&](const Snapshot& s, int which, int st) {
                                return entry_of(s.effects.specific_x, which, st, kx);
                            });
    }
    for (int ky = 0; ky < info.k_y; ++ky) {
        add_cluster_entries(out.effects, "y", std::to_string(ky + 1), trace, info.include_disease, level, threshold,
                            [&](const Snapshot& s, int which, int st) {
                                return entry_of(s.effects.specific_y, which, st, ky);
                            });
    }
    out.occupancy = occupancy(trace);
    return out;
}

Eigen::MatrixXi link_ranks(const Eigen::MatrixXd& link_freq) {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> cells;
    for (Eigen::Index i = 0; i < link_freq.rows(); ++i) {
        for (Eigen::Index j = 0; j < link_freq.cols(); ++j) cells.emplace_back(i, j);
    }
    std::stable_sort(cells.begin(), cells.end(), [&](const auto& a, const auto& b) {
        return link_freq(a.first, a.second) > link_freq(b.first, b.second);
    });
    Eigen::MatrixXi ranks(link_freq.rows(), link_freq.cols());
    for (std::size_t r = 0; r < cells.size(); ++r) ranks(cells[r].first, cells[r].second) = static_cast<int>(r) + 1;
    return ranks;
}

void write_pairing_csv(const PairingTable& table, const std::filesystem::path& path) {
    auto f = open_out(path);
    f << "kind,x_cluster,y_cluster,frequency,rank\n";
    const Eigen::MatrixXi ranks = link_ranks(table.link_freq);
    for (Eigen::Index i = 0; i < table.link_freq.rows(); ++i) {
        for (Eigen::Index j = 0; j < table.link_freq.cols(); ++j) {
            f << "link," << i + 1 << ',' << j + 1 << ',' << fmt(table.link_freq(i, j)) << ',' << ranks(i, j) << '\n';
        }
    }
    for (Eigen::Index i = 0; i < table.unmatched_x.size(); ++i) {
        f << "unmatched_x," << i + 1 << ",," << fmt(table.unmatched_x(i)) << ",\n";
    }
    for (Eigen::Index j = 0; j < table.unmatched_y.size(); ++j) {
        f << "unmatched_y,," << j + 1 << ',' << fmt(table.unmatched_y(j)) << ",\n";
    }
}

PairingTable read_pairing_csv(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read " + path.string());
    std::string line;
    std::getline(f, line);
    if (line != "kind,x_cluster,y_cluster,frequency,rank") {
        throw std::runtime_error(path.string() + ": unexpected pairing header");
    }
    struct Row {
        std::string kind;
        int x, y;
        double freq;
    };
    std::vector<Row> rows;
    int kx = 0, ky = 0;
    int line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != 5) throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected 5 fields");
        Row r{cells[0], cells[1].empty() ? 0 : std::stoi(cells[1]), cells[2].empty() ? 0 : std::stoi(cells[2]),
              std::stod(cells[3])};
        kx = std::max(kx, r.x);
        ky = std::max(ky, r.y);
        rows.push_back(std::move(r));
    }
    PairingTable t{Eigen::MatrixXd::Zero(kx, ky), Eigen::VectorXd::Zero(kx), Eigen::VectorXd::Zero(ky)};
    for (const auto& r : rows) {
        if (r.kind == "link") {
            t.link_freq(r.x - 1, r.y - 1) = r.freq;
        } else if (r.kind == "unmatched_x") {
            t.unmatched_x(r.x - 1) = r.freq;
        } else if (r.kind == "unmatched_y") {
            t.unmatched_y(r.y - 1) = r.freq;
        } else {
            throw std::runtime_error(path.string() + ": unknown row kind '" + r.kind + "'");
        }
    }
    return t;
}

void export_plot_data(const TraceSummary& summary, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    write_pairing_csv(summary.pairing, out_dir / "pairing.csv");

    // One file per cluster and effect kind, all states stacked.
    std::map<std::filesystem::path, std::vector<const EffectEntry*>> files;
    for (const auto& e : summary.effects) {
        files[out_dir / "effects" / e.group / e.effect / (e.cluster + ".csv")].push_back(&e);
    }
    for (const auto& [path, entries] : files) {
        auto f = open_out(path);
        const bool disease = entries.front()->effect == "disease";
        f << (disease ? "snapshot,value\n" : "snapshot,state,value\n");
        for (const auto* e : entries) {
            for (std::size_t i = 0; i < e->values.size(); ++i) {
                f << i + 1 << ',';
                if (!disease) f << e->state << ',';
                f << fmt(e->values[i]) << '\n';
            }
        }
    }

    {
        auto f = open_out(out_dir / "states.csv");
        f << "side,individual_id,time_index";
        for (int s = 1; s <= summary.n_states; ++s) f << ",state_" << s;
        f << '\n';
        for (const auto& r : summary.occupancy) {
            f << r.side << ',' << r.individual_id << ',' << r.time_index;
            for (Eigen::Index s = 0; s < r.freq.size(); ++s) f << ',' << fmt(r.freq(s));
            f << '\n';
        }
    }

    auto f = open_out(out_dir / "report.txt");
    f << "snapshots: " << summary.n_snapshots << '\n';
    f << "credible level: " << summary.level << '\n';
    f << "found threshold: " << summary.threshold << "\n\n";
    f << "pairing (x_cluster y_cluster frequency), by decreasing frequency\n";
    const auto& lf = summary.pairing.link_freq;
    std::vector<std::pair<Eigen::Index, Eigen::Index>> cells;
    for (Eigen::Index i = 0; i < lf.rows(); ++i) {
        for (Eigen::Index j = 0; j < lf.cols(); ++j) cells.emplace_back(i, j);
    }
    std::stable_sort(cells.begin(), cells.end(),
                     [&](const auto& a, const auto& b) { return lf(a.first, a.second) > lf(b.first, b.second); });
    char buf[200];
    for (const auto& [i, j] : cells) {
        std::snprintf(buf, sizeof buf, "  %ld %ld %.4f\n", static_cast<long>(i + 1), static_cast<long>(j + 1), lf(i, j));
        f << buf;
    }
    f << "\neffect verdicts (group effect cluster state verdict found mean lower upper)\n";
    for (const auto& e : summary.effects) {
        std::snprintf(buf, sizeof buf, "  %s %s %s %d %s %.3f %.4f %.4f %.4f\n", e.group.c_str(), e.effect.c_str(),
                      e.cluster.c_str(), e.state, to_string(e.verdict.verdict), e.verdict.found_fraction,
                      e.verdict.mean, e.verdict.lower, e.verdict.upper);
        f << buf;
    }
}

std::vector<int> align_clusters(const Eigen::VectorXi& truth, const Eigen::VectorXi& fitted, int k) {
    if (k < 1 || k > 8) throw std::invalid_argument("align_clusters: k must be in 1..8");
    if (truth.size() != fitted.size()) throw std::invalid_argument("align_clusters: length mismatch");
    Eigen::MatrixXi overlap = Eigen::MatrixXi::Zero(k, k);
    for (Eigen::Index i = 0; i < truth.size(); ++i) overlap(truth(i), fitted(i)) += 1;
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> best = perm;
    int best_score = -1;
    do {
        int score = 0;
        for (int c = 0; c < k; ++c) score += overlap(c, perm[static_cast<std::size_t>(c)]);
        if (score > best_score) {
            best_score = score;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

} // namespace xlate
