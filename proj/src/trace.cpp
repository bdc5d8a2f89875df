#include "xlate/trace.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace xlate {

using nlohmann::json;

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from(const json& j, Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    if (static_cast<Eigen::Index>(j.size()) != rows) throw std::runtime_error("trace: matrix row count mismatch");
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = j.at(static_cast<std::size_t>(r));
        if (static_cast<Eigen::Index>(row.size()) != cols) throw std::runtime_error("trace: matrix column count mismatch");
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
    return m;
}

template <typename Vec>
json vector_json(const Vec& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Eigen::VectorXd vectord_from(const json& j) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    return v;
}

Eigen::VectorXi vectori_from(const json& j) {
    Eigen::VectorXi v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<int>();
    return v;
}

json effect_set_json(const EffectSet& set) {
    return {{"time", matrix_json(set.time)},
            {"disease", vector_json(set.disease)},
            {"interaction", matrix_json(set.interaction)}};
}

EffectSet effect_set_from(const json& j, int n_states, int k) {
    EffectSet set;
    set.time = matrix_from(j.at("time"), n_states, k);
    set.disease = vectord_from(j.at("disease"));
    set.interaction = matrix_from(j.at("interaction"), n_states, k);
    if (set.disease.size() != k) throw std::runtime_error("trace: disease effect length mismatch");
    return set;
}

json meta_json(const std::vector<SampleMeta>& meta) {
    json out = json::array();
    for (const auto& m : meta) {
        out.push_back({{"sample_id", m.sample_id},
                       {"individual_id", m.individual_id},
                       {"time_index", m.time_index},
                       {"disease", m.disease}});
    }
    return out;
}

std::vector<SampleMeta> meta_from(const json& j) {
    std::vector<SampleMeta> out;
    for (const auto& e : j) {
        out.push_back({e.at("sample_id").get<std::string>(), e.at("individual_id").get<std::string>(),
                       e.at("time_index").get<int>(), e.at("disease").get<int>()});
    }
    return out;
}

json snapshot_json(const Snapshot& s) {
    json partners = json::array();
    for (int kx = 0; kx < s.matching.n_x(); ++kx) partners.push_back(s.matching.partner_of_x(kx));
    return {{"sweep", s.sweep},
            {"log_joint", s.log_joint},
            {"shared", effect_set_json(s.effects.shared)},
            {"specific_x", effect_set_json(s.effects.specific_x)},
            {"specific_y", effect_set_json(s.effects.specific_y)},
            {"partner_of_x", partners},
            {"advance_x", vector_json(s.chain_x.advance_prob)},
            {"advance_y", vector_json(s.chain_y.advance_prob)},
            {"assignment_x", vector_json(s.assignment_x)},
            {"assignment_y", vector_json(s.assignment_y)},
            {"states_x", s.states_x},
            {"states_y", s.states_y}};
}

Snapshot snapshot_from(const json& j, const TraceInfo& info) {
    Snapshot s;
    s.sweep = j.at("sweep").get<int>();
    s.log_joint = j.at("log_joint").get<double>();
    s.effects.shared = effect_set_from(j.at("shared"), info.n_states, info.k_x);
    s.effects.specific_x = effect_set_from(j.at("specific_x"), info.n_states, info.k_x);
    s.effects.specific_y = effect_set_from(j.at("specific_y"), info.n_states, info.k_y);
    s.matching = MatchingState(info.k_x, info.k_y);
    const auto& partners = j.at("partner_of_x");
    if (static_cast<int>(partners.size()) != info.k_x) throw std::runtime_error("trace: matching size mismatch");
    for (int kx = 0; kx < info.k_x; ++kx) {
        const int ky = partners[static_cast<std::size_t>(kx)].get<int>();
        if (ky >= 0) s.matching.link(kx, ky);
    }
    s.chain_x = {info.n_states, vectord_from(j.at("advance_x"))};
    s.chain_y = {info.n_states, vectord_from(j.at("advance_y"))};
    s.assignment_x = vectori_from(j.at("assignment_x"));
    s.assignment_y = vectori_from(j.at("assignment_y"));
    s.states_x = j.at("states_x").get<std::vector<int>>();
    s.states_y = j.at("states_y").get<std::vector<int>>();
    return s;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

Trace run_chain(const StudyPair& pair, const GibbsConfig& config) {
    Trace trace;
    trace.info = {config.n_states, config.k_x, config.k_y, config.effects.include_disease, config.seed,
                  pair.x.meta, pair.y.meta};
    ModelState state = initialize(pair, config);
    SweepStreams streams(config.seed);
    const int total = config.n_burn_in + config.n_samples;
    for (int sweep = 1; sweep <= total; ++sweep) {
        gibbs_sweep(state, pair, config, streams);
        const double lj = log_joint(state, pair, config);
        if (!std::isfinite(lj)) {
            throw std::runtime_error("non-finite log joint at sweep " + std::to_string(sweep));
        }
        const bool burn = sweep <= config.n_burn_in;
        trace.scalars.push_back({sweep, burn, lj, state.matching.n_links()});
        const int post = sweep - config.n_burn_in;
        if (!burn && post % config.thinning == 0) {
            Snapshot s;
            s.sweep = sweep;
            s.log_joint = lj;
            s.effects = state.effects;
            s.matching = state.matching;
            s.chain_x = state.x.chain;
            s.chain_y = state.y.chain;
            s.assignment_x = state.x.factor.assignment;
            s.assignment_y = state.y.factor.assignment;
            s.states_x = row_states(pair.x, state.x.paths);
            s.states_y = row_states(pair.y, state.y.paths);
            trace.snapshots.push_back(std::move(s));
        }
    }
    return trace;
}

void write_trace(const Trace& trace, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto& info = trace.info;
    json head = {{"n_states", info.n_states},
                 {"k_x", info.k_x},
                 {"k_y", info.k_y},
                 {"include_disease", info.include_disease},
                 {"seed", info.seed},
                 {"n_snapshots", trace.snapshots.size()},
                 {"meta_x", meta_json(info.meta_x)},
                 {"meta_y", meta_json(info.meta_y)}};
    std::ofstream(dir / "trace.json") << head.dump(1) << '\n';

    std::ofstream snaps(dir / "snapshots.jsonl");
    for (const auto& s : trace.snapshots) snaps << snapshot_json(s).dump() << '\n';

    std::ofstream scalars(dir / "scalars.csv");
    scalars << "sweep,burn_in,log_joint,n_links\n";
    for (const auto& r : trace.scalars) {
        scalars << r.sweep << ',' << (r.burn_in ? 1 : 0) << ',' << format_double(r.log_joint) << ',' << r.n_links
                << '\n';
    }
    if (!snaps || !scalars) throw std::runtime_error("write_trace: failed writing to " + dir.string());
}

Trace read_trace(const std::filesystem::path& dir) {
    std::ifstream head_in(dir / "trace.json");
    if (!head_in) throw std::runtime_error("read_trace: missing " + (dir / "trace.json").string());
    const json head = json::parse(head_in);
    Trace trace;
    auto& info = trace.info;
    info.n_states = head.at("n_states").get<int>();
    info.k_x = head.at("k_x").get<int>();
    info.k_y = head.at("k_y").get<int>();
    info.include_disease = head.at("include_disease").get<bool>();
    info.seed = head.at("seed").get<std::uint64_t>();
    info.meta_x = meta_from(head.at("meta_x"));
    info.meta_y = meta_from(head.at("meta_y"));

    std::ifstream snaps(dir / "snapshots.jsonl");
    if (!snaps) throw std::runtime_error("read_trace: missing " + (dir / "snapshots.jsonl").string());
    std::string line;
    while (std::getline(snaps, line)) {
        if (line.empty()) continue;
        trace.snapshots.push_back(snapshot_from(json::parse(line), info));
    }

    std::ifstream scalars(dir / "scalars.csv");
    if (scalars && std::getline(scalars, line)) {
        while (std::getline(scalars, line)) {
            std::istringstream ss(line);
            std::string field;
            SweepScalars r;
            std::getline(ss, field, ',');
            r.sweep = std::stoi(field);
            std::getline(ss, field, ',');
            r.burn_in = field == "1";
            std::getline(ss, field, ',');
            r.log_joint = std::stod(field);
            std::getline(ss, field, ',');
            r.n_links = std::stoi(field);
            trace.scalars.push_back(r);
        }
    }
    return trace;
}

double gelman_rubin(const std::vector<std::vector<double>>& chains) {
    if (chains.size() < 2) throw std::invalid_argument("gelman_rubin: need at least two chains");
    std::size_t n = chains.front().size();
    for (const auto& c : chains) n = std::min(n, c.size());
    if (n < 2) throw std::invalid_argument("gelman_rubin: need at least two draws per chain");
    const double m = static_cast<double>(chains.size());
    const double nn = static_cast<double>(n);
    Eigen::VectorXd means(static_cast<Eigen::Index>(chains.size()));
    double within = 0.0;
    for (std::size_t c = 0; c < chains.size(); ++c) {
        const Eigen::Map<const Eigen::VectorXd> x(chains[c].data() + (chains[c].size() - n),
                                                  static_cast<Eigen::Index>(n));
        means(static_cast<Eigen::Index>(c)) = x.mean();
        within += (x.array() - x.mean()).square().sum() / (nn - 1.0);
    }
    within /= m;
    const double between = nn * (means.array() - means.mean()).square().sum() / (m - 1.0);
    if (within <= 0.0) return between <= 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    const double pooled = (nn - 1.0) / nn * within + between / nn;
    return std::sqrt(pooled / within);
}

} // namespace xlate
