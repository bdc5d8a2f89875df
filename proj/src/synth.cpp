#include "xlate/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace xlate {

namespace {

constexpr std::array<std::pair<EffectKind, const char*>, 9> kKindNames{{
    {EffectKind::shared_time, "shared_time"},
    {EffectKind::shared_interaction, "shared_interaction"},
    {EffectKind::shared_disease, "shared_disease"},
    {EffectKind::specific_time_x, "specific_time_x"},
    {EffectKind::specific_time_y, "specific_time_y"},
    {EffectKind::specific_interaction_x, "specific_interaction_x"},
    {EffectKind::specific_interaction_y, "specific_interaction_y"},
    {EffectKind::specific_disease_x, "specific_disease_x"},
    {EffectKind::specific_disease_y, "specific_disease_y"},
}};

bool is_shared(EffectKind k) {
    return k == EffectKind::shared_time || k == EffectKind::shared_interaction || k == EffectKind::shared_disease;
}
bool uses_x(EffectKind k) {
    return is_shared(k) || k == EffectKind::specific_time_x || k == EffectKind::specific_interaction_x ||
           k == EffectKind::specific_disease_x;
}
bool uses_y(EffectKind k) { return is_shared(k) || !uses_x(k); }
bool is_disease(EffectKind k) {
    return k == EffectKind::shared_disease || k == EffectKind::specific_disease_x ||
           k == EffectKind::specific_disease_y;
}
bool is_interaction(EffectKind k) {
    return k == EffectKind::shared_interaction || k == EffectKind::specific_interaction_x ||
           k == EffectKind::specific_interaction_y;
}

void plant(EffectSet& set, int cluster, const PlantedEffect& e) {
    if (is_disease(e.kind)) {
        set.disease(cluster) += e.values[0];
        return;
    }
    auto& m = is_interaction(e.kind) ? set.interaction : set.time;
    for (int s = 0; s < m.rows(); ++s) m(s, cluster) += e.values[static_cast<std::size_t>(s)];
}

Eigen::VectorXi draw_assignment(int p, int k, Rng& rng) {
    // Every cluster gets one variable first, the rest are uniform.
    std::vector<int> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), 0);
    for (int i = p - 1; i > 0; --i) std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(rng.uniform_int(i + 1))]);
    Eigen::VectorXi a(p);
    for (int i = 0; i < p; ++i) a(order[static_cast<std::size_t>(i)]) = i < k ? i : rng.uniform_int(k);
    return a;
}

Eigen::VectorXd draw_loadings(const Eigen::VectorXi& assignment, int k, const SynthConfig& c, Rng& rng) {
    Eigen::VectorXd v(assignment.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v(i) = rng.bernoulli(c.negative_loading_prob) ? -c.loading_magnitude : c.loading_magnitude;
    }
    // Canonical sign: a cluster's loading sum is nonnegative, ties broken by
    // making the first member positive.
    for (int cl = 0; cl < k; ++cl) {
        double sum = 0.0;
        Eigen::Index first = -1;
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            if (assignment(i) != cl) continue;
            sum += v(i);
            if (first < 0) first = i;
        }
        if (sum < 0.0 || (sum == 0.0 && first >= 0 && v(first) < 0.0)) {
            for (Eigen::Index i = 0; i < v.size(); ++i) {
                if (assignment(i) == cl) v(i) = -v(i);
            }
        }
    }
    return v;
}

struct SideDraw {
    Dataset data;
    Eigen::VectorXi assignment;
    Eigen::VectorXd loading, grand_mean;
    std::vector<StatePath> paths;
    Eigen::MatrixXd latent;
};

SideDraw generate_side(const SynthConfig& c, int n_individuals, int p, int k, const std::string& prefix,
                   const EffectDecomposition& effects, const MatchingState& pairing, xlate::Side which, Rng& rng) {
    SideDraw out;
    ChainParams chain = ChainParams::uniform(c.n_states, c.advance_prob);
    std::vector<SampleMeta> meta;
    const int n_healthy = (n_individuals + 1) / 2;
    for (int j = 0; j < n_individuals; ++j) {
        const int len = c.min_length + rng.uniform_int(c.max_length - c.min_length + 1);
        out.paths.push_back(sample_path_prior(len, chain, rng));
        char id[32];
        std::snprintf(id, sizeof id, "%s_ind%02d", prefix.c_str(), j + 1);
        for (int t = 0; t < len; ++t) {
            char sid[48];
            std::snprintf(sid, sizeof sid, "%s_t%02d", id, t + 1);
            meta.push_back({sid, id, t + 1, j < n_healthy ? 0 : 1});
        }
    }
    const auto n = static_cast<Eigen::Index>(meta.size());
    out.latent.resize(n, k);
    Eigen::Index row = 0;
    for (int j = 0; j < n_individuals; ++j) {
        for (int state : out.paths[static_cast<std::size_t>(j)]) {
            const Eigen::VectorXd m =
                latent_mean_for_sample(state, meta[static_cast<std::size_t>(row)].disease, effects, pairing, which);
            for (int cl = 0; cl < k; ++cl) out.latent(row, cl) = m(cl) + rng.normal();
            ++row;
        }
    }
    out.assignment = draw_assignment(p, k, rng);
    out.loading = draw_loadings(out.assignment, k, c, rng);
    out.grand_mean.resize(p);
    for (int i = 0; i < p; ++i) out.grand_mean(i) = rng.normal();
    Eigen::MatrixXd values(n, p);
    for (int i = 0; i < p; ++i) {
        for (Eigen::Index r = 0; r < n; ++r) {
            values(r, i) = out.grand_mean(i) + out.loading(i) * out.latent(r, out.assignment(i));
            if (c.residual_sd > 0.0) values(r, i) += c.residual_sd * rng.normal();
        }
    }
    std::vector<std::string> names;
    for (int i = 0; i < p; ++i) names.push_back(prefix + "_v" + std::to_string(i + 1));
    out.data = make_dataset(std::move(values), std::move(meta), std::move(names));
    return out;
}

nlohmann::json paths_json(const std::vector<StatePath>& paths) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& p : paths) {
        std::vector<int> one_based(p.begin(), p.end());
        for (int& s : one_based) ++s;
        out.push_back(one_based);
    }
    return out;
}

template <typename Vec>
std::vector<typename Vec::Scalar> to_std(const Vec& v) {
    return {v.data(), v.data() + v.size()};
}

nlohmann::json effect_set_json(const EffectSet& set) {
    nlohmann::json time = nlohmann::json::array();
    nlohmann::json inter = nlohmann::json::array();
    for (int k = 0; k < set.n_clusters(); ++k) {
        time.push_back(to_std(Eigen::VectorXd(set.time.col(k))));
        inter.push_back(to_std(Eigen::VectorXd(set.interaction.col(k))));
    }
    return {{"time", time}, {"disease", to_std(set.disease)}, {"interaction", inter}};
}

} // namespace

const char* to_string(EffectKind kind) {
    for (const auto& [k, name] : kKindNames) {
        if (k == kind) return name;
    }
    return "unknown";
}

std::optional<EffectKind> parse_effect_kind(std::string_view name) {
    for (const auto& [k, n] : kKindNames) {
        if (name == n) return k;
    }
    return std::nullopt;
}

void SynthConfig::validate() const {
    auto fail = [](const std::string& m) { throw std::invalid_argument("invalid synth config: " + m); };
    if (n_individuals_x < 1 || n_individuals_y < 1) fail("need at least one individual per dataset");
    if (min_length < 1 || max_length < min_length) fail("series length range must satisfy 1 <= min <= max");
    if (k_x < 1 || k_x > p_x) fail("k_x must be in 1..p_x");
    if (k_y < 1 || k_y > p_y) fail("k_y must be in 1..p_y");
    if (n_states < 1) fail("n_states must be >= 1");
    if (!(advance_prob > 0.0 && advance_prob < 1.0)) fail("advance_prob must be in (0, 1)");
    if (!(residual_sd >= 0.0)) fail("residual_sd must be >= 0");
    if (!(loading_magnitude > 0.0)) fail("loading_magnitude must be positive");
    if (!(negative_loading_prob >= 0.0 && negative_loading_prob <= 1.0)) fail("negative_loading_prob must be in [0, 1]");
    for (std::size_t i = 0; i < planted.size(); ++i) {
        const auto& e = planted[i];
        const std::string where = "planted effect " + std::to_string(i + 1) + " (" + to_string(e.kind) + ")";
        if (uses_x(e.kind) && (e.cluster_x < 0 || e.cluster_x >= k_x)) fail(where + ": X cluster index out of range");
        if (uses_y(e.kind) && (e.cluster_y < 0 || e.cluster_y >= k_y)) fail(where + ": Y cluster index out of range");
        const std::size_t want = is_disease(e.kind) ? 1 : static_cast<std::size_t>(n_states);
        if (e.values.size() != want) fail(where + ": expected " + std::to_string(want) + " values");
        if (!is_disease(e.kind) && e.values[0] != 0.0) fail(where + ": first entry must be 0");
    }
}

SynthConfig SynthConfig::benchmark() {
    SynthConfig c;
    c.planted = {
        {EffectKind::shared_time, 0, 2, {0.0, 0.5, 1.0, 1.5, 2.0}},
        {EffectKind::shared_interaction, 2, 1, {0.0, -0.5, -1.0, -1.5, -2.0}},
        {EffectKind::specific_time_y, -1, 3, {0.0, -0.5, -1.0, -1.5, -2.0}},
    };
    return c;
}

std::pair<StudyPair, GroundTruth> generate(const SynthConfig& config) {
    config.validate();
    GroundTruth truth;
    truth.effects = EffectDecomposition::zeros(config.n_states, config.k_x, config.k_y);
    truth.pairing = MatchingState(config.k_x, config.k_y);
    for (const auto& e : config.planted) {
        if (is_shared(e.kind)) {
            const int partner = truth.pairing.partner_of_x(e.cluster_x);
            if (partner < 0 && truth.pairing.partner_of_y(e.cluster_y) < 0) {
                truth.pairing.link(e.cluster_x, e.cluster_y);
            } else if (partner != e.cluster_y) {
                throw std::invalid_argument("invalid synth config: shared effects imply a non-injective pairing");
            }
            plant(truth.effects.shared, e.cluster_x, e);
        } else if (uses_x(e.kind)) {
            plant(truth.effects.specific_x, e.cluster_x, e);
        } else {
            plant(truth.effects.specific_y, e.cluster_y, e);
        }
    }
    truth.planted = config.planted;
    truth.residual_sd = config.residual_sd;
    truth.loading_magnitude = config.loading_magnitude;

    Rng rx = Rng::stream(config.seed, "synth-x");
    Rng ry = Rng::stream(config.seed, "synth-y");
    auto x = generate_side(config, config.n_individuals_x, config.p_x, config.k_x, "x", truth.effects,
                           truth.pairing, xlate::Side::x, rx);
    auto y = generate_side(config, config.n_individuals_y, config.p_y, config.k_y, "y", truth.effects,
                           truth.pairing, xlate::Side::y, ry);
    truth.assignment_x = x.assignment;
    truth.assignment_y = y.assignment;
    truth.loading_x = x.loading;
    truth.loading_y = y.loading;
    truth.grand_mean_x = x.grand_mean;
    truth.grand_mean_y = y.grand_mean;
    truth.paths_x = std::move(x.paths);
    truth.paths_y = std::move(y.paths);
    truth.latent_x = std::move(x.latent);
    truth.latent_y = std::move(y.latent);
    return {StudyPair{std::move(x.data), std::move(y.data)}, std::move(truth)};
}

std::pair<std::vector<int>, std::vector<int>> split_individuals(const Dataset& data, Rng& rng) {
    std::pair<std::vector<int>, std::vector<int>> halves;
    bool to_first = true;
    for (int level = 0; level < 2; ++level) {
        std::vector<int> group;
        for (std::size_t j = 0; j < data.individuals.size(); ++j) {
            if (data.individuals[j].disease == level) group.push_back(static_cast<int>(j));
        }
        for (int i = static_cast<int>(group.size()) - 1; i > 0; --i) {
            std::swap(group[static_cast<std::size_t>(i)], group[static_cast<std::size_t>(rng.uniform_int(i + 1))]);
        }
        // Alternate across groups so an odd group's extra member lands on
        // the half that is currently smaller.
        for (int j : group) {
            (to_first ? halves.first : halves.second).push_back(j);
            to_first = !to_first;
        }
    }
    std::sort(halves.first.begin(), halves.first.end());
    std::sort(halves.second.begin(), halves.second.end());
    return halves;
}

void write_ground_truth(const GroundTruth& truth, const std::filesystem::path& path) {
    using nlohmann::json;
    auto plus_one = [](const Eigen::VectorXi& a) {
        std::vector<int> out = to_std(a);
        for (int& v : out) ++v;
        return out;
    };
    json pairing = json::array();
    for (const auto& [kx, ky] : truth.pairing.links()) pairing.push_back({{"x_cluster", kx + 1}, {"y_cluster", ky + 1}});
    json planted = json::array();
    for (const auto& e : truth.planted) {
        json one = {{"kind", to_string(e.kind)}, {"values", e.values}};
        if (uses_x(e.kind)) one["x_cluster"] = e.cluster_x + 1;
        if (uses_y(e.kind)) one["y_cluster"] = e.cluster_y + 1;
        planted.push_back(std::move(one));
    }
    json out = {
        {"residual_sd", truth.residual_sd},
        {"loading_magnitude", truth.loading_magnitude},
        {"pairing", pairing},
        {"planted_effects", planted},
        {"x",
         {{"assignment", plus_one(truth.assignment_x)},
          {"loading", to_std(truth.loading_x)},
          {"grand_mean", to_std(truth.grand_mean_x)},
          {"paths", paths_json(truth.paths_x)},
          {"specific_effects", effect_set_json(truth.effects.specific_x)}}},
        {"y",
         {{"assignment", plus_one(truth.assignment_y)},
          {"loading", to_std(truth.loading_y)},
          {"grand_mean", to_std(truth.grand_mean_y)},
          {"paths", paths_json(truth.paths_y)},
          {"specific_effects", effect_set_json(truth.effects.specific_y)}}},
        {"shared_effects_by_x_cluster", effect_set_json(truth.effects.shared)},
    };
    std::ofstream f(path);
    f << out.dump(1) << '\n';
    if (!f) throw std::runtime_error("cannot write " + path.string());
}

} // namespace xlate
