#include "xlate/geweke.hpp"

#include <cmath>
#include <stdexcept>

namespace xlate {

namespace {

// Statistics are computed identically for both simulators.
std::vector<std::pair<std::string, double>> statistics(const ModelState& s, const StudyPair& pair) {
    std::vector<std::pair<std::string, double>> out;
    auto effect_entries = [&](const std::string& prefix, const EffectSet& set) {
        for (int k = 0; k < set.n_clusters(); ++k) {
            const std::string c = std::to_string(k + 1);
            for (int st = 1; st < set.n_states(); ++st) {
                out.emplace_back(prefix + ".time[" + std::to_string(st + 1) + "," + c + "]", set.time(st, k));
                out.emplace_back(prefix + ".interaction[" + std::to_string(st + 1) + "," + c + "]",
                                 set.interaction(st, k));
            }
            out.emplace_back(prefix + ".disease[" + c + "]", set.disease(k));
            out.emplace_back(prefix + ".time_sq[" + c + "]", set.time.col(k).squaredNorm());
        }
    };
    effect_entries("shared", s.effects.shared);
    effect_entries("specific_x", s.effects.specific_x);
    effect_entries("specific_y", s.effects.specific_y);

    auto side = [&](const std::string& tag, const DatasetState& d, const Dataset& data) {
        out.emplace_back(tag + ".residual_var_mean", d.factor.residual_var.mean());
        out.emplace_back(tag + ".log_residual_var_mean", d.factor.residual_var.array().log().mean());
        out.emplace_back(tag + ".loading_sq_mean", d.factor.loading.squaredNorm() / static_cast<double>(d.factor.loading.size()));
        out.emplace_back(tag + ".loading_mean", d.factor.loading.mean());
        out.emplace_back(tag + ".grand_mean_mean", d.factor.grand_mean.mean());
        out.emplace_back(tag + ".cluster1_size", static_cast<double>((d.factor.assignment.array() == 0).count()));
        out.emplace_back(tag + ".latent_mean", d.latent.mean());
        out.emplace_back(tag + ".latent_sq_mean", d.latent.squaredNorm() / static_cast<double>(d.latent.size()));
        for (Eigen::Index st = 0; st < d.chain.advance_prob.size(); ++st) {
            out.emplace_back(tag + ".advance[" + std::to_string(st + 1) + "]", d.chain.advance_prob(st));
        }
        double state_sum = 0.0;
        for (const auto& p : d.paths) {
            for (int v : p) state_sum += v;
        }
        out.emplace_back(tag + ".state_mean", state_sum / static_cast<double>(data.n_samples()));
        out.emplace_back(tag + ".data_sq_mean", data.values.squaredNorm() / static_cast<double>(data.values.size()));
    };
    side("x", s.x, pair.x);
    side("y", s.y, pair.y);
    out.emplace_back("n_links", static_cast<double>(s.matching.n_links()));
    return out;
}

Dataset small_dataset(const std::vector<int>& lengths, int p, const std::string& prefix) {
    std::vector<SampleMeta> meta;
    const int n_healthy = (static_cast<int>(lengths.size()) + 1) / 2;
    for (std::size_t j = 0; j < lengths.size(); ++j) {
        const std::string id = prefix + std::to_string(j + 1);
        for (int t = 0; t < lengths[j]; ++t) {
            meta.push_back({id + "_" + std::to_string(t + 1), id, t + 1, static_cast<int>(j) < n_healthy ? 0 : 1});
        }
    }
    std::vector<std::string> names;
    for (int i = 0; i < p; ++i) names.push_back(prefix + "v" + std::to_string(i + 1));
    const auto n = static_cast<Eigen::Index>(meta.size());
    return make_dataset(Eigen::MatrixXd::Zero(n, p), std::move(meta), std::move(names));
}

} // namespace

double GewekeReport::max_abs_z() const {
    double m = 0.0;
    for (const auto& s : stats) m = std::max(m, std::abs(s.z));
    return m;
}

StudyPair geweke_design() {
    return {small_dataset({3, 4, 3}, 5, "x"), small_dataset({3, 3, 4}, 4, "y")};
}

GibbsConfig geweke_config() {
    GibbsConfig c;
    c.n_burn_in = 0;
    c.n_samples = 0;
    c.n_states = 3;
    c.k_x = 2;
    c.k_y = 2;
    c.factor.residual_shape = 3.0;
    c.factor.residual_rate = 2.0;
    c.factor.mean_var = 1.0;
    c.enforce_sign = false;
    return c;
}

GewekeReport geweke_check(const StudyPair& design, const GibbsConfig& config, int n_rounds, std::uint64_t seed) {
    if (n_rounds < 100) throw std::invalid_argument("insufficient rounds");
    config.validate();

    // Forward draws.
    Rng forward = Rng::stream(seed, "geweke-forward");
    std::vector<std::string> names;
    Eigen::MatrixXd fwd;
    StudyPair pair = design;
    for (int r = 0; r < n_rounds; ++r) {
        const ModelState s = sample_prior_state(design, config, forward);
        resample_data(pair, s, forward);
        const auto st = statistics(s, pair);
        if (r == 0) {
            fwd.resize(n_rounds, static_cast<Eigen::Index>(st.size()));
            for (const auto& [name, v] : st) names.push_back(name);
        }
        for (std::size_t i = 0; i < st.size(); ++i) fwd(r, static_cast<Eigen::Index>(i)) = st[i].second;
    }

    // Successive-conditional chain.
    Rng start = Rng::stream(seed, "geweke-start");
    Rng data_rng = Rng::stream(seed, "geweke-data");
    SweepStreams streams(Rng::derive_seed(seed, "geweke-chain"));
    ModelState state = sample_prior_state(design, config, start);
    pair = design;
    resample_data(pair, state, data_rng);
    Eigen::MatrixXd chain(n_rounds, static_cast<Eigen::Index>(names.size()));
    for (int r = 0; r < n_rounds; ++r) {
        gibbs_sweep(state, pair, config, streams);
        resample_data(pair, state, data_rng);
        const auto st = statistics(state, pair);
        for (std::size_t i = 0; i < st.size(); ++i) chain(r, static_cast<Eigen::Index>(i)) = st[i].second;
    }

    const int n_batches = 50;
    const int batch = n_rounds / n_batches;
    GewekeReport report;
    for (std::size_t i = 0; i < names.size(); ++i) {
        const auto col = static_cast<Eigen::Index>(i);
        const Eigen::VectorXd f = fwd.col(col);
        const Eigen::VectorXd c = chain.col(col).head(static_cast<Eigen::Index>(batch) * n_batches);
        const double fm = f.mean();
        const double fvar = (f.array() - fm).square().sum() / (f.size() - 1.0) / static_cast<double>(f.size());
        Eigen::VectorXd bm(n_batches);
        for (int b = 0; b < n_batches; ++b) bm(b) = c.segment(static_cast<Eigen::Index>(b) * batch, batch).mean();
        const double cm = bm.mean();
        const double cvar = (bm.array() - cm).square().sum() / (n_batches - 1.0) / n_batches;
        const double se = std::sqrt(fvar + cvar);
        report.stats.push_back({names[i], fm, cm, se > 0.0 ? (fm - cm) / se : 0.0});
    }
    return report;
}

} // namespace xlate
