#include "xlate/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "xlate/matching.hpp"

namespace xlate {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

[[noreturn]] void bad_config(const std::string& what) {
    throw std::invalid_argument("invalid sampler config: " + what);
}

Eigen::MatrixXd individual_rows(const Eigen::MatrixXd& latent, const Individual& ind) {
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(ind.rows.size()), latent.cols());
    for (std::size_t t = 0; t < ind.rows.size(); ++t) rows.row(static_cast<Eigen::Index>(t)) = latent.row(ind.rows[t]);
    return rows;
}

void latent_step(DatasetState& ds, const Dataset& data, const StateMeans& means, Rng& rng) {
    const auto states = row_states(data, ds.paths);
    const auto disease = row_disease(data);
    const Eigen::MatrixXd m = latent_mean_matrix(means, states, disease);
    ds.latent = sample_latent_factors(data.values, ds.factor, m, rng);
}

void factor_steps(DatasetState& ds, const Dataset& data, const GibbsConfig& config, SweepStreams& rng) {
    for (Eigen::Index i = 0; i < ds.factor.n_variables(); ++i) {
        ds.factor.assignment(i) = sample_assignment(i, data.values, ds.factor, ds.latent, config.factor, rng.assignment);
        ds.factor.loading(i) = sample_loading(i, data.values, ds.factor, ds.latent, config.factor, rng.assignment);
    }
    if (config.fault == Fault::residual_shape) {
        for (Eigen::Index i = 0; i < ds.factor.n_variables(); ++i) {
            auto c = residual_conditional(i, data.values, ds.factor, ds.latent, config.factor);
            c.shape += 0.5 * static_cast<double>(data.n_samples());
            ds.factor.residual_var(i) = rng.residual.inverse_gamma(c.shape, c.rate);
        }
    } else {
        ds.factor.residual_var = sample_residual_variances(data.values, ds.factor, ds.latent, config.factor, rng.residual);
    }
    ds.factor.grand_mean = sample_grand_mean(data.values, ds.factor, ds.latent, config.factor, rng.grand_mean);
}

void path_step(DatasetState& ds, const Dataset& data, const StateMeans& means, const GibbsConfig& config, Rng& rng) {
    for (std::size_t j = 0; j < data.individuals.size(); ++j) {
        const auto& ind = data.individuals[j];
        const Eigen::MatrixXd rows = individual_rows(ds.latent, ind);
        const auto& m = means[static_cast<std::size_t>(ind.disease)];
        if (config.path_kernel == PathKernel::ffbs) {
            ds.paths[j] = sample_path_ffbs(ds.chain, rows, m, rng);
        } else {
            sweep_path_single_site(ds.paths[j], ds.chain, rows, m, rng);
        }
    }
}

TransitionCounts count_all(const std::vector<StatePath>& paths, int n_states) {
    TransitionCounts c(n_states);
    for (const auto& p : paths) c.add(p);
    return c;
}

double latent_log_prior(const DatasetState& ds, const Dataset& data, const StateMeans& means) {
    const auto states = row_states(data, ds.paths);
    const auto disease = row_disease(data);
    const Eigen::MatrixXd m = latent_mean_matrix(means, states, disease);
    return -0.5 * (static_cast<double>(ds.latent.size()) * kLog2Pi + (ds.latent - m).squaredNorm());
}

FactorParams prior_factor(Eigen::Index p, int k, const FactorPriors& priors, Rng& rng) {
    FactorParams f;
    f.n_clusters = k;
    f.grand_mean.resize(p);
    f.assignment.resize(p);
    f.loading.resize(p);
    f.residual_var.resize(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        f.grand_mean(i) = rng.normal(0.0, std::sqrt(priors.mean_var));
        f.assignment(i) = rng.uniform_int(k);
        f.loading(i) = rng.normal(0.0, std::sqrt(priors.loading_var));
        f.residual_var(i) = rng.inverse_gamma(priors.residual_shape, priors.residual_rate);
    }
    return f;
}

ChainParams prior_chain(int n_states, const TransitionPrior& prior, Rng& rng) {
    ChainParams c = ChainParams::uniform(n_states);
    for (Eigen::Index s = 0; s < c.advance_prob.size(); ++s) {
        c.advance_prob(s) = std::clamp(rng.beta(prior.advance, prior.stay), 1e-12, 1.0 - 1e-12);
    }
    return c;
}

void prior_effect_set(EffectSet& set, const EffectLayout& layout, double var, Rng& rng) {
    for (int k = 0; k < set.n_clusters(); ++k) {
        Eigen::VectorXd theta(layout.dim());
        for (Eigen::Index i = 0; i < theta.size(); ++i) theta(i) = rng.normal(0.0, std::sqrt(var));
        layout.unpack(theta, set, k);
    }
}

} // namespace

void GibbsConfig::validate() const {
    if (n_burn_in < 0) bad_config("n_burn_in must be >= 0");
    if (n_samples < 0) bad_config("n_samples must be >= 0");
    if (thinning < 1) bad_config("thinning must be >= 1");
    if (n_states < 1) bad_config("n_states must be >= 1");
    if (k_x < 1 || k_y < 1) bad_config("k_x and k_y must be >= 1");
    if (!(factor.loading_var > 0) || !(factor.mean_var > 0)) bad_config("prior variances must be positive");
    if (!(factor.residual_shape > 0) || !(factor.residual_rate > 0)) bad_config("residual prior must be positive");
    if (!(transition.advance > 0) || !(transition.stay > 0)) bad_config("transition prior must be positive");
    if (!(effects.shared_var > 0) || !(effects.specific_ratio > 0)) bad_config("effect prior must be positive");
}

std::vector<int> row_states(const Dataset& data, const std::vector<StatePath>& paths) {
    if (paths.size() != data.individuals.size()) throw std::invalid_argument("row_states: one path per individual");
    std::vector<int> out(static_cast<std::size_t>(data.n_samples()), 0);
    for (std::size_t j = 0; j < paths.size(); ++j) {
        const auto& rows = data.individuals[j].rows;
        if (rows.size() != paths[j].size()) throw std::invalid_argument("row_states: path length mismatch");
        for (std::size_t t = 0; t < rows.size(); ++t) out[static_cast<std::size_t>(rows[t])] = paths[j][t];
    }
    return out;
}

Eigen::VectorXi correlation_kmeans(const Eigen::MatrixXd& values, int k, Rng& rng, int max_iter) {
    const Eigen::Index p = values.cols();
    if (k < 1 || k > p) throw std::invalid_argument("correlation_kmeans: need 1 <= k <= p");
    Eigen::MatrixXd unit = values.rowwise() - values.colwise().mean();
    for (Eigen::Index i = 0; i < p; ++i) {
        const double norm = unit.col(i).norm();
        if (norm > 0) unit.col(i) /= norm;
    }
    // Farthest-point seeding in |correlation|.
    Eigen::MatrixXd centers(values.rows(), k);
    centers.col(0) = unit.col(rng.uniform_int(static_cast<int>(p)));
    Eigen::VectorXd best = (unit.transpose() * centers.col(0)).cwiseAbs();
    for (int c = 1; c < k; ++c) {
        Eigen::Index far = 0;
        best.minCoeff(&far);
        centers.col(c) = unit.col(far);
        best = best.cwiseMax((unit.transpose() * centers.col(c)).cwiseAbs());
    }
    Eigen::VectorXi assign = Eigen::VectorXi::Constant(p, -1);
    for (int iter = 0; iter < max_iter; ++iter) {
        const Eigen::MatrixXd corr = unit.transpose() * centers; // p x k
        bool changed = false;
        for (Eigen::Index i = 0; i < p; ++i) {
            Eigen::Index c = 0;
            corr.row(i).cwiseAbs().maxCoeff(&c);
            if (assign(i) != c) {
                assign(i) = static_cast<int>(c);
                changed = true;
            }
        }
        if (!changed) break;
        for (int c = 0; c < k; ++c) {
            Eigen::VectorXd acc = Eigen::VectorXd::Zero(values.rows());
            for (Eigen::Index i = 0; i < p; ++i) {
                if (assign(i) == c) acc += (corr(i, c) < 0 ? -1.0 : 1.0) * unit.col(i);
            }
            const double norm = acc.norm();
            if (norm > 0) centers.col(c) = acc / norm;
        }
    }
    return assign;
}

ModelState initialize(const StudyPair& pair, const GibbsConfig& config) {
    config.validate();
    auto init_side = [&](const Dataset& data, int k, std::string_view stream) {
        if (k > data.n_variables()) bad_config("cluster count exceeds variable count");
        Rng rng = Rng::stream(config.seed, stream);
        DatasetState ds;
        const Eigen::Index p = data.n_variables();
        ds.factor.n_clusters = k;
        ds.factor.assignment = correlation_kmeans(data.values, k, rng);
        ds.factor.loading = Eigen::VectorXd::Ones(p);
        ds.factor.residual_var = Eigen::VectorXd::Ones(p);
        ds.factor.grand_mean = data.values.colwise().mean().transpose();
        ds.latent = Eigen::MatrixXd::Zero(data.n_samples(), k);
        ds.chain = ChainParams::uniform(config.n_states);
        for (const auto& ind : data.individuals) {
            ds.paths.push_back(stretched_path(static_cast<int>(ind.rows.size()), config.n_states));
        }
        return ds;
    };
    ModelState s;
    s.x = init_side(pair.x, config.k_x, "init-x");
    s.y = init_side(pair.y, config.k_y, "init-y");
    s.effects = EffectDecomposition::zeros(config.n_states, config.k_x, config.k_y);
    s.matching = MatchingState(config.k_x, config.k_y);
    return s;
}

SweepStreams::SweepStreams(std::uint64_t seed)
    : latent(Rng::stream(seed, "latent")),
      assignment(Rng::stream(seed, "assignment")),
      residual(Rng::stream(seed, "residual")),
      grand_mean(Rng::stream(seed, "grand-mean")),
      paths(Rng::stream(seed, "paths")),
      chain(Rng::stream(seed, "chain")),
      effects(Rng::stream(seed, "effects")),
      matching(Rng::stream(seed, "matching")) {}

void gibbs_sweep(ModelState& state, const StudyPair& pair, const GibbsConfig& config, SweepStreams& rng) {
    // (1) latent factors
    {
        const StateMeans mx = state_means(state.effects, state.matching, Side::x);
        const StateMeans my = state_means(state.effects, state.matching, Side::y);
        latent_step(state.x, pair.x, mx, rng.latent);
        latent_step(state.y, pair.y, my, rng.latent);
    }
    // (2)-(4) assignments with loadings, residual variances, grand means
    factor_steps(state.x, pair.x, config, rng);
    factor_steps(state.y, pair.y, config, rng);
    // (5) state paths
    {
        const StateMeans mx = state_means(state.effects, state.matching, Side::x);
        const StateMeans my = state_means(state.effects, state.matching, Side::y);
        path_step(state.x, pair.x, mx, config, rng.paths);
        path_step(state.y, pair.y, my, config, rng.paths);
    }
    // (6) transition parameters
    {
        const auto cx = count_all(state.x.paths, config.n_states);
        const auto cy = count_all(state.y.paths, config.n_states);
        if (config.shared_transitions) {
            TransitionCounts pooled = cx;
            pooled += cy;
            state.x.chain = sample_transition_params(pooled, config.transition, rng.chain);
            state.y.chain = state.x.chain;
        } else {
            state.x.chain = sample_transition_params(cx, config.transition, rng.chain);
            state.y.chain = sample_transition_params(cy, config.transition, rng.chain);
        }
    }
    // (7) effects, (8) matching moves on the same sufficient statistics
    const auto layout = config.layout();
    const auto x_stats = cell_stats(state.x.latent, row_states(pair.x, state.x.paths), row_disease(pair.x), config.n_states);
    const auto y_stats = cell_stats(state.y.latent, row_states(pair.y, state.y.paths), row_disease(pair.y), config.n_states);
    sample_effects(state.effects, state.matching, x_stats, y_stats, layout, config.effects, rng.effects);
    matching_sweep(state.matching, x_stats, y_stats, layout, config.effects, state.effects, rng.matching);
    // (9) sign convention
    if (config.enforce_sign) enforce_sign_convention(state);
}

void enforce_sign_convention(ModelState& state) {
    const Eigen::VectorXd sx = state.x.factor.loading_sums();
    const Eigen::VectorXd sy = state.y.factor.loading_sums();
    for (int kx = 0; kx < state.matching.n_x(); ++kx) {
        const int ky = state.matching.partner_of_x(kx);
        const double total = sx(kx) + (ky >= 0 ? sy(ky) : 0.0);
        if (total >= 0.0) continue;
        flip_cluster(state.x.factor, state.x.latent, kx);
        negate_cluster(state.effects.specific_x, kx);
        negate_cluster(state.effects.shared, kx);
        if (ky >= 0) {
            flip_cluster(state.y.factor, state.y.latent, ky);
            negate_cluster(state.effects.specific_y, ky);
        }
    }
    for (int ky = 0; ky < state.matching.n_y(); ++ky) {
        if (state.matching.partner_of_y(ky) >= 0 || sy(ky) >= 0.0) continue;
        flip_cluster(state.y.factor, state.y.latent, ky);
        negate_cluster(state.effects.specific_y, ky);
    }
}

double log_joint(const ModelState& state, const StudyPair& pair, const GibbsConfig& config) {
    const StateMeans mx = state_means(state.effects, state.matching, Side::x);
    const StateMeans my = state_means(state.effects, state.matching, Side::y);
    double lj = 0.0;
    auto side = [&](const DatasetState& ds, const Dataset& data, const StateMeans& means) {
        double s = factor_log_prior(ds.factor, config.factor) + factor_log_likelihood(data.values, ds.factor, ds.latent) +
                   latent_log_prior(ds, data, means);
        for (const auto& p : ds.paths) s += path_log_prior(p, ds.chain);
        return s;
    };
    lj += side(state.x, pair.x, mx);
    lj += side(state.y, pair.y, my);
    lj += log_transition_prior(state.x.chain, config.transition);
    if (!config.shared_transitions) lj += log_transition_prior(state.y.chain, config.transition);
    lj += effects_log_prior(state.effects, config.layout(), config.effects);
    lj -= std::log(count_matchings(state.matching.n_x(), state.matching.n_y()));
    return lj;
}

ModelState sample_prior_state(const StudyPair& design, const GibbsConfig& config, Rng& rng) {
    ModelState s;
    const auto layout = config.layout();
    s.x.factor = prior_factor(design.x.n_variables(), config.k_x, config.factor, rng);
    s.y.factor = prior_factor(design.y.n_variables(), config.k_y, config.factor, rng);
    s.x.chain = prior_chain(config.n_states, config.transition, rng);
    s.y.chain = config.shared_transitions ? s.x.chain : prior_chain(config.n_states, config.transition, rng);
    for (const auto& ind : design.x.individuals) {
        s.x.paths.push_back(sample_path_prior(static_cast<int>(ind.rows.size()), s.x.chain, rng));
    }
    for (const auto& ind : design.y.individuals) {
        s.y.paths.push_back(sample_path_prior(static_cast<int>(ind.rows.size()), s.y.chain, rng));
    }
    s.matching = sample_matching_prior(config.k_x, config.k_y, rng);
    s.effects = EffectDecomposition::zeros(config.n_states, config.k_x, config.k_y);
    prior_effect_set(s.effects.shared, layout, config.effects.shared_var, rng);
    prior_effect_set(s.effects.specific_x, layout, config.effects.specific_var(), rng);
    prior_effect_set(s.effects.specific_y, layout, config.effects.specific_var(), rng);

    auto draw_latent = [&](DatasetState& ds, const Dataset& data, Side side) {
        const StateMeans means = state_means(s.effects, s.matching, side);
        const Eigen::MatrixXd m = latent_mean_matrix(means, row_states(data, ds.paths), row_disease(data));
        ds.latent = m;
        for (Eigen::Index j = 0; j < m.rows(); ++j) {
            for (Eigen::Index k = 0; k < m.cols(); ++k) ds.latent(j, k) += rng.normal();
        }
    };
    draw_latent(s.x, design.x, Side::x);
    draw_latent(s.y, design.y, Side::y);
    return s;
}

void resample_data(StudyPair& pair, const ModelState& state, Rng& rng) {
    auto side = [&](Dataset& data, const DatasetState& ds) {
        for (Eigen::Index i = 0; i < data.n_variables(); ++i) {
            const double sd = std::sqrt(ds.factor.residual_var(i));
            const auto k = ds.factor.assignment(i);
            for (Eigen::Index j = 0; j < data.n_samples(); ++j) {
                data.values(j, i) = ds.factor.grand_mean(i) + ds.factor.loading(i) * ds.latent(j, k) + sd * rng.normal();
            }
        }
    };
    side(pair.x, state.x);
    side(pair.y, state.y);
}

} // namespace xlate
