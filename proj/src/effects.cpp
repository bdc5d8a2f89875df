#include "xlate/effects.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "xlate/densities.hpp"

namespace xlate {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

Eigen::VectorXd prior_draw(const Eigen::VectorXd& var, Rng& rng) {
    Eigen::VectorXd out(var.size());
    for (Eigen::Index i = 0; i < var.size(); ++i) out(i) = std::sqrt(var(i)) * rng.normal();
    return out;
}

} // namespace

Eigen::VectorXd EffectLayout::design_row(int state, int disease_level) const {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(dim());
    const int inc = include_disease ? 1 : 0;
    if (state >= 1) a(state - 1) = 1.0;
    if (disease_level == 1) {
        if (include_disease) a(n_states - 1) = 1.0;
        if (state >= 1) a(n_states - 1 + inc + state - 1) = 1.0;
    }
    return a;
}

Eigen::VectorXd EffectLayout::pack(const EffectSet& set, int cluster) const {
    Eigen::VectorXd theta(dim());
    const int inc = include_disease ? 1 : 0;
    for (int s = 1; s < n_states; ++s) {
        theta(s - 1) = set.time(s, cluster);
        theta(n_states - 1 + inc + s - 1) = set.interaction(s, cluster);
    }
    if (include_disease) theta(n_states - 1) = set.disease(cluster);
    return theta;
}

void EffectLayout::unpack(const Eigen::VectorXd& theta, EffectSet& set, int cluster) const {
    const int inc = include_disease ? 1 : 0;
    set.time(0, cluster) = 0.0;
    set.interaction(0, cluster) = 0.0;
    for (int s = 1; s < n_states; ++s) {
        set.time(s, cluster) = theta(s - 1);
        set.interaction(s, cluster) = theta(n_states - 1 + inc + s - 1);
    }
    set.disease(cluster) = include_disease ? theta(n_states - 1) : 0.0;
}

std::vector<CellStats> cell_stats(const Eigen::MatrixXd& latent, std::span<const int> row_state,
                                  std::span<const int> row_disease, int n_states) {
    if (static_cast<Eigen::Index>(row_state.size()) != latent.rows() || row_disease.size() != row_state.size()) {
        throw std::invalid_argument("cell_stats: row metadata does not match latent rows");
    }
    std::vector<CellStats> out(static_cast<std::size_t>(latent.cols()), CellStats(n_states));
    for (Eigen::Index j = 0; j < latent.rows(); ++j) {
        for (Eigen::Index k = 0; k < latent.cols(); ++k) {
            out[static_cast<std::size_t>(k)].add(row_state[static_cast<std::size_t>(j)],
                                                 row_disease[static_cast<std::size_t>(j)], latent(j, k));
        }
    }
    return out;
}

GaussianBlock::GaussianBlock(Eigen::VectorXd prior_var)
    : prior_var_(std::move(prior_var)),
      ata_(Eigen::MatrixXd::Zero(prior_var_.size(), prior_var_.size())),
      atz_(Eigen::VectorXd::Zero(prior_var_.size())) {}

void GaussianBlock::add(const CellStats& stats, const EffectLayout& layout, std::span<const int> offsets) {
    const int D = layout.dim();
    for (int s = 0; s < layout.n_states; ++s) {
        for (int b = 0; b < 2; ++b) {
            const double c = stats.count(s, b);
            if (c == 0.0 || D == 0) continue;
            const Eigen::VectorXd a = layout.design_row(s, b);
            const Eigen::MatrixXd outer = c * a * a.transpose();
            for (int o1 : offsets) {
                atz_.segment(o1, D) += stats.sum(s, b) * a;
                for (int o2 : offsets) ata_.block(o1, o2, D, D) += outer;
            }
        }
    }
    ztz_ += stats.sum_sq;
    n_ += stats.total();
}

void GaussianBlock::add_raw(const Eigen::MatrixXd& ata, const Eigen::VectorXd& atz, double ztz, double n) {
    ata_ += ata;
    atz_ += atz;
    ztz_ += ztz;
    n_ += n;
}

Eigen::MatrixXd GaussianBlock::precision() const {
    Eigen::MatrixXd p = ata_;
    p.diagonal() += prior_var_.cwiseInverse();
    return p;
}

Eigen::VectorXd GaussianBlock::posterior_mean() const {
    if (dim() == 0) return {};
    return precision().llt().solve(atz_);
}

Eigen::MatrixXd GaussianBlock::posterior_cov() const {
    if (dim() == 0) return {};
    return precision().llt().solve(Eigen::MatrixXd::Identity(dim(), dim()));
}

Eigen::VectorXd GaussianBlock::sample(Rng& rng) const {
    if (dim() == 0) return {};
    const Eigen::LLT<Eigen::MatrixXd> llt(precision());
    Eigen::VectorXd eps(dim());
    for (Eigen::Index i = 0; i < eps.size(); ++i) eps(i) = rng.normal();
    return llt.solve(atz_) + llt.matrixU().solve(eps);
}

double GaussianBlock::log_marginal() const {
    double lm = -0.5 * (n_ * kLog2Pi + ztz_);
    if (dim() == 0) return lm;
    const Eigen::LLT<Eigen::MatrixXd> llt(precision());
    const double log_det_p = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    const double explained = atz_.dot(llt.solve(atz_));
    return lm - 0.5 * (prior_var_.array().log().sum() + log_det_p - explained);
}

StateMeans state_means(const EffectDecomposition& effects, const MatchingState& matching, Side side) {
    const EffectSet& specific = side == Side::x ? effects.specific_x : effects.specific_y;
    const int S = specific.n_states();
    const int K = specific.n_clusters();
    StateMeans out{Eigen::MatrixXd(S, K), Eigen::MatrixXd(S, K)};
    for (int k = 0; k < K; ++k) {
        const int shared_col = side == Side::x ? (matching.partner_of_x(k) >= 0 ? k : -1) : matching.partner_of_y(k);
        for (int b = 0; b < 2; ++b) {
            for (int s = 0; s < S; ++s) {
                double m = specific.mean(s, b, k);
                if (shared_col >= 0) m += effects.shared.mean(s, b, shared_col);
                out[static_cast<std::size_t>(b)](s, k) = m;
            }
        }
    }
    return out;
}

Eigen::VectorXd latent_mean_for_sample(int state, int disease_level, const EffectDecomposition& effects,
                                       const MatchingState& matching, Side side) {
    return state_means(effects, matching, side)[static_cast<std::size_t>(disease_level)].row(state).transpose();
}

Eigen::MatrixXd latent_mean_matrix(const StateMeans& means, std::span<const int> row_state,
                                   std::span<const int> row_disease) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(row_state.size()), means[0].cols());
    for (std::size_t j = 0; j < row_state.size(); ++j) {
        out.row(static_cast<Eigen::Index>(j)) = means[static_cast<std::size_t>(row_disease[j])].row(row_state[j]);
    }
    return out;
}

double specific_log_marginal(const CellStats& stats, const EffectLayout& layout, const EffectPriors& priors) {
    GaussianBlock block(Eigen::VectorXd::Constant(layout.dim(), priors.specific_var()));
    const int offsets[] = {0};
    block.add(stats, layout, offsets);
    return block.log_marginal();
}

void resample_x_cluster_effects(EffectDecomposition& effects, int kx, const MatchingState& matching,
                                std::span<const CellStats> x_stats, std::span<const CellStats> y_stats,
                                const EffectLayout& layout, const EffectPriors& priors, Rng& rng) {
    const int D = layout.dim();
    if (D == 0) return;
    const int ky = matching.partner_of_x(kx);
    if (ky >= 0) {
        Eigen::VectorXd var(3 * D);
        var << Eigen::VectorXd::Constant(D, priors.shared_var), Eigen::VectorXd::Constant(2 * D, priors.specific_var());
        GaussianBlock block(std::move(var));
        const int x_off[] = {0, D};
        const int y_off[] = {0, 2 * D};
        block.add(x_stats[static_cast<std::size_t>(kx)], layout, x_off);
        block.add(y_stats[static_cast<std::size_t>(ky)], layout, y_off);
        const Eigen::VectorXd theta = block.sample(rng);
        layout.unpack(theta.segment(0, D), effects.shared, kx);
        layout.unpack(theta.segment(D, D), effects.specific_x, kx);
        layout.unpack(theta.segment(2 * D, D), effects.specific_y, ky);
    } else {
        GaussianBlock block(Eigen::VectorXd::Constant(D, priors.specific_var()));
        const int off[] = {0};
        block.add(x_stats[static_cast<std::size_t>(kx)], layout, off);
        layout.unpack(block.sample(rng), effects.specific_x, kx);
        layout.unpack(prior_draw(Eigen::VectorXd::Constant(D, priors.shared_var), rng), effects.shared, kx);
    }
}

void resample_unmatched_y_effects(EffectDecomposition& effects, int ky, std::span<const CellStats> y_stats,
                                  const EffectLayout& layout, const EffectPriors& priors, Rng& rng) {
    const int D = layout.dim();
    if (D == 0) return;
    GaussianBlock block(Eigen::VectorXd::Constant(D, priors.specific_var()));
    const int off[] = {0};
    block.add(y_stats[static_cast<std::size_t>(ky)], layout, off);
    layout.unpack(block.sample(rng), effects.specific_y, ky);
}

void sample_effects(EffectDecomposition& effects, const MatchingState& matching,
                    std::span<const CellStats> x_stats, std::span<const CellStats> y_stats,
                    const EffectLayout& layout, const EffectPriors& priors, Rng& rng) {
    for (int kx = 0; kx < matching.n_x(); ++kx) {
        resample_x_cluster_effects(effects, kx, matching, x_stats, y_stats, layout, priors, rng);
    }
    for (int ky = 0; ky < matching.n_y(); ++ky) {
        if (matching.partner_of_y(ky) < 0) resample_unmatched_y_effects(effects, ky, y_stats, layout, priors, rng);
    }
}

double effects_log_prior(const EffectDecomposition& effects, const EffectLayout& layout,
                         const EffectPriors& priors) {
    auto set_prior = [&](const EffectSet& set, double var) {
        double lp = 0.0;
        for (int k = 0; k < set.n_clusters(); ++k) {
            const Eigen::VectorXd theta = layout.pack(set, k);
            for (Eigen::Index i = 0; i < theta.size(); ++i) lp += log_normal_pdf(theta(i), 0.0, var);
        }
        return lp;
    };
    return set_prior(effects.shared, priors.shared_var) + set_prior(effects.specific_x, priors.specific_var()) +
           set_prior(effects.specific_y, priors.specific_var());
}

void negate_cluster(EffectSet& set, int cluster) {
    set.time.col(cluster) = -set.time.col(cluster);
    set.disease(cluster) = -set.disease(cluster);
    set.interaction.col(cluster) = -set.interaction.col(cluster);
}

const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::significant_pos: return "significant_pos";
    case Verdict::significant_neg: return "significant_neg";
    case Verdict::null: return "null";
    }
    return "null";
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("quantile of empty sample");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * std::clamp(q, 0.0, 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

EffectVerdict effect_significance(std::span<const double> trace, double level, double threshold) {
    if (trace.empty()) throw std::invalid_argument("empty trace");
    std::vector<double> v(trace.begin(), trace.end());
    EffectVerdict out;
    const double tail = 0.5 * (1.0 - level);
    out.lower = quantile(v, tail);
    out.upper = quantile(v, 1.0 - tail);
    double sum = 0.0;
    std::size_t found = 0;
    for (double x : v) {
        sum += x;
        found += std::abs(x) > threshold;
    }
    out.mean = sum / static_cast<double>(v.size());
    out.found_fraction = static_cast<double>(found) / static_cast<double>(v.size());
    if (out.lower > 0.0) {
        out.verdict = Verdict::significant_pos;
    } else if (out.upper < 0.0) {
        out.verdict = Verdict::significant_neg;
    }
    return out;
}

} // namespace xlate
