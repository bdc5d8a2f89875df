#include "xlate/matching.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace xlate {

namespace {

void shuffle(std::vector<int>& v, Rng& rng) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
        std::swap(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(rng.uniform_int(i + 1))]);
    }
}

double log_count_with_links(int n_x, int n_y, int m) {
    // C(n_x, m) C(n_y, m) m!
    return std::lgamma(n_x + 1.0) - std::lgamma(n_x - m + 1.0) + std::lgamma(n_y + 1.0) -
           std::lgamma(n_y - m + 1.0) - std::lgamma(m + 1.0);
}

} // namespace

double pair_marginal_loglik(const CellStats& x_stats, const CellStats& y_stats, bool linked,
                            const EffectLayout& layout, const EffectPriors& priors) {
    const int D = layout.dim();
    if (!linked) {
        return specific_log_marginal(x_stats, layout, priors) + specific_log_marginal(y_stats, layout, priors);
    }
    Eigen::VectorXd var(3 * D);
    var << Eigen::VectorXd::Constant(D, priors.shared_var), Eigen::VectorXd::Constant(2 * D, priors.specific_var());
    GaussianBlock block(std::move(var));
    const int x_off[] = {0, D};
    const int y_off[] = {0, 2 * D};
    block.add(x_stats, layout, x_off);
    block.add(y_stats, layout, y_off);
    return block.log_marginal();
}

MoveOutcome propose_link(MatchingState& matching, int kx, int ky, std::span<const CellStats> x_stats,
                         std::span<const CellStats> y_stats, const EffectLayout& layout,
                         const EffectPriors& priors, EffectDecomposition& effects, Rng& rng) {
    if (matching.partner_of_x(kx) >= 0 || matching.partner_of_y(ky) >= 0) {
        throw std::logic_error("propose_link: cluster already matched");
    }
    const auto& xs = x_stats[static_cast<std::size_t>(kx)];
    const auto& ys = y_stats[static_cast<std::size_t>(ky)];
    const double delta = pair_marginal_loglik(xs, ys, true, layout, priors) -
                         pair_marginal_loglik(xs, ys, false, layout, priors);
    MoveOutcome out;
    out.log_acceptance = delta + std::log(static_cast<double>(matching.n_unmatched_y()));
    out.accepted = out.log_acceptance >= 0.0 || std::log(rng.uniform()) < out.log_acceptance;
    if (out.accepted) {
        matching.link(kx, ky);
        resample_x_cluster_effects(effects, kx, matching, x_stats, y_stats, layout, priors, rng);
    }
    return out;
}

MoveOutcome propose_break(MatchingState& matching, int kx, std::span<const CellStats> x_stats,
                          std::span<const CellStats> y_stats, const EffectLayout& layout,
                          const EffectPriors& priors, EffectDecomposition& effects, Rng& rng) {
    const int ky = matching.partner_of_x(kx);
    if (ky < 0) throw std::logic_error("propose_break: cluster has no link");
    const auto& xs = x_stats[static_cast<std::size_t>(kx)];
    const auto& ys = y_stats[static_cast<std::size_t>(ky)];
    const double delta = pair_marginal_loglik(xs, ys, true, layout, priors) -
                         pair_marginal_loglik(xs, ys, false, layout, priors);
    MoveOutcome out;
    out.log_acceptance = -delta - std::log(static_cast<double>(matching.n_unmatched_y() + 1));
    out.accepted = out.log_acceptance >= 0.0 || std::log(rng.uniform()) < out.log_acceptance;
    if (out.accepted) {
        matching.unlink(kx);
        resample_x_cluster_effects(effects, kx, matching, x_stats, y_stats, layout, priors, rng);
        resample_unmatched_y_effects(effects, ky, y_stats, layout, priors, rng);
    }
    return out;
}

int matching_sweep(MatchingState& matching, std::span<const CellStats> x_stats,
                   std::span<const CellStats> y_stats, const EffectLayout& layout, const EffectPriors& priors,
                   EffectDecomposition& effects, Rng& rng) {
    std::vector<int> order(static_cast<std::size_t>(matching.n_x()));
    std::iota(order.begin(), order.end(), 0);
    shuffle(order, rng);
    int accepted = 0;
    for (int kx : order) {
        if (matching.partner_of_x(kx) >= 0) {
            accepted += propose_break(matching, kx, x_stats, y_stats, layout, priors, effects, rng).accepted;
            continue;
        }
        std::vector<int> free_y;
        for (int ky = 0; ky < matching.n_y(); ++ky) {
            if (matching.partner_of_y(ky) < 0) free_y.push_back(ky);
        }
        if (free_y.empty()) continue;
        const int ky = free_y[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(free_y.size())))];
        accepted += propose_link(matching, kx, ky, x_stats, y_stats, layout, priors, effects, rng).accepted;
    }
    return accepted;
}

double count_matchings(int n_x, int n_y) {
    double total = 0.0;
    for (int m = 0; m <= std::min(n_x, n_y); ++m) total += std::exp(log_count_with_links(n_x, n_y, m));
    return total;
}

MatchingState sample_matching_prior(int n_x, int n_y, Rng& rng) {
    std::vector<double> logw;
    for (int m = 0; m <= std::min(n_x, n_y); ++m) logw.push_back(log_count_with_links(n_x, n_y, m));
    const int m = rng.categorical_log(logw);
    std::vector<int> xs(static_cast<std::size_t>(n_x));
    std::vector<int> ys(static_cast<std::size_t>(n_y));
    std::iota(xs.begin(), xs.end(), 0);
    std::iota(ys.begin(), ys.end(), 0);
    shuffle(xs, rng);
    shuffle(ys, rng);
    MatchingState out(n_x, n_y);
    for (int i = 0; i < m; ++i) out.link(xs[static_cast<std::size_t>(i)], ys[static_cast<std::size_t>(i)]);
    return out;
}

PairingTable pairing_posterior(std::span<const MatchingState> trace) {
    if (trace.empty()) throw std::invalid_argument("pairing_posterior: empty trace");
    const int nx = trace.front().n_x();
    const int ny = trace.front().n_y();
    PairingTable t{Eigen::MatrixXd::Zero(nx, ny), Eigen::VectorXd::Zero(nx), Eigen::VectorXd::Zero(ny)};
    for (const auto& m : trace) {
        for (int kx = 0; kx < nx; ++kx) {
            const int ky = m.partner_of_x(kx);
            if (ky >= 0) {
                t.link_freq(kx, ky) += 1.0;
            } else {
                t.unmatched_x(kx) += 1.0;
            }
        }
        for (int ky = 0; ky < ny; ++ky) t.unmatched_y(ky) += m.partner_of_y(ky) < 0;
    }
    const double n = static_cast<double>(trace.size());
    t.link_freq /= n;
    t.unmatched_x /= n;
    t.unmatched_y /= n;
    return t;
}

} // namespace xlate
