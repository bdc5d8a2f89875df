#include "xlate/hmm.hpp"

#include <cmath>
#include <limits>

#include "xlate/densities.hpp"

namespace xlate {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

void check_shapes(const ChainParams& chain, const Eigen::MatrixXd& latent_rows, const Eigen::MatrixXd& state_means) {
    if (state_means.rows() != chain.n_states) {
        throw std::invalid_argument("state_means must have one row per state");
    }
    if (latent_rows.cols() != state_means.cols()) {
        throw std::invalid_argument("latent rows and state means disagree on factor count");
    }
}

} // namespace

double ChainParams::log_transition(int prev, int next) const {
    if (prev < 0 || prev >= n_states) return kNegInf;
    if (prev == n_states - 1) return next == prev ? 0.0 : kNegInf;
    const double a = advance_prob(prev);
    if (next == prev) return std::log1p(-a);
    if (next == prev + 1) return std::log(a);
    return kNegInf;
}

void TransitionCounts::add(const StatePath& path) {
    for (std::size_t t = 1; t < path.size(); ++t) {
        const int from = path[t - 1];
        if (from >= advances.size()) continue; // absorbing
        if (path[t] == from + 1) {
            advances(from) += 1.0;
        } else {
            stays(from) += 1.0;
        }
    }
}

TransitionCounts& TransitionCounts::operator+=(const TransitionCounts& other) {
    advances += other.advances;
    stays += other.stays;
    return *this;
}

bool is_valid_path(const StatePath& path, int n_states) {
    if (path.empty()) return true;
    if (path.front() != 0) return false;
    for (std::size_t t = 0; t < path.size(); ++t) {
        if (path[t] < 0 || path[t] >= n_states) return false;
        if (t > 0) {
            const int step = path[t] - path[t - 1];
            if (step != 0 && step != 1) return false;
        }
    }
    return true;
}

std::vector<std::pair<int, double>> site_log_weights(const StatePath& path, int t, const ChainParams& chain,
                                                     const Eigen::MatrixXd& latent_rows,
                                                     const Eigen::MatrixXd& state_means) {
    check_shapes(chain, latent_rows, state_means);
    const int T = static_cast<int>(path.size());
    if (t < 0 || t >= T) throw std::out_of_range("site index out of range");

    int lo = 0;
    int hi = 0;
    if (t > 0) {
        lo = path[t - 1];
        hi = std::min(path[t - 1] + 1, chain.n_states - 1);
    }
    if (t + 1 < T) {
        const int next = path[t + 1];
        lo = std::max(lo, next - 1);
        hi = std::min(hi, next);
    }
    if (lo > hi) throw std::logic_error("neighbouring states violate monotonicity");

    std::vector<std::pair<int, double>> out;
    for (int s = lo; s <= hi; ++s) {
        double w = emission_log_density(latent_rows.row(t), state_means.row(s));
        if (t > 0) w += chain.log_transition(path[t - 1], s);
        if (t + 1 < T) w += chain.log_transition(s, path[t + 1]);
        out.emplace_back(s, w);
    }
    return out;
}

int sample_state_single_site(const StatePath& path, int t, const ChainParams& chain,
                             const Eigen::MatrixXd& latent_rows, const Eigen::MatrixXd& state_means, Rng& rng) {
    const auto weights = site_log_weights(path, t, chain, latent_rows, state_means);
    if (weights.size() == 1) return weights.front().first;
    std::vector<double> logw;
    logw.reserve(weights.size());
    for (const auto& [s, w] : weights) logw.push_back(w);
    return weights[static_cast<std::size_t>(rng.categorical_log(logw))].first;
}

void sweep_path_single_site(StatePath& path, const ChainParams& chain, const Eigen::MatrixXd& latent_rows,
                            const Eigen::MatrixXd& state_means, Rng& rng) {
    for (int t = 0; t < static_cast<int>(path.size()); ++t) {
        path[static_cast<std::size_t>(t)] = sample_state_single_site(path, t, chain, latent_rows, state_means, rng);
    }
}

StatePath sample_path_ffbs(const ChainParams& chain, const Eigen::MatrixXd& latent_rows,
                           const Eigen::MatrixXd& state_means, Rng& rng) {
    check_shapes(chain, latent_rows, state_means);
    const int T = static_cast<int>(latent_rows.rows());
    const int S = chain.n_states;
    if (T == 0) return {};
    Eigen::MatrixXd alpha = Eigen::MatrixXd::Constant(T, S, kNegInf);
    alpha(0, 0) = emission_log_density(latent_rows.row(0), state_means.row(0));
    for (int t = 1; t < T; ++t) {
        for (int s = 0; s < std::min(S, t + 1); ++s) {
            double acc = alpha(t - 1, s) + chain.log_transition(s, s);
            if (s > 0) acc = log_sum_exp(acc, alpha(t - 1, s - 1) + chain.log_transition(s - 1, s));
            if (acc != kNegInf) acc += emission_log_density(latent_rows.row(t), state_means.row(s));
            alpha(t, s) = acc;
        }
    }
    StatePath path(static_cast<std::size_t>(T));
    std::vector<double> logw(static_cast<std::size_t>(S));
    for (int s = 0; s < S; ++s) logw[static_cast<std::size_t>(s)] = alpha(T - 1, s);
    path.back() = rng.categorical_log(logw);
    for (int t = T - 2; t >= 0; --t) {
        const int next = path[static_cast<std::size_t>(t + 1)];
        for (int s = 0; s < S; ++s) {
            logw[static_cast<std::size_t>(s)] = alpha(t, s) + chain.log_transition(s, next);
        }
        path[static_cast<std::size_t>(t)] = rng.categorical_log(logw);
    }
    return path;
}

ChainParams sample_transition_params(const TransitionCounts& counts, const TransitionPrior& prior, Rng& rng) {
    ChainParams chain;
    chain.n_states = static_cast<int>(counts.advances.size()) + 1;
    chain.advance_prob.resize(counts.advances.size());
    for (Eigen::Index s = 0; s < counts.advances.size(); ++s) {
        double a = rng.beta(prior.advance + counts.advances(s), prior.stay + counts.stays(s));
        // Keep strictly inside (0,1) so log transitions stay finite.
        a = std::clamp(a, 1e-12, 1.0 - 1e-12);
        chain.advance_prob(s) = a;
    }
    return chain;
}

double log_transition_prior(const ChainParams& chain, const TransitionPrior& prior) {
    double lp = 0.0;
    for (Eigen::Index s = 0; s < chain.advance_prob.size(); ++s) {
        lp += log_beta_pdf(chain.advance_prob(s), prior.advance, prior.stay);
    }
    return lp;
}

double path_log_prior(const StatePath& path, const ChainParams& chain) {
    if (!is_valid_path(path, chain.n_states)) throw std::invalid_argument("invalid state path");
    double lp = 0.0;
    for (std::size_t t = 1; t < path.size(); ++t) lp += chain.log_transition(path[t - 1], path[t]);
    return lp;
}

double path_log_density(const StatePath& path, const ChainParams& chain, const Eigen::MatrixXd& latent_rows,
                        const Eigen::MatrixXd& state_means) {
    check_shapes(chain, latent_rows, state_means);
    if (static_cast<Eigen::Index>(path.size()) != latent_rows.rows()) {
        throw std::invalid_argument("path length does not match latent rows");
    }
    double lp = path_log_prior(path, chain);
    for (std::size_t t = 0; t < path.size(); ++t) {
        lp += emission_log_density(latent_rows.row(static_cast<Eigen::Index>(t)), state_means.row(path[t]));
    }
    return lp;
}

std::vector<StatePath> enumerate_paths(int length, int n_states) {
    std::vector<StatePath> out;
    if (length <= 0) return {StatePath{}};
    StatePath cur{0};
    auto rec = [&](auto&& self) -> void {
        if (static_cast<int>(cur.size()) == length) {
            out.push_back(cur);
            return;
        }
        const int last = cur.back();
        cur.push_back(last);
        self(self);
        cur.pop_back();
        if (last + 1 < n_states) {
            cur.push_back(last + 1);
            self(self);
            cur.pop_back();
        }
    };
    rec(rec);
    return out;
}

Eigen::MatrixXd brute_force_path_posterior(int length, const ChainParams& chain,
                                           const Eigen::MatrixXd& latent_rows,
                                           const Eigen::MatrixXd& state_means) {
    if (length > 12 || chain.n_states > 6) throw std::invalid_argument("instance too large to enumerate");
    const auto paths = enumerate_paths(length, chain.n_states);
    std::vector<double> logw;
    logw.reserve(paths.size());
    for (const auto& p : paths) logw.push_back(path_log_density(p, chain, latent_rows, state_means));
    const double top = *std::max_element(logw.begin(), logw.end());
    Eigen::MatrixXd marg = Eigen::MatrixXd::Zero(length, chain.n_states);
    double total = 0.0;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        const double w = std::exp(logw[i] - top);
        total += w;
        for (int t = 0; t < length; ++t) marg(t, paths[i][static_cast<std::size_t>(t)]) += w;
    }
    return marg / total;
}

StatePath stretched_path(int length, int n_states) {
    StatePath path(static_cast<std::size_t>(std::max(0, length)));
    for (int t = 0; t < length; ++t) {
        const int spread = (t * n_states) / length;
        path[static_cast<std::size_t>(t)] = std::min({spread, t, n_states - 1});
    }
    return path;
}

StatePath sample_path_prior(int length, const ChainParams& chain, Rng& rng) {
    StatePath path;
    if (length <= 0) return path;
    path.push_back(0);
    for (int t = 1; t < length; ++t) {
        const int s = path.back();
        const bool advance = s + 1 < chain.n_states && rng.bernoulli(chain.advance_prob(s));
        path.push_back(advance ? s + 1 : s);
    }
    return path;
}

} // namespace xlate
