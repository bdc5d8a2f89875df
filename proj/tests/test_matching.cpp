#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "xlate/checks.hpp"
#include "xlate/matching.hpp"

using namespace xlate;

namespace {

std::vector<CellStats> stats_of(const std::vector<std::vector<oracle::Obs>>& side, int n_states) {
    std::vector<CellStats> out(side.size(), CellStats(n_states));
    for (std::size_t k = 0; k < side.size(); ++k) {
        for (const auto& o : side[k]) out[k].add(o.state, o.disease, o.value);
    }
    return out;
}

// Latents of one cluster following the given per-state response, with noise.
std::vector<oracle::Obs> responding(const std::vector<double>& response, double noise, int reps, Rng& rng) {
    std::vector<oracle::Obs> out;
    for (int s = 0; s < static_cast<int>(response.size()); ++s) {
        for (int b = 0; b < 2; ++b) {
            for (int r = 0; r < reps; ++r) out.push_back({s, b, response[static_cast<std::size_t>(s)] + noise * rng.normal()});
        }
    }
    return out;
}

} // namespace

TEST_CASE("pair marginal: no observations") {
    const EffectLayout layout{3, true};
    const CellStats empty(3);
    CHECK(pair_marginal_loglik(empty, empty, true, layout, {}) == doctest::Approx(0.0));
    CHECK(pair_marginal_loglik(empty, empty, false, layout, {}) == doctest::Approx(0.0));
}

TEST_CASE("pair marginal: one sample is a Gaussian convolution") {
    const EffectLayout layout{2, false};
    const EffectPriors priors;
    CellStats x(2);
    const CellStats y(2);
    x.add(1, 0, 0.8);
    CHECK(pair_marginal_loglik(x, y, false, layout, priors) ==
          doctest::Approx(oracle::normal_logpdf(0.8, 0.0, 1.0 + priors.specific_var())).epsilon(1e-12));
    CHECK(pair_marginal_loglik(x, y, true, layout, priors) ==
          doctest::Approx(oracle::normal_logpdf(0.8, 0.0, 1.0 + priors.specific_var() + priors.shared_var))
              .epsilon(1e-12));
}

TEST_CASE("pair marginal: two-cell instance against numerical integration") {
    // Cells (state 0, healthy) and (state 1, healthy): only the time entry at
    // state 1 is identified; the interaction entry integrates to one.
    const EffectLayout layout{2, false};
    const EffectPriors priors;
    const std::vector<double> x0{0.3, -0.2}, x1{1.1, 0.7, 1.4}, y0{-0.5}, y1{0.9, 1.6};
    CellStats xs(2), ys(2);
    for (double v : x0) xs.add(0, 0, v);
    for (double v : x1) xs.add(1, 0, v);
    for (double v : y0) ys.add(0, 0, v);
    for (double v : y1) ys.add(1, 0, v);

    auto loglik = [](const std::vector<double>& vals, double mean) {
        double s = 0.0;
        for (double v : vals) s += oracle::normal_logpdf(v, mean, 1.0);
        return s;
    };
    const double base = loglik(x0, 0.0) + loglik(y0, 0.0);
    const double sv = priors.shared_var, pv = priors.specific_var();
    const double wide = 12.0;

    // unlinked: two independent one-dimensional integrals
    const double ix = oracle::integrate(
        [&](double t) { return std::exp(loglik(x1, t) + oracle::normal_logpdf(t, 0.0, pv)); }, wide * std::sqrt(pv));
    const double iy = oracle::integrate(
        [&](double t) { return std::exp(loglik(y1, t) + oracle::normal_logpdf(t, 0.0, pv)); }, wide * std::sqrt(pv));
    const double unlinked = base + std::log(ix) + std::log(iy);

    // linked: shared entry outermost, specific entries inside
    const double il = oracle::integrate(
        [&](double a) {
            const double jx = oracle::integrate(
                [&](double t) { return std::exp(loglik(x1, a + t) + oracle::normal_logpdf(t, 0.0, pv)); },
                wide * std::sqrt(pv));
            const double jy = oracle::integrate(
                [&](double t) { return std::exp(loglik(y1, a + t) + oracle::normal_logpdf(t, 0.0, pv)); },
                wide * std::sqrt(pv));
            return std::exp(oracle::normal_logpdf(a, 0.0, sv)) * jx * jy;
        },
        wide * std::sqrt(sv));
    const double linked = base + std::log(il);

    CHECK(std::abs(pair_marginal_loglik(xs, ys, false, layout, priors) - unlinked) < 1e-6);
    CHECK(std::abs(pair_marginal_loglik(xs, ys, true, layout, priors) - linked) < 1e-6);
}

TEST_CASE("pair marginal: random instance against the dense Gaussian") {
    Rng rng(12);
    const EffectLayout layout{4, true};
    EffectPriors priors;
    priors.shared_var = 2.5;
    priors.specific_ratio = 0.3;
    std::vector<std::vector<oracle::Obs>> xs(1), ys(1);
    for (int i = 0; i < 25; ++i) xs[0].push_back({rng.uniform_int(4), rng.uniform_int(2), rng.normal()});
    for (int i = 0; i < 18; ++i) ys[0].push_back({rng.uniform_int(4), rng.uniform_int(2), rng.normal(1.0, 1.0)});
    const auto sx = stats_of(xs, 4), sy = stats_of(ys, 4);
    for (bool linked : {false, true}) {
        const double ref = oracle::pair_marginal_dense(xs[0], ys[0], linked, 4, true, priors.shared_var,
                                                       priors.specific_var());
        CHECK(pair_marginal_loglik(sx[0], sy[0], linked, layout, priors) == doctest::Approx(ref).epsilon(1e-10));
    }
}

TEST_CASE("link acceptance on K_x = K_y = 1 is the marginal likelihood ratio") {
    Rng rng(21);
    const EffectLayout layout{3, true};
    const EffectPriors priors;
    std::vector<std::vector<oracle::Obs>> xs{responding({0.0, 0.0, 0.0}, 1.0, 3, rng)};
    std::vector<std::vector<oracle::Obs>> ys{responding({0.0, 0.0, 0.0}, 1.0, 3, rng)};
    const auto sx = stats_of(xs, 3), sy = stats_of(ys, 3);
    const double delta =
        oracle::pair_marginal_dense(xs[0], ys[0], true, 3, true, priors.shared_var, priors.specific_var()) -
        oracle::pair_marginal_dense(xs[0], ys[0], false, 3, true, priors.shared_var, priors.specific_var());

    MatchingState m(1, 1);
    EffectDecomposition e = EffectDecomposition::zeros(3, 1, 1);
    const auto link = propose_link(m, 0, 0, sx, sy, layout, priors, e, rng);
    CHECK(link.log_acceptance == doctest::Approx(delta).epsilon(1e-10));

    // break from the linked state: reverse ratio, one unmatched Y cluster afterwards
    MatchingState linked(1, 1);
    linked.link(0, 0);
    const auto brk = propose_break(linked, 0, sx, sy, layout, priors, e, rng);
    CHECK(brk.log_acceptance == doctest::Approx(-delta).epsilon(1e-10));
}

TEST_CASE("break acceptance carries the proposal correction") {
    Rng rng(22);
    const EffectLayout layout{3, true};
    const EffectPriors priors;
    std::vector<std::vector<oracle::Obs>> xs{responding({0, 0, 0}, 1.0, 2, rng)};
    std::vector<std::vector<oracle::Obs>> ys{responding({0, 0, 0}, 1.0, 2, rng), responding({0, 0, 0}, 1.0, 2, rng),
                                             responding({0, 0, 0}, 1.0, 2, rng)};
    const auto sx = stats_of(xs, 3), sy = stats_of(ys, 3);
    const double delta = pair_marginal_loglik(sx[0], sy[1], true, layout, priors) -
                         pair_marginal_loglik(sx[0], sy[1], false, layout, priors);
    MatchingState m(1, 3);
    m.link(0, 1);
    EffectDecomposition e = EffectDecomposition::zeros(3, 1, 3);
    const auto brk = propose_break(m, 0, sx, sy, layout, priors, e, rng);
    // after the break there are three unmatched Y clusters to choose from
    CHECK(brk.log_acceptance == doctest::Approx(-delta - std::log(3.0)).epsilon(1e-10));
}

TEST_CASE("identical strong responses always link, opposite responses do not favour linking") {
    Rng rng(23);
    const EffectLayout layout{5, true};
    const EffectPriors priors;
    const std::vector<double> up{0.0, 1.0, 2.0, 3.0, 4.0};
    const std::vector<double> down{0.0, -1.0, -2.0, -3.0, -4.0};
    std::vector<std::vector<oracle::Obs>> xs{responding(up, 0.0, 4, rng)};
    std::vector<std::vector<oracle::Obs>> ys{responding(up, 0.0, 4, rng), responding(down, 0.0, 4, rng)};
    const auto sx = stats_of(xs, 5), sy = stats_of(ys, 5);
    MatchingState m(1, 2);
    EffectDecomposition e = EffectDecomposition::zeros(5, 1, 2);
    const auto same = propose_link(m, 0, 0, sx, sy, layout, priors, e, rng);
    CHECK(same.accepted);
    CHECK(same.log_acceptance > 0.0);
    CHECK(pair_marginal_loglik(sx[0], sy[1], true, layout, priors) <
          pair_marginal_loglik(sx[0], sy[1], false, layout, priors));
}

TEST_CASE("link/break chain is reversible on the frozen 1 x 1 instance") {
    const auto r = matching_oracle_check(100000, 3);
    CHECK(r.abs_error() <= 0.02);
    CHECK(r.exact > 0.2);
    CHECK(r.exact < 0.8);
}

TEST_CASE("matching sweeps keep the map injective") {
    Rng rng(31);
    const EffectLayout layout{3, true};
    std::vector<std::vector<oracle::Obs>> xs, ys;
    for (int k = 0; k < 3; ++k) xs.push_back(responding({0.0, 0.5 * k, 1.0 * k}, 1.0, 2, rng));
    for (int k = 0; k < 4; ++k) ys.push_back(responding({0.0, 0.5 * k, 1.0 * k}, 1.0, 2, rng));
    const auto sx = stats_of(xs, 3), sy = stats_of(ys, 3);
    MatchingState m(3, 4);
    EffectDecomposition e = EffectDecomposition::zeros(3, 3, 4);
    for (int i = 0; i < 2000; ++i) {
        matching_sweep(m, sx, sy, layout, {}, e, rng);
        REQUIRE(m.is_injective());
    }
}

TEST_CASE("matching counts and prior") {
    CHECK(count_matchings(2, 2) == doctest::Approx(7.0));
    CHECK(count_matchings(3, 4) == doctest::Approx(73.0));
    CHECK(count_matchings(3, 4) == doctest::Approx(oracle::count_matchings(3, 4)));
    CHECK(count_matchings(0, 5) == doctest::Approx(1.0));

    Rng rng(41);
    std::vector<MatchingState> draws;
    for (int i = 0; i < 70000; ++i) draws.push_back(sample_matching_prior(2, 2, rng));
    const PairingTable t = pairing_posterior(draws);
    // each pair is linked in 2 of the 7 matchings
    CHECK((t.link_freq.array() - 2.0 / 7.0).abs().maxCoeff() < 0.01);
    CHECK((t.unmatched_x.array() - 3.0 / 7.0).abs().maxCoeff() < 0.01);
}

TEST_CASE("pairing posterior of a constant trace") {
    MatchingState m(3, 4);
    m.link(0, 2);
    const std::vector<MatchingState> trace(10, m);
    const PairingTable t = pairing_posterior(trace);
    CHECK(t.link_freq(0, 2) == doctest::Approx(1.0));
    CHECK(t.link_freq.sum() == doctest::Approx(1.0));
    CHECK(t.unmatched_x(1) == doctest::Approx(1.0));
    CHECK(t.unmatched_x(2) == doctest::Approx(1.0));
    CHECK(t.unmatched_x(0) == doctest::Approx(0.0));
    CHECK(t.unmatched_y(2) == doctest::Approx(0.0));
}
