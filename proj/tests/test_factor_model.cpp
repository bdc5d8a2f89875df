#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "moment_checks.hpp"
#include "oracles.hpp"
#include "xlate/factor_model.hpp"

using namespace xlate;

namespace {

FactorParams single(double loading, double var, double mean) {
    FactorParams p;
    p.n_clusters = 1;
    p.assignment = Eigen::VectorXi::Zero(1);
    p.loading = Eigen::VectorXd::Constant(1, loading);
    p.residual_var = Eigen::VectorXd::Constant(1, var);
    p.grand_mean = Eigen::VectorXd::Constant(1, mean);
    return p;
}

} // namespace

TEST_CASE("latent conditional: scalar conjugate case") {
    const FactorParams p = single(1.0, 1.0, 0.0);
    const Eigen::MatrixXd x = Eigen::MatrixXd::Constant(1, 1, 2.0);
    const auto c = latent_conditional(x, p, Eigen::MatrixXd::Zero(1, 1));
    CHECK(c.mean(0, 0) == doctest::Approx(1.0));
    CHECK(c.var(0) == doctest::Approx(0.5));
}

TEST_CASE("latent conditional: empty cluster falls back to its prior") {
    FactorParams p = single(1.0, 1.0, 0.0);
    p.n_clusters = 2;
    Eigen::MatrixXd m(1, 2);
    m << 0.3, -1.7;
    const auto c = latent_conditional(Eigen::MatrixXd::Constant(1, 1, 2.0), p, m);
    CHECK(c.mean(0, 1) == doctest::Approx(-1.7));
    CHECK(c.var(1) == doctest::Approx(1.0));
}

TEST_CASE("assignment: column equal to one factor's trajectory") {
    Rng rng(5);
    const int n = 100;
    Eigen::MatrixXd latent(n, 3);
    for (Eigen::Index i = 0; i < latent.size(); ++i) latent.data()[i] = rng.normal();
    FactorParams p = single(1.0, 1.0, 0.0);
    p.n_clusters = 3;
    const Eigen::MatrixXd x = latent.col(1);
    FactorPriors priors;
    priors.loading_var = 1e6;
    const Eigen::VectorXd w = assignment_log_weights(0, x, p, latent, priors);
    const Eigen::VectorXd prob = (w.array() - w.maxCoeff()).exp() / (w.array() - w.maxCoeff()).exp().sum();
    CHECK(prob(1) > 0.95);
}

TEST_CASE("assignment: symmetric clusters get equal weight and K=1 is forced") {
    Rng rng(6);
    Eigen::MatrixXd latent(10, 2);
    latent.col(0) = Eigen::VectorXd::LinSpaced(10, -1.0, 1.0);
    latent.col(1) = latent.col(0);
    FactorParams p = single(1.0, 1.0, 0.0);
    p.n_clusters = 2;
    Eigen::MatrixXd x(10, 1);
    for (int j = 0; j < 10; ++j) x(j, 0) = rng.normal();
    const Eigen::VectorXd w = assignment_log_weights(0, x, p, latent, {});
    CHECK(w(0) == doctest::Approx(w(1)).epsilon(1e-12));

    p.n_clusters = 1;
    for (int d = 0; d < 20; ++d) CHECK(sample_assignment(0, x, p, latent.leftCols(1), {}, rng) == 0);
}

TEST_CASE("loading conditional: zero factor gives the prior, vague prior gives least squares") {
    FactorPriors priors;
    const FactorParams p = single(1.0, 1.0, 0.0);
    const Eigen::MatrixXd x = Eigen::MatrixXd::Constant(2, 1, 2.0);
    const auto prior_like = loading_conditional(0, x, p, Eigen::MatrixXd::Zero(2, 1), priors);
    CHECK(prior_like.mean == doctest::Approx(0.0));
    CHECK(prior_like.var == doctest::Approx(priors.loading_var));

    priors.loading_var = 1e12;
    const auto ls = loading_conditional(0, x, p, Eigen::MatrixXd::Ones(2, 1), priors);
    CHECK(ls.mean == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("residual conditional: shape a0+n/2, rate b0+RSS/2") {
    const FactorParams p = single(1.0, 1.0, 0.0);
    const Eigen::MatrixXd latent = Eigen::MatrixXd::Zero(10, 1);
    const auto exact_fit = residual_conditional(0, Eigen::MatrixXd::Zero(10, 1), p, latent, {});
    CHECK(exact_fit.shape == doctest::Approx(6.0));
    CHECK(exact_fit.rate == doctest::Approx(1.0));
    // ten residuals of +-1: RSS = 10
    Eigen::MatrixXd x(10, 1);
    for (int j = 0; j < 10; ++j) x(j, 0) = j % 2 ? 1.0 : -1.0;
    const auto c = residual_conditional(0, x, p, latent, {});
    CHECK(c.shape == doctest::Approx(6.0));
    CHECK(c.rate == doctest::Approx(6.0));
}

TEST_CASE("grand mean conditional: empty data and two samples") {
    const FactorPriors priors;
    const FactorParams p = single(0.0, 2.0, 0.0);
    const auto empty = grand_mean_conditional(0, Eigen::MatrixXd(0, 1), p, Eigen::MatrixXd(0, 1), priors);
    CHECK(empty.mean == doctest::Approx(0.0));
    CHECK(empty.var == doctest::Approx(priors.mean_var));

    Eigen::MatrixXd x(2, 1);
    x << 1.0, 3.0;
    const auto c = grand_mean_conditional(0, x, p, Eigen::MatrixXd::Zero(2, 1), priors);
    const double prec = 1.0 / priors.mean_var + 2.0 / 2.0;
    CHECK(c.mean == doctest::Approx((4.0 / 2.0) / prec));
    CHECK(c.var == doctest::Approx(1.0 / prec));
}

TEST_CASE("flip_cluster negates loadings and factor, likelihood unchanged") {
    auto f = moments::factor_instance();
    f.params.loading(0) = -1.0;
    f.params.loading(2) = -1.0;
    const double before = factor_log_likelihood(f.values, f.params, f.latent);
    const Eigen::VectorXd z0 = f.latent.col(0);
    flip_cluster(f.params, f.latent, 0);
    CHECK(f.params.loading(0) == 1.0);
    CHECK(f.params.loading(2) == 1.0);
    CHECK(f.params.loading(1) == -0.8);
    CHECK(f.latent.col(0) == -z0);
    CHECK(factor_log_likelihood(f.values, f.params, f.latent) == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("factor log likelihood and prior match scalar sums") {
    const auto f = moments::factor_instance();
    double ll = 0.0, lp = 0.0;
    for (Eigen::Index i = 0; i < f.values.cols(); ++i) {
        for (Eigen::Index j = 0; j < f.values.rows(); ++j) {
            ll += oracle::normal_logpdf(f.values(j, i),
                                        f.params.grand_mean(i) + f.params.loading(i) * f.latent(j, f.params.assignment(i)),
                                        f.params.residual_var(i));
        }
        lp += oracle::normal_logpdf(f.params.grand_mean(i), 0.0, f.priors.mean_var) +
              oracle::normal_logpdf(f.params.loading(i), 0.0, f.priors.loading_var) +
              oracle::inv_gamma_logpdf(f.params.residual_var(i), f.priors.residual_shape, f.priors.residual_rate) -
              std::log(2.0);
    }
    CHECK(factor_log_likelihood(f.values, f.params, f.latent) == doctest::Approx(ll).epsilon(1e-12));
    CHECK(factor_log_prior(f.params, f.priors) == doctest::Approx(lp).epsilon(1e-12));
}

TEST_CASE("conjugate moment checks: factor model samplers within 2% over 50k draws") {
    for (const auto& r : {moments::latent_factors(50000, 1), moments::loading(50000, 2),
                          moments::residual_variance(50000, 3), moments::grand_mean(50000, 4)}) {
        CAPTURE(r.name);
        CHECK(r.rel_error() < 0.02);
    }
}
