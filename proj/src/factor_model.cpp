#include "xlate/factor_model.hpp"

#include <cmath>
#include <stdexcept>

#include "xlate/densities.hpp"

namespace xlate {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

void check_dims(const Eigen::MatrixXd& values, const FactorParams& params, const Eigen::MatrixXd& latent) {
    const auto p = params.n_variables();
    if (values.cols() != p || params.grand_mean.size() != p || params.assignment.size() != p ||
        params.residual_var.size() != p) {
        throw std::invalid_argument("factor model: parameter length does not match variable count");
    }
    if (latent.rows() != values.rows() || latent.cols() != params.n_clusters) {
        throw std::invalid_argument("factor model: latent matrix has wrong shape");
    }
}

} // namespace

Eigen::MatrixXd FactorParams::projection() const {
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n_variables(), n_clusters);
    for (Eigen::Index i = 0; i < n_variables(); ++i) v(i, assignment(i)) = loading(i);
    return v;
}

Eigen::VectorXd FactorParams::loading_sums() const {
    Eigen::VectorXd sums = Eigen::VectorXd::Zero(n_clusters);
    for (Eigen::Index i = 0; i < n_variables(); ++i) sums(assignment(i)) += loading(i);
    return sums;
}

LatentConditional latent_conditional(const Eigen::MatrixXd& values, const FactorParams& params,
                                     const Eigen::MatrixXd& latent_mean) {
    check_dims(values, params, latent_mean);
    const Eigen::Index K = params.n_clusters;
    Eigen::VectorXd precision = Eigen::VectorXd::Ones(K);
    Eigen::MatrixXd rhs = latent_mean;
    for (Eigen::Index i = 0; i < params.n_variables(); ++i) {
        const double w = params.loading(i) / params.residual_var(i);
        const auto k = params.assignment(i);
        precision(k) += params.loading(i) * w;
        rhs.col(k).array() += w * (values.col(i).array() - params.grand_mean(i));
    }
    LatentConditional c;
    c.var = precision.cwiseInverse();
    c.mean = rhs * c.var.asDiagonal();
    return c;
}

Eigen::MatrixXd sample_latent_factors(const Eigen::MatrixXd& values, const FactorParams& params,
                                      const Eigen::MatrixXd& latent_mean, Rng& rng) {
    const auto c = latent_conditional(values, params, latent_mean);
    Eigen::MatrixXd draw(c.mean.rows(), c.mean.cols());
    const Eigen::VectorXd sd = c.var.cwiseSqrt();
    for (Eigen::Index j = 0; j < draw.rows(); ++j) {
        for (Eigen::Index k = 0; k < draw.cols(); ++k) draw(j, k) = c.mean(j, k) + sd(k) * rng.normal();
    }
    return draw;
}

Eigen::VectorXd assignment_log_weights(Eigen::Index variable, const Eigen::MatrixXd& values,
                                       const FactorParams& params, const Eigen::MatrixXd& latent,
                                       const FactorPriors& priors) {
    check_dims(values, params, latent);
    const double n = static_cast<double>(values.rows());
    const double s2 = params.residual_var(variable);
    const double t2 = priors.loading_var;
    const Eigen::VectorXd r = values.col(variable).array() - params.grand_mean(variable);
    const double rr = r.squaredNorm();
    const Eigen::VectorXd zr = latent.transpose() * r;
    const Eigen::VectorXd zz = latent.colwise().squaredNorm().transpose();
    const double log_prior = -std::log(static_cast<double>(params.n_clusters));

    Eigen::VectorXd out(params.n_clusters);
    for (Eigen::Index k = 0; k < params.n_clusters; ++k) {
        const double g = 1.0 + t2 * zz(k) / s2;
        const double quad = rr / s2 - (t2 / (s2 * s2)) * zr(k) * zr(k) / g;
        out(k) = log_prior - 0.5 * (n * (kLog2Pi + std::log(s2)) + std::log(g) + quad);
    }
    return out;
}

int sample_assignment(Eigen::Index variable, const Eigen::MatrixXd& values, const FactorParams& params,
                      const Eigen::MatrixXd& latent, const FactorPriors& priors, Rng& rng) {
    if (params.n_clusters == 1) return 0;
    const Eigen::VectorXd w = assignment_log_weights(variable, values, params, latent, priors);
    return rng.categorical_log({w.data(), static_cast<std::size_t>(w.size())});
}

GaussianConditional loading_conditional(Eigen::Index variable, const Eigen::MatrixXd& values,
                                        const FactorParams& params, const Eigen::MatrixXd& latent,
                                        const FactorPriors& priors) {
    check_dims(values, params, latent);
    const double s2 = params.residual_var(variable);
    const auto z = latent.col(params.assignment(variable));
    const double zr = z.dot((values.col(variable).array() - params.grand_mean(variable)).matrix());
    const double precision = 1.0 / priors.loading_var + z.squaredNorm() / s2;
    return {(zr / s2) / precision, 1.0 / precision};
}

double sample_loading(Eigen::Index variable, const Eigen::MatrixXd& values, const FactorParams& params,
                      const Eigen::MatrixXd& latent, const FactorPriors& priors, Rng& rng) {
    const auto c = loading_conditional(variable, values, params, latent, priors);
    return rng.normal(c.mean, std::sqrt(c.var));
}

InverseGammaConditional residual_conditional(Eigen::Index variable, const Eigen::MatrixXd& values,
                                             const FactorParams& params, const Eigen::MatrixXd& latent,
                                             const FactorPriors& priors) {
    check_dims(values, params, latent);
    const auto k = params.assignment(variable);
    const double rss = (values.col(variable).array() - params.grand_mean(variable) -
                        params.loading(variable) * latent.col(k).array())
                           .square()
                           .sum();
    return {priors.residual_shape + 0.5 * static_cast<double>(values.rows()), priors.residual_rate + 0.5 * rss};
}

Eigen::VectorXd sample_residual_variances(const Eigen::MatrixXd& values, const FactorParams& params,
                                          const Eigen::MatrixXd& latent, const FactorPriors& priors, Rng& rng) {
    Eigen::VectorXd out(params.n_variables());
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        const auto c = residual_conditional(i, values, params, latent, priors);
        out(i) = rng.inverse_gamma(c.shape, c.rate);
    }
    return out;
}

GaussianConditional grand_mean_conditional(Eigen::Index variable, const Eigen::MatrixXd& values,
                                           const FactorParams& params, const Eigen::MatrixXd& latent,
                                           const FactorPriors& priors) {
    check_dims(values, params, latent);
    const double s2 = params.residual_var(variable);
    const auto k = params.assignment(variable);
    const double sum = (values.col(variable) - params.loading(variable) * latent.col(k)).sum();
    const double precision = 1.0 / priors.mean_var + static_cast<double>(values.rows()) / s2;
    return {(sum / s2) / precision, 1.0 / precision};
}

Eigen::VectorXd sample_grand_mean(const Eigen::MatrixXd& values, const FactorParams& params,
                                  const Eigen::MatrixXd& latent, const FactorPriors& priors, Rng& rng) {
    Eigen::VectorXd out(params.n_variables());
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        const auto c = grand_mean_conditional(i, values, params, latent, priors);
        out(i) = rng.normal(c.mean, std::sqrt(c.var));
    }
    return out;
}

void flip_cluster(FactorParams& params, Eigen::MatrixXd& latent, int cluster) {
    for (Eigen::Index i = 0; i < params.n_variables(); ++i) {
        if (params.assignment(i) == cluster) params.loading(i) = -params.loading(i);
    }
    latent.col(cluster) = -latent.col(cluster);
}

Eigen::MatrixXd factor_residuals(const Eigen::MatrixXd& values, const FactorParams& params,
                                 const Eigen::MatrixXd& latent) {
    check_dims(values, params, latent);
    Eigen::MatrixXd r = values.rowwise() - params.grand_mean.transpose();
    for (Eigen::Index i = 0; i < params.n_variables(); ++i) {
        r.col(i) -= params.loading(i) * latent.col(params.assignment(i));
    }
    return r;
}

double factor_log_likelihood(const Eigen::MatrixXd& values, const FactorParams& params,
                             const Eigen::MatrixXd& latent) {
    const Eigen::MatrixXd r = factor_residuals(values, params, latent);
    const double n = static_cast<double>(values.rows());
    double ll = 0.0;
    for (Eigen::Index i = 0; i < params.n_variables(); ++i) {
        const double s2 = params.residual_var(i);
        ll += -0.5 * (n * (kLog2Pi + std::log(s2)) + r.col(i).squaredNorm() / s2);
    }
    return ll;
}

double factor_log_prior(const FactorParams& params, const FactorPriors& priors) {
    double lp = -static_cast<double>(params.n_variables()) * std::log(static_cast<double>(params.n_clusters));
    for (Eigen::Index i = 0; i < params.n_variables(); ++i) {
        lp += log_normal_pdf(params.grand_mean(i), 0.0, priors.mean_var);
        lp += log_normal_pdf(params.loading(i), 0.0, priors.loading_var);
        lp += log_inverse_gamma_pdf(params.residual_var(i), priors.residual_shape, priors.residual_rate);
    }
    return lp;
}

} // namespace xlate
