#ifndef XLATE_FACTOR_MODEL_HPP
#define XLATE_FACTOR_MODEL_HPP

#include <Eigen/Dense>

#include "xlate/random.hpp"

namespace xlate {

/// Clustering factor analysis for one dataset:
///
///   x_j ~ N(mu + V z_j, diag(sigma^2)),   z_j ~ N(m_j, I)
///
/// where every row of V has exactly one nonzero entry, so each variable
/// belongs to one cluster (latent factor). m_j is the covariate-effect mean
/// supplied by the caller. Cluster indices are 0-based in memory.

struct FactorPriors {
    double loading_var = 1.0;    // V entries ~ N(0, loading_var)
    double residual_shape = 1.0; // sigma_i^2 ~ IG(shape, rate)
    double residual_rate = 1.0;
    double mean_var = 100.0;     // mu_i ~ N(0, mean_var)
};

struct FactorParams {
    Eigen::VectorXd grand_mean;
    Eigen::VectorXi assignment;
    Eigen::VectorXd loading;
    Eigen::VectorXd residual_var;
    int n_clusters = 1;

    Eigen::Index n_variables() const { return loading.size(); }

    /// Dense p x K projection with one nonzero per row.
    Eigen::MatrixXd projection() const;

    /// Sum of member loadings for each cluster (0 for an empty cluster).
    Eigen::VectorXd loading_sums() const;
};

struct GaussianConditional {
    double mean = 0.0;
    double var = 1.0;
};

struct InverseGammaConditional {
    double shape = 1.0;
    double rate = 1.0;
    double mean() const { return rate / (shape - 1.0); }
};

/// Full conditional of the latent factors. Rows are independent and, since
/// each variable loads on one factor, the factors within a row are too;
/// the variance depends only on the factor.
struct LatentConditional {
    Eigen::MatrixXd mean; // n x K
    Eigen::VectorXd var;  // K
};

LatentConditional latent_conditional(const Eigen::MatrixXd& values, const FactorParams& params,
                                     const Eigen::MatrixXd& latent_mean);

Eigen::MatrixXd sample_latent_factors(const Eigen::MatrixXd& values, const FactorParams& params,
                                      const Eigen::MatrixXd& latent_mean, Rng& rng);

/// Log of prior x marginal likelihood of column i under each cluster, with
/// the loading integrated out under its Gaussian prior.
Eigen::VectorXd assignment_log_weights(Eigen::Index variable, const Eigen::MatrixXd& values,
                                       const FactorParams& params, const Eigen::MatrixXd& latent,
                                       const FactorPriors& priors);

int sample_assignment(Eigen::Index variable, const Eigen::MatrixXd& values, const FactorParams& params,
                      const Eigen::MatrixXd& latent, const FactorPriors& priors, Rng& rng);

GaussianConditional loading_conditional(Eigen::Index variable, const Eigen::MatrixXd& values,
                                        const FactorParams& params, const Eigen::MatrixXd& latent,
                                        const FactorPriors& priors);

double sample_loading(Eigen::Index variable, const Eigen::MatrixXd& values, const FactorParams& params,
                      const Eigen::MatrixXd& latent, const FactorPriors& priors, Rng& rng);

InverseGammaConditional residual_conditional(Eigen::Index variable, const Eigen::MatrixXd& values,
                                             const FactorParams& params, const Eigen::MatrixXd& latent,
                                             const FactorPriors& priors);

Eigen::VectorXd sample_residual_variances(const Eigen::MatrixXd& values, const FactorParams& params,
                                          const Eigen::MatrixXd& latent, const FactorPriors& priors, Rng& rng);

GaussianConditional grand_mean_conditional(Eigen::Index variable, const Eigen::MatrixXd& values,
                                           const FactorParams& params, const Eigen::MatrixXd& latent,
                                           const FactorPriors& priors);

Eigen::VectorXd sample_grand_mean(const Eigen::MatrixXd& values, const FactorParams& params,
                                  const Eigen::MatrixXd& latent, const FactorPriors& priors, Rng& rng);

/// Negate every loading of cluster k and its latent column.
void flip_cluster(FactorParams& params, Eigen::MatrixXd& latent, int cluster);

/// log p(values | params, latent).
double factor_log_likelihood(const Eigen::MatrixXd& values, const FactorParams& params,
                             const Eigen::MatrixXd& latent);

/// log p(params): grand mean, loadings, residual variances and the uniform
/// assignment prior.
double factor_log_prior(const FactorParams& params, const FactorPriors& priors);

/// Model-implied residuals x - mu - V z.
Eigen::MatrixXd factor_residuals(const Eigen::MatrixXd& values, const FactorParams& params,
                                 const Eigen::MatrixXd& latent);

} // namespace xlate

#endif // XLATE_FACTOR_MODEL_HPP
