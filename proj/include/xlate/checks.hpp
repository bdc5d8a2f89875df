#ifndef XLATE_CHECKS_HPP
#define XLATE_CHECKS_HPP

#include <cmath>
#include <cstdint>

#include <Eigen/Dense>

#include "xlate/sampler.hpp"

namespace xlate {

/// Long-run single-site (or FFBS) state marginals against exact
/// enumeration on a fixed T = 4, S = 3 instance.
struct HmmOracleResult {
    Eigen::MatrixXd empirical; // T x S
    Eigen::MatrixXd exact;     // T x S
    Eigen::VectorXd tv;        // per-site total variation
    double max_tv() const { return tv.maxCoeff(); }
};

HmmOracleResult hmm_oracle_check(int n_sweeps, std::uint64_t seed, PathKernel kernel = PathKernel::single_site);

/// Link occupancy of the collapsed link/break chain on a frozen 1 x 1
/// instance against the exact two-state posterior.
struct MatchingOracleResult {
    double empirical = 0.0;
    double exact = 0.0;
    double log_ratio = 0.0; // linked minus unlinked log marginal
    double abs_error() const { return std::abs(empirical - exact); }
};

MatchingOracleResult matching_oracle_check(int n_moves, std::uint64_t seed);

} // namespace xlate

#endif // XLATE_CHECKS_HPP
