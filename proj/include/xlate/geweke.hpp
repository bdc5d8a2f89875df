#ifndef XLATE_GEWEKE_HPP
#define XLATE_GEWEKE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "xlate/data.hpp"
#include "xlate/sampler.hpp"

namespace xlate {

struct GewekeStat {
    std::string name;
    double forward_mean = 0.0; // independent prior-and-data draws
    double chain_mean = 0.0;   // successive-conditional chain
    double z = 0.0;
};

struct GewekeReport {
    std::vector<GewekeStat> stats;
    double max_abs_z() const;
};

/// Tiny two-dataset design: three individuals per side with series of
/// three or four points, five X and four Y variables.
StudyPair geweke_design();

/// Configuration matching geweke_design: S = 3, two clusters per side,
/// a residual prior with finite variance, and no sign step (the sign
/// convention is a relabelling that the prior does not share).
GibbsConfig geweke_config();

/// Compares statistics of n_rounds forward draws from the joint prior of
/// parameters and data with n_rounds steps of the chain that alternates a
/// data redraw and one Gibbs sweep. The chain's standard errors come from
/// batch means. Throws std::invalid_argument("insufficient rounds") below
/// 100 rounds.
GewekeReport geweke_check(const StudyPair& design, const GibbsConfig& config, int n_rounds, std::uint64_t seed);

} // namespace xlate

#endif // XLATE_GEWEKE_HPP
