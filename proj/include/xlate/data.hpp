#ifndef XLATE_DATA_HPP
#define XLATE_DATA_HPP

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace xlate {

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SampleMeta {
    std::string sample_id;
    std::string individual_id;
    int time_index = 1; // 1-based visit number within the individual's series
    int disease = 0;    // 0 or 1, constant within an individual
};

/// Per-column affine map recorded at load time: standardized = (raw - mean) / scale.
struct Standardization {
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;

    static Standardization identity(Eigen::Index p) {
        return {Eigen::VectorXd::Zero(p), Eigen::VectorXd::Ones(p)};
    }

    Eigen::MatrixXd apply(const Eigen::MatrixXd& raw) const {
        return (raw.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
    }
    Eigen::MatrixXd invert(const Eigen::MatrixXd& standardized) const {
        return (standardized.array().rowwise() * scale.transpose().array()).matrix().rowwise() +
               mean.transpose();
    }
};

/// One individual's series: rows of the owning dataset ordered by time index.
struct Individual {
    std::string id;
    int disease = 0;
    std::vector<int> rows;
};

struct Dataset {
    Eigen::MatrixXd values; // rows = samples, columns = variables
    std::vector<SampleMeta> meta;
    std::vector<std::string> variable_names;
    Standardization standardization;
    std::vector<Individual> individuals; // derived from meta, first-appearance order

    Eigen::Index n_samples() const { return values.rows(); }
    Eigen::Index n_variables() const { return values.cols(); }
};

struct StudyPair {
    Dataset x;
    Dataset y;
};

/// Validates metadata and shapes, builds the individual index. Values are
/// taken as-is; standardization is identity.
Dataset make_dataset(Eigen::MatrixXd values, std::vector<SampleMeta> meta,
                     std::vector<std::string> variable_names);

/// Column-wise z-scores using the (n-1) sample standard deviation.
/// Throws DataError("constant column ...") for zero-variance columns.
template <typename Derived>
std::pair<Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>, Standardization>
standardize(const Eigen::MatrixBase<Derived>& values) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index n = values.rows();
    if (n < 2) throw DataError("standardize: need at least two rows");
    Standardization t;
    t.mean = values.colwise().mean().transpose().template cast<double>();
    t.scale.resize(values.cols());
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
        const double ss = (values.col(c).template cast<double>().array() - t.mean(c)).square().sum();
        const double sd = std::sqrt(ss / static_cast<double>(n - 1));
        if (!(sd > 1e-12 * std::max(1.0, std::abs(t.mean(c))))) {
            throw DataError("constant column at index " + std::to_string(c));
        }
        t.scale(c) = sd;
    }
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out =
        t.apply(values.template cast<double>()).template cast<Scalar>();
    return {std::move(out), std::move(t)};
}

/// Returns a copy with standardized values and the transform recorded.
Dataset standardized(const Dataset& raw);

struct LoadOptions {
    bool log1p = false; // apply log(1 + v) before standardizing; the recorded
                        // transform then refers to the log scale
};

Dataset load_dataset(const std::filesystem::path& values_path,
                     const std::filesystem::path& meta_path, const LoadOptions& options = {});

void write_values_csv(const Dataset& data, const std::filesystem::path& path);
void write_meta_csv(const Dataset& data, const std::filesystem::path& path);

/// Restriction to the listed individuals (indices into data.individuals),
/// preserving row order. No restandardization.
Dataset subset_individuals(const Dataset& data, std::span<const int> individual_indices);

/// Stable textual form of every field, used for determinism checks.
std::string canonical_serialization(const Dataset& data);

/// Per-row disease labels.
std::vector<int> row_disease(const Dataset& data);

} // namespace xlate

#endif // XLATE_DATA_HPP
