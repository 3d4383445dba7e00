#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tvpqr {

/// Ordered quantile levels in (0, 1).
struct QuantileGrid {
    std::vector<double> levels;

    std::size_t size() const { return levels.size(); }
    double operator[](std::size_t i) const { return levels[i]; }

    /// 0.05, 0.10, ..., 0.95.
    static QuantileGrid standard();
    /// Parses "lo:hi:step" or a comma-separated list.
    static QuantileGrid parse(std::string_view spec);
    void validate() const;
};

enum class Transform { None, LogDiffAnnualized };

Transform parse_transform(std::string_view tag);
std::string_view to_string(Transform t);

/// Univariate series with period labels and an optional regressor matrix
/// (intercept-only when absent).
struct SeriesData {
    std::vector<std::string> timestamps;
    Eigen::VectorXd values;
    std::optional<Eigen::MatrixXd> regressors;
    Transform transform = Transform::None;

    Eigen::Index size() const { return values.size(); }
    /// T x K design; a column of ones without regressors.
    Eigen::MatrixXd design() const;
    /// First `n` observations.
    SeriesData head(Eigen::Index n) const;

    static SeriesData from_values(const Eigen::VectorXd& values);
};

}  // namespace tvpqr
