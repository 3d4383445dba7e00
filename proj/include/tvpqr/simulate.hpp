#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string_view>

#include "tvpqr/rng.hpp"
#include "tvpqr/types.hpp"

namespace tvpqr::sim {

using Eigen::VectorXd;

/// level + AL_p(0, scale) noise.
VectorXd al_constant(Eigen::Index T, double level, double p, double scale, Rng& rng);
VectorXd gaussian(Eigen::Index T, double mean, double sd, Rng& rng);
/// Gaussian noise whose sd jumps from sd_before to sd_after at index break_at.
VectorXd variance_break(Eigen::Index T, Eigen::Index break_at, double mean, double sd_before, double sd_after, Rng& rng);
/// Random-walk trend (sd trend_sd) plus noise with random-walk log variance (sd vol_sd).
VectorXd trend_sv(Eigen::Index T, double start, double trend_sd, double vol_sd, Rng& rng);

/// Named generators for the CLI: al-constant, normal, variance-break, trend-sv.
SeriesData simulate(std::string_view dgp, Eigen::Index T, std::uint64_t seed);

}  // namespace tvpqr::sim
