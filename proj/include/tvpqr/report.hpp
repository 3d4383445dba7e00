#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tvpqr/noncrossing.hpp"
#include "tvpqr/oos.hpp"
#include "tvpqr/sampler.hpp"

namespace tvpqr::report {

/// Fixed-format number used in every text output, so files compare byte for byte.
std::string format_number(double x);

/// Benchmark-relative table: the benchmark row holds actual values, other
/// rows CRPS ratios and LPS differences against it.
std::string metrics_csv(const oos::EvaluationReport& report);
/// Absolute values plus the relative table and per-level mean QS.
std::string metrics_json(const oos::EvaluationReport& report);
/// One row per (model, origin, horizon, level).
std::string forecasts_csv(const oos::EvaluationReport& report);
std::string failures_csv(const oos::EvaluationReport& report);

/// Writes metrics.csv, metrics.json, forecasts.csv and failures.csv into `dir`.
void write_report(const std::filesystem::path& dir, const oos::EvaluationReport& report);

/// (period, level, post_mean, post_sd, q05, q95) over the retained draws.
std::string quantile_paths_csv(std::span<const std::string> periods, std::span<const sampler::PosteriorDraws> chains);

/// (period, level, value, bandwidth) for noncrossing-adjusted curves.
std::string adjusted_paths_csv(std::span<const std::string> periods, const QuantileGrid& grid,
                               const noncross::AdjustedCurves& curves);

/// (horizon, level, post_mean, post_sd, q05, q95) of simulated quantile forecasts.
std::string forecast_paths_csv(std::span<const sampler::PosteriorDraws> chains);

/// Plain key=value lines, sorted by key.
std::string config_snapshot(const std::map<std::string, std::string>& entries);
std::map<std::string, std::string> parse_key_values(std::string_view text, std::string_view source = "<config>");

void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace tvpqr::report
