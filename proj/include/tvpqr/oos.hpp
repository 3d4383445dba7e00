#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "tvpqr/evaluation.hpp"
#include "tvpqr/noncrossing.hpp"
#include "tvpqr/sampler.hpp"
#include "tvpqr/types.hpp"
#include "tvpqr/ucsv.hpp"

namespace tvpqr::oos {

enum class Family { UCQR, UCSV };

/// One evaluated model: a UCQR configuration plus noncrossing mode, or the
/// UC-SV baseline. Identifiers look like "ucqr-tvs-dhs-gpt" or "ucsv".
struct ModelVariant {
    Family family = Family::UCQR;
    sampler::ScaleMode scale = sampler::ScaleMode::TIS;
    shrink::ShrinkageKind prior = shrink::ShrinkageKind::DynamicHorseshoe;
    noncross::Adjustment adjustment = noncross::Adjustment::Raw;

    std::string id() const;
    /// Models sharing a fit key share their MCMC chains (raw/gp/gpt differ
    /// only in post-processing).
    std::string fit_key() const;

    static ModelVariant parse(std::string_view id);
    static ModelVariant ucqr(sampler::ScaleMode scale, shrink::ShrinkageKind prior, noncross::Adjustment adjustment);
    static ModelVariant ucsv();
};

struct OOSConfig {
    int initial_window = 50;
    std::vector<int> horizons{1, 4, 12};
    std::vector<ModelVariant> models;
    std::uint64_t master_seed = 1;
    QuantileGrid grid = QuantileGrid::standard();
    sampler::McmcSettings mcmc;
    sampler::Hyperparams hyper;
    double mh_tuning = 0.1;
    ucsv::UcsvSpec ucsv;  ///< its mcmc field is overwritten by `mcmc`
    noncross::GPConfig gp;
    /// Model id the relative tables are benchmarked against; empty picks
    /// "ucsv" when present, otherwise the first model.
    std::string benchmark;
    int threads = 0;
    /// Called before every fit with (fit key, origin); may throw to simulate
    /// a failing cell.
    std::function<void(const std::string&, int)> fit_hook;

    void validate(Eigen::Index series_length) const;
    int max_horizon() const;
};

/// Number of scored forecasts at horizon h: origins initial_window..T-h.
int evaluation_points(Eigen::Index series_length, int initial_window, int horizon);

struct ForecastRecord {
    std::size_t model = 0;  ///< index into EvaluationReport::models
    int origin = 0;         ///< observations used for the fit
    int horizon = 0;
    double realization = 0.0;
    Eigen::VectorXd quantiles;
    Eigen::VectorXd qs;
    std::array<double, 4> crps{};  ///< ordered as eval::kAllWeights
    double lps = 0.0;
};

struct CellFailure {
    std::string model;
    int origin = 0;
    std::string message;
};

struct MetricCell {
    std::array<double, 4> crps{};
    double lps = 0.0;
    Eigen::VectorXd mean_qs;
    int count = 0;
    int expected = 0;
};

struct EvaluationReport {
    std::vector<std::string> models;
    std::vector<int> horizons;
    QuantileGrid grid;
    std::string benchmark;
    int initial_window = 0;
    Eigen::Index series_length = 0;
    std::uint64_t master_seed = 0;
    std::vector<ForecastRecord> records;  ///< sorted by (model, origin, horizon)
    std::vector<CellFailure> failures;    ///< sorted by (model, origin)
    std::vector<std::vector<MetricCell>> cells;  ///< [model][horizon]

    std::size_t benchmark_index() const;
};

/// Builds the per-cell averages from `records`.
void aggregate(EvaluationReport& report);

EvaluationReport run_expanding_window(const OOSConfig& config, const SeriesData& data);

/// QS per level and the four weighted CRPS values; `log_score` is stored as the LPS.
ForecastRecord score_forecast(const QuantileGrid& grid, const Eigen::VectorXd& quantiles, double realization,
                              double log_score);

/// LPS of a UCQR quantile forecast: kernel-smoothed density of the quantile
/// values. Raw (possibly crossing) values are sorted first.
double quantile_forecast_lps(const QuantileGrid& grid, const Eigen::VectorXd& quantiles, double realization);

}  // namespace tvpqr::oos
