#include "tvpqr/oos.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "tvpqr/errors.hpp"
#include "tvpqr/rng.hpp"

namespace tvpqr::oos {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string ModelVariant::id() const {
    if (family == Family::UCSV) return "ucsv";
    return fit_key() + "-" + std::string(noncross::to_string(adjustment));
}

std::string ModelVariant::fit_key() const {
    if (family == Family::UCSV) return "ucsv";
    return "ucqr-" + std::string(sampler::to_string(scale)) + "-" + std::string(shrink::to_string(prior));
}

ModelVariant ModelVariant::ucqr(sampler::ScaleMode scale, shrink::ShrinkageKind prior, noncross::Adjustment adjustment) {
    return ModelVariant{Family::UCQR, scale, prior, adjustment};
}

ModelVariant ModelVariant::ucsv() { return ModelVariant{Family::UCSV, {}, {}, {}}; }

ModelVariant ModelVariant::parse(std::string_view id) {
    std::string s(id);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "ucsv" || s == "uc-sv") return ucsv();
    if (s == "ucsvm" || s == "uc-svm")
        throw InputError("model '" + std::string(id) +
                         "' is not available: its estimation procedure is defined by external prior work "
                         "and is not part of this library");
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto dash = s.find('-', start);
        parts.push_back(s.substr(start, dash - start));
        if (dash == std::string::npos) break;
        start = dash + 1;
    }
    if (parts.size() != 4 || parts[0] != "ucqr")
        throw InputError("malformed model id '" + std::string(id) + "' (expected ucqr-<tis|tvs>-<ig|shs|dhs>-<raw|gp|gpt> or ucsv)");
    return ucqr(sampler::parse_scale_mode(parts[1]), shrink::parse_shrinkage(parts[2]), noncross::parse_adjustment(parts[3]));
}

int OOSConfig::max_horizon() const {
    return horizons.empty() ? 0 : *std::max_element(horizons.begin(), horizons.end());
}

void OOSConfig::validate(Eigen::Index series_length) const {
    if (initial_window < 2) throw InputError("oos: initial window must hold at least two observations");
    if (horizons.empty()) throw InputError("oos: at least one horizon required");
    for (int h : horizons)
        if (h < 1) throw InputError("oos: horizons must be positive");
    auto sorted = horizons;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw InputError("oos: duplicate horizons");
    if (models.empty()) throw InputError("oos: no models configured");
    if (initial_window + max_horizon() > series_length)
        throw InputError("oos: initial window (" + std::to_string(initial_window) + ") plus the largest horizon (" +
                         std::to_string(max_horizon()) + ") exceeds the series length (" +
                         std::to_string(series_length) + ")");
    grid.validate();
    mcmc.validate();
    if (!benchmark.empty()) {
        bool found = false;
        for (const auto& m : models) found = found || m.id() == benchmark;
        if (!found) throw InputError("oos: benchmark '" + benchmark + "' is not among the configured models");
    }
}

int evaluation_points(Eigen::Index series_length, int initial_window, int horizon) {
    return std::max<int>(0, static_cast<int>(series_length) - horizon - initial_window + 1);
}

std::size_t EvaluationReport::benchmark_index() const {
    for (std::size_t i = 0; i < models.size(); ++i)
        if (models[i] == benchmark) return i;
    return 0;
}

ForecastRecord score_forecast(const QuantileGrid& grid, const VectorXd& quantiles, double realization, double log_score) {
    ForecastRecord r;
    r.realization = realization;
    r.quantiles = quantiles;
    r.qs.resize(quantiles.size());
    for (Eigen::Index i = 0; i < quantiles.size(); ++i) r.qs(i) = eval::quantile_score(realization, quantiles(i), grid[i]);
    eval::QuantileForecast qf{grid, quantiles};
    for (std::size_t s = 0; s < 4; ++s) r.crps[s] = eval::weighted_crps(qf, realization, eval::kAllWeights[s]);
    r.lps = log_score;
    return r;
}

double quantile_forecast_lps(const QuantileGrid& grid, const VectorXd& quantiles, double realization) {
    VectorXd v = quantiles;
    std::sort(v.data(), v.data() + v.size());
    // Ties after sorting are split by the smallest representable gap.
    for (Eigen::Index i = 1; i < v.size(); ++i)
        if (!(v(i) > v(i - 1))) v(i) = std::nextafter(v(i - 1), INFINITY);
    return eval::log_predictive_score(eval::smooth_to_density(eval::QuantileForecast{grid, v}), realization);
}

namespace {

struct FitGroup {
    std::string key;
    ModelVariant variant;
    std::vector<std::size_t> members;  ///< model indices
};

struct Task {
    std::size_t group;
    int origin;
};

struct TaskResult {
    std::vector<ForecastRecord> records;
    std::vector<std::pair<std::size_t, std::string>> failures;  ///< (model, message)
};

MatrixXd concat_columns(const MatrixXd& a, const MatrixXd& b) {
    MatrixXd out(a.rows(), a.cols() + b.cols());
    out << a, b;
    return out;
}

// Forecast quantile curves (H x P) for one adjustment mode.
MatrixXd ucqr_forecast_curves(const std::vector<sampler::PosteriorDraws>& chains, const QuantileGrid& grid,
                              noncross::Adjustment mode, const noncross::GPConfig& gp) {
    auto fc = noncross::QuantileDrawSet::forecasts(chains);
    if (mode != noncross::Adjustment::GP) return noncross::adjust_serial(fc, grid, mode, gp).values;
    // The common bandwidth covers in-sample and forecast periods.
    auto all = noncross::QuantileDrawSet::in_sample(chains);
    for (std::size_t i = 0; i < all.mu.size(); ++i) {
        all.mu[i] = concat_columns(all.mu[i], fc.mu[i]);
        all.sigma[i] = concat_columns(all.sigma[i], fc.sigma[i]);
    }
    const MatrixXd v = noncross::adjust_serial(all, grid, mode, gp).values;
    return v.bottomRows(fc.periods());
}

TaskResult run_task(const OOSConfig& cfg, const SeriesData& data, const FitGroup& group, int origin) {
    TaskResult res;
    const SeriesData sample = data.head(origin);
    const auto T = data.size();
    const std::uint64_t model_id = hash_string(group.key);
    const auto P = cfg.grid.size();
    try {
        if (cfg.fit_hook) cfg.fit_hook(group.key, origin);
        auto emit = [&](std::size_t model, Eigen::Index col, const VectorXd& q, auto&& lps_of) {
            const int h = cfg.horizons[col];
            if (origin + h > T) return;
            const double y = data.values(origin - 1 + h);
            ForecastRecord r = score_forecast(cfg.grid, q, y, lps_of(y));
            r.model = model;
            r.origin = origin;
            r.horizon = h;
            res.records.push_back(std::move(r));
        };

        if (group.variant.family == Family::UCSV) {
            ucsv::UcsvSpec spec = cfg.ucsv;
            spec.mcmc = cfg.mcmc;
            const auto draws = ucsv::run_ucsv(sample, spec, cfg.horizons, derive_seed(cfg.master_seed, model_id, 0, origin));
            for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(cfg.horizons.size()); ++j) {
                const auto mix = ucsv::predictive_mixture(draws, j);
                VectorXd q(P);
                for (std::size_t i = 0; i < P; ++i) q(i) = eval::gaussian_mixture_quantile(mix.means, mix.variances, cfg.grid[i]);
                for (std::size_t m : group.members)
                    emit(m, j, q, [&](double y) {
                        return std::max(eval::gaussian_mixture_logpdf(mix.means, mix.variances, y), eval::kLogFloor);
                    });
            }
            return res;
        }

        sampler::ModelSpec base;
        base.scale_mode = group.variant.scale;
        base.shrinkage = group.variant.prior;
        base.hyper = cfg.hyper;
        base.mcmc = cfg.mcmc;
        base.mh_tuning = cfg.mh_tuning;
        std::vector<std::uint64_t> seeds(P);
        for (std::size_t i = 0; i < P; ++i) seeds[i] = derive_seed(cfg.master_seed, model_id, i, origin);
        const auto chains = sampler::run_quantile_chains_serial(base, cfg.grid, sample, cfg.horizons, seeds);

        // A failed adjustment only affects the members using that mode.
        std::map<noncross::Adjustment, MatrixXd> curves;
        std::map<noncross::Adjustment, std::string> adjust_errors;
        for (std::size_t m : group.members) {
            const auto mode = cfg.models[m].adjustment;
            if (!curves.count(mode) && !adjust_errors.count(mode)) {
                try {
                    curves[mode] = ucqr_forecast_curves(chains, cfg.grid, mode, cfg.gp);
                } catch (const std::exception& e) {
                    adjust_errors[mode] = e.what();
                }
            }
            if (adjust_errors.count(mode)) {
                res.failures.emplace_back(m, adjust_errors[mode]);
                continue;
            }
            const MatrixXd& c = curves[mode];
            for (Eigen::Index j = 0; j < c.rows(); ++j) {
                const VectorXd q = c.row(j).transpose();
                emit(m, j, q, [&](double y) { return quantile_forecast_lps(cfg.grid, q, y); });
            }
        }
    } catch (const std::exception& e) {
        res.records.clear();
        res.failures.clear();
        for (std::size_t m : group.members) res.failures.emplace_back(m, e.what());
    }
    return res;
}

}  // namespace

void aggregate(EvaluationReport& report) {
    const auto M = report.models.size();
    const auto H = report.horizons.size();
    const auto P = static_cast<Eigen::Index>(report.grid.size());
    report.cells.assign(M, std::vector<MetricCell>(H));
    std::map<int, std::size_t> hpos;
    for (std::size_t j = 0; j < H; ++j) hpos[report.horizons[j]] = j;
    for (std::size_t m = 0; m < M; ++m)
        for (std::size_t j = 0; j < H; ++j) {
            auto& c = report.cells[m][j];
            c.mean_qs = VectorXd::Zero(P);
            c.expected = evaluation_points(report.series_length, report.initial_window, report.horizons[j]);
        }
    for (const auto& r : report.records) {
        auto& c = report.cells[r.model][hpos.at(r.horizon)];
        for (std::size_t s = 0; s < 4; ++s) c.crps[s] += r.crps[s];
        c.lps += r.lps;
        c.mean_qs += r.qs;
        ++c.count;
    }
    for (auto& row : report.cells)
        for (auto& c : row) {
            if (c.count == 0) {
                c.crps.fill(NAN);
                c.lps = NAN;
                c.mean_qs.setConstant(NAN);
                continue;
            }
            const double n = c.count;
            for (auto& v : c.crps) v /= n;
            c.lps /= n;
            c.mean_qs /= n;
        }
}

EvaluationReport run_expanding_window(const OOSConfig& config, const SeriesData& data) {
    const auto T = data.size();
    config.validate(T);

    std::vector<FitGroup> groups;
    for (std::size_t m = 0; m < config.models.size(); ++m) {
        const auto key = config.models[m].fit_key();
        auto it = std::find_if(groups.begin(), groups.end(), [&](const FitGroup& g) { return g.key == key; });
        if (it == groups.end()) {
            groups.push_back(FitGroup{key, config.models[m], {}});
            it = groups.end() - 1;
        }
        it->members.push_back(m);
    }

    const int min_h = *std::min_element(config.horizons.begin(), config.horizons.end());
    std::vector<Task> tasks;
    for (std::size_t g = 0; g < groups.size(); ++g)
        for (int origin = config.initial_window; origin + min_h <= T; ++origin) tasks.push_back(Task{g, origin});

    std::vector<TaskResult> results(tasks.size());
    const int nthreads = config.threads > 0 ? config.threads : omp_get_max_threads();
    const auto ntasks = static_cast<long>(tasks.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(nthreads)
    for (long i = 0; i < ntasks; ++i) results[i] = run_task(config, data, groups[tasks[i].group], tasks[i].origin);

    EvaluationReport report;
    for (const auto& m : config.models) report.models.push_back(m.id());
    report.horizons = config.horizons;
    report.grid = config.grid;
    report.initial_window = config.initial_window;
    report.series_length = T;
    report.master_seed = config.master_seed;
    if (!config.benchmark.empty()) report.benchmark = config.benchmark;
    else {
        const bool has_ucsv = std::find(report.models.begin(), report.models.end(), "ucsv") != report.models.end();
        report.benchmark = has_ucsv ? "ucsv" : report.models.front();
    }

    for (std::size_t i = 0; i < tasks.size(); ++i) {
        auto& r = results[i];
        for (const auto& [m, msg] : r.failures) report.failures.push_back(CellFailure{report.models[m], tasks[i].origin, msg});
        for (auto& rec : r.records) report.records.push_back(std::move(rec));
    }
    std::stable_sort(report.records.begin(), report.records.end(), [](const ForecastRecord& a, const ForecastRecord& b) {
        return std::tie(a.model, a.origin, a.horizon) < std::tie(b.model, b.origin, b.horizon);
    });
    std::stable_sort(report.failures.begin(), report.failures.end(), [&](const CellFailure& a, const CellFailure& b) {
        return std::tie(a.model, a.origin) < std::tie(b.model, b.origin);
    });
    aggregate(report);
    return report;
}

}  // namespace tvpqr::oos
