// Command-line front end: fit, forecast, oos, score, simulate.
#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "tvpqr/errors.hpp"
#include "tvpqr/noncrossing.hpp"
#include "tvpqr/oos.hpp"
#include "tvpqr/report.hpp"
#include "tvpqr/sampler.hpp"
#include "tvpqr/series.hpp"
#include "tvpqr/simulate.hpp"
#include "tvpqr/ucsv.hpp"

namespace fs = std::filesystem;
using namespace tvpqr;

namespace {

struct Options {
    std::string data;
    std::string transform = "none";
    std::string quantiles = "0.05:0.95:0.05";
    std::string model = "ucqr";
    std::string scale = "tis";
    std::string prior = "dhs";
    std::string adjust = "raw";
    std::string horizons = "1,4,12";
    std::uint64_t seed = 1;
    int burnin = 3000;
    int draws = 9000;
    int thin = 3;
    int threads = 0;
    std::string out = "runs";
    std::string run_id;
    std::string config;
    bool desk_scale = false;
    // oos
    int initial_window = 50;
    std::string models;
    std::string benchmark;
    // score
    std::string forecasts;
    // simulate
    std::string dgp = "trend-sv";
    int length = 100;
};

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            std::size_t used = 0;
            out.push_back(std::stoi(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw InputError("cannot parse integer list '" + text + "'");
        }
    }
    if (out.empty()) throw InputError("empty integer list");
    return out;
}

std::vector<std::string> split(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

void add_common(CLI::App* app, Options& o) {
    app->add_option("--config", o.config, "key=value file mirroring the flags (flags override it)");
    app->add_option("--data", o.data, "two-column CSV (period, value) with a header row");
    app->add_option("--transform", o.transform, "none or logdiff (400 log(P_t/P_{t-1}))");
    app->add_option("--quantiles", o.quantiles, "lo:hi:step or a comma list");
    app->add_option("--model", o.model, "ucqr or ucsv");
    app->add_option("--scale", o.scale, "tis or tvs");
    app->add_option("--prior", o.prior, "ig, shs or dhs");
    app->add_option("--adjust", o.adjust, "raw, gp or gpt");
    app->add_option("--seed", o.seed, "master seed");
    app->add_option("--burnin", o.burnin, "burn-in sweeps");
    app->add_option("--draws", o.draws, "post-burn-in sweeps");
    app->add_option("--thin", o.thin, "thinning interval");
    app->add_option("--threads", o.threads, "worker threads (0 = OpenMP default)");
    app->add_option("--out", o.out, "output root; files go to <out>/<run-id>/");
    app->add_option("--run-id", o.run_id, "run directory name (default <command>-<seed>)");
    app->add_flag("--desk-scale", o.desk_scale, "reduced MCMC lengths (500/1500/3)");
}

// Values from --config fill options not given on the command line.
void apply_config_file(CLI::App* app, const Options& o) {
    if (o.config.empty()) return;
    const auto entries = report::parse_key_values(report::read_text(o.config), o.config);
    for (const auto& [key, value] : entries) {
        if (key == "config") continue;
        CLI::Option* opt = app->get_option_no_throw("--" + key);
        if (!opt) throw InputError(o.config + ": unknown key '" + key + "' for command " + app->get_name());
        if (opt->count() > 0) continue;
        if (opt->get_type_size() == 0) {
            if (value == "true" || value == "1") opt->add_result("true");
            else if (value == "false" || value == "0") opt->add_result("false");
            else throw InputError(o.config + ": flag '" + key + "' expects true or false");
        } else {
            opt->add_result(value);
        }
        opt->run_callback();
    }
}

std::map<std::string, std::string> snapshot(CLI::App* app) {
    std::map<std::string, std::string> out;
    for (const CLI::Option* opt : app->get_options()) {
        const auto name = opt->get_single_name();
        if (name.empty() || name == "help" || name == "config") continue;
        const auto res = opt->results();
        if (!res.empty()) out[name] = res.back();
        else if (!opt->get_default_str().empty()) out[name] = opt->get_default_str();
    }
    out["command"] = app->get_name();
    return out;
}

sampler::McmcSettings mcmc_settings(const Options& o) {
    sampler::McmcSettings m = o.desk_scale ? sampler::McmcSettings::desk_scale() : sampler::McmcSettings{o.burnin, o.draws, o.thin};
    m.validate();
    return m;
}

SeriesData load_data(const Options& o) {
    if (o.data.empty()) throw InputError("--data is required");
    return ingest_csv(o.data, parse_transform(o.transform));
}

fs::path run_dir(const Options& o, const std::string& command) {
    const auto dir = fs::path(o.out) / (o.run_id.empty() ? command + "-" + std::to_string(o.seed) : o.run_id);
    fs::create_directories(dir);
    return dir;
}

oos::ModelVariant variant_from_flags(const Options& o) {
    if (o.model == "ucsv") return oos::ModelVariant::ucsv();
    if (o.model != "ucqr") return oos::ModelVariant::parse(o.model);
    return oos::ModelVariant::ucqr(sampler::parse_scale_mode(o.scale), shrink::parse_shrinkage(o.prior),
                                   noncross::parse_adjustment(o.adjust));
}

std::vector<sampler::PosteriorDraws> fit_chains(const Options& o, const SeriesData& data, const QuantileGrid& grid,
                                                std::span<const int> horizons, const oos::ModelVariant& v) {
    const auto mcmc = mcmc_settings(o);
    if (v.family == oos::Family::UCSV) {
        ucsv::UcsvSpec spec;
        spec.mcmc = mcmc;
        return {ucsv::run_ucsv(data, spec, horizons, derive_seed(o.seed, hash_string(v.fit_key()), 0, data.size()))};
    }
    sampler::ModelSpec base;
    base.scale_mode = v.scale;
    base.shrinkage = v.prior;
    base.mcmc = mcmc;
    std::vector<std::uint64_t> seeds(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) seeds[i] = derive_seed(o.seed, hash_string(v.fit_key()), i, data.size());
    return sampler::run_quantile_chains(base, grid, data, horizons, seeds, o.threads);
}

int cmd_fit(CLI::App* app, const Options& o, bool with_forecast) {
    const auto data = load_data(o);
    const auto grid = QuantileGrid::parse(o.quantiles);
    const auto v = variant_from_flags(o);
    const std::vector<int> horizons = with_forecast ? parse_int_list(o.horizons) : std::vector<int>{};
    const auto dir = run_dir(o, app->get_name());
    const auto chains = fit_chains(o, data, grid, horizons, v);
    if (v.family == oos::Family::UCSV) {
        report::write_text(dir / "trend_paths.csv", report::quantile_paths_csv(data.timestamps, chains));
        if (with_forecast) {
            std::ostringstream os;
            os << "horizon,level,value\n";
            for (std::size_t j = 0; j < horizons.size(); ++j) {
                const auto mix = ucsv::predictive_mixture(chains.front(), static_cast<Eigen::Index>(j));
                for (std::size_t i = 0; i < grid.size(); ++i)
                    os << horizons[j] << ',' << grid[i] << ','
                       << report::format_number(eval::gaussian_mixture_quantile(mix.means, mix.variances, grid[i])) << '\n';
            }
            report::write_text(dir / "forecast_quantiles.csv", os.str());
        }
    } else {
        report::write_text(dir / "quantile_paths.csv", report::quantile_paths_csv(data.timestamps, chains));
        if (v.adjustment != noncross::Adjustment::Raw) {
            const auto curves = noncross::adjust(noncross::QuantileDrawSet::in_sample(chains), grid, v.adjustment, {}, o.threads);
            report::write_text(dir / "adjusted_paths.csv", report::adjusted_paths_csv(data.timestamps, grid, curves));
        }
        if (with_forecast) {
            report::write_text(dir / "forecast_paths.csv", report::forecast_paths_csv(chains));
            const auto curves = noncross::adjust(noncross::QuantileDrawSet::forecasts(chains), grid, v.adjustment, {}, o.threads);
            std::vector<std::string> labels;
            for (int h : horizons) labels.push_back(std::to_string(h));
            report::write_text(dir / "forecast_quantiles.csv", report::adjusted_paths_csv(labels, grid, curves));
        }
        std::ostringstream acc;
        acc << "level,acceptance_rate,final_tuning\n";
        for (const auto& c : chains)
            acc << c.quantile_p << ',' << report::format_number(c.acceptance_rate) << ','
                << report::format_number(c.final_tuning) << '\n';
        report::write_text(dir / "diagnostics.csv", acc.str());
    }
    report::write_text(dir / "config.snapshot", report::config_snapshot(snapshot(app)));
    std::cout << "wrote " << dir.string() << '\n';
    return 0;
}

int cmd_oos(CLI::App* app, const Options& o) {
    const auto data = load_data(o);
    oos::OOSConfig cfg;
    cfg.initial_window = o.initial_window;
    cfg.horizons = parse_int_list(o.horizons);
    cfg.grid = QuantileGrid::parse(o.quantiles);
    cfg.mcmc = mcmc_settings(o);
    cfg.master_seed = o.seed;
    cfg.threads = o.threads;
    cfg.benchmark = o.benchmark;
    if (o.models.empty()) {
        cfg.models.push_back(variant_from_flags(o));
        if (cfg.models.front().family != oos::Family::UCSV) cfg.models.push_back(oos::ModelVariant::ucsv());
    } else {
        for (const auto& id : split(o.models)) cfg.models.push_back(oos::ModelVariant::parse(id));
    }
    const auto dir = run_dir(o, "oos");
    const auto rep = oos::run_expanding_window(cfg, data);
    report::write_report(dir, rep);
    auto snap = snapshot(app);
    std::string ids;
    for (const auto& m : cfg.models) ids += (ids.empty() ? "" : ",") + m.id();
    snap["models"] = ids;
    snap["benchmark"] = rep.benchmark;
    report::write_text(dir / "config.snapshot", report::config_snapshot(snap));
    std::cout << report::metrics_csv(rep);
    if (!rep.failures.empty()) std::cerr << rep.failures.size() << " failed (model, origin) cells; see failures.csv\n";
    std::cout << "wrote " << dir.string() << '\n';
    return 0;
}

// Rebuilds the report from a forecasts.csv written by `oos`. LPS here is the
// kernel-smoothed density for every model.
int cmd_score(CLI::App* app, const Options& o) {
    if (o.forecasts.empty()) throw InputError("--forecasts is required");
    const auto text = report::read_text(o.forecasts);
    std::istringstream is(text);
    std::string line;
    std::getline(is, line);
    if (line.rfind("model,origin,horizon,realization,level,value", 0) != 0)
        throw InputError(o.forecasts + ": unexpected header");
    struct Key {
        std::string model;
        int origin, horizon;
        bool operator<(const Key& k) const { return std::tie(model, origin, horizon) < std::tie(k.model, k.origin, k.horizon); }
    };
    std::map<Key, std::pair<double, std::vector<std::pair<double, double>>>> rows;
    std::vector<std::string> model_order;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != 6) throw InputError(o.forecasts + ":" + std::to_string(lineno) + ": expected 6 fields");
        Key k{f[0], std::stoi(f[1]), std::stoi(f[2])};
        if (std::find(model_order.begin(), model_order.end(), f[0]) == model_order.end()) model_order.push_back(f[0]);
        auto& r = rows[k];
        r.first = std::stod(f[3]);
        r.second.emplace_back(std::stod(f[4]), std::stod(f[5]));
    }
    if (rows.empty()) throw InputError(o.forecasts + ": no forecasts");
    oos::EvaluationReport rep;
    rep.models = model_order;
    std::vector<double> levels;
    for (const auto& [p, v] : rows.begin()->second.second) levels.push_back(p);
    rep.grid = QuantileGrid{levels};
    rep.grid.validate();
    std::set<int> hs;
    for (const auto& [k, v] : rows) hs.insert(k.horizon);
    rep.horizons.assign(hs.begin(), hs.end());
    rep.benchmark = o.benchmark.empty()
                        ? (std::find(model_order.begin(), model_order.end(), "ucsv") != model_order.end() ? "ucsv" : model_order.front())
                        : o.benchmark;
    for (const auto& [k, v] : rows) {
        if (v.second.size() != levels.size()) throw InputError("forecast for " + k.model + " has a different level count");
        Eigen::VectorXd q(levels.size());
        for (std::size_t i = 0; i < levels.size(); ++i) q(i) = v.second[i].second;
        auto rec = oos::score_forecast(rep.grid, q, v.first, oos::quantile_forecast_lps(rep.grid, q, v.first));
        rec.model = std::find(model_order.begin(), model_order.end(), k.model) - model_order.begin();
        rec.origin = k.origin;
        rec.horizon = k.horizon;
        rep.records.push_back(std::move(rec));
    }
    std::stable_sort(rep.records.begin(), rep.records.end(), [](const auto& a, const auto& b) {
        return std::tie(a.model, a.origin, a.horizon) < std::tie(b.model, b.origin, b.horizon);
    });
    oos::aggregate(rep);
    for (auto& row : rep.cells)
        for (auto& c : row) c.expected = c.count;
    const auto dir = run_dir(o, "score");
    report::write_text(dir / "metrics.csv", report::metrics_csv(rep));
    report::write_text(dir / "metrics.json", report::metrics_json(rep));
    report::write_text(dir / "config.snapshot", report::config_snapshot(snapshot(app)));
    std::cout << report::metrics_csv(rep);
    return 0;
}

int cmd_simulate(const Options& o) {
    const auto data = sim::simulate(o.dgp, o.length, o.seed);
    if (o.out.empty() || o.out == "-") {
        std::cout << "period,value\n";
        for (Eigen::Index t = 0; t < data.size(); ++t)
            std::cout << data.timestamps[t] << ',' << report::format_number(data.values(t)) << '\n';
        return 0;
    }
    write_series_csv(o.out, data);
    std::cout << "wrote " << o.out << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian time-varying-parameter quantile regression"};
    app.require_subcommand(1);
    Options o;

    auto* fit = app.add_subcommand("fit", "estimate quantile paths for one model");
    add_common(fit, o);
    auto* forecast = app.add_subcommand("forecast", "estimate and forecast at the given horizons");
    add_common(forecast, o);
    forecast->add_option("--horizons", o.horizons, "comma list of forecast horizons");
    auto* oos_cmd = app.add_subcommand("oos", "expanding-window out-of-sample evaluation");
    add_common(oos_cmd, o);
    oos_cmd->add_option("--horizons", o.horizons, "comma list of forecast horizons");
    oos_cmd->add_option("--initial-window", o.initial_window, "observations in the first estimation window");
    oos_cmd->add_option("--models", o.models, "comma list of model ids, e.g. ucqr-tis-dhs-gpt,ucsv");
    oos_cmd->add_option("--benchmark", o.benchmark, "model id used as the reference row");
    auto* score = app.add_subcommand("score", "recompute metrics from a stored forecasts.csv");
    score->add_option("--config", o.config, "key=value file mirroring the flags");
    score->add_option("--forecasts", o.forecasts, "forecasts.csv written by oos")->required();
    score->add_option("--benchmark", o.benchmark, "model id used as the reference row");
    score->add_option("--out", o.out, "output root");
    score->add_option("--run-id", o.run_id, "run directory name");
    auto* simulate = app.add_subcommand("simulate", "write a synthetic series");
    simulate->add_option("--config", o.config, "key=value file mirroring the flags");
    simulate->add_option("--dgp", o.dgp, "al-constant, normal, variance-break or trend-sv");
    simulate->add_option("--length", o.length, "number of observations");
    simulate->add_option("--seed", o.seed, "generator seed");
    simulate->add_option("--out", o.out, "output CSV path, or - for stdout")->default_str("-");
    o.out = "runs";

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    try {
        CLI::App* sub = app.get_subcommands().front();
        if (sub == simulate && simulate->get_option("--out")->count() == 0) o.out = "-";
        apply_config_file(sub, o);
        if (sub == fit) return cmd_fit(sub, o, false);
        if (sub == forecast) return cmd_fit(sub, o, true);
        if (sub == oos_cmd) return cmd_oos(sub, o);
        if (sub == score) return cmd_score(sub, o);
        return cmd_simulate(o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
