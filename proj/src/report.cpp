#include "tvpqr/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "tvpqr/errors.hpp"
#include "tvpqr/evaluation.hpp"

namespace tvpqr::report {

using nlohmann::json;

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

namespace {

constexpr const char* kMetricNames[] = {"crps_none", "crps_tails", "crps_left", "crps_right"};

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double relative(const oos::EvaluationReport& r, std::size_t m, std::size_t h, int metric) {
    const auto b = r.benchmark_index();
    const auto& cell = r.cells[m][h];
    const auto& base = r.cells[b][h];
    if (m == b) return metric < 4 ? cell.crps[metric] : cell.lps;
    return metric < 4 ? cell.crps[metric] / base.crps[metric] : cell.lps - base.lps;
}

std::string level_label(double p) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.4g", p);
    return buf;
}

void summarize_columns(std::ostringstream& os, const std::string& prefix, double level, const Eigen::MatrixXd& draws,
                       Eigen::Index col) {
    const Eigen::VectorXd x = draws.col(col);
    const double mean = x.mean();
    const double sd = x.size() > 1 ? std::sqrt((x.array() - mean).square().sum() / static_cast<double>(x.size() - 1)) : 0.0;
    std::vector<double> v(x.data(), x.data() + x.size());
    os << prefix << ',' << level_label(level) << ',' << format_number(mean) << ',' << format_number(sd) << ','
       << format_number(eval::percentile(v, 0.05)) << ',' << format_number(eval::percentile(v, 0.95)) << '\n';
}

}  // namespace

std::string metrics_csv(const oos::EvaluationReport& r) {
    std::ostringstream os;
    os << "model,basis";
    for (int h : r.horizons) {
        for (const char* name : kMetricNames) os << ',' << name << "_h" << h;
        os << ",lps_h" << h << ",points_h" << h;
    }
    os << '\n';
    const auto b = r.benchmark_index();
    for (std::size_t m = 0; m < r.models.size(); ++m) {
        os << r.models[m] << ',' << (m == b ? "actual" : "relative");
        for (std::size_t h = 0; h < r.horizons.size(); ++h) {
            for (int k = 0; k < 5; ++k) os << ',' << format_number(relative(r, m, h, k));
            os << ',' << r.cells[m][h].count;
        }
        os << '\n';
    }
    return os.str();
}

std::string metrics_json(const oos::EvaluationReport& r) {
    json j;
    j["benchmark"] = r.benchmark;
    j["initial_window"] = r.initial_window;
    j["series_length"] = r.series_length;
    j["master_seed"] = std::to_string(r.master_seed);
    j["horizons"] = r.horizons;
    j["levels"] = r.grid.levels;
    j["crps_discretization"] = "grid mean of weight(p) * QS_p over the quantile levels";
    j["relative_convention"] = "benchmark row actual; others CRPS ratio and LPS difference";
    json models = json::array();
    const auto b = r.benchmark_index();
    for (std::size_t m = 0; m < r.models.size(); ++m) {
        json row;
        row["model"] = r.models[m];
        row["is_benchmark"] = m == b;
        json hs = json::array();
        for (std::size_t h = 0; h < r.horizons.size(); ++h) {
            const auto& c = r.cells[m][h];
            json cell;
            cell["horizon"] = r.horizons[h];
            cell["points"] = c.count;
            cell["expected_points"] = c.expected;
            json abs, rel;
            for (int k = 0; k < 4; ++k) {
                abs[kMetricNames[k]] = number(c.crps[k]);
                rel[kMetricNames[k]] = number(relative(r, m, h, k));
            }
            abs["lps"] = number(c.lps);
            rel["lps"] = number(relative(r, m, h, 4));
            cell["absolute"] = abs;
            cell["relative"] = rel;
            json qs = json::array();
            for (Eigen::Index i = 0; i < c.mean_qs.size(); ++i) qs.push_back(number(c.mean_qs(i)));
            cell["mean_qs"] = qs;
            hs.push_back(cell);
        }
        row["horizons"] = hs;
        models.push_back(row);
    }
    j["models"] = models;
    json failures = json::array();
    for (const auto& f : r.failures) failures.push_back({{"model", f.model}, {"origin", f.origin}, {"message", f.message}});
    j["failures"] = failures;
    return j.dump(2) + "\n";
}

std::string forecasts_csv(const oos::EvaluationReport& r) {
    std::ostringstream os;
    os << "model,origin,horizon,realization,level,value\n";
    for (const auto& rec : r.records)
        for (Eigen::Index i = 0; i < rec.quantiles.size(); ++i)
            os << r.models[rec.model] << ',' << rec.origin << ',' << rec.horizon << ',' << format_number(rec.realization)
               << ',' << level_label(r.grid[i]) << ',' << format_number(rec.quantiles(i)) << '\n';
    return os.str();
}

std::string failures_csv(const oos::EvaluationReport& r) {
    std::ostringstream os;
    os << "model,origin,message\n";
    for (const auto& f : r.failures) {
        std::string msg = f.message;
        for (auto& c : msg)
            if (c == '"') c = '\'';
        os << f.model << ',' << f.origin << ",\"" << msg << "\"\n";
    }
    return os.str();
}

void write_report(const std::filesystem::path& dir, const oos::EvaluationReport& report) {
    std::filesystem::create_directories(dir);
    write_text(dir / "metrics.csv", metrics_csv(report));
    write_text(dir / "metrics.json", metrics_json(report));
    write_text(dir / "forecasts.csv", forecasts_csv(report));
    write_text(dir / "failures.csv", failures_csv(report));
}

std::string quantile_paths_csv(std::span<const std::string> periods, std::span<const sampler::PosteriorDraws> chains) {
    std::ostringstream os;
    os << "period,level,post_mean,post_sd,q05,q95\n";
    if (chains.empty()) return os.str();
    const auto T = chains.front().periods();
    if (static_cast<Eigen::Index>(periods.size()) != T) throw DomainError("quantile paths: period labels do not match the draws");
    for (Eigen::Index t = 0; t < T; ++t)
        for (const auto& c : chains) summarize_columns(os, periods[t], c.quantile_p, c.quantile, t);
    return os.str();
}

std::string adjusted_paths_csv(std::span<const std::string> periods, const QuantileGrid& grid,
                               const noncross::AdjustedCurves& curves) {
    std::ostringstream os;
    os << "period,level,value,bandwidth\n";
    for (Eigen::Index t = 0; t < curves.values.rows(); ++t)
        for (Eigen::Index i = 0; i < curves.values.cols(); ++i)
            os << periods[t] << ',' << level_label(grid[i]) << ',' << format_number(curves.values(t, i)) << ','
               << (curves.bandwidths.empty() ? std::string("") : format_number(curves.bandwidths[t])) << '\n';
    return os.str();
}

std::string forecast_paths_csv(std::span<const sampler::PosteriorDraws> chains) {
    std::ostringstream os;
    os << "horizon,level,post_mean,post_sd,q05,q95\n";
    if (chains.empty()) return os.str();
    const auto& hs = chains.front().horizons;
    for (std::size_t j = 0; j < hs.size(); ++j)
        for (const auto& c : chains) summarize_columns(os, std::to_string(hs[j]), c.quantile_p, c.forecast, j);
    return os.str();
}

std::string config_snapshot(const std::map<std::string, std::string>& entries) {
    std::ostringstream os;
    for (const auto& [k, v] : entries) os << k << '=' << v << '\n';
    return os.str();
}

std::map<std::string, std::string> parse_key_values(std::string_view text, std::string_view source) {
    std::map<std::string, std::string> out;
    std::istringstream is{std::string(text)};
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    while (std::getline(is, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InputError(std::string(source) + ":" + std::to_string(lineno) + ": expected key=value");
        auto key = trim(line.substr(0, eq));
        if (key.rfind("--", 0) == 0) key = key.substr(2);
        if (key.empty()) throw InputError(std::string(source) + ":" + std::to_string(lineno) + ": empty key");
        out[key] = trim(line.substr(eq + 1));
    }
    return out;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write " + path.string());
    f << text;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot read " + path.string());
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

}  // namespace tvpqr::report
