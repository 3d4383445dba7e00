#include "tvpqr/series.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tvpqr/errors.hpp"

namespace tvpqr {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"')) s.remove_suffix(1);
    return s;
}

bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (s.empty()) return false;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end && std::isfinite(out);
}

// Numeric labels compare numerically, anything else lexicographically.
bool period_before(const std::string& a, const std::string& b) {
    double x, y;
    if (parse_double(a, x) && parse_double(b, y)) return x < y;
    return a < b;
}

}  // namespace

QuantileGrid QuantileGrid::standard() {
    QuantileGrid g;
    for (int i = 1; i <= 19; ++i) g.levels.push_back(0.05 * i);
    return g;
}

QuantileGrid QuantileGrid::parse(std::string_view spec) {
    QuantileGrid g;
    spec = trim(spec);
    if (spec.find(':') != std::string_view::npos) {
        double lo, hi, step;
        const auto c1 = spec.find(':');
        const auto c2 = spec.find(':', c1 + 1);
        if (c2 == std::string_view::npos || !parse_double(spec.substr(0, c1), lo) ||
            !parse_double(spec.substr(c1 + 1, c2 - c1 - 1), hi) || !parse_double(spec.substr(c2 + 1), step) || step <= 0.0)
            throw InputError("quantile grid: expected lo:hi:step, got '" + std::string(spec) + "'");
        const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
        for (int i = 0; i <= n; ++i) g.levels.push_back(std::round((lo + i * step) * 1e12) / 1e12);
    } else {
        std::size_t pos = 0;
        while (pos <= spec.size()) {
            auto next = spec.find(',', pos);
            if (next == std::string_view::npos) next = spec.size();
            double v;
            if (!parse_double(spec.substr(pos, next - pos), v))
                throw InputError("quantile grid: cannot parse '" + std::string(spec) + "'");
            g.levels.push_back(v);
            pos = next + 1;
        }
    }
    g.validate();
    return g;
}

void QuantileGrid::validate() const {
    if (levels.empty()) throw DomainError("quantile grid is empty");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (!(levels[i] > 0.0 && levels[i] < 1.0)) throw DomainError("quantile levels must lie in (0, 1)");
        if (i > 0 && !(levels[i] > levels[i - 1])) throw DomainError("quantile levels must be strictly increasing");
    }
}

Transform parse_transform(std::string_view tag) {
    if (tag == "none") return Transform::None;
    if (tag == "log-diff-annualized" || tag == "logdiff") return Transform::LogDiffAnnualized;
    throw InputError("unknown transform '" + std::string(tag) + "' (expected none or log-diff-annualized)");
}

std::string_view to_string(Transform t) { return t == Transform::None ? "none" : "log-diff-annualized"; }

Eigen::MatrixXd SeriesData::design() const {
    if (regressors) return *regressors;
    return Eigen::MatrixXd::Ones(values.size(), 1);
}

SeriesData SeriesData::head(Eigen::Index n) const {
    if (n < 0 || n > size()) throw DomainError("series head: length out of range");
    SeriesData out;
    out.timestamps.assign(timestamps.begin(), timestamps.begin() + std::min<std::size_t>(n, timestamps.size()));
    out.values = values.head(n);
    if (regressors) out.regressors = regressors->topRows(n);
    out.transform = transform;
    return out;
}

SeriesData SeriesData::from_values(const Eigen::VectorXd& values) {
    SeriesData out;
    out.values = values;
    out.timestamps.reserve(values.size());
    for (Eigen::Index t = 0; t < values.size(); ++t) out.timestamps.push_back(std::to_string(t + 1));
    return out;
}

SeriesData parse_csv(std::string_view text, Transform transform, std::string_view source) {
    std::vector<std::string> periods;
    std::vector<double> raw;
    std::size_t pos = 0;
    int line_no = 0;
    bool header = true;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view line = trim(text.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string_view::npos)
            throw InputError(std::string(source) + ":" + std::to_string(line_no) + ": expected two columns");
        const std::string period(trim(line.substr(0, comma)));
        double value;
        if (period.empty() || !parse_double(line.substr(comma + 1), value))
            throw InputError(std::string(source) + ":" + std::to_string(line_no) + ": unparseable row '" + std::string(line) + "'");
        if (!periods.empty()) {
            if (period == periods.back())
                throw InputError(std::string(source) + ":" + std::to_string(line_no) + ": duplicate period '" + period + "'");
            if (!period_before(periods.back(), period))
                throw InputError(std::string(source) + ":" + std::to_string(line_no) + ": periods not increasing at '" + period + "'");
        }
        if (transform == Transform::LogDiffAnnualized && value <= 0.0)
            throw InputError(std::string(source) + ":" + std::to_string(line_no) + ": nonpositive price " +
                             std::to_string(value) + " under log transform");
        periods.push_back(period);
        raw.push_back(value);
    }
    if (raw.empty()) throw InputError(std::string(source) + ": no data rows");

    SeriesData out;
    out.transform = transform;
    if (transform == Transform::None) {
        out.timestamps = std::move(periods);
        out.values = Eigen::Map<Eigen::VectorXd>(raw.data(), static_cast<Eigen::Index>(raw.size()));
        return out;
    }
    if (raw.size() < 2) throw InputError(std::string(source) + ": log-diff transform needs at least two rows");
    out.timestamps.assign(periods.begin() + 1, periods.end());
    out.values.resize(static_cast<Eigen::Index>(raw.size() - 1));
    for (std::size_t t = 1; t < raw.size(); ++t) out.values(static_cast<Eigen::Index>(t - 1)) = 400.0 * std::log(raw[t] / raw[t - 1]);
    return out;
}

SeriesData ingest_csv(const std::filesystem::path& path, Transform transform) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), transform, path.string());
}

void write_series_csv(const std::filesystem::path& path, const SeriesData& data) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    out << "period,value\n";
    out.precision(10);
    for (Eigen::Index t = 0; t < data.size(); ++t)
        out << (static_cast<std::size_t>(t) < data.timestamps.size() ? data.timestamps[t] : std::to_string(t + 1)) << ','
            << data.values(t) << '\n';
}

}  // namespace tvpqr
