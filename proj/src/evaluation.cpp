#include "tvpqr/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tvpqr/distributions.hpp"
#include "tvpqr/errors.hpp"

namespace tvpqr::eval {

std::string_view to_string(CrpsWeight w) {
    switch (w) {
        case CrpsWeight::None: return "none";
        case CrpsWeight::Tails: return "tails";
        case CrpsWeight::Left: return "left";
        case CrpsWeight::Right: return "right";
    }
    return "?";
}

double crps_weight(CrpsWeight scheme, double p) {
    switch (scheme) {
        case CrpsWeight::None: return 1.0;
        case CrpsWeight::Tails: return (2.0 * p - 1.0) * (2.0 * p - 1.0);
        case CrpsWeight::Left: return (1.0 - p) * (1.0 - p);
        case CrpsWeight::Right: return p * p;
    }
    return 1.0;
}

double quantile_score(double realization, double forecast, double p) {
    return (realization - forecast) * (p - (realization < forecast ? 1.0 : 0.0));
}

double weighted_crps(const QuantileForecast& qf, double realization, CrpsWeight scheme) {
    const auto P = qf.levels.size();
    if (static_cast<std::size_t>(qf.values.size()) != P || P == 0) throw DomainError("CRPS: values do not match the grid");
    double sum = 0.0;
    for (std::size_t i = 0; i < P; ++i)
        sum += crps_weight(scheme, qf.levels[i]) * quantile_score(realization, qf.values(i), qf.levels[i]);
    return sum / static_cast<double>(P);
}

double PredictiveDensity::integral() const {
    double s = 0.0;
    for (Eigen::Index i = 1; i < support.size(); ++i)
        s += 0.5 * (density(i) + density(i - 1)) * (support(i) - support(i - 1));
    return s;
}

void PredictiveDensity::finalize() {
    const auto n = support.size();
    if (n < 2 || density.size() != n) throw DomainError("density: need at least two support points");
    density = density.cwiseMax(0.0);
    const double total = integral();
    if (!(total > 0.0) || !std::isfinite(total)) throw DomainError("density: cannot normalize");
    density /= total;
    cdf_table.resize(n);
    cdf_table(0) = 0.0;
    for (Eigen::Index i = 1; i < n; ++i)
        cdf_table(i) = cdf_table(i - 1) + 0.5 * (density(i) + density(i - 1)) * (support(i) - support(i - 1));
    cdf_table /= cdf_table(n - 1);
}

double PredictiveDensity::pdf(double x) const {
    const auto n = support.size();
    if (x < support(0) || x > support(n - 1)) return 0.0;
    const auto it = std::upper_bound(support.data(), support.data() + n, x);
    const auto i = std::clamp<Eigen::Index>(it - support.data(), 1, n - 1);
    const double w = (x - support(i - 1)) / (support(i) - support(i - 1));
    return (1.0 - w) * density(i - 1) + w * density(i);
}

double PredictiveDensity::cdf(double x) const {
    const auto n = support.size();
    if (x <= support(0)) return 0.0;
    if (x >= support(n - 1)) return 1.0;
    const auto it = std::upper_bound(support.data(), support.data() + n, x);
    const auto i = it - support.data();
    // Exact trapezoid area within the segment.
    const double dx = x - support(i - 1);
    const double fx = pdf(x);
    return std::min(1.0, cdf_table(i - 1) + 0.5 * (density(i - 1) + fx) * dx);
}

double PredictiveDensity::quantile(double u) const {
    const auto n = support.size();
    if (u <= 0.0) return support(0);
    if (u >= 1.0) return support(n - 1);
    const auto it = std::lower_bound(cdf_table.data(), cdf_table.data() + n, u);
    const auto i = std::clamp<Eigen::Index>(it - cdf_table.data(), 1, n - 1);
    const double span = cdf_table(i) - cdf_table(i - 1);
    const double w = span > 0.0 ? (u - cdf_table(i - 1)) / span : 0.0;
    return support(i - 1) + w * (support(i) - support(i - 1));
}

PredictiveDensity density_from_function(double lo, double hi, int n, const std::function<double(double)>& f) {
    if (!(hi > lo) || n < 2) throw DomainError("density grid: need hi > lo and n >= 2");
    PredictiveDensity d;
    d.support = VectorXd::LinSpaced(n, lo, hi);
    d.density.resize(n);
    for (int i = 0; i < n; ++i) d.density(i) = f(d.support(i));
    d.finalize();
    return d;
}

double gaussian_mixture_logpdf(std::span<const double> means, std::span<const double> variances, double x) {
    if (means.empty() || means.size() != variances.size()) throw DomainError("mixture: mismatched components");
    double top = -INFINITY;
    std::vector<double> lw(means.size());
    for (std::size_t i = 0; i < means.size(); ++i) {
        const double d = x - means[i];
        lw[i] = -0.5 * std::log(2.0 * std::numbers::pi * variances[i]) - d * d / (2.0 * variances[i]);
        top = std::max(top, lw[i]);
    }
    double s = 0.0;
    for (double v : lw) s += std::exp(v - top);
    return top + std::log(s / static_cast<double>(means.size()));
}

namespace {

double mixture_cdf(std::span<const double> means, std::span<const double> variances, double x) {
    double s = 0.0;
    for (std::size_t i = 0; i < means.size(); ++i) s += dist::normal_cdf((x - means[i]) / std::sqrt(variances[i]));
    return s / static_cast<double>(means.size());
}

std::pair<double, double> mixture_range(std::span<const double> means, std::span<const double> variances, double k) {
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t i = 0; i < means.size(); ++i) {
        const double sd = std::sqrt(variances[i]);
        lo = std::min(lo, means[i] - k * sd);
        hi = std::max(hi, means[i] + k * sd);
    }
    return {lo, hi};
}

}  // namespace

double gaussian_mixture_quantile(std::span<const double> means, std::span<const double> variances, double u) {
    if (!(u > 0.0 && u < 1.0)) throw DomainError("mixture quantile: level must lie in (0, 1)");
    auto [lo, hi] = mixture_range(means, variances, 10.0);
    for (int it = 0; it < 200 && hi - lo > 1e-10 * (1.0 + std::fabs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mixture_cdf(means, variances, mid) < u) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

PredictiveDensity gaussian_mixture_density(std::span<const double> means, std::span<const double> variances, int n) {
    const auto [lo, hi] = mixture_range(means, variances, 6.0);
    return density_from_function(lo, hi, n, [&](double x) { return std::exp(gaussian_mixture_logpdf(means, variances, x)); });
}

double percentile(std::vector<double> x, double q) {
    if (x.empty()) throw DomainError("percentile of an empty sample");
    std::sort(x.begin(), x.end());
    const double h = q * static_cast<double>(x.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, x.size() - 1);
    return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

double smoothing_bandwidth(const VectorXd& values) {
    const auto n = values.size();
    if (n < 2) return kMinBandwidth;
    const double mean = values.mean();
    const double sd = std::sqrt((values.array() - mean).square().sum() / static_cast<double>(n - 1));
    std::vector<double> v(values.data(), values.data() + n);
    const double iqr = percentile(v, 0.75) - percentile(v, 0.25);
    double spread = std::min(sd, iqr / 1.34);
    if (!(spread > 0.0)) spread = sd;
    return std::max(0.9 * spread * std::pow(static_cast<double>(n), -0.2), kMinBandwidth);
}

PredictiveDensity smooth_to_density(const QuantileForecast& qf, int points) {
    const VectorXd& q = qf.values;
    if (q.size() < 2) throw ContractViolation("density smoothing needs at least two quantiles");
    for (Eigen::Index i = 1; i < q.size(); ++i)
        if (!(q(i) > q(i - 1))) throw ContractViolation("density smoothing requires strictly increasing quantiles");
    points = std::max(points, 512);
    const double bw = smoothing_bandwidth(q);
    const double lo = q.minCoeff() - 4.0 * bw;
    const double hi = q.maxCoeff() + 4.0 * bw;
    const double norm = 1.0 / (static_cast<double>(q.size()) * bw * std::sqrt(2.0 * std::numbers::pi));
    return density_from_function(lo, hi, points, [&](double x) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < q.size(); ++i) {
            const double z = (x - q(i)) / bw;
            s += std::exp(-0.5 * z * z);
        }
        return s * norm;
    });
}

double log_predictive_score(const PredictiveDensity& density, double realization) {
    const double f = density.pdf(realization);
    return f > 1e-10 ? std::log(f) : kLogFloor;
}

SampleMoments sample_moments(std::span<const double> x) {
    const auto n = static_cast<double>(x.size());
    if (x.size() < 2) throw DomainError("moments need at least two observations");
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = v - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    return SampleMoments{mean, m2 * n / (n - 1.0), m4 / (m2 * m2) - 3.0, m3 / std::pow(m2, 1.5)};
}

namespace {

Band make_band(double point, const std::vector<double>& reps) {
    return Band{point, percentile(reps, 0.05), percentile(reps, 0.95)};
}

}  // namespace

MomentBands bootstrap_moments(const PredictiveDensity& density, Rng& rng, int n_sample, int n_rep) {
    if (n_sample < 2 || n_rep < 1) throw DomainError("bootstrap: need n_sample >= 2 and n_rep >= 1");
    std::vector<double> mean(n_rep), var(n_rep), kurt(n_rep), skew(n_rep);
    std::vector<double> sample(n_sample);
    for (int r = 0; r < n_rep; ++r) {
        for (auto& s : sample) s = density.sample(rng);
        const auto m = sample_moments(sample);
        mean[r] = m.mean;
        var[r] = m.variance;
        kurt[r] = m.excess_kurtosis;
        skew[r] = m.skewness;
    }
    auto avg = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    return MomentBands{make_band(avg(mean), mean), make_band(avg(var), var), make_band(avg(kurt), kurt),
                       make_band(avg(skew), skew)};
}

ScenarioBands scenario_probabilities(const PredictiveDensity& density, Rng& rng, int n_sample, int n_rep) {
    if (n_sample < 1 || n_rep < 1) throw DomainError("scenario bands: need positive sample sizes");
    std::vector<double> defl(n_rep), targ(n_rep), exc(n_rep);
    for (int r = 0; r < n_rep; ++r) {
        int a = 0, b = 0, c = 0;
        for (int i = 0; i < n_sample; ++i) {
            const double x = density.sample(rng);
            a += x < 0.0;
            b += (x >= 1.0 && x <= 3.0);
            c += x > 4.0;
        }
        defl[r] = static_cast<double>(a) / n_sample;
        targ[r] = static_cast<double>(b) / n_sample;
        exc[r] = static_cast<double>(c) / n_sample;
    }
    const double p_defl = density.cdf(0.0);
    const double p_targ = density.cdf(3.0) - density.cdf(1.0);
    const double p_exc = 1.0 - density.cdf(4.0);
    return ScenarioBands{make_band(p_defl, defl), make_band(p_targ, targ), make_band(p_exc, exc)};
}

}  // namespace tvpqr::eval
