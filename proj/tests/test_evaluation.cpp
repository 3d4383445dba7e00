#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "tvpqr/errors.hpp"
#include "tvpqr/evaluation.hpp"

using namespace tvpqr;
using namespace tvpqr::eval;

namespace {

double normal_pdf(double x, double m = 0.0, double s = 1.0) {
    const double z = (x - m) / s;
    return std::exp(-0.5 * z * z) / (s * std::sqrt(2.0 * std::numbers::pi));
}

QuantileForecast normal_quantiles(double shift = 0.0) {
    QuantileForecast qf{QuantileGrid::standard(), VectorXd(19)};
    for (int i = 0; i < 19; ++i) qf.values(i) = oracle::normal_quantile(qf.levels[i]) + shift;
    return qf;
}

PredictiveDensity normal_density(double m = 0.0, double s = 1.0) {
    return density_from_function(m - 8 * s, m + 8 * s, 4001, [&](double x) { return normal_pdf(x, m, s); });
}

}  // namespace

TEST_CASE("quantile score hand examples") {
    CHECK(std::fabs(quantile_score(2.0, 1.5, 0.9) - 0.45) < 1e-12);
    CHECK(std::fabs(quantile_score(1.0, 1.5, 0.9) - 0.05) < 1e-12);
    for (double p : {0.05, 0.5, 0.95}) CHECK(quantile_score(0.7, 0.7, p) == 0.0);
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) CHECK(quantile_score(rng.normal(), rng.normal(), rng.uniform()) >= 0.0);
}

TEST_CASE("weighted CRPS") {
    const auto qf = normal_quantiles();
    const double r = 0.37;
    double mean_qs = 0.0;
    for (int i = 0; i < 19; ++i) mean_qs += quantile_score(r, qf.values(i), qf.levels[i]);
    mean_qs /= 19.0;
    CHECK(weighted_crps(qf, r, CrpsWeight::None) == mean_qs);
    CHECK(crps_weight(CrpsWeight::Tails, 0.5) == 0.0);
    CHECK(crps_weight(CrpsWeight::Left, 0.2) == doctest::Approx(0.64));
    CHECK(crps_weight(CrpsWeight::Right, 0.2) == doctest::Approx(0.04));

    QuantileForecast flat{QuantileGrid::standard(), VectorXd::Constant(19, 0.0)};
    double s = 0.0;
    for (int i = 0; i < 19; ++i) s += quantile_score(1.0, 0.0, flat.levels[i]);
    CHECK(weighted_crps(flat, 1.0, CrpsWeight::None) == doctest::Approx(s / 19.0));

    // Symmetric QS profile: left and right weights agree.
    CHECK(weighted_crps(qf, 0.0, CrpsWeight::Left) == doctest::Approx(weighted_crps(qf, 0.0, CrpsWeight::Right)).epsilon(1e-12));
    for (auto w : kAllWeights) CHECK(weighted_crps(qf, 1.3, w) >= 0.0);
}

TEST_CASE("QS at the median ranks models like absolute error") {
    Rng rng(2);
    for (int rep = 0; rep < 200; ++rep) {
        const double r = rng.normal();
        const double a = rng.normal(), b = rng.normal();
        const bool qs_order = quantile_score(r, a, 0.5) < quantile_score(r, b, 0.5);
        const bool ae_order = std::fabs(r - a) < std::fabs(r - b);
        CHECK(qs_order == ae_order);
    }
}

TEST_CASE("kernel-smoothed density") {
    const auto qf = normal_quantiles();
    const auto d = smooth_to_density(qf);
    CHECK(d.support.size() >= 512);
    CHECK(d.integral() == doctest::Approx(1.0).epsilon(1e-3));
    CHECK((d.density.array() >= 0.0).all());
    for (int i = 0; i < 19; ++i) CHECK(std::fabs(d.quantile(qf.levels[i]) - qf.values(i)) < 0.08);

    const auto shifted = smooth_to_density(normal_quantiles(3.0));
    Eigen::Index a, b;
    d.density.maxCoeff(&a);
    shifted.density.maxCoeff(&b);
    const double step = d.support(1) - d.support(0);
    CHECK(std::fabs((shifted.support(b) - d.support(a)) - 3.0) <= step + 1e-12);

    auto bad = qf;
    std::swap(bad.values(3), bad.values(4));
    CHECK_THROWS_AS(smooth_to_density(bad), ContractViolation);
    CHECK(smoothing_bandwidth(VectorXd::Constant(5, 1.0)) == kMinBandwidth);
}

TEST_CASE("log predictive score") {
    const auto d = normal_density();
    CHECK(log_predictive_score(d, 0.0) == doctest::Approx(std::log(0.3989422804)).epsilon(0.02 / 0.92));
    CHECK(std::fabs(log_predictive_score(d, 0.0) + 0.9189) < 0.02);
    CHECK(log_predictive_score(d, 100.0) == kLogFloor);
    CHECK(log_predictive_score(d, -100.0) == kLogFloor);
    // Grid refinement beyond 512 points.
    const auto qf = normal_quantiles();
    const double base = log_predictive_score(smooth_to_density(qf, 512), 0.3);
    for (int n : {1024, 2048, 8192}) CHECK(std::fabs(log_predictive_score(smooth_to_density(qf, n), 0.3) - base) < 1e-3);
}

TEST_CASE("density CDF and inverse CDF") {
    const auto d = normal_density(1.0, 2.0);
    for (double u : {0.01, 0.3, 0.5, 0.9}) CHECK(d.cdf(d.quantile(u)) == doctest::Approx(u).epsilon(1e-6));
    CHECK(d.quantile(0.5) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(d.cdf(1.0 + 2.0 * 1.959963985) == doctest::Approx(0.975).epsilon(1e-4));
}

TEST_CASE("Gaussian mixture helpers") {
    const std::vector<double> m{0.0, 0.0}, v{1.0, 1.0};
    CHECK(gaussian_mixture_logpdf(m, v, 0.0) == doctest::Approx(-0.9189385332));
    CHECK(gaussian_mixture_quantile(m, v, 0.975) == doctest::Approx(1.959963985).epsilon(1e-8));
    const std::vector<double> m2{-1.0, 2.0}, v2{0.5, 2.0};
    const auto d = gaussian_mixture_density(m2, v2);
    CHECK(d.integral() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(d.cdf(gaussian_mixture_quantile(m2, v2, 0.3)) == doctest::Approx(0.3).epsilon(1e-4));
}

TEST_CASE("sample moments and percentiles") {
    const std::vector<double> x{1.0, 2.0, 3.0, 4.0, 10.0};
    const auto m = sample_moments(x);
    CHECK(m.mean == doctest::Approx(4.0));
    CHECK(m.variance == doctest::Approx(12.5));
    CHECK(percentile(x, 0.5) == 3.0);
    CHECK(percentile(x, 0.25) == 2.0);
    CHECK(percentile(x, 0.1) == doctest::Approx(1.4));
}

TEST_CASE("bootstrap moments of a normal density") {
    const auto d = normal_density();
    int contain = 0;
    const int runs = 20;
    for (int s = 0; s < runs; ++s) {
        Rng rng(100 + s);
        const auto b = bootstrap_moments(d, rng);
        contain += b.skewness.contains(0.0) && b.excess_kurtosis.contains(0.0);
        CHECK(b.mean.contains(0.0));
        CHECK(b.variance.contains(1.0));
    }
    CHECK(contain >= 19);
}

TEST_CASE("bootstrap skewness of an exponential density") {
    const auto d = density_from_function(0.0, 40.0, 40001, [](double x) { return std::exp(-x); });
    Rng rng(3);
    const auto b = bootstrap_moments(d, rng);
    const double width = b.skewness.hi - b.skewness.lo;
    CHECK(b.skewness.lo - width <= 2.0);
    CHECK(2.0 <= b.skewness.hi + width);
}

TEST_CASE("bootstrap mean band shrinks like 1/sqrt(n)") {
    const auto d = normal_density();
    Rng a(4), b(5);
    const auto small = bootstrap_moments(d, a, 3000, 1000);
    const auto large = bootstrap_moments(d, b, 12000, 1000);
    const double ratio = (small.mean.hi - small.mean.lo) / (large.mean.hi - large.mean.lo);
    CHECK(ratio > 1.6);
    CHECK(ratio < 2.5);
}

TEST_CASE("scenario probabilities") {
    const auto d = normal_density(2.0, 0.5);
    Rng rng(6);
    const auto s = scenario_probabilities(d, rng);
    CHECK(std::fabs(s.target.point - 0.9545) < 0.01);
    CHECK(s.target.contains(s.target.point));
    CHECK(s.deflation.point + s.target.point + s.excessive.point <= 1.0 + 1e-12);
    const double band = std::max(s.deflation.hi - s.deflation.lo, s.excessive.hi - s.excessive.lo);
    CHECK(std::fabs(s.deflation.point - s.excessive.point) <= band);
}
