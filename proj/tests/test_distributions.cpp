#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "tvpqr/distributions.hpp"
#include "tvpqr/errors.hpp"

using namespace tvpqr;
using namespace tvpqr::dist;

namespace {

struct Moments {
    double mean, var;
};

template <class F>
Moments sample_moments(int n, F&& draw) {
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = draw();
        s += x;
        s2 += x * x;
    }
    const double m = s / n;
    return {m, s2 / n - m * m};
}

// E[X] of GIG(lambda, chi, psi) from modified Bessel functions.
double gig_mean(double lambda, double chi, double psi) {
    const double om = std::sqrt(chi * psi);
    return std::sqrt(chi / psi) * std::cyl_bessel_k(std::fabs(lambda + 1.0), om) / std::cyl_bessel_k(std::fabs(lambda), om);
}

double gig_second_moment(double lambda, double chi, double psi) {
    const double om = std::sqrt(chi * psi);
    return chi / psi * std::cyl_bessel_k(std::fabs(lambda + 2.0), om) / std::cyl_bessel_k(std::fabs(lambda), om);
}

// Simpson rule on [a, b].
template <class F>
double integrate(F&& f, double a, double b, int n = 20000) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

}  // namespace

TEST_CASE("AL constants") {
    const auto al = ALParams::at(0.5);
    CHECK(al.theta == 0.0);
    CHECK(al.tau_sq == doctest::Approx(8.0));
    const auto a05 = ALParams::at(0.05);
    CHECK(a05.theta == doctest::Approx(0.9 / 0.0475));
    CHECK(a05.tau_sq == doctest::Approx(2.0 / 0.0475));
    CHECK_THROWS_AS(ALParams::at(0.0), DomainError);
    CHECK_THROWS_AS(ALParams::at(1.0), DomainError);
}

TEST_CASE("check loss") {
    CHECK(check_loss(2.0, 0.9) == doctest::Approx(1.8));
    CHECK(check_loss(-1.0, 0.9) == doctest::Approx(0.1));
    CHECK(check_loss(0.0, 0.3) == 0.0);
}

TEST_CASE("AL density, CDF and quantile function agree") {
    for (double p : {0.05, 0.3, 0.5, 0.9}) {
        const auto al = ALParams::at(p);
        const double scale = 0.7;
        const double total = integrate([&](double x) { return al_density(x, scale, al); }, -200.0, 200.0, 400000);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
        for (double x : {-2.0, -0.3, 0.0, 0.4, 3.0}) {
            const double num = integrate([&](double u) { return al_density(u, scale, al); }, -200.0, x, 400000);
            CHECK(al_cdf(x, scale, al) == doctest::Approx(num).epsilon(1e-6));
        }
        CHECK(al_cdf(0.0, scale, al) == doctest::Approx(p));
        for (double u : {0.01, 0.2, p, 0.7, 0.99}) {
            const double q = al_quantile_function(u, 1.5, scale, p);
            CHECK(al_cdf(q - 1.5, scale, al) == doctest::Approx(u).epsilon(1e-12));
        }
        CHECK(al_quantile_function(p, 1.5, scale, p) == doctest::Approx(1.5));
    }
    CHECK_THROWS_AS(al_quantile_function(0.0, 0.0, 1.0, 0.5), RangeError);
    CHECK_THROWS_AS(al_quantile_function(1.0, 0.0, 1.0, 0.5), RangeError);
}

TEST_CASE("GIG moments match the Bessel oracle") {
    Rng rng(101);
    const double cases[][3] = {{0.5, 4.0, 1.0},   {0.5, 1e-4, 175.0}, {0.5, 0.02375, 10.525}, {0.5, 100.0, 0.01},
                               {-0.5, 2.0, 3.0},  {2.5, 0.1, 0.1},    {0.5, 5.0, 5000.0},    {1.0, 0.3, 0.2},
                               {0.2, 0.05, 0.05}, {3.0, 4.0, 0.5}};
    const int n = 200000;
    for (const auto& c : cases) {
        CAPTURE(c[0]);
        CAPTURE(c[1]);
        CAPTURE(c[2]);
        const auto m = sample_moments(n, [&] { return sample_gig({c[0], c[1], c[2]}, rng); });
        const double mean = gig_mean(c[0], c[1], c[2]);
        const double var = gig_second_moment(c[0], c[1], c[2]) - mean * mean;
        CHECK(std::fabs(m.mean - mean) < 4.0 * std::sqrt(var / n));
    }
}

TEST_CASE("GIG with zero chi reduces to the gamma limit") {
    Rng rng(7);
    const int n = 200000;
    const auto m = sample_moments(n, [&] { return sample_gig({0.5, 0.0, 4.0}, rng); });
    // Gamma(1/2, rate psi/2): mean 0.25, variance 0.125.
    CHECK(std::fabs(m.mean - 0.25) < 4.0 * std::sqrt(0.125 / n));
    for (int i = 0; i < 1000; ++i) CHECK(sample_gig({0.5, 0.0, 4.0}, rng) > 0.0);
}

TEST_CASE("GIG lambda = 1/2 reference route has the same law") {
    Rng a(3), b(4);
    const int n = 200000;
    for (GIGParams g : {GIGParams{0.5, 4.0, 1.0}, GIGParams{0.5, 0.01, 50.0}, GIGParams{-0.5, 2.0, 3.0}}) {
        const auto ma = sample_moments(n, [&] { return sample_gig(g, a); });
        const auto mb = sample_moments(n, [&] { return sample_gig_half(g, b); });
        CHECK(std::fabs(ma.mean - mb.mean) < 5.0 * std::sqrt((ma.var + mb.var) / n));
        CHECK(ma.var == doctest::Approx(mb.var).epsilon(0.05));
    }
}

TEST_CASE("GIG parameter guards") {
    Rng rng(1);
    CHECK_THROWS_AS(sample_gig({0.5, -1.0, 1.0}, rng), DomainError);
    CHECK_THROWS_AS(sample_gig({0.5, 1.0, -1.0}, rng), DomainError);
    CHECK_THROWS_AS(sample_gig({0.5, 0.0, 0.0}, rng), DomainError);
}

TEST_CASE("Polya-Gamma moments") {
    Rng rng(11);
    const int n = 200000;
    // E[PG(b, c)] = b / (2c) tanh(c / 2); b / 4 at c = 0.
    auto mean = [](double b, double c) { return c == 0.0 ? b / 4.0 : b / (2.0 * c) * std::tanh(c / 2.0); };
    // Var[PG(1, 0)] = 1/24.
    for (auto [b, c] : std::vector<std::pair<double, double>>{{1, 0}, {1, 1.5}, {1, 8.0}, {2, 0.7}, {3, 2.0}, {0.5, 1.0}}) {
        CAPTURE(b);
        CAPTURE(c);
        const auto m = sample_moments(n, [&] { return sample_polya_gamma(b, c, rng); });
        CHECK(std::fabs(m.mean - mean(b, c)) < 4.0 * std::sqrt(m.var / n));
        if (b == 1 && c == 0) CHECK(m.var == doctest::Approx(1.0 / 24.0).epsilon(0.03));
    }
    CHECK_THROWS_AS(sample_polya_gamma(0.0, 1.0, rng), DomainError);
}

TEST_CASE("gamma, inverse-gamma, exponential, half-Cauchy, Z") {
    Rng rng(5);
    const int n = 200000;
    auto g = sample_moments(n, [&] { return sample_gamma(2.5, 2.0, rng); });
    CHECK(std::fabs(g.mean - 1.25) < 4.0 * std::sqrt(0.625 / n));
    auto ig = sample_moments(n, [&] { return sample_inverse_gamma(5.0, 8.0, rng); });
    CHECK(std::fabs(ig.mean - 2.0) < 4.0 * std::sqrt((64.0 / 16.0 / 3.0) / n));
    auto e = sample_moments(n, [&] { return sample_exponential(3.0, rng); });
    CHECK(std::fabs(e.mean - 3.0) < 4.0 * 3.0 / std::sqrt(n));
    std::vector<double> hc(n);
    for (auto& x : hc) x = sample_half_cauchy(0.2, rng);
    std::nth_element(hc.begin(), hc.begin() + n / 2, hc.end());
    CHECK(hc[n / 2] == doctest::Approx(0.2).epsilon(0.02));
    // Z(1/2, 1/2): mean 0, variance 2 trigamma(1/2) = pi^2.
    auto z = sample_moments(n, [&] { return sample_z(0.5, 0.5, rng); });
    CHECK(std::fabs(z.mean) < 4.0 * std::numbers::pi / std::sqrt(n));
    CHECK(z.var == doctest::Approx(std::numbers::pi * std::numbers::pi).epsilon(0.03));
}

TEST_CASE("AL mixture representation puts mass p below zero") {
    Rng rng(21);
    const int n = 400000;
    for (double p : {0.05, 0.5, 0.95}) {
        const auto al = ALParams::at(p);
        const double sigma = 1.3;
        int below = 0;
        double mean = 0.0;
        for (int i = 0; i < n; ++i) {
            const double v = sample_exponential(sigma, rng);
            const double y = al.theta * v + std::sqrt(al.tau_sq * sigma * v) * rng.normal();
            below += y < 0.0;
            mean += y;
        }
        CHECK(std::fabs(static_cast<double>(below) / n - p) < 4.0 * std::sqrt(p * (1 - p) / n));
        // E[y] = theta sigma.
        CHECK(mean / n == doctest::Approx(al.theta * sigma).epsilon(0.02));
    }
}

TEST_CASE("fixed seed gives identical streams") {
    Rng a(99), b(99);
    for (int i = 0; i < 100; ++i) {
        CHECK(sample_gig({0.5, 1.0, 2.0}, a) == sample_gig({0.5, 1.0, 2.0}, b));
        CHECK(sample_polya_gamma(1.0, 0.5, a) == sample_polya_gamma(1.0, 0.5, b));
    }
}

TEST_CASE("seed derivation separates identifiers") {
    CHECK(derive_seed(1, 2, 3, 4) == derive_seed(1, 2, 3, 4));
    CHECK(derive_seed(1, 2, 3, 4) != derive_seed(1, 2, 4, 3));
    CHECK(derive_seed(1, 2, 3, 4) != derive_seed(2, 2, 3, 4));
    CHECK(hash_string("ucqr-tis-dhs") != hash_string("ucqr-tvs-dhs"));
}
