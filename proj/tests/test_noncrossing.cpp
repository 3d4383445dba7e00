#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "tvpqr/distributions.hpp"
#include "tvpqr/errors.hpp"
#include "tvpqr/noncrossing.hpp"

using namespace tvpqr;
using namespace tvpqr::noncross;

namespace {

// Draw set whose posterior-mean curves cross at every odd period.
QuantileDrawSet crossing_fixture(const QuantileGrid& grid, int periods, int draws, std::uint64_t seed) {
    Rng rng(seed);
    QuantileDrawSet set;
    const auto P = grid.size();
    for (std::size_t i = 0; i < P; ++i) {
        MatrixXd mu(draws, periods), sg(draws, periods);
        for (int t = 0; t < periods; ++t) {
            double centre = oracle::normal_quantile(grid[i]) + 0.1 * t;
            if (t % 2 == 1 && i % 4 == 1) centre += 0.6;  // pushes level i above level i+1
            for (int d = 0; d < draws; ++d) {
                mu(d, t) = centre + 0.05 * rng.normal();
                sg(d, t) = 0.3 * std::exp(0.1 * rng.normal());
            }
        }
        set.mu.push_back(mu);
        set.sigma.push_back(sg);
    }
    return set;
}

}  // namespace

TEST_CASE("induced matrix entries") {
    const auto grid = QuantileGrid::parse("0.1,0.5,0.9");
    VectorXd mu(3), sg(3);
    mu << -1.0, 0.1, 1.2;
    sg << 0.4, 0.5, 0.3;
    const auto m = build_induced_matrix(mu, sg, grid);
    for (int i = 0; i < 3; ++i) {
        CHECK(m.q(i, i) == doctest::Approx(mu(i)).epsilon(1e-14));
        for (int j = 0; j < 3; ++j) {
            const auto al = dist::ALParams::at(grid[i]);
            CHECK(dist::al_cdf(m.q(i, j) - mu(i), sg(i), al) == doctest::Approx(grid[j]).epsilon(1e-12));
        }
    }
    CHECK(m.diag_var.isZero());
}

TEST_CASE("induced matrix variance from draws") {
    const auto grid = QuantileGrid::parse("0.2,0.6");
    Rng rng(1);
    const int D = 400;
    std::vector<VectorXd> mu(2, VectorXd(D)), sg(2, VectorXd(D));
    for (int i = 0; i < 2; ++i)
        for (int d = 0; d < D; ++d) {
            mu[i](d) = rng.normal();
            sg[i](d) = 0.5 + 0.1 * rng.uniform() + 0.05 * mu[i](d) * mu[i](d);
        }
    const auto m = build_induced_matrix(mu, sg, grid);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const double c = dist::al_quantile_function(grid[j], 0.0, 1.0, grid[i]);
            const VectorXd e = mu[i] + c * sg[i];
            const double mean = e.mean();
            const double var = (e.array() - mean).square().sum() / (D - 1);
            CHECK(m.q(i, j) == doctest::Approx(mean).epsilon(1e-12));
            CHECK(m.diag_var(i, j) == doctest::Approx(var / D).epsilon(1e-10));
        }
}

TEST_CASE("GP limits: small bandwidth recovers the diagonal, large bandwidth averages") {
    const auto grid = QuantileGrid::standard();
    VectorXd mu(19), sg = VectorXd::Constant(19, 0.5);
    for (int i = 0; i < 19; ++i) mu(i) = oracle::normal_quantile(grid[i]) + (i == 9 ? 0.8 : 0.0);
    auto m = build_induced_matrix(mu, sg, grid);
    GPConfig cfg;
    const VectorXd small = gp_fit(m, 1e-4, cfg);
    CHECK((small - m.q.diagonal()).cwiseAbs().maxCoeff() < 1e-3);

    m.diag_var.setConstant(0.01);
    const VectorXd large = gp_fit(m, 1e4, cfg);
    for (int j = 0; j < 19; ++j) CHECK(large(j) == doctest::Approx(m.q.col(j).mean()).epsilon(1e-3));
    CHECK(strictly_increasing(large, 1e-8));
}

TEST_CASE("minimal bandwidth is tight") {
    const auto grid = QuantileGrid::standard();
    const auto set = crossing_fixture(grid, 2, 100, 3);
    GPConfig cfg;
    const auto m = set.induced(1, grid);
    CHECK_FALSE(strictly_increasing(m.q.diagonal(), cfg.margin));
    const double w = minimal_bandwidth(m, cfg);
    CHECK(w > cfg.w_lo);
    CHECK(strictly_increasing(gp_fit(m, w, cfg), cfg.margin));
    CHECK_FALSE(strictly_increasing(gp_fit(m, w / (1.0 + 3.0 * cfg.rel_tol), cfg), cfg.margin));
    // Already monotone: the lower end of the search interval.
    CHECK(minimal_bandwidth(set.induced(0, grid), cfg) == cfg.w_lo);

    GPConfig narrow = cfg;
    narrow.w_hi = 2.0 * cfg.w_lo;
    CHECK_THROWS_AS(minimal_bandwidth(m, narrow), NumericalError);
}

TEST_CASE("minimal bandwidth when monotonicity is not monotone in w") {
    // One noisy outlying row: moderate bandwidths fix the crossing, the upper
    // search bound reintroduces it.
    const auto grid = QuantileGrid::standard();
    VectorXd mu(19), sg = VectorXd::Constant(19, 0.5);
    for (int i = 0; i < 19; ++i) mu(i) = oracle::normal_quantile(grid[i]);
    mu(2) += 5.0;
    MatrixXd var = MatrixXd::Constant(19, 19, 0.01);
    var.row(1).setConstant(1.3);
    var.row(2).setConstant(30.0);
    const auto m = build_induced_matrix(mu, sg, grid, &var);
    GPConfig cfg;
    CHECK_FALSE(strictly_increasing(gp_fit(m, cfg.w_hi, cfg), cfg.margin));
    const double w = minimal_bandwidth(m, cfg);
    CHECK(strictly_increasing(gp_fit(m, w, cfg), cfg.margin));
    CHECK(w > 0.05);
    CHECK(w < 0.1);
    for (double u = cfg.w_lo; u < w / (1.0 + 3.0 * cfg.rel_tol); u *= 1.1)
        CHECK_FALSE(strictly_increasing(gp_fit(m, u, cfg), cfg.margin));
}

TEST_CASE("adjusted curves are strictly monotone; GPt bandwidths below GP") {
    const auto grid = QuantileGrid::standard();
    const auto set = crossing_fixture(grid, 8, 60, 4);
    const auto raw = adjust(set, grid, Adjustment::Raw);
    const auto gp = adjust(set, grid, Adjustment::GP);
    const auto gpt = adjust(set, grid, Adjustment::GPt);
    int crossings = 0;
    for (int t = 0; t < 8; ++t) {
        crossings += !strictly_increasing(raw.values.row(t).transpose(), 0.0);
        CHECK(strictly_increasing(gp.values.row(t).transpose(), 1e-8));
        CHECK(strictly_increasing(gpt.values.row(t).transpose(), 1e-8));
        CHECK(gpt.bandwidths[t] <= gp.bandwidths[t]);
    }
    CHECK(crossings == 4);
    CHECK(raw.bandwidths.empty());
    for (int i = 0; i < 19; ++i) CHECK(raw.values(3, i) == doctest::Approx(set.mu[i].col(3).mean()));

    const auto sel = select_bandwidth(std::vector<InducedQuantileMatrix>{set.induced(0, grid), set.induced(1, grid)}, {});
    CHECK(sel.common == std::max(sel.per_period[0], sel.per_period[1]));
}

TEST_CASE("parallel adjustment equals the serial reference") {
    const auto grid = QuantileGrid::standard();
    const auto set = crossing_fixture(grid, 12, 40, 5);
    for (auto mode : {Adjustment::GP, Adjustment::GPt}) {
        const auto a = adjust(set, grid, mode, {}, 4);
        const auto b = adjust_serial(set, grid, mode);
        CHECK(a.values == b.values);
        CHECK(a.bandwidths == b.bandwidths);
    }
}

TEST_CASE("adjustment tags") {
    CHECK(parse_adjustment("GPt") == Adjustment::GPt);
    CHECK(to_string(Adjustment::GP) == "gp");
    CHECK_THROWS_AS(parse_adjustment("isotonic"), InputError);
}
