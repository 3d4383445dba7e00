#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "tvpqr/errors.hpp"
#include "tvpqr/oos.hpp"
#include "tvpqr/report.hpp"
#include "tvpqr/series.hpp"
#include "tvpqr/simulate.hpp"
#include "tvpqr/ucsv.hpp"

using namespace tvpqr;

namespace {

oos::OOSConfig small_config(std::vector<std::string> ids) {
    oos::OOSConfig c;
    c.initial_window = 30;
    c.horizons = {1, 3};
    for (const auto& id : ids) c.models.push_back(oos::ModelVariant::parse(id));
    c.mcmc = {40, 60, 2};
    c.ucsv.mcmc = c.mcmc;
    c.grid = QuantileGrid::parse("0.1:0.9:0.2");
    c.master_seed = 11;
    return c;
}

}  // namespace

TEST_CASE("ingest and log-diff transform") {
    const auto d = parse_csv("period,cpi\n2000Q1,100\n2000Q2,101\n", Transform::LogDiffAnnualized);
    REQUIRE(d.size() == 1);
    CHECK(d.values(0) == doctest::Approx(3.980).epsilon(1e-3));
    CHECK(d.timestamps[0] == "2000Q2");

    const auto c = parse_csv("period,cpi\n1,5\n2,5\n3,5\n", Transform::LogDiffAnnualized);
    CHECK(c.values.cwiseAbs().maxCoeff() == 0.0);

    try {
        parse_csv("period,cpi\n1,5\n2,0\n3,5\n", Transform::LogDiffAnnualized, "prices.csv");
        FAIL("expected an error");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("prices.csv:3") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_csv("period,cpi\n1,5\n1,6\n", Transform::None), InputError);
    CHECK_THROWS_AS(parse_csv("period,cpi\n", Transform::None), InputError);
    CHECK_THROWS_AS(parse_csv("period,cpi\n1,abc\n", Transform::None), InputError);

    const auto raw = parse_csv("period,y\na,1.5\nb,-2\n", Transform::None);
    CHECK(raw.values(1) == -2.0);
}

TEST_CASE("evaluation point counts") {
    CHECK(oos::evaluation_points(80, 50, 4) == 27);
    CHECK(oos::evaluation_points(80, 50, 1) == 30);
    CHECK(oos::evaluation_points(52, 50, 4) == 0);
}

TEST_CASE("model identifiers") {
    const auto m = oos::ModelVariant::parse("ucqr-tvs-shs-gpt");
    CHECK(m.family == oos::Family::UCQR);
    CHECK(m.scale == sampler::ScaleMode::TVS);
    CHECK(m.prior == shrink::ShrinkageKind::StaticHorseshoe);
    CHECK(m.adjustment == noncross::Adjustment::GPt);
    CHECK(m.id() == "ucqr-tvs-shs-gpt");
    CHECK(oos::ModelVariant::parse("ucqr-tvs-shs-raw").fit_key() == m.fit_key());
    CHECK(oos::ModelVariant::parse("ucsv").family == oos::Family::UCSV);
    CHECK_THROWS_AS(oos::ModelVariant::parse("ucqr-tis-xx-gp"), InputError);
    try {
        oos::ModelVariant::parse("ucsvm");
        FAIL("expected an error");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("not available") != std::string::npos);
    }
}

TEST_CASE("config validation") {
    auto c = small_config({"ucsv"});
    CHECK_NOTHROW(c.validate(40));
    CHECK_THROWS_AS(c.validate(32), InputError);
    c.horizons = {1, 1};
    CHECK_THROWS_AS(c.validate(40), InputError);
    c = small_config({"ucsv"});
    c.benchmark = "ucqr-tis-ig-raw";
    CHECK_THROWS_AS(c.validate(40), InputError);
}

TEST_CASE("key=value config parsing") {
    const auto kv = report::parse_key_values("# comment\n--seed = 5\nmodels=ucsv,ucqr-tis-ig-gp\n\n");
    CHECK(kv.at("seed") == "5");
    CHECK(kv.at("models") == "ucsv,ucqr-tis-ig-gp");
    CHECK_THROWS_AS(report::parse_key_values("novalue\n"), InputError);
    CHECK(report::config_snapshot({{"b", "2"}, {"a", "1"}}) == "a=1\nb=2\n");
}

TEST_CASE("expanding window is deterministic across thread counts") {
    const auto data = sim::simulate("trend-sv", 40, 3);
    auto c = small_config({"ucqr-tis-ig-gpt", "ucqr-tis-ig-raw", "ucsv"});
    c.threads = 1;
    const auto one = oos::run_expanding_window(c, data);
    c.threads = 3;
    const auto three = oos::run_expanding_window(c, data);
    CHECK(report::metrics_csv(one) == report::metrics_csv(three));
    CHECK(report::metrics_json(one) == report::metrics_json(three));
    CHECK(report::forecasts_csv(one) == report::forecasts_csv(three));
    CHECK(report::failures_csv(one) == report::failures_csv(three));
    // Very short chains can leave a GP adjustment without a monotone bandwidth;
    // that only removes the affected member's cell.
    for (const auto& f : one.failures) CHECK_MESSAGE(f.model == "ucqr-tis-ig-gpt", f.message);
    CHECK(one.benchmark == "ucsv");

    const auto b = one.benchmark_index();
    for (std::size_t h = 0; h < one.horizons.size(); ++h) {
        CHECK(one.cells[b][h].count == oos::evaluation_points(40, 30, one.horizons[h]));
        CHECK(one.cells[b][h].count == one.cells[b][h].expected);
    }
    const auto csv = report::metrics_csv(one);
    CHECK(csv.find("ucsv,actual") != std::string::npos);
    CHECK(csv.find("ucqr-tis-ig-gpt,relative") != std::string::npos);
    // Forecasts at level order are increasing after GPt adjustment.
    for (const auto& r : one.records)
        if (one.models[r.model] == "ucqr-tis-ig-gpt")
            for (Eigen::Index i = 1; i < r.quantiles.size(); ++i) CHECK(r.quantiles(i) > r.quantiles(i - 1));
}

TEST_CASE("relative metrics: self ratio and duplicated model") {
    const auto data = sim::simulate("normal", 36, 4);
    auto c = small_config({"ucqr-tis-ig-raw", "ucqr-tis-ig-gp"});
    c.benchmark = "ucqr-tis-ig-raw";
    const auto rep = oos::run_expanding_window(c, data);
    const auto csv = report::metrics_csv(rep);
    const auto json = nlohmann::json::parse(report::metrics_json(rep));
    const auto& bench = json.at("models").at(0);
    CHECK(bench.at("is_benchmark").get<bool>());
    const auto& other = json.at("models").at(1).at("horizons").at(0);
    CHECK(other.at("relative").at("crps_none").get<double>() ==
          doctest::Approx(rep.cells[1][0].crps[0] / rep.cells[0][0].crps[0]).epsilon(1e-12));
    CHECK(other.at("relative").at("lps").get<double>() ==
          doctest::Approx(rep.cells[1][0].lps - rep.cells[0][0].lps).epsilon(1e-12));
    CHECK(csv.find("ucqr-tis-ig-raw,actual") != std::string::npos);

    // Same model twice: identical rows apart from the basis label.
    auto d = small_config({"ucqr-tis-ig-gp", "ucqr-tis-ig-gp", "ucqr-tis-ig-raw"});
    d.benchmark = "ucqr-tis-ig-raw";
    const auto dup = oos::run_expanding_window(d, data);
    std::istringstream lines(report::metrics_csv(dup));
    std::string header, first, second;
    std::getline(lines, header);
    std::getline(lines, first);
    std::getline(lines, second);
    CHECK(first == second);
    CHECK(first.rfind("ucqr-tis-ig-gp,relative", 0) == 0);
    // Sharing chains: raw and gp posterior means come from the same draws.
    for (std::size_t h = 0; h < dup.horizons.size(); ++h) CHECK(dup.cells[0][h].count == dup.cells[2][h].count);
}

TEST_CASE("failing cell is recorded and the run continues") {
    const auto data = sim::simulate("normal", 36, 5);
    auto c = small_config({"ucqr-tis-ig-raw", "ucsv"});
    c.fit_hook = [](const std::string& key, int origin) {
        if (key == "ucsv" && origin == 31) throw NumericalError("injected", origin);
    };
    const auto rep = oos::run_expanding_window(c, data);
    REQUIRE(rep.failures.size() == 1);
    CHECK(rep.failures[0].model == "ucsv");
    CHECK(rep.failures[0].origin == 31);
    CHECK(rep.failures[0].message.find("injected") != std::string::npos);
    const auto u = rep.benchmark_index();
    CHECK(rep.cells[u][0].count == rep.cells[u][0].expected - 1);
    CHECK(rep.cells[1 - u][0].count == rep.cells[1 - u][0].expected);
    CHECK(report::failures_csv(rep).find("ucsv,31") != std::string::npos);
}

TEST_CASE("UC-SV recovers a constant level") {
    Rng rng(6);
    auto data = SeriesData::from_values(sim::gaussian(150, 2.0, 0.5, rng));
    ucsv::UcsvSpec spec;
    spec.mcmc = {300, 900, 3};
    const std::vector<int> h{1};
    const auto draws = ucsv::run_ucsv(data, spec, h, 7);
    const double level = draws.quantile.col(149).mean();
    CHECK(std::fabs(level - 2.0) < 0.25);
    const double sd = draws.scale.col(149).mean();
    CHECK(sd > 0.3);
    CHECK(sd < 0.8);
    const auto mix = ucsv::predictive_mixture(draws, 0);
    CHECK(mix.means.size() == static_cast<std::size_t>(draws.draws()));
    CHECK(std::fabs(eval::gaussian_mixture_quantile(mix.means, mix.variances, 0.5) - 2.0) < 0.3);
}

TEST_CASE("UC-SV tracks a variance break") {
    Rng rng(8);
    auto data = SeriesData::from_values(sim::variance_break(200, 100, 0.0, 1.0, 3.0, rng));
    ucsv::UcsvSpec spec;
    spec.mcmc = {300, 900, 3};
    const std::vector<int> h{1};
    const auto draws = ucsv::run_ucsv(data, spec, h, 9);
    const double before = draws.scale.middleCols(20, 60).mean();
    const double after = draws.scale.middleCols(120, 60).mean();
    CHECK(after / before > 2.0);
    CHECK(after / before < 4.5);
}
