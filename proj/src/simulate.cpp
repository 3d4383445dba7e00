#include "tvpqr/simulate.hpp"

#include <cmath>
#include <string>

#include "tvpqr/distributions.hpp"
#include "tvpqr/errors.hpp"

namespace tvpqr::sim {

VectorXd al_constant(Eigen::Index T, double level, double p, double scale, Rng& rng) {
    VectorXd y(T);
    for (Eigen::Index t = 0; t < T; ++t) y(t) = dist::al_quantile_function(rng.uniform(), level, scale, p);
    return y;
}

VectorXd gaussian(Eigen::Index T, double mean, double sd, Rng& rng) {
    VectorXd y(T);
    for (Eigen::Index t = 0; t < T; ++t) y(t) = mean + sd * rng.normal();
    return y;
}

VectorXd variance_break(Eigen::Index T, Eigen::Index break_at, double mean, double sd_before, double sd_after, Rng& rng) {
    VectorXd y(T);
    for (Eigen::Index t = 0; t < T; ++t) y(t) = mean + (t < break_at ? sd_before : sd_after) * rng.normal();
    return y;
}

VectorXd trend_sv(Eigen::Index T, double start, double trend_sd, double vol_sd, Rng& rng) {
    VectorXd y(T);
    double a = start, h = 0.0;
    for (Eigen::Index t = 0; t < T; ++t) {
        a += trend_sd * rng.normal();
        h += vol_sd * rng.normal();
        y(t) = a + std::exp(0.5 * h) * rng.normal();
    }
    return y;
}

SeriesData simulate(std::string_view dgp, Eigen::Index T, std::uint64_t seed) {
    if (T < 1) throw InputError("simulate: length must be positive");
    Rng rng(seed);
    VectorXd y;
    if (dgp == "al-constant") y = al_constant(T, 2.0, 0.5, 1.0, rng);
    else if (dgp == "normal") y = gaussian(T, 0.0, 1.0, rng);
    else if (dgp == "variance-break") y = variance_break(T, T / 2, 0.0, 1.0, 3.0, rng);
    else if (dgp == "trend-sv") y = trend_sv(T, 2.0, 0.1, 0.1, rng);
    else throw InputError("unknown generator '" + std::string(dgp) + "' (expected al-constant, normal, variance-break or trend-sv)");
    return SeriesData::from_values(y);
}

}  // namespace tvpqr::sim
