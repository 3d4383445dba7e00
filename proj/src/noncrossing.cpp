#include "tvpqr/noncrossing.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "tvpqr/distributions.hpp"
#include "tvpqr/errors.hpp"
#include "tvpqr/sampler.hpp"

namespace tvpqr::noncross {

std::string_view to_string(Adjustment a) {
    switch (a) {
        case Adjustment::Raw: return "raw";
        case Adjustment::GP: return "gp";
        case Adjustment::GPt: return "gpt";
    }
    return "?";
}

Adjustment parse_adjustment(std::string_view tag) {
    if (tag == "raw") return Adjustment::Raw;
    if (tag == "gp" || tag == "GP") return Adjustment::GP;
    if (tag == "gpt" || tag == "GPt") return Adjustment::GPt;
    throw InputError("unknown adjustment '" + std::string(tag) + "' (expected raw, gp or gpt)");
}

InducedQuantileMatrix build_induced_matrix(const VectorXd& mu_hat, const VectorXd& sigma_hat, const QuantileGrid& grid,
                                           const MatrixXd* entry_var) {
    const auto P = static_cast<Eigen::Index>(grid.size());
    if (P < 2 || mu_hat.size() != P || sigma_hat.size() != P) throw DomainError("induced matrix: need P >= 2 matching estimates");
    if (!(sigma_hat.array() > 0.0).all()) throw DomainError("induced matrix: scales must be positive");
    InducedQuantileMatrix m;
    m.levels = Eigen::Map<const VectorXd>(grid.levels.data(), P);
    m.q.resize(P, P);
    for (Eigen::Index i = 0; i < P; ++i)
        for (Eigen::Index j = 0; j < P; ++j) m.q(i, j) = dist::al_quantile_function(grid[j], mu_hat(i), sigma_hat(i), grid[i]);
    m.diag_var = entry_var ? *entry_var : MatrixXd::Zero(P, P);
    return m;
}

InducedQuantileMatrix build_induced_matrix(std::span<const VectorXd> mu_draws, std::span<const VectorXd> sigma_draws,
                                           const QuantileGrid& grid) {
    const auto P = static_cast<Eigen::Index>(grid.size());
    if (static_cast<Eigen::Index>(mu_draws.size()) != P || static_cast<Eigen::Index>(sigma_draws.size()) != P)
        throw DomainError("induced matrix: one draw vector per level required");
    VectorXd mu_hat(P), sigma_hat(P);
    MatrixXd var(P, P);
    for (Eigen::Index i = 0; i < P; ++i) {
        const VectorXd& mu = mu_draws[i];
        const VectorXd& sg = sigma_draws[i];
        const auto D = mu.size();
        if (D < 1 || sg.size() != D) throw DomainError("induced matrix: empty or mismatched draws");
        mu_hat(i) = mu.mean();
        sigma_hat(i) = sg.mean();
        // Each entry is mu + c_ij sigma with a constant c_ij.
        double vmu = 0.0, vsg = 0.0, cov = 0.0;
        if (D > 1) {
            const VectorXd dm = mu.array() - mu_hat(i);
            const VectorXd ds = sg.array() - sigma_hat(i);
            vmu = dm.squaredNorm() / static_cast<double>(D - 1);
            vsg = ds.squaredNorm() / static_cast<double>(D - 1);
            cov = dm.dot(ds) / static_cast<double>(D - 1);
        }
        const double p = grid[i];
        for (Eigen::Index j = 0; j < P; ++j) {
            const double c = dist::al_quantile_function(grid[j], 0.0, 1.0, p);
            var(i, j) = std::max(vmu + c * c * vsg + 2.0 * c * cov, 0.0) / static_cast<double>(D);
        }
    }
    return build_induced_matrix(mu_hat, sigma_hat, grid, &var);
}

VectorXd gp_fit(const InducedQuantileMatrix& matrix, double w, const GPConfig& config) {
    if (!(w > 0.0)) throw DomainError("gp_fit: bandwidth must be positive");
    if (!(config.s_sq > 0.0)) throw DomainError("gp_fit: kernel variance must be positive");
    const auto P = matrix.q.rows();
    MatrixXd kernel(P, P);
    for (Eigen::Index i = 0; i < P; ++i)
        for (Eigen::Index j = 0; j < P; ++j) {
            const double d = matrix.levels(i) - matrix.levels(j);
            kernel(i, j) = config.s_sq * std::exp(-d * d / (2.0 * w * w));
        }

    VectorXd out(P);
    static constexpr double kJitter[] = {0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6};
    for (Eigen::Index j = 0; j < P; ++j) {
        bool solved = false;
        for (double jitter : kJitter) {
            MatrixXd a = kernel;
            for (Eigen::Index i = 0; i < P; ++i)
                a(i, i) += std::max(matrix.diag_var(i, j), config.var_floor) + jitter * config.s_sq;
            Eigen::LLT<MatrixXd> llt(a);
            if (llt.info() != Eigen::Success) continue;
            const VectorXd alpha = llt.solve(matrix.q.col(j));
            if (!alpha.allFinite()) continue;
            out(j) = kernel.row(j).dot(alpha);
            solved = true;
            break;
        }
        if (!solved) throw NumericalError("gp_fit: factorization failed after maximal jitter", j);
    }
    return out;
}

bool strictly_increasing(const VectorXd& values, double margin) {
    for (Eigen::Index i = 1; i < values.size(); ++i)
        if (!(values(i) - values(i - 1) > margin)) return false;
    return true;
}

namespace {

struct NoBandwidth : std::runtime_error {
    using std::runtime_error::runtime_error;
};

bool monotone_at(const InducedQuantileMatrix& m, double w, const GPConfig& c) {
    return strictly_increasing(gp_fit(m, w, c), c.margin);
}

// Monotonicity is not monotone in w (a moderate bandwidth can fix a crossing
// that a larger one reintroduces), so scan a geometric ladder for the first
// monotone bandwidth and bisect the bracketing step.
double bisect_bandwidth(const InducedQuantileMatrix& m, double lo, double hi, const GPConfig& c) {
    if (monotone_at(m, lo, c)) return lo;
    constexpr double kLadderStep = 1.25;
    double below = lo, above = 0.0;
    for (double w = lo * kLadderStep;; w *= kLadderStep) {
        w = std::min(w, hi);
        if (monotone_at(m, w, c)) {
            above = w;
            break;
        }
        below = w;
        if (w >= hi)
            throw NoBandwidth("no bandwidth in [" + std::to_string(lo) + ", " + std::to_string(hi) +
                              "] removes the quantile crossing");
    }
    while (above / below - 1.0 > c.rel_tol) {
        const double mid = std::sqrt(below * above);
        if (monotone_at(m, mid, c)) above = mid;
        else below = mid;
    }
    return above;
}

AdjustedCurves adjust_impl(const QuantileDrawSet& draws, const QuantileGrid& grid, Adjustment mode,
                           const GPConfig& config, bool parallel, int threads) {
    const auto P = static_cast<Eigen::Index>(grid.size());
    if (static_cast<Eigen::Index>(draws.mu.size()) != P) throw DomainError("adjust: one draw set per quantile level required");
    const auto T = draws.periods();
    AdjustedCurves out;
    out.values.resize(T, P);
    if (mode == Adjustment::Raw) {
        for (Eigen::Index i = 0; i < P; ++i) out.values.col(i) = draws.mu[i].colwise().mean().transpose();
        return out;
    }

    std::vector<InducedQuantileMatrix> mats(T);
    std::vector<double> w(T, 0.0);
    std::vector<std::string> errors(T);
    const int nthreads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 4) num_threads(nthreads) if (parallel)
    for (Eigen::Index t = 0; t < T; ++t) {
        try {
            mats[t] = draws.induced(t, grid);
            w[t] = bisect_bandwidth(mats[t], config.w_lo, config.w_hi, config);
        } catch (const std::exception& e) {
            errors[t] = e.what();
        }
    }
    for (Eigen::Index t = 0; t < T; ++t)
        if (!errors[t].empty()) throw NumericalError("adjust: " + errors[t], t);

    if (mode == Adjustment::GP) {
        const double common = T > 0 ? *std::max_element(w.begin(), w.end()) : config.w_lo;
#pragma omp parallel for schedule(dynamic, 4) num_threads(nthreads) if (parallel)
        for (Eigen::Index t = 0; t < T; ++t) {
            try {
                if (monotone_at(mats[t], common, config)) w[t] = common;
                else w[t] = bisect_bandwidth(mats[t], common, config.w_hi, config);
            } catch (const NoBandwidth&) {
                // Nothing in [common, w_hi] works; the period's own minimal bandwidth does.
            } catch (const std::exception& e) {
                errors[t] = e.what();
            }
        }
        for (Eigen::Index t = 0; t < T; ++t)
            if (!errors[t].empty()) throw NumericalError("adjust: " + errors[t], t);
    }

#pragma omp parallel for schedule(static) num_threads(nthreads) if (parallel)
    for (Eigen::Index t = 0; t < T; ++t) out.values.row(t) = gp_fit(mats[t], w[t], config).transpose();
    out.bandwidths = std::move(w);
    return out;
}

}  // namespace

double minimal_bandwidth(const InducedQuantileMatrix& matrix, const GPConfig& config) {
    try {
        return bisect_bandwidth(matrix, config.w_lo, config.w_hi, config);
    } catch (const NoBandwidth& e) {
        throw NumericalError(e.what(), -1);
    }
}

BandwidthSelection select_bandwidth(std::span<const InducedQuantileMatrix> matrices, const GPConfig& config, int threads) {
    const auto T = static_cast<Eigen::Index>(matrices.size());
    BandwidthSelection sel;
    sel.per_period.assign(T, 0.0);
    std::vector<std::string> errors(T);
    const int nthreads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 4) num_threads(nthreads)
    for (Eigen::Index t = 0; t < T; ++t) {
        try {
            sel.per_period[t] = bisect_bandwidth(matrices[t], config.w_lo, config.w_hi, config);
        } catch (const std::exception& e) {
            errors[t] = e.what();
        }
    }
    for (Eigen::Index t = 0; t < T; ++t)
        if (!errors[t].empty()) throw NumericalError("select_bandwidth: " + errors[t], t);
    sel.common = T > 0 ? *std::max_element(sel.per_period.begin(), sel.per_period.end()) : config.w_lo;
    return sel;
}

InducedQuantileMatrix QuantileDrawSet::induced(Eigen::Index period, const QuantileGrid& grid) const {
    const auto P = mu.size();
    std::vector<VectorXd> m(P), s(P);
    for (std::size_t i = 0; i < P; ++i) {
        m[i] = mu[i].col(period);
        s[i] = sigma[i].col(period);
    }
    return build_induced_matrix(m, s, grid);
}

QuantileDrawSet QuantileDrawSet::in_sample(std::span<const sampler::PosteriorDraws> chains) {
    QuantileDrawSet set;
    for (const auto& c : chains) {
        set.mu.push_back(c.quantile);
        set.sigma.push_back(c.scale);
    }
    return set;
}

QuantileDrawSet QuantileDrawSet::forecasts(std::span<const sampler::PosteriorDraws> chains) {
    QuantileDrawSet set;
    for (const auto& c : chains) {
        set.mu.push_back(c.forecast);
        set.sigma.push_back(c.forecast_scale);
    }
    return set;
}

AdjustedCurves adjust(const QuantileDrawSet& draws, const QuantileGrid& grid, Adjustment mode, const GPConfig& config,
                      int threads) {
    return adjust_impl(draws, grid, mode, config, true, threads);
}

AdjustedCurves adjust_serial(const QuantileDrawSet& draws, const QuantileGrid& grid, Adjustment mode,
                             const GPConfig& config) {
    return adjust_impl(draws, grid, mode, config, false, 1);
}

}  // namespace tvpqr::noncross
