// Independent reference computations shared by the unit and acceptance tests.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "tvpqr/state_space.hpp"

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct GaussianPosterior {
    VectorXd mean;  ///< stacked (t, k) -> t * K + k
    MatrixXd cov;
};

/// Smoothing distribution of a random-walk state model by conditioning the
/// joint Gaussian prior of all states on all observations at once.
inline GaussianPosterior dense_state_posterior(const tvpqr::ssm::GaussianStateModel& m) {
    const auto T = m.periods();
    const auto K = m.dim();
    const auto n = T * K;
    VectorXd mu(n);
    MatrixXd prior(n, n);
    for (Eigen::Index s = 0; s < T; ++s)
        for (Eigen::Index k = 0; k < K; ++k) mu(s * K + k) = m.init_mean(k);
    prior.setZero();
    for (Eigen::Index k = 0; k < K; ++k) {
        std::vector<double> cum(T);
        double acc = m.init_var(k);
        for (Eigen::Index t = 0; t < T; ++t) {
            if (t > 0) acc += m.state_innovation_vars(t, k);
            cum[t] = acc;
        }
        for (Eigen::Index s = 0; s < T; ++s)
            for (Eigen::Index t = 0; t < T; ++t) prior(s * K + k, t * K + k) = cum[std::min(s, t)];
    }
    MatrixXd h = MatrixXd::Zero(T, n);
    for (Eigen::Index t = 0; t < T; ++t) h.block(t, t * K, 1, K) = m.design.row(t);
    const MatrixXd s = h * prior * h.transpose() + MatrixXd(m.obs_var.asDiagonal());
    const MatrixXd gain = prior * h.transpose() * s.inverse();
    GaussianPosterior post;
    post.mean = mu + gain * (m.obs - h * mu);
    post.cov = prior - gain * h * prior;
    return post;
}

/// Same for the scalar AR(1) model used by the log-variance processes.
inline GaussianPosterior dense_ar1_posterior(const VectorXd& obs, const VectorXd& obs_var, double mean, double ar,
                                             const VectorXd& innovation_var) {
    const auto T = obs.size();
    // x = mean + L e with e_t ~ N(0, innovation_var_t), L lower triangular of AR powers.
    MatrixXd l = MatrixXd::Zero(T, T);
    for (Eigen::Index t = 0; t < T; ++t)
        for (Eigen::Index s = 0; s <= t; ++s) l(t, s) = std::pow(ar, static_cast<double>(t - s));
    const MatrixXd prior = l * innovation_var.asDiagonal() * l.transpose();
    const MatrixXd sm = prior + MatrixXd(obs_var.asDiagonal());
    const MatrixXd gain = prior * sm.inverse();
    GaussianPosterior post;
    post.mean = VectorXd::Constant(T, mean) + gain * (obs - VectorXd::Constant(T, mean));
    post.cov = prior - gain * prior;
    return post;
}

/// Normalized density on a uniform grid from an unnormalized log density.
struct GridLaw {
    VectorXd x, cdf;

    double cdf_at(double v) const {
        if (v <= x(0)) return 0.0;
        if (v >= x(x.size() - 1)) return 1.0;
        const auto it = std::upper_bound(x.data(), x.data() + x.size(), v);
        const auto i = it - x.data();
        const double w = (v - x(i - 1)) / (x(i) - x(i - 1));
        return (1.0 - w) * cdf(i - 1) + w * cdf(i);
    }
};

template <class LogF>
GridLaw normalize_on_grid(LogF&& logf, double lo, double hi, int n = 20001) {
    GridLaw g;
    g.x = VectorXd::LinSpaced(n, lo, hi);
    VectorXd lf(n);
    for (int i = 0; i < n; ++i) lf(i) = logf(g.x(i));
    const double top = lf.maxCoeff();
    VectorXd f = (lf.array() - top).exp();
    g.cdf.resize(n);
    g.cdf(0) = 0.0;
    for (int i = 1; i < n; ++i) g.cdf(i) = g.cdf(i - 1) + 0.5 * (f(i) + f(i - 1)) * (g.x(i) - g.x(i - 1));
    g.cdf /= g.cdf(n - 1);
    return g;
}

/// Kolmogorov-Smirnov distance between a sample and a tabulated law.
inline double ks_distance(std::vector<double> sample, const GridLaw& law) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = law.cdf_at(sample[i]);
        d = std::max({d, std::fabs(f - i / n), std::fabs((i + 1) / n - f)});
    }
    return d;
}

/// Standard normal quantile by bisection on erfc.
inline double normal_quantile(double u) {
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (0.5 * std::erfc(-mid / std::sqrt(2.0)) < u) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace oracle
