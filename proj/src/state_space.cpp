#include "tvpqr/state_space.hpp"

#include <cmath>
#include <vector>

#include "tvpqr/errors.hpp"

namespace tvpqr::ssm {

void GaussianStateModel::validate() const {
    const auto T = periods();
    const auto K = dim();
    if (T < 1 || K < 1) throw DomainError("state model: empty model");
    if (design.rows() != T || obs_var.size() != T || state_innovation_vars.rows() != T)
        throw DomainError("state model: row counts of obs, design, obs_var and innovation variances differ");
    if (state_innovation_vars.cols() != K || init_mean.size() != K || init_var.size() != K)
        throw DomainError("state model: state dimension mismatch");
    if (!(obs_var.array() > 0.0).all() || !(init_var.array() > 0.0).all())
        throw DomainError("state model: variances must be strictly positive");
    if (T > 1 && !(state_innovation_vars.bottomRows(T - 1).array() >= 0.0).all())
        throw DomainError("state model: negative state innovation variance");
}

namespace {

MatrixXd ffbs_scalar(const GaussianStateModel& model, Rng& rng) {
    const auto T = model.periods();
    std::vector<double> m(T), c(T), p(T);
    for (Eigen::Index t = 0; t < T; ++t) {
        const double a = t == 0 ? model.init_mean(0) : m[t - 1];
        const double pp = t == 0 ? model.init_var(0) : c[t - 1] + model.state_innovation_vars(t, 0);
        p[t] = pp;
        const double x = model.design(t, 0);
        const double f = x * pp * x + model.obs_var(t);
        const double k = pp * x / f;
        m[t] = a + k * (model.obs(t) - x * a);
        c[t] = std::max(pp - k * k * f, kFilterJitter);
        if (!std::isfinite(m[t]) || !std::isfinite(c[t])) throw NumericalError("FFBS: non-finite filter moments", t);
    }
    MatrixXd draw(T, 1);
    draw(T - 1, 0) = m[T - 1] + std::sqrt(c[T - 1]) * rng.normal();
    for (Eigen::Index t = T - 2; t >= 0; --t) {
        const double j = c[t] / p[t + 1];
        const double mean = m[t] + j * (draw(t + 1, 0) - m[t]);
        const double var = std::max(c[t] - j * j * p[t + 1], 0.0) + kFilterJitter;
        draw(t, 0) = mean + std::sqrt(var) * rng.normal();
    }
    return draw;
}

VectorXd draw_mvn(const VectorXd& mean, MatrixXd cov, Rng& rng, Eigen::Index t) {
    const auto K = mean.size();
    cov = 0.5 * (cov + cov.transpose());
    for (Eigen::Index k = 0; k < K; ++k) cov(k, k) = std::max(cov(k, k), 0.0) + kFilterJitter;
    Eigen::LLT<MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) throw NumericalError("FFBS: smoothing covariance not positive definite", t);
    VectorXd z(K);
    for (Eigen::Index k = 0; k < K; ++k) z(k) = rng.normal();
    return mean + llt.matrixL() * z;
}

}  // namespace

MatrixXd ffbs(const GaussianStateModel& model, Rng& rng) {
    model.validate();
    if (model.dim() == 1) return ffbs_scalar(model, rng);

    const auto T = model.periods();
    const auto K = model.dim();
    std::vector<VectorXd> m(T);
    std::vector<MatrixXd> c(T), p(T);
    for (Eigen::Index t = 0; t < T; ++t) {
        VectorXd a;
        MatrixXd pp;
        if (t == 0) {
            a = model.init_mean;
            pp = model.init_var.asDiagonal();
        } else {
            a = m[t - 1];
            pp = c[t - 1];
            pp.diagonal() += model.state_innovation_vars.row(t).transpose();
        }
        p[t] = pp;
        const VectorXd x = model.design.row(t).transpose();
        const VectorXd px = pp * x;
        const double f = x.dot(px) + model.obs_var(t);
        const VectorXd k = px / f;
        m[t] = a + k * (model.obs(t) - x.dot(a));
        MatrixXd ct = pp - k * k.transpose() * f;
        ct = 0.5 * (ct + ct.transpose());
        for (Eigen::Index i = 0; i < K; ++i) ct(i, i) = std::max(ct(i, i), kFilterJitter);
        if (!m[t].allFinite() || !ct.allFinite()) throw NumericalError("FFBS: non-finite filter moments", t);
        Eigen::LLT<MatrixXd> check(ct);
        if (check.info() != Eigen::Success) throw NumericalError("FFBS: filter covariance lost definiteness", t);
        c[t] = std::move(ct);
    }

    MatrixXd draw(T, K);
    draw.row(T - 1) = draw_mvn(m[T - 1], c[T - 1], rng, T - 1).transpose();
    for (Eigen::Index t = T - 2; t >= 0; --t) {
        Eigen::LLT<MatrixXd> pl(p[t + 1]);
        if (pl.info() != Eigen::Success) throw NumericalError("FFBS: predicted covariance not positive definite", t + 1);
        // J = C_t P_{t+1}^{-1}
        const MatrixXd jt = pl.solve(c[t]);  // = J'
        const VectorXd diff = draw.row(t + 1).transpose() - m[t];
        const VectorXd mean = m[t] + jt.transpose() * diff;
        const MatrixXd var = c[t] - jt.transpose() * p[t + 1] * jt;
        draw.row(t) = draw_mvn(mean, var, rng, t).transpose();
    }
    return draw;
}

VectorXd ffbs_ar1(const VectorXd& obs, const VectorXd& obs_var, double mean, double ar,
                  const VectorXd& innovation_var, Rng& rng) {
    const auto T = obs.size();
    if (obs_var.size() != T || innovation_var.size() != T) throw DomainError("AR(1) FFBS: length mismatch");
    VectorXd draw(T);
    if (T == 0) return draw;
    std::vector<double> m(T), c(T), a(T), p(T);
    for (Eigen::Index t = 0; t < T; ++t) {
        a[t] = t == 0 ? mean : mean + ar * (m[t - 1] - mean);
        p[t] = t == 0 ? innovation_var(0) : ar * ar * c[t - 1] + innovation_var(t);
        const double f = p[t] + obs_var(t);
        const double k = p[t] / f;
        m[t] = a[t] + k * (obs(t) - a[t]);
        c[t] = std::max(p[t] - k * k * f, kFilterJitter);
        if (!std::isfinite(m[t]) || !std::isfinite(c[t])) throw NumericalError("AR(1) FFBS: non-finite filter moments", t);
    }
    draw(T - 1) = m[T - 1] + std::sqrt(c[T - 1]) * rng.normal();
    for (Eigen::Index t = T - 2; t >= 0; --t) {
        const double j = c[t] * ar / p[t + 1];
        const double mu = m[t] + j * (draw(t + 1) - a[t + 1]);
        const double var = std::max(c[t] - j * j * p[t + 1], 0.0) + kFilterJitter;
        draw(t) = mu + std::sqrt(var) * rng.normal();
    }
    return draw;
}

double log_scale_site_target(double h, double prior_mean, double prior_var, double resid, double z,
                             const dist::ALParams& al) {
    const double sigma = std::exp(h);
    const double mean = al.theta * z * sigma;
    const double var = al.tau_sq * z * sigma * sigma;
    const double dev = resid - mean;
    const double dp = h - prior_mean;
    return -0.5 * std::log(var) - dev * dev / (2.0 * var) - dp * dp / (2.0 * prior_var);
}

double mh_log_scale_site(double h, double prior_mean, double prior_var, double resid, double z,
                         const dist::ALParams& al, double tuning_c, Rng& rng, bool& accepted) {
    const double proposal = h + std::sqrt(tuning_c) * rng.normal();
    const double log_ratio = log_scale_site_target(proposal, prior_mean, prior_var, resid, z, al) -
                             log_scale_site_target(h, prior_mean, prior_var, resid, z, al);
    accepted = std::isfinite(log_ratio) && std::log(rng.uniform()) < log_ratio;
    return accepted ? proposal : h;
}

LogScaleSweep sample_log_scale_path(const LogScalePath& current, const VectorXd& resid, const VectorXd& v,
                                    const dist::ALParams& al, double tuning_c, Rng& rng) {
    if (!(tuning_c > 0.0)) throw DomainError("log-scale MH: tuning constant must be positive");
    if (!(current.innovation_var > 0.0)) throw DomainError("log-scale MH: innovation variance must be positive");
    const auto T = current.h.size();
    if (resid.size() != T || v.size() != T) throw DomainError("log-scale MH: length mismatch");

    LogScaleSweep out{current, VectorXd(T), 0.0};
    VectorXd& h = out.path.h;
    const VectorXd z = v.array() / current.h.array().exp();
    const double s2 = current.innovation_var;

    int accepted_count = 0;
    for (Eigen::Index t = 0; t < T; ++t) {
        const double left = t == 0 ? out.path.h0 : h(t - 1);
        double prior_mean, prior_var;
        if (t < T - 1) {
            prior_mean = 0.5 * (left + h(t + 1));
            prior_var = 0.5 * s2;
        } else {
            prior_mean = left;
            prior_var = s2;
        }
        bool accepted = false;
        h(t) = mh_log_scale_site(h(t), prior_mean, prior_var, resid(t), z(t), al, tuning_c, rng, accepted);
        accepted_count += accepted ? 1 : 0;
    }

    const double s0 = current.init_var;
    const double post_var = (s0 * s2) / (s0 + s2);
    const double post_mean = post_var * (current.init_mean / s0 + h(0) / s2);
    out.path.h0 = post_mean + std::sqrt(post_var) * rng.normal();

    out.v = (z.array() * h.array().exp()).max(dist::kAuxFloor);
    out.acceptance_rate = static_cast<double>(accepted_count) / static_cast<double>(T);
    return out;
}

double sample_innovation_variance(const VectorXd& state_path, double prior_shape, double prior_rate, Rng& rng) {
    const auto n = state_path.size() - 1;
    if (n < 1) throw DomainError("innovation variance: need at least two states");
    double ss = 0.0;
    for (Eigen::Index t = 1; t <= n; ++t) {
        const double d = state_path(t) - state_path(t - 1);
        ss += d * d;
    }
    return dist::sample_inverse_gamma(prior_shape + 0.5 * static_cast<double>(n), prior_rate + 0.5 * ss, rng);
}

}  // namespace tvpqr::ssm
