#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string_view>
#include <variant>
#include <vector>

#include "tvpqr/distributions.hpp"
#include "tvpqr/rng.hpp"
#include "tvpqr/shrinkage.hpp"
#include "tvpqr/state_space.hpp"
#include "tvpqr/types.hpp"

namespace tvpqr::sampler {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using shrink::ShrinkageKind;

enum class ScaleMode { TIS, TVS };

std::string_view to_string(ScaleMode mode);
ScaleMode parse_scale_mode(std::string_view tag);

struct Hyperparams {
    double m = 0.1, n = 0.1;      // iG prior on constant state variances
    double a = 0.1, b = 0.1;      // sigma ~ IG(a/2, b/2) under TIS
    double e = 3.0, f = 0.3;      // varsigma^2 ~ IG(e, f) under TVS
    double m0 = 0.0, s0_sq = 1.0; // initial log-scale
    double beta_init_var = 10.0;  // beta_1 ~ N(0, beta_init_var I)
};

struct McmcSettings {
    int burn_in = 3000;
    int post_burn = 9000;
    int thin = 3;

    int retained() const { return post_burn / thin; }
    void validate() const;
    /// Reduced run lengths for tests and CI.
    static McmcSettings desk_scale() { return {500, 1500, 3}; }
};

struct ModelSpec {
    double quantile_p = 0.5;
    ScaleMode scale_mode = ScaleMode::TIS;
    ShrinkageKind shrinkage = ShrinkageKind::DynamicHorseshoe;
    Hyperparams hyper;
    McmcSettings mcmc;
    /// Initial proposal variance of the log-scale MH step.
    double mh_tuning = 0.1;
    /// Adapt the proposal during burn-in towards 25-45% acceptance.
    bool adapt_tuning = true;

    void validate() const;
};

/// Gibbs step order, recorded in every PosteriorDraws.
inline constexpr std::array<std::string_view, 5> kStepOrder = {"beta", "omega", "v", "scale", "forecast"};

struct IgState {
    VectorXd omega;
};
using ShrinkState = std::variant<IgState, shrink::ShsState, shrink::DhsState>;

struct ChainState {
    MatrixXd beta;   ///< T x K
    VectorXd v;      ///< T
    VectorXd scale;  ///< T, constant under TIS
    MatrixXd omega;  ///< T x K, row 0 unused by the state equation
    ShrinkState shrink;
    ssm::LogScalePath log_scale;  ///< TVS only
    double tuning_c = 0.1;
    ScaleMode scale_mode = ScaleMode::TIS;

    static ChainState initial(const ModelSpec& spec, const SeriesData& data);
};

struct PosteriorDraws {
    double quantile_p = 0.5;
    std::vector<MatrixXd> beta;  ///< D entries of T x K
    MatrixXd quantile;           ///< D x T, x_t' beta_t
    MatrixXd scale;              ///< D x T
    std::vector<int> horizons;
    MatrixXd forecast;           ///< D x H simulated quantile forecasts
    MatrixXd forecast_scale;     ///< D x H simulated scales
    double acceptance_rate = 0.0;  ///< post-burn-in MH acceptance (TVS), 1 under TIS
    double final_tuning = 0.0;
    std::array<std::string_view, 5> step_order = kStepOrder;

    Eigen::Index draws() const { return quantile.rows(); }
    Eigen::Index periods() const { return quantile.cols(); }
    VectorXd quantile_mean() const;
    VectorXd scale_mean() const;
};

/// Failure of one chain, tagged with sweep index and step.
class ChainFailure : public std::runtime_error {
public:
    ChainFailure(int sweep, std::string_view step, const std::string& what);
    int sweep() const noexcept { return sweep_; }
    std::string_view step() const noexcept { return step_; }

private:
    int sweep_;
    std::string_view step_;
};

void step_draw_beta(ChainState& state, const SeriesData& data, const dist::ALParams& al, const ModelSpec& spec, Rng& rng);
void step_draw_shrinkage(ChainState& state, const ModelSpec& spec, Rng& rng);
void step_draw_v(ChainState& state, const SeriesData& data, const dist::ALParams& al, Rng& rng);
/// Returns the MH acceptance rate of the sweep (1 under TIS).
double step_draw_scale(ChainState& state, const SeriesData& data, const dist::ALParams& al, const ModelSpec& spec, Rng& rng);

/// Parameters of the v_t full conditional at period t.
dist::GIGParams v_conditional(double resid, double scale, const dist::ALParams& al);

/// Inverse-gamma parameters of the time-invariant scale conditional.
struct IgParams {
    double shape;
    double rate;
};
IgParams tis_scale_conditional(const VectorXd& resid, const VectorXd& v, const dist::ALParams& al, const Hyperparams& hp);

/// Simulates beta and sigma forward `max_h` steps from the current state.
/// Returns (quantile forecast, scale) per step 1..max_h.
std::pair<VectorXd, VectorXd> simulate_forward(const ChainState& state, const SeriesData& data, int max_h, Rng& rng);

PosteriorDraws run_chain(const ModelSpec& spec, const SeriesData& data, std::span<const int> horizons, std::uint64_t seed);

/// Independent chains for every grid level; OpenMP over quantiles.
std::vector<PosteriorDraws> run_quantile_chains(const ModelSpec& base, const QuantileGrid& grid, const SeriesData& data,
                                                std::span<const int> horizons, std::span<const std::uint64_t> seeds,
                                                int threads = 0);

/// Serial reference for run_quantile_chains.
std::vector<PosteriorDraws> run_quantile_chains_serial(const ModelSpec& base, const QuantileGrid& grid,
                                                       const SeriesData& data, std::span<const int> horizons,
                                                       std::span<const std::uint64_t> seeds);

/// Seeds master_seed + quantile index.
std::vector<std::uint64_t> sequential_seeds(std::uint64_t master_seed, std::size_t count);

}  // namespace tvpqr::sampler
