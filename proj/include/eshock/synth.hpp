#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "eshock/lp.hpp"
#include "eshock/shockgen.hpp"

namespace eshock {

/// Known-truth generating process: probabilities follow the estimated
/// equation's structure with injected residuals, news follows its own
/// processes, and log asset prices respond to the injected shocks through a
/// configurable return kernel. Everything is seeded and reproducible.
struct DgpConfig {
    int n_cycles = 7;
    int days_per_cycle = 250;
    int gap_days = 120;   // trading days between cycles (and before the first)
    int tail_days = 80;   // trading days after the last cycle

    // probability process
    std::vector<double> prob_ar = {0.60, 0.15};
    double prob_mean = 0.5;
    double shock_vol_pp = 2.0;      // injected residual, percentage points
    double confound_vol_pp = 0.0;   // latent factor outside the news set
    double news_loading = 1.0;      // scales how observed news moves the probability

    // news processes
    double yield_vol = 0.6;         // daily percent changes
    double sp500_vol = 1.0;
    double macro_monthly_vol = 0.25;  // monthly growth, percent

    // asset processes: return impulse per percentage point of shock at lag s
    std::vector<double> irf_kernel = {1e-3};
    std::vector<double> asset_loadings = {1.0, -1.0, 0.5};
    double asset_noise_vol = 0.01;          // idiosyncratic daily log return
    double confound_return_loading = 0.0;   // latent factor into returns, per pp

    // trade volumes (lognormal around volume_level on cycle days)
    double volume_level = 200.0;
    double volume_dispersion = 0.5;

    // monthly employment block: log-employment response per pp of the
    // monthly shock sum at lag s (months)
    std::vector<double> monthly_kernel = {0.0, 5e-4, 1e-3, 1.5e-3, 1e-3, 5e-4};
    double monthly_noise_vol = 2e-3;

    std::uint64_t seed = 20240101;

    void validate() const;  // throws InvalidConfig

    /// Key-value text: one `key = value` per line, '#' comments. Lists are
    /// comma-separated. Unknown keys are rejected.
    static DgpConfig from_text(std::string_view text, const std::string& source);
    static DgpConfig from_file(const std::string& path);
    [[nodiscard]] std::string to_text() const;
};

struct SimulatedData {
    CalendarPtr calendar;  // full span, weekday dates
    CycleSet cycles;
    DailySeries prob;                     // [0,1], cycle days only
    std::vector<std::uint8_t> observed;   // 1 on every cycle day
    DailySeries volume;
    DailySeries yield_level;
    DailySeries sp500_level;
    NewsPanel news;
    std::map<std::string, DailySeries> assets;  // log price levels
    DailySeries true_shock_pp;            // injected residuals, pp; 0 outside cycles
    DailySeries true_confound_pp;         // latent factor, pp; 0 outside cycles
    VintageStore vintages;
    ReleaseCalendar releases;
    NarrativeEventList events;
    int clamped_days = 0;                 // probability paths forced back into (0,1)

    MonthlySeries employment_log;         // log employment
    MonthlyControls monthly_controls;     // levels
    MonthlySeries true_monthly_shock_pp;  // monthly sums of the injected shocks
};

SimulatedData simulate_dgp(const DgpConfig& cfg);

/// Cumulative level response per 10pp impact implied by the return kernel
/// (unit asset loading): 10 * sum_{s<=h} kernel[s].
std::vector<double> true_irf(const DgpConfig& cfg, int max_horizon);
std::vector<double> true_monthly_irf(const DgpConfig& cfg, int max_horizon);

/// Literal double-sum Bartlett sandwich, no algebraic shortcuts; exists to
/// cross-check the production estimator on small problems.
Eigen::MatrixXd oracle_hac(const Eigen::VectorXd& residuals, const Eigen::MatrixXd& X,
                           const Eigen::VectorXd& weights, int lag_truncation);

/// Shocks extracted by the full identification pipeline on simulated data,
/// with the injected truth aligned to the same dates.
struct IdentificationRun {
    ShockSeries extracted;
    std::vector<Date> fit_dates;
    Eigen::VectorXd extracted_on_fit_dates;  // pp
    Eigen::VectorXd injected_on_fit_dates;   // pp
    double correlation = 0.0;
    double first_stage_r2 = 0.0;
    Eigen::Index n_obs = 0;
};
IdentificationRun run_identification(const SimulatedData& sim);

/// Per-horizon fraction of replications whose `level` bands cover the true
/// response, with binomial Monte Carlo standard errors. Replications run in
/// parallel on preassigned sub-seeds, so results do not depend on
/// scheduling.
struct CoverageResult {
    std::vector<double> coverage;
    std::vector<double> mc_se;
    int n_reps = 0;
};
CoverageResult coverage_experiment(const DgpConfig& cfg, int n_reps, double level,
                                   int max_horizon, int n_threads = 0);

/// Mean estimated coefficient and Monte Carlo standard error of that mean,
/// per horizon, across replications (the null-calibration experiment).
struct MeanIrfResult {
    std::vector<double> mean_coef;
    std::vector<double> mc_se;
    int n_reps = 0;
};
MeanIrfResult mean_irf_experiment(const DgpConfig& cfg, int n_reps, int max_horizon,
                                  int n_threads = 0);

/// Deterministic sub-seed for replication streams.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace eshock
