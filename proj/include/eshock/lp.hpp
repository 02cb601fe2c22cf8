#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "eshock/shockgen.hpp"

namespace eshock {

/// Inverse standard normal CDF (Wichura's AS 241, double precision).
double normal_quantile(double p);

/// What to estimate and how: horizons, weighting, sample filters, and the
/// scale that converts raw per-percentage-point coefficients into the
/// reported per-10pp-impact normalization.
struct LpSpec {
    std::string label;            // tag carried into outputs, e.g. "baseline/energy"
    int max_horizon = 65;         // business days (daily) or months (monthly)
    bool weighted = true;         // weight rows by trade volume
    bool include_one_month_control = true;  // lagged one-month change of the dependent
    int one_month_days = 21;      // business days in the "one month" control window
    double normalization_scale = 1.0;       // multiplies coef and se

    /// Rows whose shock date t falls in any [first, last] range are removed
    /// (weight-zeroed, which the estimator treats as physical removal).
    std::vector<std::pair<Date, Date>> exclude_shock_dates;
    /// Whole cycles removed the same way.
    std::vector<int> drop_cycles;

    /// Monthly only: estimation window and outcome-month exclusions
    /// (rows are dropped when month(t+h) falls in a range).
    std::optional<YearMonth> sample_first_month;
    std::optional<YearMonth> sample_last_month;
    std::vector<std::pair<YearMonth, YearMonth>> exclude_outcome_months;
};

struct HorizonEstimate {
    int horizon = 0;
    double coef = 0.0;  // normalized (per 10pp impact when the scale is set)
    double se = 0.0;
    double lo68 = 0.0, hi68 = 0.0;
    double lo90 = 0.0, hi90 = 0.0;
    Eigen::Index n_obs = 0;
    int bandwidth = 0;
};

/// Per-horizon coefficients with HAC standard errors and nested bands.
struct ImpulseResponse {
    std::string label;
    double normalization_scale = 1.0;
    std::vector<HorizonEstimate> horizons;
};

/// Fills the 68/90 bands as coef +- z(level) * se. Exposed for custom
/// levels; the estimators already apply it at {0.68, 0.90}.
void confidence_bands(ImpulseResponse& ir, double inner = 0.68, double outer = 0.90);

/// Scale making a unit of the shock series move the win probability by
/// `target_pp` percentage points on impact: target_pp / gamma_0 from the
/// h = 0 levels regression of the probability (in pp) on the shock.
double impact_normalization(const ShockSeries& shocks, const DailySeries& prob,
                            const std::vector<std::uint8_t>* observed, bool weighted,
                            double target_pp = 10.0);

/// Long-difference projections of a daily log-price series on the shock:
/// for each h, a weighted fit of y_{t+h} - y_{t-1} on an intercept, the
/// shock, and optionally the lagged one-month change; Bartlett HAC standard
/// errors with the bandwidth rule applied to each horizon's realized sample.
ImpulseResponse run_lp_daily(const ShockSeries& shocks, const DailySeries& y, const LpSpec& spec);

/// Monthly employment variant: unweighted, with 12 lags of the dependent's
/// level, the unemployment rate, and 1-month log differences of CPI, PCE,
/// and industrial production as controls.
struct MonthlyControls {
    MonthlySeries unemployment;           // rate, used in levels
    MonthlySeries cpi;                    // index level; log-differenced internally
    MonthlySeries pce;
    MonthlySeries industrial_production;
};
ImpulseResponse run_lp_monthly(const MonthlySeries& shock_m, const MonthlySeries& y,
                               const MonthlyControls& controls, const LpSpec& spec);

/// Probability persistence: per-horizon weighted fit of the win probability
/// (in pp) on the shock, in levels. The h = 0 coefficient pins the impact
/// normalization; with the returned scale applied it equals target_pp.
ImpulseResponse run_lp_prob(const ShockSeries& shocks, const DailySeries& prob,
                            const std::vector<std::uint8_t>* observed, LpSpec spec);

/// One-step variant: regresses the long-differenced dependent directly on
/// the full probability-equation stack (own level and lags, news, incumbency
/// and interactions) plus the optional one-month control; reports the
/// contemporaneous probability coefficient converted to per-pp units.
ImpulseResponse run_lp_onestep(const DailySeries& prob, const NewsPanel& news,
                               const DailySeries& y, const CycleSet& cycles,
                               const ShockSeries& weights_source, const LpSpec& spec,
                               const DesignOptions& design_options = {});

/// IRF CSV block: spec,series,horizon,coef,se,lo68,hi68,lo90,hi90,nobs,bandwidth.
/// `spec_tag`/`series` fill the first two columns; the header is emitted once
/// by the caller.
std::string irf_csv_rows(const ImpulseResponse& ir, const std::string& spec_tag,
                         const std::string& series);
extern const char* const kIrfCsvHeader;

}  // namespace eshock
