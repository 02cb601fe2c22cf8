#include "eshock/lp.hpp"

#include <array>
#include <cmath>

#include "eshock/csv.hpp"
#include "eshock/errors.hpp"

namespace eshock {

double normal_quantile(double p) {
    // Wichura (1988), algorithm AS 241, PPND16.
    if (!(p > 0.0 && p < 1.0)) throw ValueError("normal_quantile: p must be in (0,1)");
    const double q = p - 0.5;
    double r;
    if (std::abs(q) <= 0.425) {
        r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                     6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                   1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
                 1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
               (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                     3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                   5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
                 4.2313330701600911252e1) * r + 1.0);
    }
    r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double value;
    if (r <= 5.0) {
        r -= 1.6;
        value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                      2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                    3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
                  4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
                (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                      1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                    6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
                  2.05319162663775882187e0) * r + 1.0);
    } else {
        r -= 5.0;
        value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                      1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                    2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
                  5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
                (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                      1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                    1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                  5.99832206555887937690e-1) * r + 1.0);
    }
    return q < 0.0 ? -value : value;
}

void confidence_bands(ImpulseResponse& ir, double inner, double outer) {
    if (!(inner > 0.0 && inner < outer && outer < 1.0))
        throw ValueError("confidence_bands: need 0 < inner < outer < 1");
    const double zi = normal_quantile(0.5 + inner / 2.0);
    const double zo = normal_quantile(0.5 + outer / 2.0);
    for (auto& h : ir.horizons) {
        h.lo68 = h.coef - zi * h.se;
        h.hi68 = h.coef + zi * h.se;
        h.lo90 = h.coef - zo * h.se;
        h.hi90 = h.coef + zo * h.se;
    }
}

namespace {

struct Row {
    Date date;
    double shock;
    double weight;
    double response;
    double control;  // lagged one-month change, when used
};

bool date_excluded(const LpSpec& spec, Date t) {
    for (const auto& [a, b] : spec.exclude_shock_dates)
        if (a <= t && t <= b) return true;
    return false;
}

bool cycle_dropped(const LpSpec& spec, int cycle) {
    for (int c : spec.drop_cycles)
        if (c == cycle) return true;
    return false;
}

HorizonEstimate estimate_simple(std::vector<Row> rows, int h, bool with_control,
                                const LpSpec& spec) {
    // exclusions act through the weights; the estimator drops w = 0 rows
    Eigen::Index n_eff = 0;
    for (const auto& r : rows)
        if (r.weight > 0.0) ++n_eff;

    const Eigen::Index k = with_control ? 3 : 2;
    if (n_eff < 3 * k)
        throw InsufficientSample("horizon " + std::to_string(h) + ": " + std::to_string(n_eff) +
                                 " rows for " + std::to_string(k) + " parameters");

    // shock variation on the effective sample
    double wsum = 0.0, mean = 0.0;
    for (const auto& r : rows)
        if (r.weight > 0.0) {
            wsum += r.weight;
            mean += r.weight * r.shock;
        }
    mean /= wsum;
    double var = 0.0;
    for (const auto& r : rows)
        if (r.weight > 0.0) var += r.weight * (r.shock - mean) * (r.shock - mean);
    if (var == 0.0)
        throw DegenerateShock("horizon " + std::to_string(h) +
                              ": shock has no variation on the estimation sample");

    DesignMatrix X;
    X.labels = with_control ? std::vector<std::string>{"const", "shock", "d1m"}
                            : std::vector<std::string>{"const", "shock"};
    X.values.resize(static_cast<Eigen::Index>(rows.size()), k);
    X.weights.resize(static_cast<Eigen::Index>(rows.size()));
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    X.dates.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        X.dates.push_back(rows[i].date);
        X.values(r, 0) = 1.0;
        X.values(r, 1) = rows[i].shock;
        if (with_control) X.values(r, 2) = rows[i].control;
        X.weights[r] = rows[i].weight;
        y[r] = rows[i].response;
    }

    FitResult fit = fit_wls(X, y);
    const int bw = nw_bandwidth(fit.n_obs);
    HacCovariance cov = newey_west(fit, X, bw);

    HorizonEstimate est;
    est.horizon = h;
    est.coef = spec.normalization_scale * fit.coefficient("shock");
    est.se = spec.normalization_scale * cov.standard_error(1);
    est.n_obs = fit.n_obs;
    est.bandwidth = bw;
    return est;
}

}  // namespace

double impact_normalization(const ShockSeries& shocks, const DailySeries& prob,
                            const std::vector<std::uint8_t>* observed, bool weighted,
                            double target_pp) {
    shocks.validate();
    if (shocks.calendar.get() != prob.calendar_ptr().get())
        throw ValueError("shock series and probability series use different calendars");
    LpSpec spec;
    spec.weighted = weighted;
    std::vector<Row> rows;
    for (std::size_t t = 0; t < shocks.size(); ++t) {
        if (!prob.has(t)) continue;
        if (observed && !(*observed)[t]) continue;
        const double w = weighted ? shocks.weight[static_cast<Eigen::Index>(t)] : 1.0;
        if (w <= 0.0) continue;
        rows.push_back({shocks.calendar->at(t), shocks.shock_pp[static_cast<Eigen::Index>(t)], w,
                        100.0 * prob.at(t), 0.0});
    }
    HorizonEstimate impact = estimate_simple(std::move(rows), 0, false, spec);
    if (impact.coef == 0.0) throw DegenerateShock("impact coefficient is exactly zero");
    return target_pp / impact.coef;
}

ImpulseResponse run_lp_daily(const ShockSeries& shocks, const DailySeries& y,
                             const LpSpec& spec) {
    shocks.validate();
    if (shocks.calendar.get() != y.calendar_ptr().get())
        throw ValueError("shock series and dependent series use different calendars");
    const auto n = shocks.size();
    const int m = spec.one_month_days;

    ImpulseResponse ir;
    ir.label = spec.label;
    ir.normalization_scale = spec.normalization_scale;
    for (int h = 0; h <= spec.max_horizon; ++h) {
        std::vector<Row> rows;
        for (std::size_t t = 1; t + static_cast<std::size_t>(h) < n; ++t) {
            if (!y.has(t - 1) || !y.has(t + static_cast<std::size_t>(h))) continue;
            double control = 0.0;
            if (spec.include_one_month_control) {
                if (t < static_cast<std::size_t>(m) + 1) continue;
                if (!y.has(t - 1 - static_cast<std::size_t>(m))) continue;
                control = y.at(t - 1) - y.at(t - 1 - static_cast<std::size_t>(m));
            }
            double w = spec.weighted ? shocks.weight[static_cast<Eigen::Index>(t)] : 1.0;
            const Date date = shocks.calendar->at(t);
            if (date_excluded(spec, date) || cycle_dropped(spec, shocks.cycle_id[t])) w = 0.0;
            if (w <= 0.0) continue;
            rows.push_back({date, shocks.shock_pp[static_cast<Eigen::Index>(t)], w,
                            y.at(t + static_cast<std::size_t>(h)) - y.at(t - 1), control});
        }
        ir.horizons.push_back(
            estimate_simple(std::move(rows), h, spec.include_one_month_control, spec));
    }
    confidence_bands(ir);
    return ir;
}

ImpulseResponse run_lp_prob(const ShockSeries& shocks, const DailySeries& prob,
                            const std::vector<std::uint8_t>* observed, LpSpec spec) {
    shocks.validate();
    if (shocks.calendar.get() != prob.calendar_ptr().get())
        throw ValueError("shock series and probability series use different calendars");
    const auto n = shocks.size();

    ImpulseResponse ir;
    ir.label = spec.label;
    std::vector<HorizonEstimate> raw;
    for (int h = 0; h <= spec.max_horizon; ++h) {
        std::vector<Row> rows;
        for (std::size_t t = 0; t + static_cast<std::size_t>(h) < n; ++t) {
            const std::size_t th = t + static_cast<std::size_t>(h);
            if (!prob.has(th)) continue;
            if (observed && !(*observed)[th]) continue;
            double w = spec.weighted ? shocks.weight[static_cast<Eigen::Index>(t)] : 1.0;
            const Date date = shocks.calendar->at(t);
            if (date_excluded(spec, date) || cycle_dropped(spec, shocks.cycle_id[t])) w = 0.0;
            if (w <= 0.0) continue;
            rows.push_back({date, shocks.shock_pp[static_cast<Eigen::Index>(t)], w,
                            100.0 * prob.at(th), 0.0});
        }
        LpSpec unscaled = spec;
        unscaled.normalization_scale = 1.0;
        raw.push_back(estimate_simple(std::move(rows), h, false, unscaled));
    }

    // the impact coefficient defines the normalization used everywhere
    if (raw.empty() || raw.front().coef == 0.0)
        throw DegenerateShock("impact coefficient is exactly zero");
    const double scale = 10.0 / raw.front().coef;
    ir.normalization_scale = scale;
    for (auto est : raw) {
        est.coef *= scale;
        est.se *= std::abs(scale);
        ir.horizons.push_back(est);
    }
    confidence_bands(ir);
    return ir;
}

ImpulseResponse run_lp_onestep(const DailySeries& prob, const NewsPanel& news,
                               const DailySeries& y, const CycleSet& cycles,
                               const ShockSeries& weights_source, const LpSpec& spec,
                               const DesignOptions& design_options) {
    if (prob.calendar_ptr().get() != y.calendar_ptr().get())
        throw ValueError("probability and dependent series use different calendars");
    if (spec.weighted && !weights_source.calendar)
        throw ValueError("weighted one-step estimation needs a weight-bearing shock series");
    ElectionDesign design = build_election_design(prob, news, cycles, design_options);

    // stack the contemporaneous probability next to its own equation's
    // regressors; its coefficient is the object of interest
    DesignMatrix stack = design.X;
    stack.labels.push_back("pi_l0");
    stack.values.conservativeResize(Eigen::NoChange, stack.cols() + 1);
    stack.values.col(stack.cols() - 1) = design.response;

    const TradingCalendar& cal = *prob.calendar_ptr();
    const int m = spec.one_month_days;

    ImpulseResponse ir;
    ir.label = spec.label;
    ir.normalization_scale = spec.normalization_scale;
    const Eigen::Index pi_col = stack.cols() - 1;
    const Eigen::Index k = stack.cols() + (spec.include_one_month_control ? 1 : 0);

    for (int h = 0; h <= spec.max_horizon; ++h) {
        std::vector<Eigen::Index> keep;
        std::vector<double> responses, controls, weights;
        for (Eigen::Index r = 0; r < stack.rows(); ++r) {
            const Date date = stack.dates[static_cast<std::size_t>(r)];
            const std::size_t t = *cal.index_of(date);
            if (t == 0 || t + static_cast<std::size_t>(h) >= cal.size()) continue;
            if (!y.has(t - 1) || !y.has(t + static_cast<std::size_t>(h))) continue;
            double control = 0.0;
            if (spec.include_one_month_control) {
                if (t < static_cast<std::size_t>(m) + 1) continue;
                if (!y.has(t - 1 - static_cast<std::size_t>(m))) continue;
                control = y.at(t - 1) - y.at(t - 1 - static_cast<std::size_t>(m));
            }
            double w = 1.0;
            if (spec.weighted) {
                auto wi = weights_source.calendar->index_of(date);
                w = wi ? weights_source.weight[static_cast<Eigen::Index>(*wi)] : 0.0;
            }
            if (date_excluded(spec, date) ||
                cycle_dropped(spec, design.cycle_ids[static_cast<std::size_t>(r)]))
                w = 0.0;
            if (w <= 0.0) continue;
            keep.push_back(r);
            responses.push_back(y.at(t + static_cast<std::size_t>(h)) - y.at(t - 1));
            controls.push_back(control);
            weights.push_back(w);
        }
        if (static_cast<Eigen::Index>(keep.size()) < 3 * k)
            throw InsufficientSample("one-step horizon " + std::to_string(h) + ": " +
                                     std::to_string(keep.size()) + " rows for " +
                                     std::to_string(k) + " parameters");

        DesignMatrix X;
        X.labels = stack.labels;
        if (spec.include_one_month_control) X.labels.push_back("d1m");
        X.values.resize(static_cast<Eigen::Index>(keep.size()), k);
        X.weights.resize(static_cast<Eigen::Index>(keep.size()));
        Eigen::VectorXd yv(static_cast<Eigen::Index>(keep.size()));
        for (std::size_t i = 0; i < keep.size(); ++i) {
            const auto r = static_cast<Eigen::Index>(i);
            X.values.row(r).head(stack.cols()) = stack.values.row(keep[i]);
            if (spec.include_one_month_control) X.values(r, k - 1) = controls[i];
            X.weights[r] = weights[i];
            X.dates.push_back(stack.dates[static_cast<std::size_t>(keep[i])]);
            yv[r] = responses[i];
        }

        FitResult fit = fit_wls(X, yv);
        const int bw = nw_bandwidth(fit.n_obs);
        HacCovariance cov = newey_west(fit, X, bw);

        HorizonEstimate est;
        est.horizon = h;
        // probability enters in [0,1]; report per percentage point
        est.coef = spec.normalization_scale * fit.coefficients[pi_col] / 100.0;
        est.se = spec.normalization_scale * cov.standard_error(pi_col) / 100.0;
        est.n_obs = fit.n_obs;
        est.bandwidth = bw;
        ir.horizons.push_back(est);
    }
    confidence_bands(ir);
    return ir;
}

ImpulseResponse run_lp_monthly(const MonthlySeries& shock_m, const MonthlySeries& y,
                               const MonthlyControls& controls, const LpSpec& spec) {
    const int lags = 12;
    const MonthlySeries d_cpi = controls.cpi.log_diff_1m();
    const MonthlySeries d_pce = controls.pce.log_diff_1m();
    const MonthlySeries d_ip = controls.industrial_production.log_diff_1m();
    const std::array<const MonthlySeries*, 5> comps = {&y, &controls.unemployment, &d_cpi,
                                                       &d_pce, &d_ip};
    const std::array<const char*, 5> comp_names = {"y", "unemp", "dcpi", "dpce", "dip"};

    auto month_excluded = [&](YearMonth m) {
        for (const auto& [a, b] : spec.exclude_outcome_months)
            if (a <= m && m <= b) return true;
        return false;
    };

    ImpulseResponse ir;
    ir.label = spec.label;
    ir.normalization_scale = spec.normalization_scale;
    for (int h = 0; h <= spec.max_horizon; ++h) {
        std::vector<YearMonth> months;
        std::vector<double> shocks_v, responses;
        std::vector<std::array<double, 5 * 12>> lagged;
        const YearMonth lo = spec.sample_first_month.value_or(y.first_month());
        const YearMonth hi = spec.sample_last_month.value_or(y.last_month());
        for (YearMonth t = lo; t <= hi; t = t + 1) {
            if (!shock_m.has(t)) continue;
            const YearMonth th = t + h;
            if (month_excluded(th)) continue;  // pandemic-style outcome windows
            if (!y.has(th) || !y.has(t - 1)) continue;
            bool complete = true;
            std::array<double, 5 * 12> row{};
            for (std::size_t c = 0; c < comps.size() && complete; ++c)
                for (int s = 1; s <= lags; ++s) {
                    if (!comps[c]->has(t - s)) {
                        complete = false;
                        break;
                    }
                    row[c * 12 + static_cast<std::size_t>(s - 1)] = comps[c]->at(t - s);
                }
            if (!complete) continue;
            months.push_back(t);
            shocks_v.push_back(shock_m.at(t));
            responses.push_back(y.at(th) - y.at(t - 1));
            lagged.push_back(row);
        }

        const Eigen::Index k = 2 + 5 * lags;
        if (static_cast<Eigen::Index>(months.size()) < 3 * k)
            throw InsufficientSample("monthly horizon " + std::to_string(h) + ": " +
                                     std::to_string(months.size()) + " rows for " +
                                     std::to_string(k) + " parameters");

        DesignMatrix X;
        X.labels = {"const", "shock"};
        for (std::size_t c = 0; c < comp_names.size(); ++c)
            for (int s = 1; s <= lags; ++s)
                X.labels.push_back(std::string("w_") + comp_names[c] + "_l" + std::to_string(s));
        X.values.resize(static_cast<Eigen::Index>(months.size()), k);
        X.weights = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(months.size()));
        Eigen::VectorXd yv(static_cast<Eigen::Index>(months.size()));
        for (std::size_t i = 0; i < months.size(); ++i) {
            const auto r = static_cast<Eigen::Index>(i);
            X.values(r, 0) = 1.0;
            X.values(r, 1) = shocks_v[i];
            for (std::size_t j = 0; j < 60; ++j)
                X.values(r, 2 + static_cast<Eigen::Index>(j)) = lagged[i][j];
            X.dates.push_back(months[i].first_day());
            yv[r] = responses[i];
        }

        double var = (X.values.col(1).array() - X.values.col(1).mean()).square().sum();
        if (var == 0.0)
            throw DegenerateShock("monthly horizon " + std::to_string(h) +
                                  ": shock has no variation");

        FitResult fit = fit_wls(X, yv);
        const int bw = nw_bandwidth(fit.n_obs);
        HacCovariance cov = newey_west(fit, X, bw);

        HorizonEstimate est;
        est.horizon = h;
        est.coef = spec.normalization_scale * fit.coefficient("shock");
        est.se = spec.normalization_scale * cov.standard_error(1);
        est.n_obs = fit.n_obs;
        est.bandwidth = bw;
        ir.horizons.push_back(est);
    }
    confidence_bands(ir);
    return ir;
}

const char* const kIrfCsvHeader = "spec,series,horizon,coef,se,lo68,hi68,lo90,hi90,nobs,bandwidth";

std::string irf_csv_rows(const ImpulseResponse& ir, const std::string& spec_tag,
                         const std::string& series) {
    std::string out;
    for (const auto& h : ir.horizons) {
        out += spec_tag + "," + series + "," + std::to_string(h.horizon) + "," +
               format_double(h.coef) + "," + format_double(h.se) + "," + format_double(h.lo68) +
               "," + format_double(h.hi68) + "," + format_double(h.lo90) + "," +
               format_double(h.hi90) + "," + std::to_string(h.n_obs) + "," +
               std::to_string(h.bandwidth) + "\n";
    }
    return out;
}

}  // namespace eshock
