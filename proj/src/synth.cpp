#include "eshock/synth.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include "eshock/csv.hpp"
#include "eshock/errors.hpp"

namespace eshock {

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 over the (seed, stream) pair
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

void DgpConfig::validate() const {
    if (n_cycles < 1) throw InvalidConfig("n_cycles must be positive");
    if (days_per_cycle < 30) throw InvalidConfig("days_per_cycle must be at least 30");
    if (gap_days < 25) throw InvalidConfig("gap_days must be at least 25");
    if (tail_days < 0) throw InvalidConfig("tail_days must be nonnegative");
    if (prob_ar.empty()) throw InvalidConfig("prob_ar must have at least one coefficient");
    double ar_sum = 0.0;
    for (double a : prob_ar) {
        if (!std::isfinite(a)) throw InvalidConfig("non-finite AR coefficient");
        ar_sum += std::abs(a);
    }
    if (ar_sum >= 1.0)
        throw InvalidConfig("prob_ar coefficients must sum below 1 in absolute value");
    for (double v : {shock_vol_pp, confound_vol_pp, yield_vol, sp500_vol, macro_monthly_vol,
                     asset_noise_vol, volume_level, volume_dispersion, monthly_noise_vol})
        if (!(v >= 0.0)) throw InvalidConfig("volatilities and volume parameters must be >= 0");
    if (prob_mean <= 0.0 || prob_mean >= 1.0) throw InvalidConfig("prob_mean must be in (0,1)");
    if (asset_loadings.empty()) throw InvalidConfig("need at least one asset loading");
    if (irf_kernel.empty() || monthly_kernel.empty()) throw InvalidConfig("kernels must be nonempty");
}

namespace {

std::vector<std::string> split_list(std::string_view text) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t comma = text.find(',', start);
        std::string_view piece =
            text.substr(start, comma == std::string_view::npos ? text.size() - start : comma - start);
        std::size_t a = piece.find_first_not_of(" \t");
        std::size_t b = piece.find_last_not_of(" \t");
        parts.emplace_back(a == std::string_view::npos ? "" : piece.substr(a, b - a + 1));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return parts;
}

double parse_num(const std::string& s, const std::string& key, const std::string& source) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw InvalidConfig(source + ": bad number '" + s + "' for key " + key);
    return v;
}

std::vector<double> parse_list(const std::string& s, const std::string& key,
                               const std::string& source) {
    std::vector<double> out;
    for (const auto& piece : split_list(s)) out.push_back(parse_num(piece, key, source));
    return out;
}

std::string join_list(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ",";
        out += format_double(values[i]);
    }
    return out;
}

}  // namespace

DgpConfig DgpConfig::from_text(std::string_view text, const std::string& source) {
    DgpConfig cfg;
    std::size_t pos = 0, line_no = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        std::size_t hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        std::size_t a = line.find_first_not_of(" \t");
        if (a == std::string_view::npos) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            throw InvalidConfig(source + ":" + std::to_string(line_no) + ": expected key = value");
        auto trim = [](std::string_view s) {
            std::size_t x = s.find_first_not_of(" \t");
            if (x == std::string_view::npos) return std::string();
            std::size_t y = s.find_last_not_of(" \t");
            return std::string(s.substr(x, y - x + 1));
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        if (key == "n_cycles") cfg.n_cycles = static_cast<int>(parse_num(value, key, source));
        else if (key == "days_per_cycle") cfg.days_per_cycle = static_cast<int>(parse_num(value, key, source));
        else if (key == "gap_days") cfg.gap_days = static_cast<int>(parse_num(value, key, source));
        else if (key == "tail_days") cfg.tail_days = static_cast<int>(parse_num(value, key, source));
        else if (key == "prob_ar") cfg.prob_ar = parse_list(value, key, source);
        else if (key == "prob_mean") cfg.prob_mean = parse_num(value, key, source);
        else if (key == "shock_vol_pp") cfg.shock_vol_pp = parse_num(value, key, source);
        else if (key == "confound_vol_pp") cfg.confound_vol_pp = parse_num(value, key, source);
        else if (key == "news_loading") cfg.news_loading = parse_num(value, key, source);
        else if (key == "yield_vol") cfg.yield_vol = parse_num(value, key, source);
        else if (key == "sp500_vol") cfg.sp500_vol = parse_num(value, key, source);
        else if (key == "macro_monthly_vol") cfg.macro_monthly_vol = parse_num(value, key, source);
        else if (key == "irf_kernel") cfg.irf_kernel = parse_list(value, key, source);
        else if (key == "asset_loadings") cfg.asset_loadings = parse_list(value, key, source);
        else if (key == "asset_noise_vol") cfg.asset_noise_vol = parse_num(value, key, source);
        else if (key == "confound_return_loading") cfg.confound_return_loading = parse_num(value, key, source);
        else if (key == "volume_level") cfg.volume_level = parse_num(value, key, source);
        else if (key == "volume_dispersion") cfg.volume_dispersion = parse_num(value, key, source);
        else if (key == "monthly_kernel") cfg.monthly_kernel = parse_list(value, key, source);
        else if (key == "monthly_noise_vol") cfg.monthly_noise_vol = parse_num(value, key, source);
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_num(value, key, source));
        else throw InvalidConfig(source + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

DgpConfig DgpConfig::from_file(const std::string& path) {
    return from_text(read_text_file(path), path);
}

std::string DgpConfig::to_text() const {
    std::ostringstream out;
    out << "n_cycles = " << n_cycles << "\n";
    out << "days_per_cycle = " << days_per_cycle << "\n";
    out << "gap_days = " << gap_days << "\n";
    out << "tail_days = " << tail_days << "\n";
    out << "prob_ar = " << join_list(prob_ar) << "\n";
    out << "prob_mean = " << format_double(prob_mean) << "\n";
    out << "shock_vol_pp = " << format_double(shock_vol_pp) << "\n";
    out << "confound_vol_pp = " << format_double(confound_vol_pp) << "\n";
    out << "news_loading = " << format_double(news_loading) << "\n";
    out << "yield_vol = " << format_double(yield_vol) << "\n";
    out << "sp500_vol = " << format_double(sp500_vol) << "\n";
    out << "macro_monthly_vol = " << format_double(macro_monthly_vol) << "\n";
    out << "irf_kernel = " << join_list(irf_kernel) << "\n";
    out << "asset_loadings = " << join_list(asset_loadings) << "\n";
    out << "asset_noise_vol = " << format_double(asset_noise_vol) << "\n";
    out << "confound_return_loading = " << format_double(confound_return_loading) << "\n";
    out << "volume_level = " << format_double(volume_level) << "\n";
    out << "volume_dispersion = " << format_double(volume_dispersion) << "\n";
    out << "monthly_kernel = " << join_list(monthly_kernel) << "\n";
    out << "monthly_noise_vol = " << format_double(monthly_noise_vol) << "\n";
    out << "seed = " << seed << "\n";
    return out.str();
}

// ---------------------------------------------------------------------------

SimulatedData simulate_dgp(const DgpConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    SimulatedData sim;

    // Calendar: weekday dates, cycles separated by gaps, plus a tail so
    // long-horizon differences stay on the calendar.
    const int block = cfg.gap_days + cfg.days_per_cycle;
    const int n_days = cfg.n_cycles * block + cfg.tail_days;
    {
        std::vector<Date> dates;
        dates.reserve(static_cast<std::size_t>(n_days));
        Date d = Date::from_ymd(2001, 1, 1);
        while (static_cast<int>(dates.size()) < n_days) {
            if (!d.is_weekend()) dates.push_back(d);
            ++d;
        }
        sim.calendar = std::make_shared<TradingCalendar>(std::move(dates));
    }
    const auto& cal = *sim.calendar;

    std::vector<ElectionCycle> windows;
    for (int c = 0; c < cfg.n_cycles; ++c) {
        const std::size_t first = static_cast<std::size_t>(c * block + cfg.gap_days);
        const std::size_t last = first + static_cast<std::size_t>(cfg.days_per_cycle) - 1;
        ElectionCycle cycle;
        cycle.cycle_id = 2000 + 4 * c;
        cycle.first_date = cal.at(first);
        cycle.last_date = cal.at(last);
        cycle.election_date = cal.at(last);
        cycle.incumbent = c % 2 == 0 ? Party::Democrat : Party::Republican;
        windows.push_back(cycle);
    }
    CycleSet window_set(windows);

    // Financial news levels.
    sim.yield_level = DailySeries(sim.calendar, SeriesUnit::Other);
    sim.sp500_level = DailySeries(sim.calendar, SeriesUnit::Other);
    double yl = 100.0, sl = 1000.0;
    for (std::size_t i = 0; i < cal.size(); ++i) {
        yl *= 1.0 + cfg.yield_vol / 100.0 * normal(rng);
        sl *= 1.0 + cfg.sp500_vol / 100.0 * normal(rng);
        sim.yield_level.set(i, yl);
        sim.sp500_level.set(i, sl);
    }

    // Macro levels by month, vintages, and a release schedule: employment on
    // the 1st business day of the month, CPI on the 7th, industrial
    // production on the 11th, each revealing the previous month, with a
    // revision published alongside the next month's initial release.
    const YearMonth first_month = YearMonth::of(cal.front()) - 2;
    const YearMonth last_month = YearMonth::of(cal.back());
    const int n_months = last_month - first_month + 1;
    std::map<std::string, std::vector<double>> macro_levels;
    for (const char* s : {"emp", "cpi", "ind", "pce", "unemp"}) {
        std::vector<double> levels(static_cast<std::size_t>(n_months));
        double level = s == std::string("unemp") ? 5.0 : 100.0;
        for (int m = 0; m < n_months; ++m) {
            if (s == std::string("unemp"))
                level = 5.0 + 0.9 * (level - 5.0) + 0.15 * normal(rng);
            else
                level *= 1.0 + cfg.macro_monthly_vol / 100.0 * normal(rng);
            levels[static_cast<std::size_t>(m)] = level;
        }
        macro_levels[s] = std::move(levels);
    }
    auto level_of = [&](const std::string& s, YearMonth m) {
        return macro_levels.at(s)[static_cast<std::size_t>(m - first_month)];
    };

    struct PendingRelease { std::string series; int business_day; };
    const std::vector<PendingRelease> schedule = {{"emp", 1}, {"cpi", 7}, {"ind", 11}};
    // seed vintages for months released before the calendar starts; the
    // first in-span release publishes the month right before the calendar,
    // so seeding stops one month earlier
    for (const auto& [series, _] : schedule)
        for (YearMonth m = first_month; m < YearMonth::of(cal.front()) - 1; m = m + 1)
            sim.vintages.add(series, m, (m + 1).first_day(), level_of(series, m));

    {
        YearMonth current = YearMonth::of(cal.front());
        int business_day = 0;
        for (std::size_t i = 0; i < cal.size(); ++i) {
            const Date d = cal.at(i);
            if (YearMonth::of(d) != current) {
                current = YearMonth::of(d);
                business_day = 0;
            }
            ++business_day;
            for (const auto& [series, day] : schedule) {
                if (business_day != day) continue;
                const YearMonth period = current - 1;
                sim.releases.add(series, d, period);
                sim.vintages.add(series, period, d, level_of(series, period));
                // revision of the period released a month earlier
                const YearMonth revised = period - 1;
                if (sim.vintages.value_as_of(series, revised, d)) {
                    const double noise = 1.0 + cfg.macro_monthly_vol / 300.0 * normal(rng);
                    sim.vintages.add(series, revised, d, level_of(series, revised) * noise);
                }
            }
        }
        sim.releases.finalize();
    }
    // single-vintage monthly controls
    for (const char* s : {"pce", "unemp"}) {
        for (YearMonth m = first_month; m <= last_month - 1; m = m + 1)
            sim.vintages.add(s, m, (m + 1).first_day() + 14, level_of(s, m));
    }

    sim.news = build_news_panel(sim.calendar, sim.yield_level, sim.sp500_level, sim.vintages,
                                sim.releases, window_set);

    // Probability paths per cycle: the estimated equation's own structure
    // with injected residuals and an optional latent confound that the news
    // set does not span.
    sim.prob = DailySeries(sim.calendar, SeriesUnit::Probability);
    sim.observed.assign(cal.size(), 0);
    sim.volume = DailySeries(sim.calendar, SeriesUnit::Count);
    sim.true_shock_pp = DailySeries(sim.calendar, SeriesUnit::PercentagePoints);
    sim.true_confound_pp = DailySeries(sim.calendar, SeriesUnit::PercentagePoints);
    for (std::size_t i = 0; i < cal.size(); ++i) {
        sim.volume.set(i, 0.0);
        sim.true_shock_pp.set(i, 0.0);
        sim.true_confound_pp.set(i, 0.0);
    }

    const std::size_t n_ar = cfg.prob_ar.size();
    double ar_sum = 0.0;
    for (double a : cfg.prob_ar) ar_sum += a;
    const double intercept = cfg.prob_mean * (1.0 - ar_sum);
    // fixed loading pattern scaled by news_loading; units keep contributions
    // at the scale of daily probability moves
    const std::array<double, 5> news_betas = {-5e-4, 1e-3, 4e-3, -3e-3, 2e-3};

    std::vector<std::optional<Party>> winners(windows.size());
    for (std::size_t c = 0; c < windows.size(); ++c) {
        const std::size_t first = *cal.index_of(windows[c].first_date);
        const std::size_t last = *cal.index_of(windows[c].last_date);
        std::deque<double> lags(n_ar, cfg.prob_mean);
        double pi = cfg.prob_mean;
        for (std::size_t i = first; i <= last; ++i) {
            const double eps = cfg.shock_vol_pp / 100.0 * normal(rng);
            // drawn unconditionally so worlds with different confound
            // volatilities share the same shock sequence
            const double conf = cfg.confound_vol_pp / 100.0 * normal(rng);
            double value = intercept;
            for (std::size_t s = 0; s < n_ar; ++s) value += cfg.prob_ar[s] * lags[s];
            for (std::size_t k = 0; k < NewsPanel::kComponents; ++k) {
                const auto& comp = sim.news.component(k);
                if (comp.has(i)) value += cfg.news_loading * news_betas[k] * comp.at(i);
            }
            value += conf + eps;
            if (value < 0.001 || value > 0.999) {
                value = std::clamp(value, 0.001, 0.999);
                ++sim.clamped_days;
            }
            pi = value;
            lags.push_front(pi);
            lags.pop_back();

            sim.prob.set(i, pi);
            sim.observed[i] = 1;
            sim.true_shock_pp.set(i, 100.0 * eps);
            sim.true_confound_pp.set(i, 100.0 * conf);
            const double z = normal(rng);
            const double vol = cfg.volume_level *
                               std::exp(cfg.volume_dispersion * z -
                                        0.5 * cfg.volume_dispersion * cfg.volume_dispersion);
            sim.volume.set(i, std::max(1.0, std::round(vol)));
        }
        winners[c] = pi >= 0.5 ? Party::Republican : Party::Democrat;
    }
    for (std::size_t c = 0; c < windows.size(); ++c) windows[c].winner = winners[c];
    sim.cycles = CycleSet(windows);

    // Log asset prices: returns are the kernel convolution of the injected
    // shocks (per loading) plus the latent confound and idiosyncratic noise.
    for (std::size_t a = 0; a < cfg.asset_loadings.size(); ++a) {
        const double loading = cfg.asset_loadings[a];
        DailySeries series(sim.calendar, SeriesUnit::LogPrice);
        double level = std::log(100.0);
        for (std::size_t i = 0; i < cal.size(); ++i) {
            double ret = cfg.asset_noise_vol * normal(rng);
            for (std::size_t s = 0; s < cfg.irf_kernel.size() && s <= i; ++s)
                ret += loading * cfg.irf_kernel[s] * sim.true_shock_pp.at(i - s);
            ret += loading * cfg.confound_return_loading * sim.true_confound_pp.at(i);
            level += ret;
            series.set(i, level);
        }
        sim.assets.emplace("sector_" + std::to_string(a), std::move(series));
    }

    // A few narrative event dates per cycle, spaced through the window.
    for (const auto& cycle : sim.cycles.cycles()) {
        const std::size_t first = *cal.index_of(cycle.first_date);
        const std::size_t last = *cal.index_of(cycle.last_date);
        int k = 0;
        for (std::size_t offset = 30; first + offset + 10 <= last && k < 3; offset += 60, ++k)
            sim.events.push_back({cal.at(first + offset),
                                  "event_" + std::to_string(cycle.cycle_id) + "_" +
                                      std::to_string(k),
                                  "synthetic narrative event"});
    }

    // Monthly block: log employment responds to the monthly shock sums
    // through its own kernel; controls are irrelevant by construction.
    {
        ShockSeries true_shocks;
        true_shocks.calendar = sim.calendar;
        true_shocks.shock_pp = sim.true_shock_pp.values();
        true_shocks.weight = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cal.size()));
        true_shocks.cycle_id = sim.cycles.mask(cal);
        sim.true_monthly_shock_pp = monthly_aggregate(true_shocks);

        const YearMonth m0 = sim.true_monthly_shock_pp.first_month();
        const int nm = static_cast<int>(sim.true_monthly_shock_pp.size());
        Eigen::VectorXd emp(nm);
        double level = std::log(1000.0);
        for (int m = 0; m < nm; ++m) {
            double d = cfg.monthly_noise_vol * normal(rng);
            for (std::size_t s = 0; s < cfg.monthly_kernel.size() && static_cast<int>(s) <= m; ++s)
                d += cfg.monthly_kernel[s] *
                     sim.true_monthly_shock_pp.at(m0 + (m - static_cast<int>(s)));
            level += d;
            emp[m] = level;
        }
        sim.employment_log = MonthlySeries(m0, std::move(emp), SeriesUnit::LogPrice);

        auto monthly_from = [&](const char* s) {
            std::vector<std::pair<YearMonth, double>> obs;
            for (YearMonth m = m0; m <= last_month - 1; m = m + 1)
                obs.emplace_back(m, level_of(s, m));
            return MonthlySeries::from_observations(obs);
        };
        sim.monthly_controls.unemployment = monthly_from("unemp");
        sim.monthly_controls.cpi = monthly_from("cpi");
        sim.monthly_controls.pce = monthly_from("pce");
        sim.monthly_controls.industrial_production = monthly_from("ind");
    }

    return sim;
}

std::vector<double> true_irf(const DgpConfig& cfg, int max_horizon) {
    std::vector<double> out(static_cast<std::size_t>(max_horizon) + 1);
    double cum = 0.0;
    for (int h = 0; h <= max_horizon; ++h) {
        if (h < static_cast<int>(cfg.irf_kernel.size()))
            cum += cfg.irf_kernel[static_cast<std::size_t>(h)];
        out[static_cast<std::size_t>(h)] = 10.0 * cum;
    }
    return out;
}

std::vector<double> true_monthly_irf(const DgpConfig& cfg, int max_horizon) {
    std::vector<double> out(static_cast<std::size_t>(max_horizon) + 1);
    double cum = 0.0;
    for (int h = 0; h <= max_horizon; ++h) {
        if (h < static_cast<int>(cfg.monthly_kernel.size()))
            cum += cfg.monthly_kernel[static_cast<std::size_t>(h)];
        out[static_cast<std::size_t>(h)] = 10.0 * cum;
    }
    return out;
}

Eigen::MatrixXd oracle_hac(const Eigen::VectorXd& residuals, const Eigen::MatrixXd& X,
                           const Eigen::VectorXd& weights, int lag_truncation) {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        if (weights[i] > 0.0) rows.push_back(i);
    const auto n = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index k = X.cols();

    Eigen::MatrixXd G(n, k);
    Eigen::MatrixXd XtWX = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index t = 0; t < n; ++t) {
        const Eigen::Index i = rows[static_cast<std::size_t>(t)];
        G.row(t) = weights[i] * residuals[i] * X.row(i);
        XtWX += weights[i] * X.row(i).transpose() * X.row(i);
    }
    const Eigen::MatrixXd bread = XtWX.inverse();

    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index t = 0; t < n; ++t) {
        for (Eigen::Index s = 0; s < n; ++s) {
            const auto gap = static_cast<int>(std::abs(static_cast<long long>(t - s)));
            if (gap > lag_truncation) continue;
            const double w = 1.0 - static_cast<double>(gap) / (lag_truncation + 1.0);
            meat += w * (G.row(t).transpose() * G.row(s));
        }
    }
    return bread * meat * bread;
}

IdentificationRun run_identification(const SimulatedData& sim) {
    DesignOptions options;
    options.observed = &sim.observed;
    ElectionDesign design = build_election_design(sim.prob, sim.news, sim.cycles, options);
    FitResult fit = fit_wls(design.X, design.response);

    IdentificationRun run;
    run.extracted = extract_shocks(fit, sim.volume, sim.cycles, sim.calendar);
    run.fit_dates = fit.dates;
    run.n_obs = fit.n_obs;
    run.first_stage_r2 = fit.r_squared;

    const auto n = static_cast<Eigen::Index>(fit.dates.size());
    run.extracted_on_fit_dates.resize(n);
    run.injected_on_fit_dates.resize(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const std::size_t i = *sim.calendar->index_of(fit.dates[static_cast<std::size_t>(r)]);
        run.extracted_on_fit_dates[r] = run.extracted.shock_pp[static_cast<Eigen::Index>(i)];
        run.injected_on_fit_dates[r] = sim.true_shock_pp.at(i);
    }
    const Eigen::VectorXd a =
        run.extracted_on_fit_dates.array() - run.extracted_on_fit_dates.mean();
    const Eigen::VectorXd b = run.injected_on_fit_dates.array() - run.injected_on_fit_dates.mean();
    const double denom = a.norm() * b.norm();
    run.correlation = denom > 0.0 ? a.dot(b) / denom : 0.0;
    return run;
}

namespace {

/// Runs fn(rep) for rep in [0, n_reps) across threads; assignment by index
/// keeps results independent of scheduling.
void parallel_reps(int n_reps, int n_threads, const std::function<void(int)>& fn) {
    if (n_threads <= 0) {
        n_threads = static_cast<int>(std::thread::hardware_concurrency());
        if (n_threads <= 0) n_threads = 1;
        n_threads = std::min(n_threads, 8);
    }
    n_threads = std::min(n_threads, std::max(1, n_reps));
    if (n_threads == 1) {
        for (int r = 0; r < n_reps; ++r) fn(r);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int tid = 0; tid < n_threads; ++tid) {
        pool.emplace_back([&, tid] {
            try {
                for (int r = tid; r < n_reps; r += n_threads) fn(r);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

ImpulseResponse estimate_first_asset_irf(const SimulatedData& sim, int max_horizon) {
    IdentificationRun ident = run_identification(sim);
    LpSpec spec;
    spec.max_horizon = max_horizon;
    spec.weighted = true;
    spec.normalization_scale =
        impact_normalization(ident.extracted, sim.prob, &sim.observed, true);
    return run_lp_daily(ident.extracted, sim.assets.begin()->second, spec);
}

}  // namespace

CoverageResult coverage_experiment(const DgpConfig& cfg, int n_reps, double level,
                                   int max_horizon, int n_threads) {
    if (n_reps < 1) throw InvalidConfig("coverage experiment needs at least one replication");
    if (!(level > 0.0 && level < 1.0)) throw InvalidConfig("level must be in (0,1)");
    cfg.validate();

    const std::vector<double> truth = true_irf(cfg, max_horizon);
    const double loading = cfg.asset_loadings.front();
    const double z = normal_quantile(0.5 + level / 2.0);

    std::vector<std::vector<std::uint8_t>> covered(
        static_cast<std::size_t>(n_reps),
        std::vector<std::uint8_t>(static_cast<std::size_t>(max_horizon) + 1, 0));

    parallel_reps(n_reps, n_threads, [&](int rep) {
        DgpConfig rep_cfg = cfg;
        rep_cfg.seed = substream_seed(cfg.seed, static_cast<std::uint64_t>(rep));
        const SimulatedData sim = simulate_dgp(rep_cfg);
        const ImpulseResponse ir = estimate_first_asset_irf(sim, max_horizon);
        for (int h = 0; h <= max_horizon; ++h) {
            const auto& est = ir.horizons[static_cast<std::size_t>(h)];
            const double target = loading * truth[static_cast<std::size_t>(h)];
            covered[static_cast<std::size_t>(rep)][static_cast<std::size_t>(h)] =
                std::abs(est.coef - target) <= z * est.se ? 1 : 0;
        }
    });

    CoverageResult out;
    out.n_reps = n_reps;
    out.coverage.resize(static_cast<std::size_t>(max_horizon) + 1);
    out.mc_se.resize(static_cast<std::size_t>(max_horizon) + 1);
    for (int h = 0; h <= max_horizon; ++h) {
        double hits = 0.0;
        for (int r = 0; r < n_reps; ++r) hits += covered[static_cast<std::size_t>(r)][static_cast<std::size_t>(h)];
        const double p = hits / n_reps;
        out.coverage[static_cast<std::size_t>(h)] = p;
        out.mc_se[static_cast<std::size_t>(h)] = std::sqrt(p * (1.0 - p) / n_reps);
    }
    return out;
}

MeanIrfResult mean_irf_experiment(const DgpConfig& cfg, int n_reps, int max_horizon,
                                  int n_threads) {
    if (n_reps < 2) throw InvalidConfig("mean experiment needs at least two replications");
    cfg.validate();

    std::vector<std::vector<double>> coefs(
        static_cast<std::size_t>(n_reps),
        std::vector<double>(static_cast<std::size_t>(max_horizon) + 1, 0.0));

    parallel_reps(n_reps, n_threads, [&](int rep) {
        DgpConfig rep_cfg = cfg;
        rep_cfg.seed = substream_seed(cfg.seed, static_cast<std::uint64_t>(rep));
        const SimulatedData sim = simulate_dgp(rep_cfg);
        const ImpulseResponse ir = estimate_first_asset_irf(sim, max_horizon);
        for (int h = 0; h <= max_horizon; ++h)
            coefs[static_cast<std::size_t>(rep)][static_cast<std::size_t>(h)] =
                ir.horizons[static_cast<std::size_t>(h)].coef;
    });

    MeanIrfResult out;
    out.n_reps = n_reps;
    out.mean_coef.resize(static_cast<std::size_t>(max_horizon) + 1);
    out.mc_se.resize(static_cast<std::size_t>(max_horizon) + 1);
    for (int h = 0; h <= max_horizon; ++h) {
        double mean = 0.0;
        for (int r = 0; r < n_reps; ++r) mean += coefs[static_cast<std::size_t>(r)][static_cast<std::size_t>(h)];
        mean /= n_reps;
        double var = 0.0;
        for (int r = 0; r < n_reps; ++r) {
            const double d = coefs[static_cast<std::size_t>(r)][static_cast<std::size_t>(h)] - mean;
            var += d * d;
        }
        var /= (n_reps - 1);
        out.mean_coef[static_cast<std::size_t>(h)] = mean;
        out.mc_se[static_cast<std::size_t>(h)] = std::sqrt(var / n_reps);
    }
    return out;
}

}  // namespace eshock
