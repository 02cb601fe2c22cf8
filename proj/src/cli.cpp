#include "eshock/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iomanip>
#include <json.hpp>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "eshock/errors.hpp"
#include "eshock/svg.hpp"

namespace eshock {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string output_header(const RunConfig& config, const std::string& command) {
    std::ostringstream out;
    out << "# eshock " << kVersion << " cmd=" << command << " config=" << std::hex
        << std::setw(16) << std::setfill('0') << config.config_hash << "\n";
    return out.str();
}

namespace {

void require_known_keys(const json& j, const std::set<std::string>& allowed,
                        const std::string& context) {
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key))
            throw InvalidConfig(context + ": unknown key '" + key + "'");
}

Date json_date(const json& j, const std::string& key, const std::string& context) {
    auto d = Date::parse(j.at(key).get<std::string>());
    if (!d) throw InvalidConfig(context + ": bad date in '" + key + "'");
    return *d;
}

YearMonth json_month(const json& j, const std::string& context) {
    auto m = YearMonth::parse(j.get<std::string>());
    if (!m) throw InvalidConfig(context + ": bad month '" + j.get<std::string>() + "'");
    return *m;
}

std::string resolve(const fs::path& base, const std::string& path) {
    if (path.empty()) return path;
    fs::path p(path);
    return p.is_absolute() ? p.string() : (base / p).string();
}

}  // namespace

RunConfig RunConfig::from_json_file(const std::string& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const Error& e) {
        throw InvalidConfig(e.what());
    }
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw InvalidConfig(path + ": " + e.what());
    }
    if (!j.is_object()) throw InvalidConfig(path + ": config must be a JSON object");

    RunConfig cfg;
    cfg.config_hash = fnv1a64(text);
    const fs::path base = fs::path(path).parent_path();

    require_known_keys(
        j, {"meta", "data", "cycles", "shocks", "lp", "monthly", "out_dir", "seed"}, path);

    if (j.contains("data")) {
        const json& d = j["data"];
        require_known_keys(d,
                           {"market_csv", "asset_csv", "vintage_csv", "release_csv",
                            "events_csv", "employment_csv", "dgp_config", "sp500_series",
                            "yield_series", "employment_series", "cpi_series", "ind_series",
                            "unemployment_series", "pce_series"},
                           "data");
        cfg.market_csv = resolve(base, d.value("market_csv", ""));
        cfg.asset_csv = resolve(base, d.value("asset_csv", ""));
        cfg.vintage_csv = resolve(base, d.value("vintage_csv", ""));
        cfg.release_csv = resolve(base, d.value("release_csv", ""));
        cfg.events_csv = resolve(base, d.value("events_csv", ""));
        cfg.employment_csv = resolve(base, d.value("employment_csv", ""));
        cfg.dgp_config = resolve(base, d.value("dgp_config", ""));
        cfg.sp500_series = d.value("sp500_series", cfg.sp500_series);
        cfg.yield_series = d.value("yield_series", cfg.yield_series);
        cfg.macro_ids.employment = d.value("employment_series", cfg.macro_ids.employment);
        cfg.macro_ids.cpi = d.value("cpi_series", cfg.macro_ids.cpi);
        cfg.macro_ids.industrial_production = d.value("ind_series", cfg.macro_ids.industrial_production);
        cfg.unemployment_series = d.value("unemployment_series", cfg.unemployment_series);
        cfg.pce_series = d.value("pce_series", cfg.pce_series);
    }

    if (j.contains("cycles")) {
        for (const json& c : j["cycles"]) {
            require_known_keys(c, {"id", "first", "last", "election", "winner", "incumbent"},
                               "cycles");
            Cycle cycle;
            cycle.id = c.at("id").get<int>();
            cycle.first = json_date(c, "first", "cycles");
            cycle.last = json_date(c, "last", "cycles");
            cycle.election = json_date(c, "election", "cycles");
            if (c.contains("winner") && !c["winner"].is_null()) {
                auto p = parse_party(c["winner"].get<std::string>());
                if (!p) throw InvalidConfig("cycles: bad winner");
                cycle.winner = p;
            }
            auto inc = parse_party(c.at("incumbent").get<std::string>());
            if (!inc) throw InvalidConfig("cycles: bad incumbent");
            cycle.incumbent = *inc;
            cfg.cycles.push_back(cycle);
        }
    }

    if (j.contains("shocks")) {
        const json& s = j["shocks"];
        require_known_keys(s,
                           {"weighted_first_stage", "release_day_indicators",
                            "resolve_outcomes", "weight_rule", "drop_cycles"},
                           "shocks");
        cfg.weighted_first_stage = s.value("weighted_first_stage", cfg.weighted_first_stage);
        cfg.release_day_indicators = s.value("release_day_indicators", cfg.release_day_indicators);
        cfg.resolve_outcomes = s.value("resolve_outcomes", cfg.resolve_outcomes);
        const std::string rule = s.value("weight_rule", std::string("sum"));
        if (rule == "sum") cfg.weight_rule = WeightRule::SumBothContracts;
        else if (rule == "rep") cfg.weight_rule = WeightRule::RepublicanOnly;
        else if (rule == "dem") cfg.weight_rule = WeightRule::DemocraticOnly;
        else throw InvalidConfig("shocks: weight_rule must be sum, rep, or dem");
        if (s.contains("drop_cycles"))
            cfg.drop_cycles = s["drop_cycles"].get<std::vector<int>>();
    }

    if (j.contains("lp")) {
        const json& l = j["lp"];
        require_known_keys(l,
                           {"variant", "horizons", "narrative_window", "weighted",
                            "one_month_days", "series", "exclusions"},
                           "lp");
        cfg.variant = l.value("variant", cfg.variant);
        if (cfg.variant != "baseline" && cfg.variant != "narrative" && cfg.variant != "crude" &&
            cfg.variant != "one-step")
            throw InvalidConfig("lp: variant must be baseline, narrative, crude, or one-step");
        cfg.horizons = l.value("horizons", cfg.horizons);
        cfg.narrative_window = l.value("narrative_window", cfg.narrative_window);
        if (l.contains("weighted")) cfg.lp_weighted = l["weighted"].get<bool>();
        cfg.one_month_days = l.value("one_month_days", cfg.one_month_days);
        if (l.contains("series")) cfg.series = l["series"].get<std::vector<std::string>>();
        if (l.contains("exclusions")) {
            for (const json& e : l["exclusions"]) {
                require_known_keys(e, {"series", "from", "to"}, "exclusions");
                Exclusion x;
                x.series = e.value("series", "");
                x.from = json_date(e, "from", "exclusions");
                x.to = json_date(e, "to", "exclusions");
                cfg.exclusions.push_back(x);
            }
        }
    }

    if (j.contains("monthly")) {
        const json& m = j["monthly"];
        require_known_keys(m,
                           {"industries", "horizons", "sample_first", "sample_last",
                            "exclude_outcome_months"},
                           "monthly");
        if (m.contains("industries"))
            cfg.industries = m["industries"].get<std::vector<std::string>>();
        cfg.monthly_horizons = m.value("horizons", cfg.monthly_horizons);
        if (m.contains("sample_first")) cfg.sample_first_month = json_month(m["sample_first"], "monthly");
        if (m.contains("sample_last")) cfg.sample_last_month = json_month(m["sample_last"], "monthly");
        if (m.contains("exclude_outcome_months")) {
            for (const json& e : m["exclude_outcome_months"]) {
                require_known_keys(e, {"from", "to"}, "exclude_outcome_months");
                cfg.exclude_outcome_months.emplace_back(json_month(e.at("from"), "monthly"),
                                                        json_month(e.at("to"), "monthly"));
            }
        }
    }

    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    return cfg;
}

// ---------------------------------------------------------------------------
// shared pipeline assembly

namespace {

struct LoadedData {
    AssetTable assets;
    CalendarPtr full_cal;
    CycleSet cycles;
    CalendarPtr market_cal;
    CalendarIntersection audit;
    MarketDaily market;
    VintageStore vintages;
    ReleaseCalendar releases;
    NewsPanel news;
    DailySeries prob_full;
    std::vector<std::uint8_t> observed_full;
    NarrativeEventList events;
};

CycleSet cycles_from_config(const RunConfig& cfg) {
    std::vector<ElectionCycle> cycles;
    for (const auto& c : cfg.cycles)
        cycles.push_back({c.id, c.first, c.last, c.election, c.winner, c.incumbent});
    if (cycles.empty()) throw InvalidConfig("no election cycles configured");
    return CycleSet(cycles);
}

LoadedData load_data(const RunConfig& cfg) {
    for (const auto& [label, path] :
         {std::pair<const char*, const std::string&>{"market_csv", cfg.market_csv},
          {"asset_csv", cfg.asset_csv},
          {"vintage_csv", cfg.vintage_csv},
          {"release_csv", cfg.release_csv}}) {
        if (path.empty()) throw InvalidConfig(std::string("data.") + label + " is required");
        if (!fs::exists(path)) throw InvalidConfig(std::string(label) + ": no such file: " + path);
    }

    LoadedData data;
    data.cycles = cycles_from_config(cfg);
    data.assets = parse_asset_file(cfg.asset_csv);
    data.full_cal = asset_union_calendar(data.assets);
    data.vintages = parse_vintage_file(cfg.vintage_csv);
    data.releases = parse_release_file(cfg.release_csv);

    auto quotes = parse_market_file(cfg.market_csv);
    std::vector<Date> market_dates;
    for (const auto& q : quotes) market_dates.push_back(q.date);
    data.audit = intersect_dates(market_dates, data.full_cal->dates());
    data.market_cal = data.audit.calendar;
    if (data.market_cal->empty())
        throw InvalidConfig("market and asset files share no dates");

    MarketDailyOptions options;
    options.weight_rule = cfg.weight_rule;
    options.resolve_outcomes = cfg.resolve_outcomes;
    data.market = build_market_daily(quotes, data.market_cal, data.cycles, options);

    for (const auto& name : {cfg.sp500_series, cfg.yield_series})
        if (!data.assets.count(name))
            throw InvalidConfig("asset series '" + name + "' missing from " + cfg.asset_csv);
    const DailySeries sp500 =
        to_daily_series(data.assets.at(cfg.sp500_series), data.full_cal, SeriesUnit::Other);
    const DailySeries yields =
        to_daily_series(data.assets.at(cfg.yield_series), data.full_cal, SeriesUnit::Other);

    NewsPanelOptions panel_options;
    panel_options.ids = cfg.macro_ids;
    panel_options.release_day_indicators = cfg.release_day_indicators;
    data.news = build_news_panel(data.market_cal, yields, sp500, data.vintages, data.releases,
                                 data.cycles, panel_options);

    data.prob_full = align_to_calendar(data.market.prob_rep, data.full_cal);
    data.observed_full.assign(data.full_cal->size(), 0);
    for (std::size_t i = 0; i < data.market_cal->size(); ++i) {
        if (!data.market.observed[i]) continue;
        auto j = data.full_cal->index_of(data.market_cal->at(i));
        if (j) data.observed_full[*j] = 1;
    }

    // After a completed election the win probability is the realized
    // outcome; carrying it until the next cycle opens lets the persistence
    // regressions see the resolved state, which is where the mechanical
    // post-election persistence comes from.
    const auto& ordered = data.cycles.cycles();
    for (std::size_t c = 0; c < ordered.size(); ++c) {
        if (!ordered[c].winner) continue;
        const double outcome = *ordered[c].winner == Party::Republican ? 1.0 : 0.0;
        auto start = data.full_cal->index_on_or_after(ordered[c].election_date + 1);
        if (!start) continue;
        for (std::size_t i = *start; i < data.full_cal->size(); ++i) {
            const Date d = data.full_cal->at(i);
            if (c + 1 < ordered.size() && d >= ordered[c + 1].first_date) break;
            if (!data.prob_full.has(i)) {
                data.prob_full.set(i, outcome);
                data.observed_full[i] = 1;
            }
        }
    }

    if (!cfg.events_csv.empty()) {
        if (!fs::exists(cfg.events_csv))
            throw InvalidConfig("events_csv: no such file: " + cfg.events_csv);
        data.events = parse_events_file(cfg.events_csv);
    }
    return data;
}

struct ShockRun {
    ElectionDesign design;
    FitResult fit;
    ShockSeries shocks;  // on the full calendar
};

ShockRun compute_shocks(const LoadedData& data, const RunConfig& cfg) {
    ShockRun run;
    DesignOptions options;
    options.observed = &data.market.observed;
    options.drop_cycles = cfg.drop_cycles;
    if (cfg.weighted_first_stage) options.weights = &data.market.weight;
    run.design = build_election_design(data.market.prob_rep, data.news, data.cycles, options);
    run.fit = fit_wls(run.design.X, run.design.response);
    run.shocks = extract_shocks(run.fit, data.market.weight, data.cycles, data.full_cal);
    return run;
}

void write_output(const fs::path& dir, const std::string& name, const std::string& content) {
    fs::create_directories(dir);
    write_text_file((dir / name).string(), content);
}

std::string shock_csv(const RunConfig& cfg, const ShockRun& run) {
    std::string out = output_header(cfg, "shocks");
    out += "date,shock_pp,weight,cycle\n";
    const auto& cal = *run.shocks.calendar;
    for (std::size_t r = 0; r < run.fit.dates.size(); ++r) {
        const std::size_t i = *cal.index_of(run.fit.dates[r]);
        out += to_csv_line({cal.at(i).to_string(),
                            format_double(run.shocks.shock_pp[static_cast<Eigen::Index>(i)]),
                            format_double(run.shocks.weight[static_cast<Eigen::Index>(i)]),
                            std::to_string(run.shocks.cycle_id[i])});
    }
    return out;
}

std::string fit_summary(const RunConfig& cfg, const ShockRun& run) {
    double raw_bw = 0.0;
    const int bw = nw_bandwidth(run.fit.n_obs, &raw_bw);
    HacCovariance cov = newey_west(run.fit, run.design.X, bw);

    std::ostringstream out;
    out << output_header(cfg, "shocks");
    out << "probability-equation fit\n";
    out << "observations: " << run.fit.n_obs << "\n";
    out << "r_squared: " << format_double(run.fit.r_squared) << "\n";
    out << "condition: " << format_double(run.fit.condition) << "\n";
    out << "hac_bandwidth: " << bw << " (raw " << format_double(raw_bw) << ")\n\n";
    out << std::left << std::setw(22) << "term" << std::right << std::setw(14) << "estimate"
        << std::setw(14) << "hac_se" << "\n";
    for (std::size_t j = 0; j < run.fit.labels.size(); ++j) {
        out << std::left << std::setw(22) << run.fit.labels[j] << std::right << std::setw(14)
            << std::setprecision(5) << std::fixed
            << run.fit.coefficients[static_cast<Eigen::Index>(j)] << std::setw(14)
            << cov.standard_error(static_cast<Eigen::Index>(j)) << "\n";
        out.unsetf(std::ios::fixed);
    }
    return out.str();
}

std::string largest_shock_table(const RunConfig& cfg, const ShockRun& run,
                                const NarrativeEventList& events) {
    std::vector<std::pair<double, Date>> ranked;
    const auto& cal = *run.shocks.calendar;
    for (const Date& d : run.fit.dates) {
        const std::size_t i = *cal.index_of(d);
        ranked.emplace_back(run.shocks.shock_pp[static_cast<Eigen::Index>(i)], d);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return std::abs(a.first) > std::abs(b.first);
    });
    if (ranked.size() > 15) ranked.resize(15);

    std::string out = output_header(cfg, "shocks");
    out += "rank,date,shock_pp,nearest_event,days_to_event\n";
    for (std::size_t r = 0; r < ranked.size(); ++r) {
        std::string label;
        std::string distance;
        int best = std::numeric_limits<int>::max();
        for (const auto& e : events) {
            const int gap = std::abs(e.date - ranked[r].second);
            if (gap < best && gap <= 5) {
                best = gap;
                label = e.label;
                distance = std::to_string(e.date - ranked[r].second);
            }
        }
        out += to_csv_line({std::to_string(r + 1), ranked[r].second.to_string(),
                            format_double(ranked[r].first), label, distance});
    }
    return out;
}

std::string audit_report(const RunConfig& cfg, const LoadedData& data) {
    std::ostringstream out;
    out << output_header(cfg, "shocks");
    out << "calendar audit: market vs asset dates\n";
    out << "common dates: " << data.market_cal->size() << "\n";
    out << "market-only dates dropped: " << data.audit.dropped_left.size() << "\n";
    for (const Date& d : data.audit.dropped_left) out << "  " << d.to_string() << "\n";
    out << "asset-only dates (outside market sample): " << data.audit.dropped_right.size()
        << "\n";
    out << "carried-forward probability days: " << data.market.carried_dates.size() << "\n";
    for (const Date& d : data.market.carried_dates) out << "  " << d.to_string() << "\n";
    out << "degenerate quote days: " << data.market.degenerate_dates.size() << "\n";
    for (const Date& d : data.market.degenerate_dates) out << "  " << d.to_string() << "\n";
    out << "third-party quotes dropped: " << data.market.third_party_quotes << "\n";

    out << "\nmonthly trade volumes\n";
    std::map<std::int32_t, double> monthly_volume;
    for (std::size_t i = 0; i < data.market_cal->size(); ++i)
        if (data.market.weight.has(i))
            monthly_volume[YearMonth::of(data.market_cal->at(i)).index()] +=
                data.market.weight.at(i);
    for (const auto& [month, volume] : monthly_volume)
        if (volume > 0.0)
            out << "  " << YearMonth(month).to_string() << "  " << format_double(volume) << "\n";
    return out.str();
}

LpSpec lp_spec_for(const RunConfig& cfg, const std::string& series, double scale) {
    LpSpec spec;
    spec.label = cfg.variant + "/" + series;
    spec.max_horizon = cfg.horizons;
    spec.weighted = cfg.weighted_lp();
    spec.include_one_month_control = true;
    spec.one_month_days = cfg.one_month_days;
    spec.normalization_scale = scale;
    spec.drop_cycles = cfg.drop_cycles;
    for (const auto& e : cfg.exclusions)
        if (e.series.empty() || e.series == series)
            spec.exclude_shock_dates.emplace_back(e.from, e.to);
    return spec;
}

ShockSeries variant_shocks(const RunConfig& cfg, const LoadedData& data, const ShockRun& run) {
    if (cfg.variant == "narrative") {
        if (data.events.empty())
            throw InvalidConfig("narrative variant needs data.events_csv");
        return narrative_shocks(run.shocks, data.events, cfg.narrative_window);
    }
    if (cfg.variant == "crude") return crude_outcome_series(data.cycles, data.full_cal);
    return run.shocks;
}

}  // namespace

int cmd_shocks(const RunConfig& cfg, std::ostream& log) {
    LoadedData data = load_data(cfg);
    ShockRun run = compute_shocks(data, cfg);

    const fs::path dir(cfg.out_dir);
    write_output(dir, "shocks.csv", shock_csv(cfg, run));
    write_output(dir, "fit_summary.txt", fit_summary(cfg, run));
    write_output(dir, "largest_shocks.csv", largest_shock_table(cfg, run, data.events));
    write_output(dir, "audit.txt", audit_report(cfg, data));

    log << "shocks: " << run.fit.n_obs << " observations, R^2 "
        << format_double(run.fit.r_squared) << ", outputs in " << cfg.out_dir << "\n";
    return 0;
}

int cmd_irf(const RunConfig& cfg, std::ostream& log) {
    LoadedData data = load_data(cfg);
    ShockRun run = compute_shocks(data, cfg);
    const fs::path dir(cfg.out_dir);

    std::vector<std::string> series = cfg.series;
    if (series.empty())
        throw InvalidConfig("lp.series must name at least one asset series");
    for (const auto& s : series)
        if (!data.assets.count(s))
            throw InvalidConfig("asset series '" + s + "' missing from " + cfg.asset_csv);

    const std::string header = output_header(cfg, "irf");

    auto emit = [&](const ImpulseResponse& ir, const std::string& series_name,
                    const std::string& x_label, const std::string& y_label, double y_scale) {
        const std::string stem = "irf_" + cfg.variant + "_" + series_name;
        std::string csv = header;
        csv += kIrfCsvHeader;
        csv += "\n";
        csv += irf_csv_rows(ir, cfg.variant, series_name);
        write_output(dir, stem + ".csv", csv);

        SvgOptions svg;
        svg.title = series_name + " response to a 10pp shock (" + cfg.variant + ")";
        svg.x_label = x_label;
        svg.y_label = y_label;
        svg.y_scale = y_scale;
        svg.comment = header.substr(2, header.size() - 3);  // strip "# " and newline
        write_output(dir, stem + ".svg", render_irf_svg(ir, svg));
        log << "irf: " << stem << " written (" << ir.horizons.size() << " horizons)\n";
    };

    if (cfg.variant == "one-step") {
        DesignOptions options;
        options.observed = &data.market.observed;
        options.drop_cycles = cfg.drop_cycles;
        for (const auto& s : series) {
            const DailySeries y = align_to_calendar(
                to_daily_series(data.assets.at(s), data.full_cal, SeriesUnit::Other).log(),
                data.market_cal);
            LpSpec spec = lp_spec_for(cfg, s, 10.0);  // probability enters per pp
            ImpulseResponse ir = run_lp_onestep(data.market.prob_rep, data.news, y, data.cycles,
                                                run.shocks, spec, options);
            emit(ir, s, "business days", "percent", 100.0);
        }
        return 0;
    }

    const ShockSeries shocks = variant_shocks(cfg, data, run);

    // probability persistence defines the 10pp-impact normalization
    LpSpec prob_spec = lp_spec_for(cfg, "prob", 1.0);
    prob_spec.include_one_month_control = false;
    ImpulseResponse prob_ir =
        run_lp_prob(shocks, data.prob_full, &data.observed_full, prob_spec);
    emit(prob_ir, "prob", "business days", "percentage points", 1.0);
    const double scale = prob_ir.normalization_scale;

    for (const auto& s : series) {
        const DailySeries y =
            to_daily_series(data.assets.at(s), data.full_cal, SeriesUnit::Other).log();
        ImpulseResponse ir = run_lp_daily(shocks, y, lp_spec_for(cfg, s, scale));
        emit(ir, s, "business days", "percent", 100.0);
    }

    if (!cfg.employment_csv.empty() && !cfg.industries.empty()) {
        if (cfg.variant != "baseline")
            throw InvalidConfig("employment projections run under the baseline variant only");
        auto employment = parse_employment_file(cfg.employment_csv);
        MonthlyControls controls;
        controls.unemployment = data.vintages.latest(cfg.unemployment_series);
        controls.cpi = data.vintages.latest(cfg.macro_ids.cpi);
        controls.pce = data.vintages.latest(cfg.pce_series);
        controls.industrial_production =
            data.vintages.latest(cfg.macro_ids.industrial_production);
        const MonthlySeries shock_m = monthly_aggregate(shocks);

        for (const auto& industry : cfg.industries) {
            auto it = employment.find(industry);
            if (it == employment.end())
                throw InvalidConfig("industry '" + industry + "' missing from " +
                                    cfg.employment_csv);
            MonthlySeries y_log = it->second;
            {
                Eigen::VectorXd logs(static_cast<Eigen::Index>(y_log.size()));
                for (std::size_t m = 0; m < y_log.size(); ++m) {
                    const YearMonth ym = y_log.first_month() + static_cast<int>(m);
                    logs[static_cast<Eigen::Index>(m)] =
                        y_log.has(ym) ? std::log(y_log.at(ym))
                                      : std::numeric_limits<double>::quiet_NaN();
                }
                y_log = MonthlySeries(y_log.first_month(), std::move(logs), SeriesUnit::LogPrice);
            }
            LpSpec spec = lp_spec_for(cfg, industry, scale);
            spec.max_horizon = cfg.monthly_horizons;
            spec.sample_first_month = cfg.sample_first_month;
            spec.sample_last_month = cfg.sample_last_month;
            spec.exclude_outcome_months = cfg.exclude_outcome_months;
            ImpulseResponse ir = run_lp_monthly(shock_m, y_log, controls, spec);
            emit(ir, "emp_" + industry, "months", "percent", 100.0);
        }
    }
    return 0;
}

int cmd_narrative(const RunConfig& cfg, std::ostream& log) {
    LoadedData data = load_data(cfg);
    if (data.events.empty()) throw InvalidConfig("narrative command needs data.events_csv");
    ShockRun run = compute_shocks(data, cfg);
    ShockSeries narrative = narrative_shocks(run.shocks, data.events, cfg.narrative_window);

    const fs::path dir(cfg.out_dir);
    std::string csv = output_header(cfg, "narrative");
    csv += "date,shock_pp,weight,cycle\n";
    const auto& cal = *narrative.calendar;
    std::string table = output_header(cfg, "narrative");
    table += "date,label,narrative_pp\n";
    for (const auto& e : data.events) {
        const std::size_t i = *cal.index_on_or_after(e.date);
        csv += to_csv_line({cal.at(i).to_string(),
                            format_double(narrative.shock_pp[static_cast<Eigen::Index>(i)]),
                            format_double(narrative.weight[static_cast<Eigen::Index>(i)]),
                            std::to_string(narrative.cycle_id[i])});
        table += to_csv_line({e.date.to_string(), e.label,
                              format_double(narrative.shock_pp[static_cast<Eigen::Index>(i)])});
    }
    write_output(dir, "narrative_shocks.csv", csv);
    write_output(dir, "narrative_events.csv", table);
    log << "narrative: " << data.events.size() << " events, window " << cfg.narrative_window
        << ", outputs in " << cfg.out_dir << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

namespace {

std::string simulated_market_csv(const RunConfig& cfg, const SimulatedData& sim) {
    std::string out = output_header(cfg, "simulate");
    std::vector<ContractQuote> quotes;
    for (const auto& cycle : sim.cycles.cycles()) {
        const std::string yy = [&] {
            std::ostringstream tag;
            tag << std::setw(2) << std::setfill('0') << cycle.cycle_id % 100;
            return tag.str();
        }();
        const auto& cal = *sim.calendar;
        for (std::size_t i = *cal.index_of(cycle.first_date); i <= *cal.index_of(cycle.last_date);
             ++i) {
            const double pi = sim.prob.at(i);
            const auto volume = static_cast<std::int64_t>(sim.volume.at(i));
            const std::int64_t dem_units = volume / 2;
            quotes.push_back({cal.at(i), "DEM" + yy + "_WTA", 1.0 - pi, dem_units});
            quotes.push_back({cal.at(i), "REP" + yy + "_WTA", pi, volume - dem_units});
        }
    }
    out += serialize_market(std::move(quotes));
    return out;
}

std::string simulated_assets_csv(const RunConfig& cfg, const SimulatedData& sim) {
    std::string out = output_header(cfg, "simulate");
    out += "date,series,close\n";
    const auto& cal = *sim.calendar;
    for (std::size_t i = 0; i < cal.size(); ++i) {
        out += to_csv_line({cal.at(i).to_string(), "sp500", format_double(sim.sp500_level.at(i))});
        out += to_csv_line({cal.at(i).to_string(), "y2", format_double(sim.yield_level.at(i))});
        for (const auto& [name, series] : sim.assets)
            out += to_csv_line({cal.at(i).to_string(), name,
                                format_double(std::exp(series.at(i)))});
    }
    return out;
}

std::string simulated_vintage_csv(const RunConfig& cfg, const SimulatedData& sim) {
    std::string out = output_header(cfg, "simulate");
    out += "series,obs_period,publication_date,value\n";
    for (const auto& r : sim.vintages.records())
        out += to_csv_line({r.series, r.period.to_string(), r.publication.to_string(),
                            format_double(r.value)});
    return out;
}

std::string simulated_release_csv(const RunConfig& cfg, const SimulatedData& sim) {
    std::string out = output_header(cfg, "simulate");
    out += "series,release_date,obs_period\n";
    for (const auto& series : sim.releases.series_ids())
        for (const auto& r : *sim.releases.releases_for(series))
            out += to_csv_line({series, r.date.to_string(), r.period.to_string()});
    return out;
}

std::string simulated_employment_csv(const RunConfig& cfg, const SimulatedData& sim) {
    std::string out = output_header(cfg, "simulate");
    out += "month,industry,employment\n";
    for (std::size_t m = 0; m < sim.employment_log.size(); ++m) {
        const YearMonth ym = sim.employment_log.first_month() + static_cast<int>(m);
        if (!sim.employment_log.has(ym)) continue;
        out += to_csv_line({ym.to_string(), "synthetic_industry",
                            format_double(std::exp(sim.employment_log.at(ym)))});
    }
    return out;
}

std::string simulated_truth_csv(const RunConfig& cfg, const SimulatedData& sim) {
    std::string out = output_header(cfg, "simulate");
    out += "date,true_shock_pp\n";
    for (std::size_t i = 0; i < sim.calendar->size(); ++i)
        out += to_csv_line(
            {sim.calendar->at(i).to_string(), format_double(sim.true_shock_pp.at(i))});
    return out;
}

std::string simulated_run_config(const SimulatedData& sim, const DgpConfig& dgp) {
    json j;
    j["meta"] = {{"tool", std::string("eshock ") + kVersion},
                 {"dgp_seed", dgp.seed}};
    j["data"] = {{"market_csv", "market.csv"},
                 {"asset_csv", "assets.csv"},
                 {"vintage_csv", "vintages.csv"},
                 {"release_csv", "releases.csv"},
                 {"events_csv", "events.csv"},
                 {"employment_csv", "employment.csv"},
                 {"sp500_series", "sp500"},
                 {"yield_series", "y2"}};
    json cycles = json::array();
    for (const auto& c : sim.cycles.cycles()) {
        json jc = {{"id", c.cycle_id},
                   {"first", c.first_date.to_string()},
                   {"last", c.last_date.to_string()},
                   {"election", c.election_date.to_string()},
                   {"incumbent", to_string(c.incumbent)}};
        if (c.winner) jc["winner"] = to_string(*c.winner);
        cycles.push_back(jc);
    }
    j["cycles"] = cycles;
    json series = json::array();
    for (const auto& [name, _] : sim.assets) series.push_back(name);
    j["lp"] = {{"variant", "baseline"}, {"horizons", 65}, {"series", series}};
    // the 62-column monthly design needs a long panel; skip it otherwise
    const int monthly_h = std::min(12, static_cast<int>(dgp.monthly_kernel.size()) + 6);
    if (static_cast<int>(sim.employment_log.size()) >= 3 * 62 + 13 + monthly_h)
        j["monthly"] = {{"industries", json::array({"synthetic_industry"})},
                        {"horizons", monthly_h}};
    j["out_dir"] = "run_out";
    return j.dump(2) + "\n";
}

}  // namespace

int cmd_simulate(const RunConfig& cfg, std::ostream& log) {
    if (cfg.dgp_config.empty())
        throw InvalidConfig("simulate needs data.dgp_config (key-value text file)");
    DgpConfig dgp = DgpConfig::from_file(cfg.dgp_config);
    if (cfg.seed != 0) dgp.seed = cfg.seed;

    SimulatedData sim = simulate_dgp(dgp);
    const fs::path dir(cfg.out_dir);
    write_output(dir, "market.csv", simulated_market_csv(cfg, sim));
    write_output(dir, "assets.csv", simulated_assets_csv(cfg, sim));
    write_output(dir, "vintages.csv", simulated_vintage_csv(cfg, sim));
    write_output(dir, "releases.csv", simulated_release_csv(cfg, sim));
    write_output(dir, "events.csv", serialize_events(sim.events));
    write_output(dir, "employment.csv", simulated_employment_csv(cfg, sim));
    write_output(dir, "true_shocks.csv", simulated_truth_csv(cfg, sim));
    write_output(dir, "dgp_config.txt", dgp.to_text());
    write_output(dir, "run_config.json", simulated_run_config(sim, dgp));

    log << "simulate: " << sim.calendar->size() << " trading days, "
        << sim.cycles.cycles().size() << " cycles, " << sim.assets.size()
        << " asset series written to " << cfg.out_dir << "\n";
    if (sim.clamped_days > 0)
        log << "simulate: warning: " << sim.clamped_days
            << " probability days clamped into (0,1)\n";
    return 0;
}

// ---------------------------------------------------------------------------

namespace {

struct Property {
    std::string name;
    bool passed;
    std::string detail;
};

Property check_wls_scaling(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> wdist(0.1, 3.0);
    double worst = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        const Eigen::Index n = 120, k = 5;
        DesignMatrix X;
        X.values.resize(n, k);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < k; ++j) X.values(i, j) = normal(rng);
        X.values.col(0).setOnes();
        X.labels = {"const", "x1", "x2", "x3", "x4"};
        X.weights.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) X.weights[i] = wdist(rng);
        Eigen::VectorXd y(n);
        for (Eigen::Index i = 0; i < n; ++i) y[i] = normal(rng);

        FitResult weighted = fit_wls(X, y);
        DesignMatrix S = X;
        Eigen::VectorXd ys = y;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double s = std::sqrt(X.weights[i]);
            S.values.row(i) *= s;
            ys[i] *= s;
        }
        S.weights.setOnes();
        FitResult plain = fit_wls(S, ys);
        worst = std::max(worst,
                         (weighted.coefficients - plain.coefficients).cwiseAbs().maxCoeff());
    }
    return {"wls-scaling-identity", worst < 1e-10,
            "max coefficient difference " + format_double(worst)};
}

Property check_hac_oracle(std::uint64_t seed, bool mutate_bandwidth) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_int_distribution<int> ndist(60, 500);
    std::uniform_real_distribution<double> wdist(0.2, 4.0);
    double worst = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        const Eigen::Index n = ndist(rng);
        const Eigen::Index k = 4;
        DesignMatrix X;
        X.values.resize(n, k);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < k; ++j) X.values(i, j) = normal(rng);
        X.values.col(0).setOnes();
        X.labels = {"const", "x1", "x2", "x3"};
        X.weights.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) X.weights[i] = wdist(rng);
        Eigen::VectorXd y(n);
        for (Eigen::Index i = 0; i < n; ++i) y[i] = normal(rng);
        FitResult fit = fit_wls(X, y);
        for (int L : {0, 1, 3, 8}) {
            const int used = mutate_bandwidth ? L + 1 : L;
            HacCovariance hac = newey_west(fit, X, used);
            Eigen::MatrixXd oracle = oracle_hac(fit.residuals, X.values, X.weights, L);
            const double scale = oracle.cwiseAbs().maxCoeff();
            worst = std::max(worst, (hac.covariance - oracle).cwiseAbs().maxCoeff() / scale);
        }
    }
    return {"hac-oracle", worst < 1e-12, "max relative difference " + format_double(worst)};
}

Property check_fwl_equivalence(std::uint64_t seed) {
    DgpConfig cfg;
    cfg.n_cycles = 2;
    cfg.days_per_cycle = 140;
    cfg.gap_days = 40;
    cfg.tail_days = 40;
    cfg.seed = seed;
    SimulatedData sim = simulate_dgp(cfg);
    DesignOptions opt;
    opt.observed = &sim.observed;
    ElectionDesign design = build_election_design(sim.prob, sim.news, sim.cycles, opt);
    FitResult fit = fit_wls(design.X, design.response);
    ShockSeries shocks = extract_shocks(fit, sim.volume, sim.cycles, sim.calendar);

    ShockSeries restricted = shocks;
    restricted.weight.setZero();
    for (const Date& d : fit.dates)
        restricted.weight[static_cast<Eigen::Index>(*sim.calendar->index_of(d))] = 1.0;

    const int H = 10;
    LpSpec two_spec;
    two_spec.max_horizon = H;
    two_spec.weighted = true;
    two_spec.include_one_month_control = false;
    ImpulseResponse two = run_lp_daily(restricted, sim.assets.at("sector_0"), two_spec);
    LpSpec one_spec;
    one_spec.max_horizon = H;
    one_spec.weighted = false;
    one_spec.include_one_month_control = false;
    ImpulseResponse one = run_lp_onestep(sim.prob, sim.news, sim.assets.at("sector_0"),
                                         sim.cycles, shocks, one_spec, opt);
    double worst = 0.0;
    for (int h = 0; h <= H; ++h)
        worst = std::max(worst, std::abs(one.horizons[static_cast<std::size_t>(h)].coef -
                                         two.horizons[static_cast<std::size_t>(h)].coef));
    return {"fwl-equivalence", worst < 1e-8, "max coefficient difference " + format_double(worst)};
}

Property check_identification(std::uint64_t seed) {
    DgpConfig base;
    base.n_cycles = 24;
    base.days_per_cycle = 250;
    base.gap_days = 40;
    base.tail_days = 30;
    base.seed = seed;
    double last = 1.0;
    std::string detail;
    bool ok = true;
    bool first = true;
    for (double confound : {0.0, 1.0, 2.0}) {
        DgpConfig cfg = base;
        cfg.confound_vol_pp = confound;
        IdentificationRun run = run_identification(simulate_dgp(cfg));
        if (first && run.correlation <= 0.99) ok = false;
        if (run.correlation >= last) ok = false;
        detail += (detail.empty() ? "" : ", ") + format_double(run.correlation);
        last = run.correlation;
        first = false;
    }
    return {"identification-recovery", ok, "correlations " + detail};
}

Property check_coverage(std::uint64_t seed) {
    DgpConfig cfg;
    cfg.n_cycles = 7;
    cfg.days_per_cycle = 250;
    cfg.seed = seed;
    CoverageResult res = coverage_experiment(cfg, 100, 0.90, 10, 0);
    double lo = 1.0, hi = 0.0;
    for (double c : res.coverage) {
        lo = std::min(lo, c);
        hi = std::max(hi, c);
    }
    // reduced replication count: gates widened to about three Monte Carlo
    // standard errors around the nominal level
    const bool ok = lo >= 0.81 && hi <= 0.99;
    return {"coverage", ok,
            "90% band coverage within [" + format_double(lo) + ", " + format_double(hi) + "]"};
}

}  // namespace

int cmd_validate(const RunConfig& cfg, std::ostream& log, const std::string& mutate) {
    if (!mutate.empty() && mutate != "hac-bandwidth")
        throw InvalidConfig("unknown mutation '" + mutate + "'");
    const std::uint64_t seed = cfg.seed != 0 ? cfg.seed : 20240101;

    std::vector<Property> results;
    results.push_back(check_wls_scaling(substream_seed(seed, 1)));
    results.push_back(check_hac_oracle(substream_seed(seed, 2), mutate == "hac-bandwidth"));
    results.push_back(check_fwl_equivalence(substream_seed(seed, 3)));
    results.push_back(check_identification(substream_seed(seed, 4)));
    results.push_back(check_coverage(substream_seed(seed, 5)));

    bool all_ok = true;
    for (const auto& r : results) {
        log << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
        if (!r.passed) all_ok = false;
    }
    return all_ok ? 0 : 1;
}

}  // namespace eshock
