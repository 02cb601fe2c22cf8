#include "eshock/shockgen.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "eshock/errors.hpp"

namespace eshock {

const DailySeries& NewsPanel::component(std::size_t k) const {
    switch (k) {
        case 0: return d_yield;
        case 1: return d_sp500;
        case 2: return emp_news;
        case 3: return cpi_news;
        case 4: return ind_news;
        default: throw OutOfRange("news component index");
    }
}

namespace {

struct MacroColumns {
    DailySeries news;
    DailySeries indicator;
};

MacroColumns build_macro_columns(const CalendarPtr& calendar, const VintageStore& vintages,
                                 const ReleaseCalendar& releases, const std::string& series,
                                 bool release_day_indicators) {
    MacroColumns out{DailySeries(calendar, SeriesUnit::PercentChange),
                     DailySeries(calendar, SeriesUnit::Indicator)};
    for (std::size_t i = 0; i < calendar->size(); ++i) {
        const Date d = calendar->at(i);
        double news = 0.0, indicator = 0.0;
        if (release_day_indicators) {
            auto period = releases.period_released_on(series, d);
            if (period) {
                auto current = vintages.value_as_of(series, *period, d);
                auto previous = vintages.value_as_of(series, *period - 1, d);
                // an unpublished value means the indicator stays 0
                if (current && previous && *previous != 0.0) {
                    news = 100.0 * (*current / *previous - 1.0);
                    indicator = 1.0;
                }
            }
        } else {
            // stale and fresh information treated alike: carry the latest
            // known 1-month change every day
            auto latest = vintages.latest_known(series, d);
            if (latest) {
                auto previous = vintages.value_as_of(series, latest->first - 1, d);
                if (previous && *previous != 0.0)
                    news = 100.0 * (latest->second / *previous - 1.0);
            }
        }
        out.news.set(i, news);
        out.indicator.set(i, indicator);
    }
    return out;
}

}  // namespace

NewsPanel build_news_panel(CalendarPtr calendar, const DailySeries& yield_level,
                           const DailySeries& sp500_level, const VintageStore& vintages,
                           const ReleaseCalendar& releases, const CycleSet& cycles,
                           const NewsPanelOptions& options) {
    NewsPanel panel;
    panel.calendar = calendar;
    panel.d_yield = align_to_calendar(yield_level.pct_change_1d(), calendar);
    panel.d_sp500 = align_to_calendar(sp500_level.pct_change_1d(), calendar);

    MacroColumns emp = build_macro_columns(calendar, vintages, releases, options.ids.employment,
                                           options.release_day_indicators);
    MacroColumns cpi = build_macro_columns(calendar, vintages, releases, options.ids.cpi,
                                           options.release_day_indicators);
    MacroColumns ind = build_macro_columns(calendar, vintages, releases,
                                           options.ids.industrial_production,
                                           options.release_day_indicators);
    panel.emp_news = std::move(emp.news);
    panel.release_emp = std::move(emp.indicator);
    panel.cpi_news = std::move(cpi.news);
    panel.release_cpi = std::move(cpi.indicator);
    panel.ind_news = std::move(ind.news);
    panel.release_ind = std::move(ind.indicator);

    panel.incumbent_rep = DailySeries(calendar, SeriesUnit::Indicator);
    for (std::size_t i = 0; i < calendar->size(); ++i) {
        const ElectionCycle* c = cycles.cycle_of(calendar->at(i));
        if (c) panel.incumbent_rep.set(i, c->incumbent == Party::Republican ? 1.0 : 0.0);
    }
    return panel;
}

void ShockSeries::validate() const {
    if (static_cast<std::size_t>(shock_pp.size()) != calendar->size() ||
        static_cast<std::size_t>(weight.size()) != calendar->size() ||
        cycle_id.size() != calendar->size())
        throw ValueError("shock series misaligned with its calendar");
    if (!(weight.array() >= 0.0).all()) throw ValueError("negative shock weight");
    for (std::size_t i = 0; i < size(); ++i)
        if (cycle_id[i] < 0 && shock_pp[static_cast<Eigen::Index>(i)] != 0.0)
            throw ValueError("nonzero shock outside any cycle at " + calendar->at(i).to_string());
}

NarrativeEventList parse_events_text(std::string_view text, std::string source) {
    NarrativeEventList events;
    std::size_t line_no = 0, pos = 0;
    bool have_header = false;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;
        if (!have_header) {
            if (line != "date,label,description")
                throw SchemaError(source + ": expected header date,label,description");
            have_header = true;
            continue;
        }
        const std::size_t c1 = line.find(',');
        const std::size_t c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
        if (c2 == std::string_view::npos)
            throw ParseError(source + ":" + std::to_string(line_no) + ": expected 3 fields");
        auto date = Date::parse(line.substr(0, c1));
        if (!date)
            throw ParseError(source + ":" + std::to_string(line_no) + ": bad date '" +
                             std::string(line.substr(0, c1)) + "'");
        events.push_back({*date, std::string(line.substr(c1 + 1, c2 - c1 - 1)),
                          std::string(line.substr(c2 + 1))});
    }
    std::set<Date> seen;
    for (const auto& e : events)
        if (!seen.insert(e.date).second)
            throw ValueError(source + ": duplicate event date " + e.date.to_string());
    return events;
}

NarrativeEventList parse_events_file(const std::string& path) {
    return parse_events_text(read_text_file(path), path);
}

std::string serialize_events(const NarrativeEventList& events) {
    std::string out = "date,label,description\n";
    for (const auto& e : events)
        out += e.date.to_string() + "," + e.label + "," + e.description + "\n";
    return out;
}

// ---------------------------------------------------------------------------

ElectionDesign build_election_design(const DailySeries& prob, const NewsPanel& news,
                                     const CycleSet& cycles, const DesignOptions& options) {
    const CalendarPtr calendar = prob.calendar_ptr();
    if (news.calendar.get() != calendar.get())
        throw ValueError("probability series and news panel use different calendars");
    const int L = options.lags;
    if (L < 1) throw ValueError("design needs at least one autoregressive lag");

    const std::vector<int> mask = cycles.mask(*calendar);
    const std::set<int> dropped(options.drop_cycles.begin(), options.drop_cycles.end());

    // a cycle shorter than the lag window cannot contribute a single row
    std::map<int, int> cycle_days;
    for (int c : mask)
        if (c >= 0 && !dropped.count(c)) ++cycle_days[c];
    for (const auto& [c, days] : cycle_days)
        if (days <= L)
            throw InsufficientHistory("cycle " + std::to_string(c) + " has only " +
                                      std::to_string(days) + " usable days");

    const std::size_t n_comp = NewsPanel::kComponents;
    auto row_complete = [&](std::size_t i) -> bool {
        const int c = mask[i];
        if (c < 0 || dropped.count(c)) return false;
        if (static_cast<int>(i) < L || mask[i - static_cast<std::size_t>(L)] != c) return false;
        if (options.observed && !(*options.observed)[i]) return false;
        for (int s = 0; s <= L; ++s) {
            const std::size_t j = i - static_cast<std::size_t>(s);
            if (s >= 1 && !prob.has(j)) return false;
            for (std::size_t k = 0; k < n_comp; ++k)
                if (!news.component(k).has(j)) return false;
        }
        if (!prob.has(i) || !news.incumbent_rep.has(i)) return false;
        return true;
    };

    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < calendar->size(); ++i)
        if (row_complete(i)) rows.push_back(i);
    if (rows.empty()) throw InsufficientHistory("no usable design rows");

    ElectionDesign design;
    auto& X = design.X;
    X.labels.push_back("const");
    for (int s = 1; s <= L; ++s) X.labels.push_back("pi_l" + std::to_string(s));
    for (std::size_t k = 0; k < n_comp; ++k)
        for (int s = 0; s <= L; ++s)
            X.labels.push_back(std::string(NewsPanel::component_labels[k]) + "_l" +
                               std::to_string(s));
    X.labels.push_back("pres_r");
    for (std::size_t k = 0; k < n_comp; ++k)
        for (int s = 0; s <= L; ++s)
            X.labels.push_back(std::string(NewsPanel::component_labels[k]) + "_x_pres_l" +
                               std::to_string(s));

    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto p = static_cast<Eigen::Index>(X.labels.size());
    X.values.resize(n, p);
    X.weights.resize(n);
    design.response.resize(n);
    X.dates.reserve(rows.size());
    design.cycle_ids.reserve(rows.size());

    for (Eigen::Index r = 0; r < n; ++r) {
        const std::size_t i = rows[static_cast<std::size_t>(r)];
        X.dates.push_back(calendar->at(i));
        design.cycle_ids.push_back(mask[i]);
        design.response[r] = prob.at(i);
        X.weights[r] = options.weights ? options.weights->at(i) : 1.0;

        Eigen::Index col = 0;
        X.values(r, col++) = 1.0;
        for (int s = 1; s <= L; ++s) X.values(r, col++) = prob.at(i - static_cast<std::size_t>(s));
        for (std::size_t k = 0; k < n_comp; ++k)
            for (int s = 0; s <= L; ++s)
                X.values(r, col++) = news.component(k).at(i - static_cast<std::size_t>(s));
        const double pres = news.incumbent_rep.at(i);
        X.values(r, col++) = pres;
        for (std::size_t k = 0; k < n_comp; ++k)
            for (int s = 0; s <= L; ++s)
                X.values(r, col++) = news.component(k).at(i - static_cast<std::size_t>(s)) * pres;
    }
    X.validate();
    return design;
}

ShockSeries extract_shocks(const FitResult& fit, const DailySeries& weights,
                           const CycleSet& cycles, CalendarPtr calendar) {
    ShockSeries out;
    out.calendar = calendar;
    out.shock_pp = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(calendar->size()));
    out.weight = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(calendar->size()));
    out.cycle_id = cycles.mask(*calendar);

    for (std::size_t r = 0; r < fit.dates.size(); ++r) {
        auto i = calendar->index_of(fit.dates[r]);
        if (!i) throw ValueError("fit row date " + fit.dates[r].to_string() +
                                 " missing from the shock calendar");
        // probabilities in [0,1] become percentage points here
        out.shock_pp[static_cast<Eigen::Index>(*i)] =
            100.0 * fit.residuals[static_cast<Eigen::Index>(r)];
    }
    for (std::size_t i = 0; i < calendar->size(); ++i) {
        auto j = weights.calendar().index_of(calendar->at(i));
        if (j && weights.has(*j)) out.weight[static_cast<Eigen::Index>(i)] = weights.at(*j);
    }
    out.validate();
    return out;
}

ShockSeries narrative_shocks(const ShockSeries& shocks, const NarrativeEventList& events,
                             int window) {
    if (window < 1) throw ValueError("narrative window must be at least 1");
    shocks.validate();

    ShockSeries out;
    out.calendar = shocks.calendar;
    out.shock_pp = Eigen::VectorXd::Zero(shocks.shock_pp.size());
    out.weight = shocks.weight;
    out.cycle_id = shocks.cycle_id;

    for (const auto& event : events) {
        auto idx = shocks.calendar->index_on_or_after(event.date);
        if (!idx)
            throw ValueError("event '" + event.label + "' on " + event.date.to_string() +
                             " falls after the calendar ends");
        const std::size_t e = *idx;
        const int cyc = shocks.cycle_id[e];
        if (cyc < 0)
            throw ValueError("event '" + event.label + "' on " + event.date.to_string() +
                             " is outside every cycle");
        double total = 0.0;
        for (int s = 0; s < window; ++s) {
            const std::size_t i = e + static_cast<std::size_t>(s);
            if (i >= shocks.size() || shocks.cycle_id[i] != cyc) break;  // truncate at cycle end
            total += shocks.shock_pp[static_cast<Eigen::Index>(i)];
        }
        out.shock_pp[static_cast<Eigen::Index>(e)] = total;
    }
    return out;
}

ShockSeries crude_outcome_series(const CycleSet& cycles, CalendarPtr calendar) {
    ShockSeries out;
    out.calendar = calendar;
    out.shock_pp = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(calendar->size()));
    out.weight = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(calendar->size()));
    out.cycle_id = cycles.mask(*calendar);

    for (const auto& cycle : cycles.cycles()) {
        if (!cycle.winner)
            throw UnknownOutcome("cycle " + std::to_string(cycle.cycle_id) +
                                 " has no recorded winner");
        auto i = calendar->index_on_or_after(cycle.election_date);
        if (!i || calendar->at(*i) > cycle.last_date)
            throw ValueError("election date of cycle " + std::to_string(cycle.cycle_id) +
                             " not on the calendar");
        out.shock_pp[static_cast<Eigen::Index>(*i)] =
            *cycle.winner == Party::Republican ? 1.0 : -1.0;
    }
    return out;
}

MonthlySeries monthly_aggregate(const ShockSeries& shocks) {
    if (shocks.calendar->empty()) return MonthlySeries(YearMonth(0), Eigen::VectorXd());
    const YearMonth first = YearMonth::of(shocks.calendar->front());
    const YearMonth last = YearMonth::of(shocks.calendar->back());
    Eigen::VectorXd sums = Eigen::VectorXd::Zero(last - first + 1);
    for (std::size_t i = 0; i < shocks.size(); ++i)
        sums[YearMonth::of(shocks.calendar->at(i)) - first] +=
            shocks.shock_pp[static_cast<Eigen::Index>(i)];
    return MonthlySeries(first, std::move(sums), SeriesUnit::PercentagePoints);
}

}  // namespace eshock
