#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "eshock/cycles.hpp"
#include "eshock/ingest.hpp"
#include "eshock/regress.hpp"
#include "eshock/series.hpp"

namespace eshock {

/// Financial and macro news aligned to one calendar: 1-day percent changes
/// of the 2-year yield and the S&P 500, release-day 1-month percent changes
/// of employment, CPI, and industrial production (exactly 0 off release
/// days), the three release indicators, and the incumbent-party dummy.
struct NewsPanel {
    CalendarPtr calendar;
    DailySeries d_yield;
    DailySeries d_sp500;
    DailySeries emp_news;
    DailySeries cpi_news;
    DailySeries ind_news;
    DailySeries release_emp;
    DailySeries release_cpi;
    DailySeries release_ind;
    DailySeries incumbent_rep;

    static constexpr std::size_t kComponents = 5;
    static constexpr std::array<const char*, kComponents> component_labels = {
        "d_yield", "d_sp500", "emp", "cpi", "ind"};

    [[nodiscard]] const DailySeries& component(std::size_t k) const;
};

/// Macro series ids as they appear in the vintage store / release calendar.
struct MacroSeriesIds {
    std::string employment = "emp";
    std::string cpi = "cpi";
    std::string industrial_production = "ind";
};

struct NewsPanelOptions {
    MacroSeriesIds ids;
    /// When false, macro components carry the latest known 1-month change on
    /// every day instead of only on release days (stale and fresh information
    /// treated alike); release indicators are then all zero.
    bool release_day_indicators = true;
};

/// Vintage-faithful panel: macro news on day t uses only values published on
/// or before t. Level series may live on their own (wider) calendars;
/// 1-day changes are computed there and then aligned by date.
NewsPanel build_news_panel(CalendarPtr calendar, const DailySeries& yield_level,
                           const DailySeries& sp500_level, const VintageStore& vintages,
                           const ReleaseCalendar& releases, const CycleSet& cycles,
                           const NewsPanelOptions& options = {});

/// Daily shock values in percentage points with per-day weights; zero by
/// convention outside election cycles.
struct ShockSeries {
    CalendarPtr calendar;
    Eigen::VectorXd shock_pp;
    Eigen::VectorXd weight;
    std::vector<int> cycle_id;  // -1 outside cycles

    void validate() const;
    [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(shock_pp.size()); }
};

struct NarrativeEvent {
    Date date;
    std::string label;
    std::string description;
};
using NarrativeEventList = std::vector<NarrativeEvent>;

/// Events CSV: date,label,description. The description is everything after
/// the second comma, so it may itself contain commas.
NarrativeEventList parse_events_text(std::string_view text, std::string source);
NarrativeEventList parse_events_file(const std::string& path);
std::string serialize_events(const NarrativeEventList& events);

// ---------------------------------------------------------------------------

/// Regressor stack for the probability equation plus its response.
struct ElectionDesign {
    DesignMatrix X;             // intercept, 5 own lags, news and interactions
    Eigen::VectorXd response;   // win probability in [0, 1]
    std::vector<int> cycle_ids; // per row
};

struct DesignOptions {
    int lags = 5;
    /// Rows whose response was carried forward (not directly quoted) are
    /// excluded when a mask is supplied.
    const std::vector<std::uint8_t>* observed = nullptr;
    /// Optional first-stage weights (the baseline fits unweighted).
    const DailySeries* weights = nullptr;
    std::vector<int> drop_cycles;
};

/// Builds the probability-equation design: intercept, own lags 1..L,
/// contemporaneous + L lags of each news component, the incumbency dummy,
/// and the interacted block. Rows whose lags would cross a cycle boundary
/// are dropped; throws InsufficientHistory when a cycle is too short to
/// contribute any row.
ElectionDesign build_election_design(const DailySeries& prob, const NewsPanel& news,
                                     const CycleSet& cycles, const DesignOptions& options = {});

/// Residuals of the fitted probability equation as percentage-point shocks
/// on `calendar`, zero outside cycles, with weights attached per date.
ShockSeries extract_shocks(const FitResult& fit, const DailySeries& weights,
                           const CycleSet& cycles, CalendarPtr calendar);

/// Event-window variant: at each event date the sum of the next `window`
/// shocks (truncated at the cycle end), zero elsewhere. Event dates on
/// non-trading days snap forward to the next trading day.
ShockSeries narrative_shocks(const ShockSeries& shocks, const NarrativeEventList& events,
                             int window = 5);

/// Outcome-only variant: +1 on Republican-victory election dates, -1 on
/// Democratic ones, 0 elsewhere; unit weights. Throws UnknownOutcome when a
/// cycle has no recorded winner.
ShockSeries crude_outcome_series(const CycleSet& cycles, CalendarPtr calendar);

/// Calendar-month sums of the daily shocks; months without cycle days are 0.
MonthlySeries monthly_aggregate(const ShockSeries& shocks);

}  // namespace eshock
