#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "eshock/csv.hpp"
#include "eshock/cycles.hpp"
#include "eshock/series.hpp"

namespace eshock {

// ---------------------------------------------------------------------------
// Prediction-market quotes

/// One winner-take-all contract's closing record for a day.
struct ContractQuote {
    Date date;
    std::string contract_id;  // e.g. DEM00_WTA, REP24_WTA
    double last_price = 0.0;  // dollars, usually in [0, 1.1]
    std::int64_t units = 0;   // contracts traded

    bool operator==(const ContractQuote&) const = default;
};

struct ContractInfo {
    Party party;
    int election_year;
};

/// Party and election year from ids of the form DEMYY_WTA / REPYY_WTA;
/// nullopt for third-party or unrecognized contracts.
std::optional<ContractInfo> classify_contract(std::string_view contract_id);

/// Market CSV schema: date,contract,last_price,units. Throws with file:line
/// context on malformed fields, negative prices/volumes, or duplicate
/// (date, contract) rows.
std::vector<ContractQuote> parse_market_csv(const CsvTable& table);
std::vector<ContractQuote> parse_market_file(const std::string& path);

/// Normalized form: rows sorted by (date, contract), canonical numbers.
std::string serialize_market(std::vector<ContractQuote> quotes);

/// Two-contract renormalization: probabilities proportional to prices,
/// summing to one. Throws DegenerateQuote when both prices are zero and
/// ValueError on a negative price.
std::pair<double, double> implied_probabilities(double dem_price, double rep_price);

enum class WeightRule {
    SumBothContracts,   // default: total units across party contracts
    RepublicanOnly,
    DemocraticOnly,
};

/// Regression weight for one day's quotes under the configured rule.
/// No quotes -> 0.
double daily_weight(std::span<const ContractQuote> day_quotes,
                    WeightRule rule = WeightRule::SumBothContracts);

// ---------------------------------------------------------------------------
// Vintage-stamped macro data

/// (series, observation period, publication date) -> value. Lookups answer
/// "what was known on day t" without look-ahead.
class VintageStore {
public:
    struct Entry {
        Date publication;
        double value;
    };

    /// Throws ValueError on duplicate (series, period, publication) or a
    /// publication before the observation period ends.
    void add(const std::string& series, YearMonth period, Date publication, double value);

    /// Value from the latest publication <= as_of; nullopt when nothing for
    /// that period had been published yet (callers treat the release-day
    /// indicator as 0).
    [[nodiscard]] std::optional<double> value_as_of(const std::string& series, YearMonth period,
                                                    Date as_of) const;

    /// Most recent observation period already published by as_of, with its
    /// then-current value.
    [[nodiscard]] std::optional<std::pair<YearMonth, double>> latest_known(
        const std::string& series, Date as_of) const;

    [[nodiscard]] bool has_series(const std::string& series) const;
    [[nodiscard]] std::size_t record_count() const;

    /// Final (latest-publication) value per period, as a monthly series.
    [[nodiscard]] MonthlySeries latest(const std::string& series) const;

    struct Record {
        std::string series;
        YearMonth period;
        Date publication;
        double value;
    };
    /// All records in (series, period, publication) order.
    [[nodiscard]] std::vector<Record> records() const;

private:
    std::map<std::string, std::map<YearMonth, std::vector<Entry>>> data_;
};

/// Vintage CSV schema: series,obs_period,publication_date,value.
VintageStore parse_vintage_csv(const CsvTable& table);
VintageStore parse_vintage_file(const std::string& path);

// ---------------------------------------------------------------------------
// Release calendar

/// Publication schedule per macro series: which observation period becomes
/// public on which date.
class ReleaseCalendar {
public:
    struct Release {
        Date date;
        YearMonth period;
    };

    void add(const std::string& series, Date release_date, YearMonth period);

    /// Sorts and validates strictly increasing release dates per series.
    void finalize();

    [[nodiscard]] bool is_release(const std::string& series, Date d) const;
    [[nodiscard]] std::optional<YearMonth> period_released_on(const std::string& series,
                                                              Date d) const;
    [[nodiscard]] const std::vector<Release>* releases_for(const std::string& series) const;
    [[nodiscard]] std::vector<std::string> series_ids() const;

private:
    std::map<std::string, std::vector<Release>> releases_;
    bool finalized_ = false;
};

/// Release-calendar CSV schema: series,release_date,obs_period.
ReleaseCalendar parse_release_csv(const CsvTable& table);
ReleaseCalendar parse_release_file(const std::string& path);

// ---------------------------------------------------------------------------
// Asset prices and employment

/// Asset CSV schema: date,series,close (index levels; logs are taken where a
/// specification needs them).
using AssetTable = std::map<std::string, std::vector<std::pair<Date, double>>>;
AssetTable parse_asset_csv(const CsvTable& table);
AssetTable parse_asset_file(const std::string& path);

/// All dates appearing in any asset series, as a calendar.
CalendarPtr asset_union_calendar(const AssetTable& assets);

/// Series values on a calendar; dates absent from the observations stay
/// missing.
DailySeries to_daily_series(const std::vector<std::pair<Date, double>>& observations,
                            CalendarPtr calendar, SeriesUnit unit);

/// Employment CSV schema: month,industry,employment (levels).
std::map<std::string, MonthlySeries> parse_employment_csv(const CsvTable& table);
std::map<std::string, MonthlySeries> parse_employment_file(const std::string& path);

/// Industry groupings used for the employment application, keyed the way the
/// employment CSV spells them; NAICS codes are configuration metadata.
struct IndustryGroup {
    std::string key;
    std::string label;
    std::vector<std::string> naics_codes;
};
const std::vector<IndustryGroup>& default_industry_groups();

// ---------------------------------------------------------------------------
// Daily market state

/// Per-day win probability and weight on a calendar, with carry-forward
/// bookkeeping. Days without a usable quote inside a cycle carry the last
/// probability forward so lags stay defined, but only directly observed days
/// may serve as regression responses.
struct MarketDaily {
    DailySeries prob_rep;                 // [0,1]; missing outside cycles
    DailySeries weight;                   // traded units per day; 0 where no trades
    std::vector<std::uint8_t> observed;   // 1 = quoted (or resolved outcome)

    // audit trail
    std::vector<Date> carried_dates;      // carried forward inside a cycle
    std::vector<Date> degenerate_dates;   // both prices zero
    std::size_t third_party_quotes = 0;   // dropped before normalization
};

struct MarketDailyOptions {
    WeightRule weight_rule = WeightRule::SumBothContracts;
    /// Force the first trading day after each completed cycle's election to
    /// carry the realized outcome (0 or 1), so the residual there is
    /// outcome-minus-predicted. Requires the cycle window to extend past the
    /// election date.
    bool resolve_outcomes = true;
};

MarketDaily build_market_daily(const std::vector<ContractQuote>& quotes,
                               CalendarPtr calendar, const CycleSet& cycles,
                               const MarketDailyOptions& options = {});

}  // namespace eshock
