#include "eshock/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "eshock/errors.hpp"

namespace eshock {

std::optional<ContractInfo> classify_contract(std::string_view contract_id) {
    // DEMYY_WTA / REPYY_WTA; markets exist since 1988, so YY >= 88 is 19YY.
    if (contract_id.size() != 9 || contract_id.substr(5) != "_WTA") return std::nullopt;
    std::string_view prefix = contract_id.substr(0, 3);
    Party party;
    if (prefix == "DEM")
        party = Party::Democrat;
    else if (prefix == "REP")
        party = Party::Republican;
    else
        return std::nullopt;
    char a = contract_id[3], b = contract_id[4];
    if (!std::isdigit(static_cast<unsigned char>(a)) || !std::isdigit(static_cast<unsigned char>(b)))
        return std::nullopt;
    int yy = (a - '0') * 10 + (b - '0');
    return ContractInfo{party, yy >= 88 ? 1900 + yy : 2000 + yy};
}

std::vector<ContractQuote> parse_market_csv(const CsvTable& table) {
    const std::size_t c_date = table.column("date");
    const std::size_t c_contract = table.column("contract");
    const std::size_t c_price = table.column("last_price");
    const std::size_t c_units = table.column("units");

    std::vector<ContractQuote> quotes;
    quotes.reserve(table.rows.size());
    std::set<std::pair<Date, std::string>> seen;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        ContractQuote q;
        q.date = field_date(table, r, c_date);
        q.contract_id = table.rows[r][c_contract];
        q.last_price = field_double(table, r, c_price);
        q.units = field_int(table, r, c_units);
        const std::string at = table.source + ":" + std::to_string(table.line_numbers[r]);
        if (q.last_price < 0.0) throw ValueError(at + ": negative price");
        if (q.units < 0) throw ValueError(at + ": negative volume");
        if (!seen.emplace(q.date, q.contract_id).second)
            throw ValueError(at + ": duplicate quote for " + q.contract_id + " on " +
                             q.date.to_string());
        quotes.push_back(std::move(q));
    }
    return quotes;
}

std::vector<ContractQuote> parse_market_file(const std::string& path) {
    return parse_market_csv(read_csv(path));
}

std::string serialize_market(std::vector<ContractQuote> quotes) {
    std::sort(quotes.begin(), quotes.end(), [](const auto& a, const auto& b) {
        return std::tie(a.date, a.contract_id) < std::tie(b.date, b.contract_id);
    });
    std::string out = "date,contract,last_price,units\n";
    for (const auto& q : quotes)
        out += to_csv_line({q.date.to_string(), q.contract_id, format_double(q.last_price),
                            std::to_string(q.units)});
    return out;
}

std::pair<double, double> implied_probabilities(double dem_price, double rep_price) {
    if (dem_price < 0.0 || rep_price < 0.0) throw ValueError("negative contract price");
    const double total = dem_price + rep_price;
    if (total <= 0.0) throw DegenerateQuote("both party contract prices are zero");
    return {dem_price / total, rep_price / total};
}

double daily_weight(std::span<const ContractQuote> day_quotes, WeightRule rule) {
    double total = 0.0;
    for (const auto& q : day_quotes) {
        auto info = classify_contract(q.contract_id);
        if (!info) continue;
        switch (rule) {
            case WeightRule::SumBothContracts: total += static_cast<double>(q.units); break;
            case WeightRule::RepublicanOnly:
                if (info->party == Party::Republican) total += static_cast<double>(q.units);
                break;
            case WeightRule::DemocraticOnly:
                if (info->party == Party::Democrat) total += static_cast<double>(q.units);
                break;
        }
    }
    return total;
}

// ---------------------------------------------------------------------------

void VintageStore::add(const std::string& series, YearMonth period, Date publication,
                       double value) {
    if (publication < period.last_day())
        throw ValueError("vintage for " + series + " " + period.to_string() +
                         " published before the period ends (" + publication.to_string() + ")");
    auto& entries = data_[series][period];
    for (const auto& e : entries)
        if (e.publication == publication)
            throw ValueError("duplicate vintage: " + series + " " + period.to_string() + " @ " +
                             publication.to_string());
    entries.push_back({publication, value});
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.publication < b.publication; });
}

std::optional<double> VintageStore::value_as_of(const std::string& series, YearMonth period,
                                                Date as_of) const {
    auto s = data_.find(series);
    if (s == data_.end()) return std::nullopt;
    auto p = s->second.find(period);
    if (p == s->second.end()) return std::nullopt;
    const auto& entries = p->second;
    // latest publication <= as_of
    auto it = std::upper_bound(entries.begin(), entries.end(), as_of,
                               [](Date d, const Entry& e) { return d < e.publication; });
    if (it == entries.begin()) return std::nullopt;
    return std::prev(it)->value;
}

std::optional<std::pair<YearMonth, double>> VintageStore::latest_known(const std::string& series,
                                                                       Date as_of) const {
    auto s = data_.find(series);
    if (s == data_.end()) return std::nullopt;
    for (auto it = s->second.rbegin(); it != s->second.rend(); ++it) {
        auto v = value_as_of(series, it->first, as_of);
        if (v) return std::make_pair(it->first, *v);
    }
    return std::nullopt;
}

bool VintageStore::has_series(const std::string& series) const { return data_.count(series) > 0; }

std::size_t VintageStore::record_count() const {
    std::size_t n = 0;
    for (const auto& [_, periods] : data_)
        for (const auto& [__, entries] : periods) n += entries.size();
    return n;
}

MonthlySeries VintageStore::latest(const std::string& series) const {
    auto s = data_.find(series);
    if (s == data_.end()) throw MissingData("no vintages for series " + series);
    std::vector<std::pair<YearMonth, double>> obs;
    for (const auto& [period, entries] : s->second)
        obs.emplace_back(period, entries.back().value);
    return MonthlySeries::from_observations(obs);
}

std::vector<VintageStore::Record> VintageStore::records() const {
    std::vector<Record> out;
    for (const auto& [series, periods] : data_)
        for (const auto& [period, entries] : periods)
            for (const auto& e : entries) out.push_back({series, period, e.publication, e.value});
    return out;
}

VintageStore parse_vintage_csv(const CsvTable& table) {
    const std::size_t c_series = table.column("series");
    const std::size_t c_period = table.column("obs_period");
    const std::size_t c_pub = table.column("publication_date");
    const std::size_t c_value = table.column("value");
    VintageStore store;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        store.add(table.rows[r][c_series], field_month(table, r, c_period),
                  field_date(table, r, c_pub), field_double(table, r, c_value));
    }
    return store;
}

VintageStore parse_vintage_file(const std::string& path) {
    return parse_vintage_csv(read_csv(path));
}

// ---------------------------------------------------------------------------

void ReleaseCalendar::add(const std::string& series, Date release_date, YearMonth period) {
    releases_[series].push_back({release_date, period});
    finalized_ = false;
}

void ReleaseCalendar::finalize() {
    for (auto& [series, rs] : releases_) {
        std::sort(rs.begin(), rs.end(),
                  [](const Release& a, const Release& b) { return a.date < b.date; });
        for (std::size_t i = 1; i < rs.size(); ++i)
            if (rs[i - 1].date == rs[i].date)
                throw ValueError("duplicate release date for " + series + ": " +
                                 rs[i].date.to_string());
    }
    finalized_ = true;
}

namespace {
const ReleaseCalendar::Release* find_release(const std::vector<ReleaseCalendar::Release>& rs,
                                             Date d) {
    auto it = std::lower_bound(rs.begin(), rs.end(), d,
                               [](const ReleaseCalendar::Release& r, Date x) { return r.date < x; });
    if (it == rs.end() || it->date != d) return nullptr;
    return &*it;
}
}  // namespace

bool ReleaseCalendar::is_release(const std::string& series, Date d) const {
    auto s = releases_.find(series);
    return s != releases_.end() && find_release(s->second, d) != nullptr;
}

std::optional<YearMonth> ReleaseCalendar::period_released_on(const std::string& series,
                                                             Date d) const {
    auto s = releases_.find(series);
    if (s == releases_.end()) return std::nullopt;
    const Release* r = find_release(s->second, d);
    if (!r) return std::nullopt;
    return r->period;
}

const std::vector<ReleaseCalendar::Release>* ReleaseCalendar::releases_for(
    const std::string& series) const {
    auto s = releases_.find(series);
    return s == releases_.end() ? nullptr : &s->second;
}

std::vector<std::string> ReleaseCalendar::series_ids() const {
    std::vector<std::string> ids;
    ids.reserve(releases_.size());
    for (const auto& [series, _] : releases_) ids.push_back(series);
    return ids;
}

ReleaseCalendar parse_release_csv(const CsvTable& table) {
    const std::size_t c_series = table.column("series");
    const std::size_t c_date = table.column("release_date");
    const std::size_t c_period = table.column("obs_period");
    ReleaseCalendar cal;
    for (std::size_t r = 0; r < table.rows.size(); ++r)
        cal.add(table.rows[r][c_series], field_date(table, r, c_date),
                field_month(table, r, c_period));
    cal.finalize();
    return cal;
}

ReleaseCalendar parse_release_file(const std::string& path) {
    return parse_release_csv(read_csv(path));
}

// ---------------------------------------------------------------------------

AssetTable parse_asset_csv(const CsvTable& table) {
    const std::size_t c_date = table.column("date");
    const std::size_t c_series = table.column("series");
    const std::size_t c_close = table.column("close");
    AssetTable out;
    for (std::size_t r = 0; r < table.rows.size(); ++r)
        out[table.rows[r][c_series]].emplace_back(field_date(table, r, c_date),
                                                  field_double(table, r, c_close));
    for (auto& [_, obs] : out)
        std::sort(obs.begin(), obs.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
}

AssetTable parse_asset_file(const std::string& path) { return parse_asset_csv(read_csv(path)); }

CalendarPtr asset_union_calendar(const AssetTable& assets) {
    std::set<Date> dates;
    for (const auto& [_, obs] : assets)
        for (const auto& [d, __] : obs) dates.insert(d);
    return std::make_shared<TradingCalendar>(std::vector<Date>(dates.begin(), dates.end()));
}

DailySeries to_daily_series(const std::vector<std::pair<Date, double>>& observations,
                            CalendarPtr calendar, SeriesUnit unit) {
    DailySeries out(std::move(calendar), unit);
    for (const auto& [d, v] : observations)
        if (out.calendar().contains(d)) out.set(d, v);
    return out;
}

std::map<std::string, MonthlySeries> parse_employment_csv(const CsvTable& table) {
    const std::size_t c_month = table.column("month");
    const std::size_t c_industry = table.column("industry");
    const std::size_t c_emp = table.column("employment");
    std::map<std::string, std::vector<std::pair<YearMonth, double>>> obs;
    for (std::size_t r = 0; r < table.rows.size(); ++r)
        obs[table.rows[r][c_industry]].emplace_back(field_month(table, r, c_month),
                                                    field_double(table, r, c_emp));
    std::map<std::string, MonthlySeries> out;
    for (auto& [industry, o] : obs) out.emplace(industry, MonthlySeries::from_observations(o));
    return out;
}

std::map<std::string, MonthlySeries> parse_employment_file(const std::string& path) {
    return parse_employment_csv(read_csv(path));
}

const std::vector<IndustryGroup>& default_industry_groups() {
    static const std::vector<IndustryGroup> groups = {
        {"oil_drilling_extraction", "Oil Drilling & Extraction", {"211", "213111", "213112"}},
        {"mining_quarrying", "Mining & Quarrying", {"212", "213113", "213114", "213115"}},
        {"clean_energy_generation",
         "Clean Energy Generation",
         {"221111", "221112", "221113", "221114", "221115", "221116"}},
        {"aerospace_manufacturing", "Aerospace Manufacturing", {"3364"}},
        {"ship_manufacturing", "Ship Manufacturing", {"336992"}},
        {"tank_manufacturing", "Tank Manufacturing", {"3366"}},
    };
    return groups;
}

// ---------------------------------------------------------------------------

MarketDaily build_market_daily(const std::vector<ContractQuote>& quotes, CalendarPtr calendar,
                               const CycleSet& cycles, const MarketDailyOptions& options) {
    struct DayPrices {
        double dem = -1.0, rep = -1.0;  // -1 = absent
        std::vector<ContractQuote> day_quotes;
    };
    std::map<Date, DayPrices> by_date;
    std::size_t third_party = 0;
    for (const auto& q : quotes) {
        auto info = classify_contract(q.contract_id);
        if (!info) {
            ++third_party;
            continue;  // third-party contracts are dropped before normalization
        }
        auto& day = by_date[q.date];
        (info->party == Party::Democrat ? day.dem : day.rep) = q.last_price;
        day.day_quotes.push_back(q);
    }

    MarketDaily out;
    out.prob_rep = DailySeries(calendar, SeriesUnit::Probability);
    out.weight = DailySeries(calendar, SeriesUnit::Count);
    out.observed.assign(calendar->size(), 0);
    out.third_party_quotes = third_party;

    // Completed cycles: the first trading day after the election carries the
    // realized outcome, so the residual there is outcome-minus-predicted.
    std::map<std::size_t, double> forced;
    if (options.resolve_outcomes) {
        for (const auto& cycle : cycles.cycles()) {
            if (!cycle.winner) continue;
            auto e = calendar->index_on_or_after(cycle.election_date + 1);
            if (!e || calendar->at(*e) > cycle.last_date) continue;
            forced[*e] = *cycle.winner == Party::Republican ? 1.0 : 0.0;
        }
    }

    const std::vector<int> cycle_mask = cycles.mask(*calendar);
    int prev_cycle = -1;
    double carried = -1.0;
    for (std::size_t i = 0; i < calendar->size(); ++i) {
        const Date d = calendar->at(i);
        const int cyc = cycle_mask[i];
        if (cyc != prev_cycle) carried = -1.0;  // lags never cross a cycle boundary
        prev_cycle = cyc;

        auto it = by_date.find(d);
        double w = 0.0;
        if (it != by_date.end()) w = daily_weight(it->second.day_quotes, options.weight_rule);
        out.weight.set(i, w);

        if (cyc < 0) continue;  // probabilities only exist inside cycles

        bool quoted = false;
        if (auto f = forced.find(i); f != forced.end()) {
            carried = f->second;
            quoted = true;
        } else if (it != by_date.end() && it->second.dem >= 0.0 && it->second.rep >= 0.0) {
            if (it->second.dem + it->second.rep > 0.0) {
                carried = implied_probabilities(it->second.dem, it->second.rep).second;
                quoted = true;
            } else {
                out.degenerate_dates.push_back(d);  // no information; treat as missing
            }
        }
        if (carried >= 0.0) {
            out.prob_rep.set(i, carried);
            out.observed[i] = quoted ? 1 : 0;
            if (!quoted) out.carried_dates.push_back(d);
        }
    }

    // A resolution day with no trades inherits the election day's weight.
    for (const auto& [i, _] : forced) {
        if (out.weight.at(i) == 0.0 && i > 0 && out.weight.has(i - 1))
            out.weight.set(i, out.weight.at(i - 1));
    }

    return out;
}

}  // namespace eshock
