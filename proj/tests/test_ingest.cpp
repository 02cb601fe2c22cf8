#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <random>
#include <set>

#include "eshock/errors.hpp"
#include "eshock/ingest.hpp"

using namespace eshock;

namespace {
const std::string kDataDir = TEST_DATA_DIR;
}

TEST_CASE("contract ids classify by party and election year") {
    auto dem = classify_contract("DEM00_WTA");
    REQUIRE(dem.has_value());
    CHECK(dem->party == Party::Democrat);
    CHECK(dem->election_year == 2000);
    auto rep = classify_contract("REP24_WTA");
    REQUIRE(rep.has_value());
    CHECK(rep->party == Party::Republican);
    CHECK(rep->election_year == 2024);
    CHECK(classify_contract("DEM88_WTA")->election_year == 1988);
    CHECK_FALSE(classify_contract("REF00_WTA").has_value());  // third party
    CHECK_FALSE(classify_contract("DEM00_WTB").has_value());
    CHECK_FALSE(classify_contract("").has_value());
}

TEST_CASE("market file parses the documented example row") {
    auto quotes = parse_market_file(kDataDir + "/market_2000.csv");
    REQUIRE(quotes.size() == 20);
    ContractQuote expected{Date::from_ymd(2000, 11, 1), "DEM00_WTA", 0.348, 210};
    CHECK(std::count(quotes.begin(), quotes.end(), expected) == 1);
}

TEST_CASE("empty market file yields an empty quote list") {
    auto table = parse_csv("date,contract,last_price,units\n", "inline");
    CHECK(parse_market_csv(table).empty());
}

TEST_CASE("market parser rejects bad rows with line numbers") {
    CHECK_THROWS_AS(parse_market_csv(parse_csv("date,contract,last_price\n", "f")), SchemaError);

    auto negative = parse_csv("date,contract,last_price,units\n2000-11-01,DEM00_WTA,-0.1,5\n", "f");
    CHECK_THROWS_WITH_AS(parse_market_csv(negative), "f:2: negative price", ValueError);

    auto bad_date = parse_csv("date,contract,last_price,units\n2000-13-01,DEM00_WTA,0.1,5\n", "f");
    CHECK_THROWS_AS(parse_market_csv(bad_date), ParseError);

    auto dup = parse_csv(
        "date,contract,last_price,units\n"
        "2000-11-01,DEM00_WTA,0.3,5\n"
        "2000-11-01,DEM00_WTA,0.4,6\n",
        "f");
    CHECK_THROWS_AS(parse_market_csv(dup), ValueError);
}

TEST_CASE("market round-trips through the normalized form") {
    auto quotes = parse_market_file(kDataDir + "/market_2000.csv");
    std::string once = serialize_market(quotes);
    auto reparsed = parse_market_csv(parse_csv(once, "roundtrip"));
    CHECK(reparsed == quotes);
    // serialize(parse(.)) is idempotent byte-for-byte on the normalized form
    CHECK(serialize_market(reparsed) == once);
}

TEST_CASE("implied probabilities renormalize the two contract prices") {
    auto [dem, rep] = implied_probabilities(0.348, 0.668);
    CHECK(dem == doctest::Approx(0.343).epsilon(2e-3));
    CHECK(rep == doctest::Approx(0.657).epsilon(2e-3));
    CHECK(dem + rep == doctest::Approx(1.0).epsilon(1e-12));

    auto even = implied_probabilities(0.5, 0.5);
    CHECK(even.first == 0.5);
    CHECK(even.second == 0.5);

    auto thirds = implied_probabilities(0.25, 0.50);
    CHECK(thirds.first == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(thirds.second == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

    CHECK_THROWS_AS(implied_probabilities(0.0, 0.0), DegenerateQuote);
    CHECK_THROWS_AS(implied_probabilities(-0.1, 0.5), ValueError);
}

TEST_CASE("implied probabilities are scale invariant") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> price(0.01, 1.1);
    std::uniform_real_distribution<double> scale(0.1, 50.0);
    for (int rep = 0; rep < 200; ++rep) {
        double d = price(rng), r = price(rng), a = scale(rng);
        auto base = implied_probabilities(d, r);
        auto scaled = implied_probabilities(a * d, a * r);
        CHECK(std::abs(base.first - scaled.first) < 1e-14);
        CHECK(std::abs(base.second - scaled.second) < 1e-14);
    }
}

TEST_CASE("daily weight sums the party contracts") {
    std::vector<ContractQuote> day = {
        {Date::from_ymd(2000, 11, 1), "DEM00_WTA", 0.348, 120},
        {Date::from_ymd(2000, 11, 1), "REP00_WTA", 0.668, 80},
    };
    CHECK(daily_weight(day) == 200.0);
    CHECK(daily_weight(day, WeightRule::RepublicanOnly) == 80.0);
    CHECK(daily_weight(day, WeightRule::DemocraticOnly) == 120.0);
    CHECK(daily_weight({}) == 0.0);

    // third-party contracts never count
    day.push_back({Date::from_ymd(2000, 11, 1), "REF00_WTA", 0.02, 999});
    CHECK(daily_weight(day) == 200.0);
}

TEST_CASE("monthly volume sums match an independent aggregation") {
    auto quotes = parse_market_file(kDataDir + "/market_2000.csv");

    // oracle: accumulate units by month directly from the raw rows
    std::map<int, double> oracle;
    for (const auto& q : quotes) oracle[static_cast<int>(q.date.month())] += static_cast<double>(q.units);

    // library path: group by date, weight each day, sum by month
    std::map<Date, std::vector<ContractQuote>> by_date;
    for (const auto& q : quotes) by_date[q.date].push_back(q);
    std::map<int, double> summed;
    for (const auto& [d, day] : by_date) summed[static_cast<int>(d.month())] += daily_weight(day);

    CHECK(summed == oracle);
    CHECK(oracle.at(10) > 0.0);
    CHECK(oracle.at(11) > 0.0);
}

TEST_CASE("vintage lookups respect publication timing") {
    auto store = parse_vintage_file(kDataDir + "/vintages_2008.csv");
    YearMonth sep08 = YearMonth::from_ym(2008, 9);

    // published 2008-10-03, so the day before knows nothing
    CHECK_FALSE(store.value_as_of("emp", sep08, Date::from_ymd(2008, 10, 2)).has_value());
    // between initial release and revision the initial value is current
    auto initial = store.value_as_of("emp", sep08, Date::from_ymd(2008, 10, 20));
    REQUIRE(initial.has_value());
    CHECK(*initial == 137117.0);
    // after the revision the revised value replaces it
    auto revised = store.value_as_of("emp", sep08, Date::from_ymd(2008, 11, 7));
    REQUIRE(revised.has_value());
    CHECK(*revised == 136954.0);
}

TEST_CASE("vintage store rejects duplicates and premature publication") {
    VintageStore store;
    YearMonth m = YearMonth::from_ym(2020, 5);
    store.add("x", m, Date::from_ymd(2020, 6, 5), 1.0);
    CHECK_THROWS_AS(store.add("x", m, Date::from_ymd(2020, 6, 5), 2.0), ValueError);
    CHECK_THROWS_AS(store.add("x", m, Date::from_ymd(2020, 5, 15), 2.0), ValueError);
}

TEST_CASE("randomized vintage queries match a linear-scan oracle") {
    std::mt19937_64 rng(404);
    std::uniform_int_distribution<int> month_pick(0, 23);
    std::uniform_int_distribution<int> day_offset(0, 90);
    std::normal_distribution<double> value(100.0, 10.0);

    struct Record {
        YearMonth period;
        Date publication;
        double val;
    };
    std::vector<Record> records;
    VintageStore store;
    std::set<std::pair<std::int32_t, std::int32_t>> used;
    for (int i = 0; i < 300; ++i) {
        YearMonth period = YearMonth::from_ym(2015, 1) + month_pick(rng);
        Date pub = period.last_day() + day_offset(rng);
        if (!used.emplace(period.index(), pub.serial()).second) continue;
        double v = value(rng);
        store.add("s", period, pub, v);
        records.push_back({period, pub, v});
    }

    for (int q = 0; q < 500; ++q) {
        YearMonth period = YearMonth::from_ym(2015, 1) + month_pick(rng);
        Date as_of = period.last_day() + day_offset(rng) - 30;
        // oracle: latest publication <= as_of by straight scan
        const Record* best = nullptr;
        for (const auto& r : records)
            if (r.period == period && r.publication <= as_of &&
                (!best || r.publication > best->publication))
                best = &r;
        auto got = store.value_as_of("s", period, as_of);
        if (best == nullptr) {
            CHECK_FALSE(got.has_value());
        } else {
            REQUIRE(got.has_value());
            CHECK(*got == best->val);
        }
    }
}

TEST_CASE("vintage lookups are monotone in the as-of date") {
    auto store = parse_vintage_file(kDataDir + "/vintages_2008.csv");
    YearMonth m = YearMonth::from_ym(2008, 9);
    Date prev_pub;
    double prev_val = 0.0;
    bool have_prev = false;
    for (Date d = Date::from_ymd(2008, 9, 25); d <= Date::from_ymd(2008, 12, 20); ++d) {
        auto v = store.value_as_of("emp", m, d);
        if (!v) {
            CHECK_FALSE(have_prev);  // once published, never unpublished
            continue;
        }
        if (have_prev && *v != prev_val) {
            // the value only changes when a newer vintage arrives
            CHECK(d > prev_pub);
        }
        prev_val = *v;
        have_prev = true;
        prev_pub = d;
    }
}

TEST_CASE("release indicator flags exactly the scheduled dates") {
    auto cal = parse_release_file(kDataDir + "/releases_2008.csv");
    CHECK(cal.is_release("emp", Date::from_ymd(2008, 10, 3)));
    CHECK_FALSE(cal.is_release("emp", Date::from_ymd(2008, 10, 2)));
    CHECK_FALSE(cal.is_release("cpi", Date::from_ymd(2008, 10, 3)));

    auto period = cal.period_released_on("emp", Date::from_ymd(2008, 10, 3));
    REQUIRE(period.has_value());
    CHECK(*period == YearMonth::from_ym(2008, 9));

    // twelve releases per monthly series over the fixture year
    for (const auto& series : {"emp", "cpi", "ind"}) {
        int count = 0;
        for (Date d = Date::from_ymd(2008, 1, 1); d <= Date::from_ymd(2008, 12, 31); ++d)
            if (cal.is_release(series, d)) ++count;
        CHECK(count == 12);
    }
}

TEST_CASE("market daily builder carries probabilities forward inside cycles") {
    // calendar of 8 weekdays; quotes missing on day 3 (carried) and a
    // degenerate 0/0 quote on day 5 (also carried)
    auto cal = make_weekday_calendar(Date::from_ymd(2020, 3, 2), Date::from_ymd(2020, 3, 11));
    REQUIRE(cal->size() == 8);
    ElectionCycle cycle{2020, cal->at(0), cal->at(7), cal->at(7), std::nullopt, Party::Republican};
    CycleSet cycles({cycle});

    std::vector<ContractQuote> quotes;
    for (std::size_t i = 0; i < cal->size(); ++i) {
        if (i == 3) continue;
        double dem = i == 5 ? 0.0 : 0.4 + 0.01 * static_cast<double>(i);
        double rep = i == 5 ? 0.0 : 0.6 - 0.01 * static_cast<double>(i);
        quotes.push_back({cal->at(i), "DEM20_WTA", dem, 50 + static_cast<std::int64_t>(i)});
        quotes.push_back({cal->at(i), "REP20_WTA", rep, 40});
    }
    MarketDaily daily = build_market_daily(quotes, cal, cycles);

    CHECK(daily.prob_rep.at(std::size_t{3}) == daily.prob_rep.at(std::size_t{2}));
    CHECK(daily.observed[3] == 0);
    CHECK(daily.prob_rep.at(std::size_t{5}) == daily.prob_rep.at(std::size_t{4}));
    CHECK(daily.observed[5] == 0);
    CHECK(daily.observed[2] == 1);
    CHECK(daily.weight.at(std::size_t{3}) == 0.0);
    CHECK(daily.weight.at(std::size_t{2}) == 92.0);
    CHECK(daily.carried_dates.size() == 2);
    CHECK(daily.degenerate_dates.size() == 1);
}

TEST_CASE("market daily builder resolves completed elections the next day") {
    auto cal = make_weekday_calendar(Date::from_ymd(2016, 11, 1), Date::from_ymd(2016, 11, 10));
    // election on 2016-11-08; window extends past it
    ElectionCycle cycle{2016, cal->at(0), cal->back(), Date::from_ymd(2016, 11, 8),
                        Party::Republican, Party::Democrat};
    CycleSet cycles({cycle});

    std::vector<ContractQuote> quotes;
    for (std::size_t i = 0; i < cal->size(); ++i) {
        if (cal->at(i) > Date::from_ymd(2016, 11, 8)) break;  // no post-election quotes
        quotes.push_back({cal->at(i), "DEM16_WTA", 0.70, 100});
        quotes.push_back({cal->at(i), "REP16_WTA", 0.30, 100});
    }
    MarketDaily daily = build_market_daily(quotes, cal, cycles);

    auto e1 = cal->index_of(Date::from_ymd(2016, 11, 9));
    REQUIRE(e1.has_value());
    CHECK(daily.prob_rep.at(*e1) == 1.0);  // Republican outcome
    CHECK(daily.observed[*e1] == 1);
    CHECK(daily.weight.at(*e1) == 200.0);  // inherited from election day

    MarketDailyOptions off;
    off.resolve_outcomes = false;
    MarketDaily plain = build_market_daily(quotes, cal, cycles, off);
    CHECK(plain.prob_rep.at(*e1) == 0.30);  // carried, not forced
    CHECK(plain.observed[*e1] == 0);
}

TEST_CASE("asset table parses and aligns to the union calendar") {
    auto table = parse_csv(
        "date,series,close\n"
        "2020-01-02,sp500,3257.85\n"
        "2020-01-03,sp500,3234.85\n"
        "2020-01-03,energy,455.4\n"
        "2020-01-06,energy,460.2\n",
        "inline");
    AssetTable assets = parse_asset_csv(table);
    CHECK(assets.size() == 2);
    auto cal = asset_union_calendar(assets);
    CHECK(cal->size() == 3);
    DailySeries sp = to_daily_series(assets["sp500"], cal, SeriesUnit::Other);
    CHECK(sp.has(std::size_t{0}));
    CHECK_FALSE(sp.has(std::size_t{2}));
}

TEST_CASE("employment table parses industries into monthly series") {
    auto table = parse_csv(
        "month,industry,employment\n"
        "2020-01,oil_drilling_extraction,143.2\n"
        "2020-02,oil_drilling_extraction,141.9\n"
        "2020-01,aerospace_manufacturing,512.0\n",
        "inline");
    auto emp = parse_employment_csv(table);
    CHECK(emp.size() == 2);
    CHECK(emp.at("oil_drilling_extraction").at(YearMonth::from_ym(2020, 2)) == 141.9);

    // the default industry groupings cover the employment application
    const auto& groups = default_industry_groups();
    CHECK(groups.size() == 6);
    CHECK(groups[0].key == "oil_drilling_extraction");
    CHECK(groups[0].naics_codes.size() == 3);
}
