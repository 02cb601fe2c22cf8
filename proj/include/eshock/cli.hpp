#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "eshock/ingest.hpp"
#include "eshock/lp.hpp"
#include "eshock/synth.hpp"

namespace eshock {

inline constexpr const char* kVersion = "0.1.0";

/// Declarative run description loaded from a single JSON file. Paths are
/// resolved relative to the config file's directory.
struct RunConfig {
    // input files
    std::string market_csv;
    std::string asset_csv;
    std::string vintage_csv;
    std::string release_csv;
    std::string events_csv;        // optional
    std::string employment_csv;    // optional
    std::string dgp_config;        // key-value text, for `simulate`

    // series ids inside asset_csv / vintage_csv
    std::string sp500_series = "sp500";
    std::string yield_series = "y2";
    MacroSeriesIds macro_ids;
    std::string unemployment_series = "unemp";
    std::string pce_series = "pce";

    struct Cycle {
        int id = 0;
        Date first, last, election;
        std::optional<Party> winner;
        Party incumbent = Party::Democrat;
    };
    std::vector<Cycle> cycles;

    // shock construction
    bool weighted_first_stage = false;
    bool release_day_indicators = true;
    bool resolve_outcomes = true;
    WeightRule weight_rule = WeightRule::SumBothContracts;
    std::vector<int> drop_cycles;

    // projections
    std::string variant = "baseline";  // baseline | narrative | crude | one-step
    int horizons = 65;
    int narrative_window = 5;
    std::optional<bool> lp_weighted;   // default: variant-dependent
    int one_month_days = 21;
    std::vector<std::string> series;   // asset series to project
    struct Exclusion {
        std::string series;  // empty = every series
        Date from, to;
    };
    std::vector<Exclusion> exclusions;

    // monthly employment block
    std::vector<std::string> industries;
    int monthly_horizons = 12;
    std::optional<YearMonth> sample_first_month;
    std::optional<YearMonth> sample_last_month;
    std::vector<std::pair<YearMonth, YearMonth>> exclude_outcome_months;

    std::string out_dir = "out";
    std::uint64_t seed = 0;  // 0 = defer to the DGP file (simulate) or the default (validate)

    std::uint64_t config_hash = 0;  // FNV-1a of the config file bytes

    static RunConfig from_json_file(const std::string& path);

    [[nodiscard]] bool weighted_lp() const {
        if (lp_weighted) return *lp_weighted;
        return variant == "baseline" || variant == "one-step";
    }
};

std::uint64_t fnv1a64(std::string_view bytes);

/// One line per output file: "# eshock <version> cmd=<cmd> config=<hex>".
std::string output_header(const RunConfig& config, const std::string& command);

int cmd_shocks(const RunConfig& config, std::ostream& log);
int cmd_irf(const RunConfig& config, std::ostream& log);
int cmd_narrative(const RunConfig& config, std::ostream& log);
int cmd_simulate(const RunConfig& config, std::ostream& log);

/// Runs the oracle suite; returns 0 when every property holds, 1 otherwise
/// with the failing property named on the log. `mutate` deliberately breaks
/// one property ("hac-bandwidth") to prove the harness can fail.
int cmd_validate(const RunConfig& config, std::ostream& log, const std::string& mutate = "");

}  // namespace eshock
