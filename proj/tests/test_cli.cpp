#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "eshock/cli.hpp"
#include "eshock/csv.hpp"
#include "eshock/errors.hpp"

using namespace eshock;
namespace fs = std::filesystem;

namespace {

const std::string kBin = ESHOCK_BIN;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("eshock_cli_test_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

int run(const std::string& args) {
    const std::string cmd = kBin + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) { return read_text_file(p.string()); }

void write(const fs::path& p, const std::string& content) {
    write_text_file(p.string(), content);
}

// Minimal XML well-formedness check: tags balance, attributes quoted,
// comments and declarations skipped.
bool well_formed_xml(const std::string& text) {
    std::vector<std::string> stack;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        if (text[i] != '<') {
            ++i;
            continue;
        }
        if (text.compare(i, 4, "<!--") == 0) {
            std::size_t end = text.find("-->", i);
            if (end == std::string::npos) return false;
            i = end + 3;
            continue;
        }
        if (text.compare(i, 2, "<?") == 0) {
            std::size_t end = text.find("?>", i);
            if (end == std::string::npos) return false;
            i = end + 2;
            continue;
        }
        std::size_t close = i;
        bool quoted = false;
        char quote = 0;
        while (close < n && (quoted || text[close] != '>')) {
            if (quoted && text[close] == quote) quoted = false;
            else if (!quoted && (text[close] == '"' || text[close] == '\'')) {
                quoted = true;
                quote = text[close];
            }
            ++close;
        }
        if (close >= n) return false;
        std::string tag = text.substr(i + 1, close - i - 1);
        if (!tag.empty() && tag.front() == '/') {
            std::string name = tag.substr(1);
            if (stack.empty() || stack.back() != name) return false;
            stack.pop_back();
        } else if (!tag.empty() && tag.back() != '/') {
            std::string name = tag.substr(0, tag.find_first_of(" \t\n"));
            stack.push_back(name);
        }
        i = close + 1;
    }
    return stack.empty();
}

void write_small_dgp(const fs::path& dir) {
    write(dir / "dgp.txt",
          "n_cycles = 3\ndays_per_cycle = 150\ngap_days = 50\ntail_days = 80\n"
          "irf_kernel = 0.001,0.0005\nasset_loadings = 1.0,-1.0,0.5\nseed = 2718\n");
    write(dir / "sim.json",
          "{ \"data\": { \"dgp_config\": \"dgp.txt\" }, \"out_dir\": \"" +
              (dir / "synth").string() + "\" }");
}

}  // namespace

TEST_CASE("usage errors exit with code two") {
    CHECK(run("shocks --config /nonexistent/config.json") == 2);
    CHECK(run("") == 2);
    CHECK(run("frobnicate --config x") == 2);

    TempDir tmp;
    write(tmp.path / "empty.json", "");
    CHECK(run("shocks --config " + (tmp.path / "empty.json").string()) == 2);
    write(tmp.path / "badkey.json", "{\"no_such_section\": 1}");
    CHECK(run("shocks --config " + (tmp.path / "badkey.json").string()) == 2);
}

TEST_CASE("simulate, shocks, irf, and narrative chain end to end") {
    TempDir tmp;
    write_small_dgp(tmp.path);
    REQUIRE(run("simulate --config " + (tmp.path / "sim.json").string()) == 0);

    const fs::path synth = tmp.path / "synth";
    for (const char* name : {"market.csv", "assets.csv", "vintages.csv", "releases.csv",
                             "events.csv", "employment.csv", "run_config.json"})
        CHECK(fs::exists(synth / name));

    // the emitted run config drives the downstream commands unchanged
    const std::string rc = (synth / "run_config.json").string();
    REQUIRE(run("shocks --config " + rc + " --out " + (tmp.path / "s").string()) == 0);
    REQUIRE(run("irf --config " + rc + " --out " + (tmp.path / "i").string()) == 0);
    REQUIRE(run("narrative --config " + rc + " --out " + (tmp.path / "n").string()) == 0);

    // shock rows carry the documented schema and the config hash header
    CsvTable shocks = read_csv((tmp.path / "s" / "shocks.csv").string());
    CHECK(shocks.columns == std::vector<std::string>{"date", "shock_pp", "weight", "cycle"});
    CHECK(shocks.rows.size() == 3 * (150 - 5));
    CHECK(slurp(tmp.path / "s" / "shocks.csv").substr(0, 8) == "# eshock");

    // IRF csv: schema, horizon count, band nesting in every row
    CsvTable irf = read_csv((tmp.path / "i" / "irf_baseline_sector_0.csv").string());
    CHECK(to_csv_line(irf.columns) == std::string(kIrfCsvHeader) + "\n");
    CHECK(irf.rows.size() == 66);
    for (std::size_t r = 0; r < irf.rows.size(); ++r) {
        const double lo68 = field_double(irf, r, irf.column("lo68"));
        const double hi68 = field_double(irf, r, irf.column("hi68"));
        const double lo90 = field_double(irf, r, irf.column("lo90"));
        const double hi90 = field_double(irf, r, irf.column("hi90"));
        CHECK(lo90 <= lo68);
        CHECK(lo68 <= hi68);
        CHECK(hi68 <= hi90);
    }

    // SVGs are self-contained well-formed XML
    for (const char* name : {"irf_baseline_prob.svg", "irf_baseline_sector_0.svg",
                             "irf_baseline_sector_1.svg", "irf_baseline_sector_2.svg"}) {
        const std::string svg = slurp(tmp.path / "i" / name);
        CHECK(well_formed_xml(svg));
        CHECK(svg.find("href") == std::string::npos);
        CHECK(svg.find("url(") == std::string::npos);
    }

    // narrative outputs one value per event
    CsvTable events = read_csv((synth / "events.csv").string());
    CsvTable narr = read_csv((tmp.path / "n" / "narrative_events.csv").string());
    CHECK(narr.rows.size() == events.rows.size());
}

TEST_CASE("reruns with identical inputs are byte-identical") {
    TempDir tmp;
    write_small_dgp(tmp.path);
    REQUIRE(run("simulate --config " + (tmp.path / "sim.json").string()) == 0);
    const std::string rc = (tmp.path / "synth" / "run_config.json").string();
    REQUIRE(run("shocks --config " + rc + " --out " + (tmp.path / "a").string()) == 0);
    REQUIRE(run("shocks --config " + rc + " --out " + (tmp.path / "b").string()) == 0);
    for (const char* name : {"shocks.csv", "fit_summary.txt", "largest_shocks.csv", "audit.txt"})
        CHECK(slurp(tmp.path / "a" / name) == slurp(tmp.path / "b" / name));

    // a different seed changes the simulated world
    REQUIRE(run("simulate --config " + (tmp.path / "sim.json").string() + " --seed 99 --out " +
                (tmp.path / "synth99").string()) == 0);
    CHECK(slurp(tmp.path / "synth99" / "market.csv") !=
          slurp(tmp.path / "synth" / "market.csv"));
}

TEST_CASE("alternate variants produce their own response files") {
    TempDir tmp;
    write_small_dgp(tmp.path);
    REQUIRE(run("simulate --config " + (tmp.path / "sim.json").string()) == 0);
    const fs::path synth = tmp.path / "synth";

    // patch the emitted config: narrative variant, shorter horizon
    std::string rc = slurp(synth / "run_config.json");
    rc.replace(rc.find("\"baseline\""), 10, "\"narrative\"");
    rc.replace(rc.find("\"horizons\": 65"), 14, "\"horizons\": 12");
    write(tmp.path / "narrative.json", rc);
    // paths in the emitted config are relative to its directory
    REQUIRE(run("irf --config " + (synth / "../narrative.json").string() + " --out " +
                (tmp.path / "nv").string()) == 2);  // relative paths break: documented behavior
    write(synth / "narrative.json", rc);
    REQUIRE(run("irf --config " + (synth / "narrative.json").string() + " --out " +
                (tmp.path / "nv").string()) == 0);
    CHECK(fs::exists(tmp.path / "nv" / "irf_narrative_sector_0.csv"));

    std::string crude = slurp(synth / "run_config.json");
    crude.replace(crude.find("\"baseline\""), 10, "\"crude\"");
    crude.replace(crude.find("\"horizons\": 65"), 14, "\"horizons\": 8");
    write(synth / "crude.json", crude);
    REQUIRE(run("irf --config " + (synth / "crude.json").string() + " --out " +
                (tmp.path / "cv").string()) == 0);
    CHECK(fs::exists(tmp.path / "cv" / "irf_crude_sector_1.csv"));

    std::string onestep = slurp(synth / "run_config.json");
    onestep.replace(onestep.find("\"baseline\""), 10, "\"one-step\"");
    onestep.replace(onestep.find("\"horizons\": 65"), 14, "\"horizons\": 6");
    write(synth / "onestep.json", onestep);
    REQUIRE(run("irf --config " + (synth / "onestep.json").string() + " --out " +
                (tmp.path / "ov").string()) == 0);
    CHECK(fs::exists(tmp.path / "ov" / "irf_one-step_sector_0.csv"));
}

TEST_CASE("a zero-kernel world produces a flat response") {
    TempDir tmp;
    write(tmp.path / "dgp.txt",
          "n_cycles = 4\ndays_per_cycle = 200\ngap_days = 50\ntail_days = 80\n"
          "irf_kernel = 0.0\nasset_loadings = 1.0\nseed = 424242\n");
    write(tmp.path / "sim.json",
          "{ \"data\": { \"dgp_config\": \"dgp.txt\" }, \"out_dir\": \"" +
              (tmp.path / "synth").string() + "\" }");
    REQUIRE(run("simulate --config " + (tmp.path / "sim.json").string()) == 0);
    REQUIRE(run("irf --config " + (tmp.path / "synth" / "run_config.json").string() +
                " --out " + (tmp.path / "i").string()) == 0);

    CsvTable irf = read_csv((tmp.path / "i" / "irf_baseline_sector_0.csv").string());
    int inside = 0;
    for (std::size_t r = 0; r < irf.rows.size(); ++r) {
        const double coef = field_double(irf, r, irf.column("coef"));
        const double se = field_double(irf, r, irf.column("se"));
        if (std::abs(coef) < 2.0 * se) ++inside;
    }
    // flat truth: at least 90% of horizons insignificant at two sigma
    CHECK(inside * 10 >= static_cast<int>(irf.rows.size()) * 9);
}

TEST_CASE("validate passes clean and fails under mutation") {
    TempDir tmp;
    write(tmp.path / "min.json", "{}");
    CHECK(run("validate --config " + (tmp.path / "min.json").string()) == 0);

    // deliberate off-by-one bandwidth must fail and name the property
    const std::string cmd = kBin + " validate --config " + (tmp.path / "min.json").string() +
                            " --mutate hac-bandwidth > " + (tmp.path / "log.txt").string() +
                            " 2>&1";
    const int status = std::system(cmd.c_str());
    CHECK(WEXITSTATUS(status) == 1);
    const std::string log = slurp(tmp.path / "log.txt");
    CHECK(log.find("FAIL hac-oracle") != std::string::npos);
}
