#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <random>

#include "eshock/errors.hpp"
#include "eshock/synth.hpp"

using namespace eshock;

namespace {

DgpConfig small_config(std::uint64_t seed) {
    DgpConfig cfg;
    cfg.n_cycles = 2;
    cfg.days_per_cycle = 120;
    cfg.gap_days = 40;
    cfg.tail_days = 30;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("config validation rejects degenerate settings") {
    DgpConfig cfg;
    cfg.n_cycles = 0;
    CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
    cfg = DgpConfig{};
    cfg.prob_ar = {0.9, 0.2};  // explosive
    CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
    cfg = DgpConfig{};
    cfg.shock_vol_pp = -1.0;
    CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
    CHECK_NOTHROW(DgpConfig{}.validate());
}

TEST_CASE("config round-trips through key-value text") {
    DgpConfig cfg = small_config(77);
    cfg.irf_kernel = {0.001, 0.0005, 0.00025};
    cfg.asset_loadings = {1.0, -0.5};
    DgpConfig back = DgpConfig::from_text(cfg.to_text(), "roundtrip");
    CHECK(back.n_cycles == cfg.n_cycles);
    CHECK(back.irf_kernel == cfg.irf_kernel);
    CHECK(back.asset_loadings == cfg.asset_loadings);
    CHECK(back.seed == cfg.seed);

    CHECK_THROWS_AS(DgpConfig::from_text("nonsense_key = 3\n", "bad"), InvalidConfig);
    CHECK_THROWS_AS(DgpConfig::from_text("n_cycles 3\n", "bad"), InvalidConfig);
}

TEST_CASE("same seed reproduces the simulation bit for bit") {
    auto same_bits = [](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
        return x.size() == y.size() &&
               std::memcmp(x.data(), y.data(), sizeof(double) * static_cast<std::size_t>(x.size())) == 0;
    };
    DgpConfig cfg = small_config(4242);
    SimulatedData a = simulate_dgp(cfg);
    SimulatedData b = simulate_dgp(cfg);
    CHECK(same_bits(a.prob.values(), b.prob.values()));
    CHECK(same_bits(a.true_shock_pp.values(), b.true_shock_pp.values()));
    CHECK(same_bits(a.volume.values(), b.volume.values()));
    CHECK(same_bits(a.assets.at("sector_0").values(), b.assets.at("sector_0").values()));
    CHECK(same_bits(a.employment_log.values(), b.employment_log.values()));

    DgpConfig other = small_config(4243);
    SimulatedData c = simulate_dgp(other);
    CHECK_FALSE(same_bits(a.prob.values(), c.prob.values()));
}

TEST_CASE("zero shock volatility decouples assets from the probability") {
    DgpConfig cfg = small_config(7);
    cfg.shock_vol_pp = 0.0;
    SimulatedData sim = simulate_dgp(cfg);
    CHECK(sim.true_shock_pp.values().cwiseAbs().maxCoeff() == 0.0);
    // the kernel moves nothing, so returns are pure noise
    const auto& y = sim.assets.at("sector_0");
    double covar = 0.0;
    int n = 0;
    for (std::size_t i = 1; i < sim.calendar->size(); ++i) {
        if (!sim.prob.has(i) || !sim.prob.has(i - 1)) continue;
        covar += (sim.prob.at(i) - sim.prob.at(i - 1)) * (y.at(i) - y.at(i - 1));
        ++n;
    }
    CHECK(n > 0);
    CHECK(std::abs(covar / n) < 1e-4);
}

TEST_CASE("simulated probability changes match the configured volatility") {
    // injected residual volatility shows up in the fitted-scale moments:
    // over replications the sample sd of the injected shocks concentrates
    // on shock_vol_pp
    const int reps = 200;
    double mean_sd = 0.0;
    std::vector<double> sds;
    for (int r = 0; r < reps; ++r) {
        DgpConfig cfg = small_config(substream_seed(1000, static_cast<std::uint64_t>(r)));
        cfg.n_cycles = 1;
        cfg.days_per_cycle = 60;
        SimulatedData sim = simulate_dgp(cfg);
        double ss = 0.0;
        int n = 0;
        for (std::size_t i = 0; i < sim.calendar->size(); ++i) {
            if (sim.cycles.cycle_of(sim.calendar->at(i)) == nullptr) continue;
            ss += sim.true_shock_pp.at(i) * sim.true_shock_pp.at(i);
            ++n;
        }
        const double sd = std::sqrt(ss / n);
        sds.push_back(sd);
        mean_sd += sd / reps;
    }
    double var = 0.0;
    for (double sd : sds) var += (sd - mean_sd) * (sd - mean_sd) / (reps - 1);
    const double mc_se = std::sqrt(var / reps);
    DgpConfig cfg = small_config(0);
    CHECK(std::abs(mean_sd - cfg.shock_vol_pp) <= 3.0 * mc_se);
}

TEST_CASE("true impulse response is the cumulative return kernel") {
    DgpConfig cfg;
    SUBCASE("single impulse gives a flat step") {
        cfg.irf_kernel = {0.001};
        auto truth = true_irf(cfg, 5);
        for (double v : truth) CHECK(v == doctest::Approx(0.01));  // 1% per 10pp
    }
    SUBCASE("zero kernel gives zero truth") {
        cfg.irf_kernel = {0.0, 0.0};
        for (double v : true_irf(cfg, 8)) CHECK(v == 0.0);
    }
    SUBCASE("arbitrary kernel matches an independent convolution") {
        cfg.irf_kernel = {0.002, -0.001, 0.0005, 0.0003};
        auto truth = true_irf(cfg, 7);
        // oracle: discrete convolution of the kernel with a unit impulse,
        // cumulated, computed with independent loops
        std::vector<double> returns(8, 0.0);
        for (std::size_t t = 0; t < returns.size(); ++t)
            for (std::size_t s = 0; s < cfg.irf_kernel.size(); ++s)
                if (t >= s && t - s == 0) returns[t] += cfg.irf_kernel[s];
        double cum = 0.0;
        for (std::size_t h = 0; h < returns.size(); ++h) {
            cum += returns[h];
            CHECK(truth[h] == doctest::Approx(10.0 * cum).epsilon(1e-12));
        }
    }
}

TEST_CASE("hac oracle agrees with the production estimator") {
    std::mt19937_64 rng(1234);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> wdist(0.2, 4.0);
    for (int rep = 0; rep < 10; ++rep) {
        const Eigen::Index n = 150, k = 4;
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
            HacCovariance hac = newey_west(fit, X, L);
            Eigen::MatrixXd oracle = oracle_hac(fit.residuals, X.values, X.weights, L);
            const double scale = oracle.cwiseAbs().maxCoeff();
            CHECK((hac.covariance - oracle).cwiseAbs().maxCoeff() / scale < 1e-12);
            // the literal double sum is symmetric up to roundoff
            CHECK((oracle - oracle.transpose()).cwiseAbs().maxCoeff() / scale < 1e-12);
        }
        // L = 0 doubles as an HC0 cross-check
        HacCovariance hc0 = newey_west(fit, X, 0);
        Eigen::MatrixXd oracle0 = oracle_hac(fit.residuals, X.values, X.weights, 0);
        CHECK((hc0.covariance - oracle0).cwiseAbs().maxCoeff() /
                  oracle0.cwiseAbs().maxCoeff() <
              1e-12);
    }
}

TEST_CASE("identification recovers injected residuals and degrades with confounding") {
    // wide panel so the parameter count stays a small share of the sample
    DgpConfig base;
    base.n_cycles = 24;
    base.days_per_cycle = 250;
    base.gap_days = 40;
    base.tail_days = 30;
    base.seed = 321;

    double last = 1.0;
    bool first = true;
    for (double confound : {0.0, 1.0, 2.0}) {
        DgpConfig cfg = base;
        cfg.confound_vol_pp = confound;
        SimulatedData sim = simulate_dgp(cfg);
        IdentificationRun run = run_identification(sim);
        if (first) {
            CHECK(run.correlation > 0.99);
            first = false;
        }
        CHECK(run.correlation < last);
        last = run.correlation;
    }
}

TEST_CASE("estimation bias shrinks as cycles lengthen") {
    // three panel sizes, same kernel; absolute bias of the impact estimate
    // averaged over replications must fall monotonically (within noise,
    // enforced loosely via ordering of the largest vs smallest)
    const int reps = 40;
    std::vector<double> biases;
    for (int days : {60, 150, 375}) {
        double bias = 0.0;
        for (int r = 0; r < reps; ++r) {
            DgpConfig cfg;
            cfg.n_cycles = 2;
            cfg.days_per_cycle = days;
            cfg.gap_days = 40;
            cfg.tail_days = 30;
            cfg.seed = substream_seed(777 + days, static_cast<std::uint64_t>(r));
            SimulatedData sim = simulate_dgp(cfg);
            IdentificationRun ident = run_identification(sim);
            LpSpec spec;
            spec.max_horizon = 0;
            spec.weighted = true;
            spec.normalization_scale =
                impact_normalization(ident.extracted, sim.prob, &sim.observed, true);
            ImpulseResponse ir = run_lp_daily(ident.extracted, sim.assets.at("sector_0"), spec);
            bias += std::abs(ir.horizons[0].coef - true_irf(cfg, 0)[0]) / reps;
        }
        biases.push_back(bias);
    }
    CHECK(biases.back() < biases.front());
}

TEST_CASE("coverage experiment is deterministic and near nominal") {
    DgpConfig cfg;
    cfg.n_cycles = 7;
    cfg.days_per_cycle = 250;
    cfg.seed = 20240101;
    CoverageResult a = coverage_experiment(cfg, 60, 0.90, 5, 4);
    CoverageResult b = coverage_experiment(cfg, 60, 0.90, 5, 2);
    CHECK(a.coverage == b.coverage);  // thread count cannot matter
    for (double c : a.coverage) {
        CHECK(c > 0.75);
        CHECK(c <= 1.0);
    }

    // nesting: tighter bands cover less
    CoverageResult narrow = coverage_experiment(cfg, 60, 0.68, 5, 4);
    for (std::size_t h = 0; h < a.coverage.size(); ++h)
        CHECK(narrow.coverage[h] <= a.coverage[h]);
}

TEST_CASE("null calibration: no effect means flat mean estimates") {
    DgpConfig cfg;
    cfg.n_cycles = 4;
    cfg.days_per_cycle = 150;
    cfg.irf_kernel = {0.0};
    cfg.seed = 555;
    MeanIrfResult res = mean_irf_experiment(cfg, 80, 8, 4);
    for (std::size_t h = 0; h < res.mean_coef.size(); ++h)
        CHECK(std::abs(res.mean_coef[h]) <= 3.0 * res.mc_se[h]);
}
