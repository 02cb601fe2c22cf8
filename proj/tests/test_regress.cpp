#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "eshock/errors.hpp"
#include "eshock/regress.hpp"

using namespace eshock;

namespace {

DesignMatrix random_design(std::mt19937_64& rng, Eigen::Index n, Eigen::Index k,
                           bool intercept = true, bool random_weights = true) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.1, 3.0);
    DesignMatrix X;
    X.values.resize(n, k);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < k; ++j) X.values(i, j) = normal(rng);
    if (intercept) X.values.col(0).setOnes();
    X.labels.resize(static_cast<std::size_t>(k));
    for (Eigen::Index j = 0; j < k; ++j) X.labels[static_cast<std::size_t>(j)] = "x" + std::to_string(j);
    if (intercept) X.labels[0] = "const";
    X.weights.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) X.weights[i] = random_weights ? unif(rng) : 1.0;
    return X;
}

Eigen::VectorXd random_response(std::mt19937_64& rng, const DesignMatrix& X, double noise_sd) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd beta(X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) beta[j] = normal(rng);
    Eigen::VectorXd y = X.values * beta;
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += noise_sd * normal(rng);
    return y;
}

// Brute-force normal-equations solve; independent of the QR path under test.
Eigen::VectorXd normal_equations_oracle(const DesignMatrix& X, const Eigen::VectorXd& y) {
    const Eigen::MatrixXd W = X.weights.asDiagonal();
    const Eigen::MatrixXd XtWX = X.values.transpose() * W * X.values;
    const Eigen::VectorXd XtWy = X.values.transpose() * W * y;
    return XtWX.fullPivLu().solve(XtWy);
}

// White/HC0 sandwich computed directly from definitions.
Eigen::MatrixXd hc0_oracle(const DesignMatrix& X, const Eigen::VectorXd& residuals) {
    const Eigen::MatrixXd W = X.weights.asDiagonal();
    const Eigen::MatrixXd bread = (X.values.transpose() * W * X.values).inverse();
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(X.cols(), X.cols());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        if (X.weights[i] <= 0.0) continue;
        const Eigen::VectorXd g = X.weights[i] * residuals[i] * X.values.row(i).transpose();
        meat += g * g.transpose();
    }
    return bread * meat * bread;
}

// Literal double sum over (t, s) pairs with Bartlett weights on |t-s|;
// no lag-wise shortcuts. Zero-weight rows are not part of the sample.
Eigen::MatrixXd double_sum_oracle(const DesignMatrix& X, const Eigen::VectorXd& residuals,
                                  int L) {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        if (X.weights[i] > 0.0) rows.push_back(i);
    const auto n = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index k = X.cols();
    Eigen::MatrixXd G(n, k);
    for (Eigen::Index t = 0; t < n; ++t)
        G.row(t) = X.weights[rows[t]] * residuals[rows[t]] * X.values.row(rows[t]);
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index t = 0; t < n; ++t) {
        for (Eigen::Index s = 0; s < n; ++s) {
            const auto gap = static_cast<int>(t > s ? t - s : s - t);
            if (gap > L) continue;
            const double w = 1.0 - static_cast<double>(gap) / (L + 1.0);
            meat += w * (G.row(t).transpose() * G.row(s));
        }
    }
    Eigen::MatrixXd Xw(n, k);
    for (Eigen::Index t = 0; t < n; ++t)
        Xw.row(t) = std::sqrt(X.weights[rows[t]]) * X.values.row(rows[t]);
    const Eigen::MatrixXd bread = (Xw.transpose() * Xw).inverse();
    return bread * meat * bread;
}

double rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const double scale = std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
    if (scale == 0.0) return 0.0;
    return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

TEST_CASE("exactly linear response is interpolated with zero residuals") {
    std::mt19937_64 rng(11);
    DesignMatrix X = random_design(rng, 40, 4, true, false);
    Eigen::VectorXd y = random_response(rng, X, 0.0);
    FitResult fit = fit_wls(X, y);
    CHECK(fit.residuals.cwiseAbs().maxCoeff() < 1e-10);
    CHECK(fit.r_squared == doctest::Approx(1.0));
    // coefficients recover the exact linear map
    Eigen::VectorXd oracle = normal_equations_oracle(X, y);
    CHECK((fit.coefficients - oracle).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("weighted fit equals unweighted fit on sqrt-weight-scaled data") {
    std::mt19937_64 rng(22);
    for (int rep = 0; rep < 50; ++rep) {
        DesignMatrix X = random_design(rng, 120, 5);
        Eigen::VectorXd y = random_response(rng, X, 0.5);
        FitResult weighted = fit_wls(X, y);

        DesignMatrix S = X;
        Eigen::VectorXd ys = y;
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            const double s = std::sqrt(X.weights[i]);
            S.values.row(i) *= s;
            ys[i] *= s;
        }
        S.weights.setOnes();
        FitResult plain = fit_wls(S, ys);
        CHECK((weighted.coefficients - plain.coefficients).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("coefficients match the normal-equations oracle on random problems") {
    std::mt19937_64 rng(33);
    for (int rep = 0; rep < 20; ++rep) {
        DesignMatrix X = random_design(rng, 200, 6);
        Eigen::VectorXd y = random_response(rng, X, 1.0);
        FitResult fit = fit_wls(X, y);
        Eigen::VectorXd oracle = normal_equations_oracle(X, y);
        const double scale = std::max(1.0, oracle.cwiseAbs().maxCoeff());
        CHECK((fit.coefficients - oracle).cwiseAbs().maxCoeff() / scale < 1e-8);
    }
}

TEST_CASE("weighted residuals are orthogonal to every design column") {
    std::mt19937_64 rng(44);
    DesignMatrix X = random_design(rng, 150, 5);
    Eigen::VectorXd y = random_response(rng, X, 2.0);
    FitResult fit = fit_wls(X, y);
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        double dot = 0.0, scale = 0.0;
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            dot += X.weights[i] * fit.residuals[i] * X.values(i, j);
            scale += std::abs(X.weights[i] * y[i] * X.values(i, j));
        }
        CHECK(std::abs(dot) <= 1e-8 * std::max(1.0, scale));
    }
    // with an intercept the weighted residual sum vanishes too
    double sum = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) sum += X.weights[i] * fit.residuals[i];
    CHECK(std::abs(sum) <= 1e-8 * X.weights.sum());
}

TEST_CASE("row permutations leave coefficients unchanged") {
    std::mt19937_64 rng(55);
    DesignMatrix X = random_design(rng, 80, 4);
    Eigen::VectorXd y = random_response(rng, X, 1.0);
    FitResult base = fit_wls(X, y);

    std::vector<Eigen::Index> perm(80);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    DesignMatrix P = X;
    Eigen::VectorXd yp(y.size());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        P.values.row(i) = X.values.row(perm[static_cast<std::size_t>(i)]);
        P.weights[i] = X.weights[perm[static_cast<std::size_t>(i)]];
        yp[i] = y[perm[static_cast<std::size_t>(i)]];
    }
    FitResult permuted = fit_wls(P, yp);
    const double scale = std::max(1.0, base.coefficients.cwiseAbs().maxCoeff());
    CHECK((base.coefficients - permuted.coefficients).cwiseAbs().maxCoeff() / scale < 1e-12);
}

TEST_CASE("zero-weight rows change nothing") {
    std::mt19937_64 rng(66);
    DesignMatrix X = random_design(rng, 60, 4);
    Eigen::VectorXd y = random_response(rng, X, 1.0);
    FitResult base = fit_wls(X, y);
    HacCovariance base_cov = newey_west(base, X, 3);

    DesignMatrix Xz = X;
    Xz.values.conservativeResize(62, Eigen::NoChange);
    Xz.values.row(60).setConstant(99.0);
    Xz.values.row(61).setConstant(-7.0);
    Xz.weights.conservativeResize(62);
    Xz.weights[60] = 0.0;
    Xz.weights[61] = 0.0;
    Eigen::VectorXd yz(62);
    yz.head(60) = y;
    yz[60] = 1e6;
    yz[61] = -1e6;
    FitResult padded = fit_wls(Xz, yz);
    CHECK((base.coefficients - padded.coefficients).cwiseAbs().maxCoeff() == 0.0);
    CHECK(padded.n_obs == base.n_obs);

    HacCovariance padded_cov = newey_west(padded, Xz, 3);
    CHECK(rel_err(base_cov.covariance, padded_cov.covariance) == 0.0);
}

TEST_CASE("r-squared stays inside [0,1] with an intercept") {
    std::mt19937_64 rng(77);
    for (int rep = 0; rep < 30; ++rep) {
        DesignMatrix X = random_design(rng, 50, 3);
        Eigen::VectorXd y = random_response(rng, X, 10.0);  // mostly noise
        FitResult fit = fit_wls(X, y);
        CHECK(fit.r_squared >= 0.0);
        CHECK(fit.r_squared <= 1.0);
        CHECK(fit.has_intercept);
    }
}

TEST_CASE("rank-deficient designs fail loudly and name the offending columns") {
    std::mt19937_64 rng(88);
    DesignMatrix X = random_design(rng, 40, 4);
    X.values.col(3) = 2.0 * X.values.col(1);  // exact collinearity
    Eigen::VectorXd y = random_response(rng, X, 1.0);
    try {
        fit_wls(X, y);
        FAIL("expected RankDeficient");
    } catch (const RankDeficient& e) {
        const std::string msg = e.what();
        const bool names_one = msg.find("x1") != std::string::npos ||
                               msg.find("x3") != std::string::npos;
        CHECK(names_one);
    }
}

TEST_CASE("bandwidth rule: floor of three quarters of the cube root") {
    CHECK(nw_bandwidth(4096) == 12);  // exact cube: 0.75 * 16
    CHECK(nw_bandwidth(1) == 0);
    // 1259^(1/3) = 10.7980..., times 0.75 = 8.098 -> 8
    double raw = 0.0;
    CHECK(nw_bandwidth(1259, &raw) == 8);
    CHECK(raw == doctest::Approx(8.098474).epsilon(1e-5));
    CHECK(nw_bandwidth(8) == 1);    // exact cube: 0.75 * 2 = 1.5 -> 1
    CHECK(nw_bandwidth(27) == 2);   // 0.75 * 3 = 2.25 -> 2
    CHECK(nw_bandwidth(1000) == 7); // 0.75 * 10 = 7.5 -> 7
}

TEST_CASE("bartlett covariance with zero lags equals the robust sandwich") {
    std::mt19937_64 rng(99);
    DesignMatrix X = random_design(rng, 100, 4);
    Eigen::VectorXd y = random_response(rng, X, 1.5);
    FitResult fit = fit_wls(X, y);
    HacCovariance hac = newey_west(fit, X, 0);
    Eigen::MatrixXd oracle = hc0_oracle(X, fit.residuals);
    CHECK(rel_err(hac.covariance, oracle) < 1e-12);
}

TEST_CASE("bartlett covariance matches the literal double-sum oracle") {
    std::mt19937_64 rng(101);
    for (int rep = 0; rep < 10; ++rep) {
        DesignMatrix X = random_design(rng, 120, 4);
        Eigen::VectorXd y = random_response(rng, X, 1.0);
        FitResult fit = fit_wls(X, y);
        for (int L : {0, 1, 3, 8}) {
            HacCovariance hac = newey_west(fit, X, L);
            Eigen::MatrixXd oracle = double_sum_oracle(X, fit.residuals, L);
            CHECK(rel_err(hac.covariance, oracle) < 1e-12);
            CHECK(rel_err(hac.covariance, hac.covariance.transpose()) == 0.0);
            CHECK((hac.covariance.diagonal().array() >= 0.0).all());
        }
    }
}

TEST_CASE("iid residuals with orthonormal design give variances near sigma^2") {
    // Monte Carlo: X fixed orthonormal, y pure noise; average the estimated
    // coefficient variances over replications.
    std::mt19937_64 rng(202);
    std::normal_distribution<double> normal(0.0, 1.0);
    const Eigen::Index n = 400, k = 3;
    Eigen::MatrixXd raw(n, k);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < k; ++j) raw(i, j) = normal(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, k);

    DesignMatrix X;
    X.values = Q;
    X.labels = {"q0", "q1", "q2"};
    X.weights = Eigen::VectorXd::Ones(n);

    const double sigma = 0.7;
    Eigen::VectorXd avg = Eigen::VectorXd::Zero(k);
    const int reps = 200;
    for (int rep = 0; rep < reps; ++rep) {
        Eigen::VectorXd y(n);
        for (Eigen::Index i = 0; i < n; ++i) y[i] = sigma * normal(rng);
        FitResult fit = fit_wls(X, y);
        HacCovariance hac = newey_west(fit, X, 3);
        avg += hac.covariance.diagonal() / static_cast<double>(reps);
    }
    for (Eigen::Index j = 0; j < k; ++j)
        CHECK(avg[j] == doctest::Approx(sigma * sigma).epsilon(0.05));
}

TEST_CASE("hac covariance ignores constant shifts of the response") {
    std::mt19937_64 rng(303);
    DesignMatrix X = random_design(rng, 90, 4);
    Eigen::VectorXd y = random_response(rng, X, 1.0);
    FitResult a = fit_wls(X, y);
    FitResult b = fit_wls(X, (y.array() + 41.5).matrix().eval());
    HacCovariance ca = newey_west(a, X, 4);
    HacCovariance cb = newey_west(b, X, 4);
    // slopes keep their uncertainty; only the intercept row/column may move
    for (Eigen::Index i = 1; i < X.cols(); ++i)
        for (Eigen::Index j = 1; j < X.cols(); ++j)
            CHECK(ca.covariance(i, j) ==
                  doctest::Approx(cb.covariance(i, j)).epsilon(1e-9));
}

TEST_CASE("lag truncation must stay below the sample size") {
    std::mt19937_64 rng(404);
    DesignMatrix X = random_design(rng, 20, 2);
    Eigen::VectorXd y = random_response(rng, X, 1.0);
    FitResult fit = fit_wls(X, y);
    CHECK_THROWS_AS(newey_west(fit, X, 20), ValueError);
    CHECK_NOTHROW(newey_west(fit, X, 19));
}

TEST_CASE("residualized target orthogonal to controls comes back unchanged") {
    std::mt19937_64 rng(505);
    const Eigen::Index n = 100;
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd raw(n, 3);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < 3; ++j) raw(i, j) = normal(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, 3);

    DesignMatrix X;
    X.values = Q;
    X.labels = {"a", "b", "target"};
    X.weights = Eigen::VectorXd::Ones(n);
    DesignMatrix out = fwl_residualize(X, {"target"});
    CHECK((out.values.col(0) - Q.col(2)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("fwl identity: residualized slope equals the full-regression slope") {
    std::mt19937_64 rng(606);
    for (int rep = 0; rep < 10; ++rep) {
        DesignMatrix X = random_design(rng, 150, 6);
        Eigen::VectorXd y = random_response(rng, X, 1.0);
        FitResult full = fit_wls(X, y);

        DesignMatrix resid = fwl_residualize(X, {"x3"});
        FitResult partial = fit_wls(resid, y);
        CHECK(partial.coefficients[0] ==
              doctest::Approx(full.coefficient("x3")).epsilon(1e-10));
    }
}

TEST_CASE("a target duplicated among the controls is rejected") {
    std::mt19937_64 rng(707);
    DesignMatrix X = random_design(rng, 60, 4);
    X.values.col(2) = X.values.col(3);  // duplicate target x3 inside controls
    CHECK_THROWS_AS(fwl_residualize(X, {"x3"}), RankDeficient);
}
