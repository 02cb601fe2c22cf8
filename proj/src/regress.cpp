#include "eshock/regress.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "eshock/errors.hpp"

namespace eshock {

void DesignMatrix::validate() const {
    if (values.rows() != weights.size())
        throw ValueError("design: weight length does not match row count");
    if (static_cast<Eigen::Index>(labels.size()) != values.cols())
        throw ValueError("design: label count does not match column count");
    if (!dates.empty() && static_cast<Eigen::Index>(dates.size()) != values.rows())
        throw ValueError("design: date count does not match row count");
    if (!values.allFinite()) throw ValueError("design: non-finite entries");
    if (!(weights.array() >= 0.0).all()) throw ValueError("design: negative weight");
    if (!(weights.array() > 0.0).any()) throw ValueError("design: no positive weight");
    std::set<std::string> seen(labels.begin(), labels.end());
    if (seen.size() != labels.size()) throw ValueError("design: duplicate column label");
}

std::optional<Eigen::Index> DesignMatrix::column(const std::string& label) const {
    for (std::size_t j = 0; j < labels.size(); ++j)
        if (labels[j] == label) return static_cast<Eigen::Index>(j);
    return std::nullopt;
}

double FitResult::coefficient(const std::string& label) const {
    for (std::size_t j = 0; j < labels.size(); ++j)
        if (labels[j] == label) return coefficients[static_cast<Eigen::Index>(j)];
    throw ValueError("no coefficient labeled '" + label + "'");
}

double HacCovariance::standard_error(Eigen::Index j) const {
    return std::sqrt(std::max(0.0, covariance(j, j)));
}

namespace {

std::vector<Eigen::Index> positive_weight_rows(const Eigen::VectorXd& w) {
    std::vector<Eigen::Index> rows;
    rows.reserve(static_cast<std::size_t>(w.size()));
    for (Eigen::Index i = 0; i < w.size(); ++i)
        if (w[i] > 0.0) rows.push_back(i);
    return rows;
}

struct ScaledProblem {
    Eigen::MatrixXd Xw;  // sqrt(w)-scaled design, positive-weight rows only
    Eigen::VectorXd yw;
    std::vector<Eigen::Index> rows;
};

ScaledProblem scale_problem(const DesignMatrix& X, const Eigen::VectorXd* y) {
    ScaledProblem p;
    p.rows = positive_weight_rows(X.weights);
    const Eigen::Index n = static_cast<Eigen::Index>(p.rows.size());
    p.Xw.resize(n, X.cols());
    if (y) p.yw.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::Index i = p.rows[static_cast<std::size_t>(k)];
        const double s = std::sqrt(X.weights[i]);
        p.Xw.row(k) = X.values.row(i) * s;
        if (y) p.yw[k] = (*y)[i] * s;
    }
    return p;
}

struct QrDiag {
    double condition;
    Eigen::Index rank;
};

QrDiag qr_condition(const Eigen::ColPivHouseholderQR<Eigen::MatrixXd>& qr, Eigen::Index cols) {
    const auto& R = qr.matrixR();
    double rmax = 0.0, rmin = std::numeric_limits<double>::infinity();
    const Eigen::Index k = std::min(R.rows(), cols);
    for (Eigen::Index j = 0; j < k; ++j) {
        const double r = std::abs(R(j, j));
        rmax = std::max(rmax, r);
        rmin = std::min(rmin, r);
    }
    double condition = rmin > 0.0 ? rmax / rmin : std::numeric_limits<double>::infinity();
    Eigen::Index rank = 0;
    for (Eigen::Index j = 0; j < k; ++j)
        if (std::abs(R(j, j)) * kConditionLimit > rmax) ++rank;
    return {condition, rank};
}

[[noreturn]] void throw_rank_deficient(const DesignMatrix& X,
                                       const Eigen::ColPivHouseholderQR<Eigen::MatrixXd>& qr,
                                       Eigen::Index rank, double condition,
                                       Eigen::Index sample_rows) {
    std::string cols;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index j = rank; j < X.cols(); ++j) {
        if (!cols.empty()) cols += ", ";
        cols += X.labels[static_cast<std::size_t>(perm[j])];
    }
    std::string detail = sample_rows < X.cols()
                             ? std::to_string(sample_rows) + " rows for " +
                                   std::to_string(X.cols()) + " columns"
                             : "condition " + std::to_string(condition);
    throw RankDeficient("design is rank deficient (" + detail +
                        "); offending columns: " + cols);
}

bool detect_intercept(const Eigen::MatrixXd& Xw, const Eigen::MatrixXd& raw,
                      const std::vector<Eigen::Index>& rows) {
    // A column that is constant and nonzero across the estimation sample.
    for (Eigen::Index j = 0; j < raw.cols(); ++j) {
        bool constant = true;
        const double v0 = raw(rows.front(), j);
        if (v0 == 0.0) continue;
        for (std::size_t k = 1; k < rows.size(); ++k)
            if (raw(rows[k], j) != v0) {
                constant = false;
                break;
            }
        if (constant) return true;
    }
    (void)Xw;
    return false;
}

}  // namespace

FitResult fit_wls(const DesignMatrix& X, const Eigen::VectorXd& y) {
    X.validate();
    if (X.cols() == 0) throw ValueError("fit_wls: empty design");
    if (y.size() != X.rows()) throw ValueError("fit_wls: response length mismatch");
    if (!y.allFinite()) throw ValueError("fit_wls: non-finite response");

    ScaledProblem p = scale_problem(X, &y);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(p.Xw);
    const QrDiag diag = qr_condition(qr, X.cols());
    if (diag.rank < X.cols())
        throw_rank_deficient(X, qr, diag.rank, diag.condition,
                             static_cast<Eigen::Index>(p.rows.size()));

    FitResult fit;
    fit.labels = X.labels;
    fit.coefficients = qr.solve(p.yw);
    fit.fitted = X.values * fit.coefficients;
    fit.residuals = y - fit.fitted;
    fit.weights = X.weights;
    fit.dates = X.dates;
    fit.n_obs = static_cast<Eigen::Index>(p.rows.size());
    fit.condition = diag.condition;
    fit.has_intercept = detect_intercept(p.Xw, X.values, p.rows);

    double ssr = 0.0, sst = 0.0, wsum = 0.0, wy = 0.0;
    for (const Eigen::Index i : p.rows) {
        wsum += X.weights[i];
        wy += X.weights[i] * y[i];
    }
    const double ybar = fit.has_intercept ? wy / wsum : 0.0;
    for (const Eigen::Index i : p.rows) {
        ssr += X.weights[i] * fit.residuals[i] * fit.residuals[i];
        const double dev = y[i] - ybar;
        sst += X.weights[i] * dev * dev;
    }
    fit.r_squared = sst > 0.0 ? 1.0 - ssr / sst : 1.0;
    return fit;
}

int nw_bandwidth(Eigen::Index n_obs, double* raw) {
    if (n_obs < 1) throw ValueError("nw_bandwidth: sample size must be positive");
    double root = std::cbrt(static_cast<double>(n_obs));
    const auto k = static_cast<long long>(std::llround(root));
    if (k > 0 && k * k * k == n_obs) root = static_cast<double>(k);
    const double value = 0.75 * root;
    if (raw) *raw = value;
    return static_cast<int>(std::floor(value));
}

HacCovariance newey_west(const FitResult& fit, const DesignMatrix& X, int lag_truncation) {
    X.validate();
    if (lag_truncation < 0) throw ValueError("newey_west: negative lag truncation");
    if (static_cast<Eigen::Index>(lag_truncation) >= fit.n_obs)
        throw ValueError("newey_west: lag truncation must be below the sample size");

    ScaledProblem p = scale_problem(X, nullptr);
    const Eigen::Index n = static_cast<Eigen::Index>(p.rows.size());
    const Eigen::Index k = X.cols();

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(p.Xw);
    const QrDiag diag = qr_condition(qr, k);
    if (diag.rank < k)
        throw SingularBread("X'WX numerically singular (condition " +
                            std::to_string(diag.condition) + ")");
    // (X'WX)^{-1} from the thin QR factors.
    const Eigen::MatrixXd R =
        qr.matrixR().topLeftCorner(k, k).template triangularView<Eigen::Upper>();
    const Eigen::MatrixXd Rinv =
        R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
    const Eigen::MatrixXd P = qr.colsPermutation();
    const Eigen::MatrixXd bread = P * (Rinv * Rinv.transpose()) * P.transpose();

    // Weighted scores on the estimation sample, in sample order.
    Eigen::MatrixXd scores(n, k);
    for (Eigen::Index t = 0; t < n; ++t) {
        const Eigen::Index i = p.rows[static_cast<std::size_t>(t)];
        scores.row(t) = X.weights[i] * fit.residuals[i] * X.values.row(i);
    }

    const int L = lag_truncation;
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
    for (int lag = 0; lag <= L; ++lag) {
        const double bartlett = 1.0 - static_cast<double>(lag) / (L + 1.0);
        Eigen::MatrixXd gamma(k, k);
        for (Eigen::Index a = 0; a < k; ++a) {
            for (Eigen::Index b = 0; b < k; ++b) {
                NeumaierSum acc;
                for (Eigen::Index t = lag; t < n; ++t)
                    acc.add(scores(t, a) * scores(t - lag, b));
                gamma(a, b) = acc.value();
            }
        }
        if (lag == 0)
            meat += gamma;
        else
            meat += bartlett * (gamma + gamma.transpose());
    }

    HacCovariance out;
    out.covariance = bread * meat * bread;
    out.covariance = ((out.covariance + out.covariance.transpose()) / 2.0).eval();
    out.lag_truncation = L;
    return out;
}

DesignMatrix fwl_residualize(const DesignMatrix& X, const std::vector<std::string>& target_cols) {
    X.validate();
    std::vector<Eigen::Index> target_idx;
    for (const auto& label : target_cols) {
        auto j = X.column(label);
        if (!j) throw ValueError("fwl_residualize: no column labeled '" + label + "'");
        target_idx.push_back(*j);
    }
    std::set<Eigen::Index> targets(target_idx.begin(), target_idx.end());

    DesignMatrix controls;
    controls.dates = X.dates;
    controls.weights = X.weights;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        if (targets.count(j)) continue;
        controls.labels.push_back(X.labels[static_cast<std::size_t>(j)]);
    }
    controls.values.resize(X.rows(), X.cols() - static_cast<Eigen::Index>(targets.size()));
    Eigen::Index cj = 0;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        if (targets.count(j)) continue;
        controls.values.col(cj++) = X.values.col(j);
    }

    DesignMatrix out;
    out.dates = X.dates;
    out.weights = X.weights;
    out.labels = target_cols;
    out.values.resize(X.rows(), static_cast<Eigen::Index>(target_idx.size()));
    for (std::size_t m = 0; m < target_idx.size(); ++m) {
        const Eigen::VectorXd target = X.values.col(target_idx[m]);
        Eigen::VectorXd residual;
        if (controls.cols() == 0) {
            residual = target;
        } else {
            residual = fit_wls(controls, target).residuals;
        }
        // A target inside the span of the controls has no variation left to
        // identify its coefficient.
        if (residual.norm() <= target.norm() / kConditionLimit)
            throw RankDeficient("fwl_residualize: column '" + target_cols[m] +
                                "' is collinear with the controls");
        out.values.col(static_cast<Eigen::Index>(m)) = residual;
    }
    return out;
}

}  // namespace eshock
