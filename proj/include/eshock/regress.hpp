#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "eshock/date.hpp"

namespace eshock {

/// Regressor stack with row dates and per-row weights. Entries must be
/// finite (incomplete rows are dropped upstream), column labels unique, and
/// at least one weight strictly positive. Intercepts are explicit columns.
struct DesignMatrix {
    std::vector<Date> dates;           // row index
    std::vector<std::string> labels;   // column labels
    Eigen::MatrixXd values;            // rows x cols
    Eigen::VectorXd weights;           // per-row, >= 0

    /// Validates the invariants above; throws ValueError on violation.
    void validate() const;

    [[nodiscard]] Eigen::Index rows() const { return values.rows(); }
    [[nodiscard]] Eigen::Index cols() const { return values.cols(); }
    [[nodiscard]] std::optional<Eigen::Index> column(const std::string& label) const;
};

/// Weighted least-squares fit. The estimation sample is the rows with
/// strictly positive weight; residuals and fitted values are reported for
/// every input row.
struct FitResult {
    std::vector<std::string> labels;
    Eigen::VectorXd coefficients;
    Eigen::VectorXd residuals;      // all rows
    Eigen::VectorXd fitted;         // all rows
    Eigen::VectorXd weights;        // as passed in
    std::vector<Date> dates;        // row dates from the design
    double r_squared = 0.0;         // weighted; centered iff intercept present
    Eigen::Index n_obs = 0;         // rows with positive weight
    double condition = 0.0;         // |r_max|/|r_min| from the pivoted QR
    bool has_intercept = false;

    [[nodiscard]] double coefficient(const std::string& label) const;
};

/// Heteroskedasticity- and autocorrelation-consistent coefficient
/// covariance (Bartlett kernel).
struct HacCovariance {
    Eigen::MatrixXd covariance;
    int lag_truncation = 0;
    std::string kernel = "bartlett";

    [[nodiscard]] double standard_error(Eigen::Index j) const;
};

inline constexpr double kConditionLimit = 1e10;

/// Minimizes sum w_t (y_t - x_t'b)^2 through a column-pivoted QR of the
/// sqrt-weight-scaled design; never forms normal equations. Throws
/// RankDeficient (naming the offending columns) when the condition
/// diagnostic exceeds kConditionLimit.
FitResult fit_wls(const DesignMatrix& X, const Eigen::VectorXd& y);

/// floor(0.75 * T^(1/3)); exact integer cube roots are recognized so perfect
/// cubes never round down. The unrounded value is reported via `raw` when a
/// caller wants to log it.
int nw_bandwidth(Eigen::Index n_obs, double* raw = nullptr);

/// Bartlett-weighted sandwich covariance over lags 0..L of the weighted
/// scores w_t e_t x_t. L = 0 reduces to the heteroskedasticity-robust
/// estimator. Score autocovariances use compensated accumulation. Throws
/// SingularBread when X'WX is numerically singular.
HacCovariance newey_west(const FitResult& fit, const DesignMatrix& X, int lag_truncation);

/// Residualizes the target columns on the remaining columns under the same
/// weights. Regressing y on the result reproduces the full regression's
/// coefficients for those columns.
DesignMatrix fwl_residualize(const DesignMatrix& X, const std::vector<std::string>& target_cols);

/// Compensated (Neumaier) accumulator for long dot products.
class NeumaierSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    [[nodiscard]] double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace eshock
