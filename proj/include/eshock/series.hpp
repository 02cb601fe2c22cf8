#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "eshock/calendar.hpp"
#include "eshock/date.hpp"

namespace eshock {

/// Declared unit of a series; probability-typed values are range-checked.
enum class SeriesUnit {
    Probability,      // [0, 1]
    LogPrice,
    PercentChange,    // 1-day or 1-month percent changes
    PercentagePoints, // shocks
    Count,            // volumes
    Indicator,        // {0, 1}
    Other,
};

/// Date-indexed real values on a trading calendar. Storage is dense by
/// calendar position; NaN marks a missing observation.
class DailySeries {
public:
    DailySeries() = default;

    /// All values missing.
    DailySeries(CalendarPtr calendar, SeriesUnit unit);

    /// From (date, value) pairs; every date must be a calendar member.
    DailySeries(CalendarPtr calendar, SeriesUnit unit,
                const std::vector<std::pair<Date, double>>& observations);

    [[nodiscard]] const TradingCalendar& calendar() const { return *calendar_; }
    [[nodiscard]] const CalendarPtr& calendar_ptr() const { return calendar_; }
    [[nodiscard]] SeriesUnit unit() const { return unit_; }
    [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(values_.size()); }

    [[nodiscard]] bool has(std::size_t i) const { return !std::isnan(values_[static_cast<Eigen::Index>(i)]); }
    [[nodiscard]] double at(std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }
    [[nodiscard]] double at(Date d) const;
    [[nodiscard]] bool has(Date d) const;

    void set(std::size_t i, double value);
    void set(Date d, double value);

    [[nodiscard]] const Eigen::VectorXd& values() const { return values_; }
    [[nodiscard]] Eigen::VectorXd& mutable_values() { return values_; }

    /// Element-wise natural log of a positive-valued series.
    [[nodiscard]] DailySeries log() const;

    /// 1-day percent change, 100*(x_t/x_{t-1} - 1); first date missing.
    [[nodiscard]] DailySeries pct_change_1d() const;

private:
    void check_unit(double value, std::size_t i) const;

    CalendarPtr calendar_;
    SeriesUnit unit_ = SeriesUnit::Other;
    Eigen::VectorXd values_;
};

/// Month-indexed values, dense from a first month; NaN marks missing.
class MonthlySeries {
public:
    MonthlySeries() = default;
    MonthlySeries(YearMonth first, Eigen::VectorXd values, SeriesUnit unit = SeriesUnit::Other);

    /// From (month, value) pairs; months need not be contiguous.
    static MonthlySeries from_observations(
        const std::vector<std::pair<YearMonth, double>>& observations,
        SeriesUnit unit = SeriesUnit::Other);

    [[nodiscard]] YearMonth first_month() const { return first_; }
    [[nodiscard]] YearMonth last_month() const { return first_ + (static_cast<int>(size()) - 1); }
    [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
    [[nodiscard]] SeriesUnit unit() const { return unit_; }

    [[nodiscard]] bool has(YearMonth m) const;
    [[nodiscard]] double at(YearMonth m) const;
    void set(YearMonth m, double value);

    [[nodiscard]] const Eigen::VectorXd& values() const { return values_; }

    /// 1-month log difference, log(x_m) - log(x_{m-1}); first month missing.
    [[nodiscard]] MonthlySeries log_diff_1m() const;

private:
    YearMonth first_{};
    Eigen::VectorXd values_;
    SeriesUnit unit_ = SeriesUnit::Other;
};

/// Values re-keyed by date onto another calendar; dates absent from the
/// source stay missing.
DailySeries align_to_calendar(const DailySeries& source, CalendarPtr calendar);

/// y_{t+h} - y_{t-1}: cumulative change from the last pre-shock observation.
/// Throws OutOfRange if t+h or t-1 leaves the calendar, MissingData if either
/// endpoint is absent.
double long_difference(const DailySeries& series, Date t, int horizon);
double long_difference(const MonthlySeries& series, YearMonth t, int horizon);

}  // namespace eshock
