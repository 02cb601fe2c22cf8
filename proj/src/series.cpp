#include "eshock/series.hpp"

#include <algorithm>
#include <limits>

#include "eshock/errors.hpp"

namespace eshock {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

DailySeries::DailySeries(CalendarPtr calendar, SeriesUnit unit)
    : calendar_(std::move(calendar)), unit_(unit) {
    values_ = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(calendar_->size()), kNaN);
}

DailySeries::DailySeries(CalendarPtr calendar, SeriesUnit unit,
                         const std::vector<std::pair<Date, double>>& observations)
    : DailySeries(std::move(calendar), unit) {
    for (const auto& [date, value] : observations) set(date, value);
}

double DailySeries::at(Date d) const {
    auto i = calendar_->index_of(d);
    if (!i) throw OutOfRange("date " + d.to_string() + " not on the series calendar");
    return values_[static_cast<Eigen::Index>(*i)];
}

bool DailySeries::has(Date d) const {
    auto i = calendar_->index_of(d);
    return i && has(*i);
}

void DailySeries::check_unit(double value, std::size_t i) const {
    if (unit_ == SeriesUnit::Probability && (value < 0.0 || value > 1.0))
        throw ValueError("probability value " + std::to_string(value) + " outside [0,1] at " +
                         calendar_->at(i).to_string());
    if (unit_ == SeriesUnit::Count && value < 0.0)
        throw ValueError("negative count at " + calendar_->at(i).to_string());
}

void DailySeries::set(std::size_t i, double value) {
    if (i >= size()) throw OutOfRange("series index out of range");
    if (!std::isnan(value)) check_unit(value, i);
    values_[static_cast<Eigen::Index>(i)] = value;
}

void DailySeries::set(Date d, double value) {
    auto i = calendar_->index_of(d);
    if (!i) throw OutOfRange("date " + d.to_string() + " not on the series calendar");
    set(*i, value);
}

DailySeries DailySeries::log() const {
    DailySeries out(calendar_, SeriesUnit::LogPrice);
    for (std::size_t i = 0; i < size(); ++i) {
        if (!has(i)) continue;
        double v = at(i);
        if (v <= 0.0)
            throw ValueError("log of non-positive value at " + calendar_->at(i).to_string());
        out.set(i, std::log(v));
    }
    return out;
}

DailySeries DailySeries::pct_change_1d() const {
    DailySeries out(calendar_, SeriesUnit::PercentChange);
    for (std::size_t i = 1; i < size(); ++i) {
        if (!has(i) || !has(i - 1)) continue;
        double prev = at(i - 1);
        if (prev == 0.0) continue;
        out.set(i, 100.0 * (at(i) / prev - 1.0));
    }
    return out;
}

MonthlySeries::MonthlySeries(YearMonth first, Eigen::VectorXd values, SeriesUnit unit)
    : first_(first), values_(std::move(values)), unit_(unit) {}

MonthlySeries MonthlySeries::from_observations(
    const std::vector<std::pair<YearMonth, double>>& observations, SeriesUnit unit) {
    if (observations.empty()) return MonthlySeries(YearMonth(0), Eigen::VectorXd(), unit);
    auto [lo, hi] = std::minmax_element(
        observations.begin(), observations.end(),
        [](const auto& a, const auto& b) { return a.first < b.first; });
    int n = hi->first - lo->first + 1;
    Eigen::VectorXd values = Eigen::VectorXd::Constant(n, kNaN);
    for (const auto& [month, value] : observations) {
        Eigen::Index i = month - lo->first;
        if (!std::isnan(values[i]))
            throw ValueError("duplicate month " + month.to_string());
        values[i] = value;
    }
    return MonthlySeries(lo->first, std::move(values), unit);
}

bool MonthlySeries::has(YearMonth m) const {
    int i = m - first_;
    return i >= 0 && i < static_cast<int>(size()) && !std::isnan(values_[i]);
}

double MonthlySeries::at(YearMonth m) const {
    int i = m - first_;
    if (i < 0 || i >= static_cast<int>(size()))
        throw OutOfRange("month " + m.to_string() + " outside series range");
    return values_[i];
}

void MonthlySeries::set(YearMonth m, double value) {
    int i = m - first_;
    if (i < 0 || i >= static_cast<int>(size()))
        throw OutOfRange("month " + m.to_string() + " outside series range");
    values_[i] = value;
}

MonthlySeries MonthlySeries::log_diff_1m() const {
    Eigen::VectorXd out = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(size()), kNaN);
    for (std::size_t i = 1; i < size(); ++i) {
        double cur = values_[static_cast<Eigen::Index>(i)];
        double prev = values_[static_cast<Eigen::Index>(i - 1)];
        if (std::isnan(cur) || std::isnan(prev)) continue;
        if (cur <= 0.0 || prev <= 0.0)
            throw ValueError("log difference of non-positive value at " +
                             (first_ + static_cast<int>(i)).to_string());
        out[static_cast<Eigen::Index>(i)] = std::log(cur) - std::log(prev);
    }
    return MonthlySeries(first_, std::move(out), SeriesUnit::PercentChange);
}

DailySeries align_to_calendar(const DailySeries& source, CalendarPtr calendar) {
    DailySeries out(std::move(calendar), source.unit());
    for (std::size_t i = 0; i < out.size(); ++i) {
        auto j = source.calendar().index_of(out.calendar().at(i));
        if (j && source.has(*j)) out.set(i, source.at(*j));
    }
    return out;
}

double long_difference(const DailySeries& series, Date t, int horizon) {
    if (horizon < 0) throw OutOfRange("negative horizon");
    auto it = series.calendar().index_of(t);
    if (!it) throw OutOfRange("date " + t.to_string() + " not on the series calendar");
    if (*it == 0) throw OutOfRange("no observation before " + t.to_string());
    std::size_t end = *it + static_cast<std::size_t>(horizon);
    if (end >= series.size())
        throw OutOfRange("horizon " + std::to_string(horizon) + " from " + t.to_string() +
                         " exceeds the calendar");
    if (!series.has(end) || !series.has(*it - 1))
        throw MissingData("long difference endpoint missing near " + t.to_string());
    return series.at(end) - series.at(*it - 1);
}

double long_difference(const MonthlySeries& series, YearMonth t, int horizon) {
    if (horizon < 0) throw OutOfRange("negative horizon");
    int base = (t - series.first_month()) - 1;
    int end = (t - series.first_month()) + horizon;
    if (base < 0 || end >= static_cast<int>(series.size()))
        throw OutOfRange("long difference window for " + t.to_string() +
                         " leaves the series range");
    YearMonth mb = series.first_month() + base;
    YearMonth me = series.first_month() + end;
    if (!series.has(me) || !series.has(mb))
        throw MissingData("long difference endpoint missing near " + t.to_string());
    return series.at(me) - series.at(mb);
}

}  // namespace eshock
