#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "eshock/date.hpp"

namespace eshock {

/// Ordered set of business dates. All series in a run key into one calendar
/// by position, so date -> index lookups happen once at construction.
class TradingCalendar {
public:
    /// Dates must be strictly increasing; throws ValueError otherwise.
    explicit TradingCalendar(std::vector<Date> dates);

    [[nodiscard]] std::size_t size() const { return dates_.size(); }
    [[nodiscard]] bool empty() const { return dates_.empty(); }
    [[nodiscard]] Date at(std::size_t i) const { return dates_[i]; }
    [[nodiscard]] Date front() const { return dates_.front(); }
    [[nodiscard]] Date back() const { return dates_.back(); }

    [[nodiscard]] bool contains(Date d) const { return index_of(d).has_value(); }
    [[nodiscard]] std::optional<std::size_t> index_of(Date d) const;

    /// First calendar date >= d, if any.
    [[nodiscard]] std::optional<std::size_t> index_on_or_after(Date d) const;

    [[nodiscard]] const std::vector<Date>& dates() const { return dates_; }

    auto begin() const { return dates_.begin(); }
    auto end() const { return dates_.end(); }

private:
    std::vector<Date> dates_;
};

using CalendarPtr = std::shared_ptr<const TradingCalendar>;

/// Weekday-only calendar covering [first, last]; convenience for synthetic data.
CalendarPtr make_weekday_calendar(Date first, Date last);

/// Dates present in both inputs, plus the dates each side dropped.
struct CalendarIntersection {
    CalendarPtr calendar;
    std::vector<Date> dropped_left;   // in left only
    std::vector<Date> dropped_right;  // in right only
};

CalendarIntersection intersect_dates(const std::vector<Date>& left,
                                     const std::vector<Date>& right);

}  // namespace eshock
