#include "eshock/calendar.hpp"

#include <algorithm>

#include "eshock/errors.hpp"

namespace eshock {

TradingCalendar::TradingCalendar(std::vector<Date> dates) : dates_(std::move(dates)) {
    for (std::size_t i = 1; i < dates_.size(); ++i) {
        if (!(dates_[i - 1] < dates_[i]))
            throw ValueError("calendar dates must be strictly increasing at position " +
                             std::to_string(i) + " (" + dates_[i].to_string() + ")");
    }
}

std::optional<std::size_t> TradingCalendar::index_of(Date d) const {
    auto it = std::lower_bound(dates_.begin(), dates_.end(), d);
    if (it == dates_.end() || *it != d) return std::nullopt;
    return static_cast<std::size_t>(it - dates_.begin());
}

std::optional<std::size_t> TradingCalendar::index_on_or_after(Date d) const {
    auto it = std::lower_bound(dates_.begin(), dates_.end(), d);
    if (it == dates_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - dates_.begin());
}

CalendarPtr make_weekday_calendar(Date first, Date last) {
    std::vector<Date> dates;
    for (Date d = first; d <= last; ++d)
        if (!d.is_weekend()) dates.push_back(d);
    return std::make_shared<TradingCalendar>(std::move(dates));
}

CalendarIntersection intersect_dates(const std::vector<Date>& left,
                                     const std::vector<Date>& right) {
    std::vector<Date> l = left, r = right;
    std::sort(l.begin(), l.end());
    std::sort(r.begin(), r.end());
    l.erase(std::unique(l.begin(), l.end()), l.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());

    CalendarIntersection out;
    std::vector<Date> common;
    std::set_intersection(l.begin(), l.end(), r.begin(), r.end(), std::back_inserter(common));
    std::set_difference(l.begin(), l.end(), common.begin(), common.end(),
                        std::back_inserter(out.dropped_left));
    std::set_difference(r.begin(), r.end(), common.begin(), common.end(),
                        std::back_inserter(out.dropped_right));
    out.calendar = std::make_shared<TradingCalendar>(std::move(common));
    return out;
}

}  // namespace eshock
