#include "eshock/cycles.hpp"

#include <algorithm>

#include "eshock/errors.hpp"

namespace eshock {

std::string to_string(Party p) { return p == Party::Republican ? "REP" : "DEM"; }

std::optional<Party> parse_party(std::string_view text) {
    if (text == "REP" || text == "R" || text == "Republican") return Party::Republican;
    if (text == "DEM" || text == "D" || text == "Democrat") return Party::Democrat;
    return std::nullopt;
}

CycleSet::CycleSet(std::vector<ElectionCycle> cycles) : cycles_(std::move(cycles)) {
    std::sort(cycles_.begin(), cycles_.end(),
              [](const auto& a, const auto& b) { return a.first_date < b.first_date; });
    for (const auto& c : cycles_) {
        if (!(c.first_date <= c.election_date && c.election_date <= c.last_date))
            throw ValueError("cycle " + std::to_string(c.cycle_id) +
                             ": election date outside [first, last]");
    }
    for (std::size_t i = 1; i < cycles_.size(); ++i) {
        if (cycles_[i - 1].last_date >= cycles_[i].first_date)
            throw OverlapError("cycles " + std::to_string(cycles_[i - 1].cycle_id) + " and " +
                               std::to_string(cycles_[i].cycle_id) + " overlap");
    }
}

const ElectionCycle* CycleSet::cycle_of(Date d) const {
    auto it = std::upper_bound(cycles_.begin(), cycles_.end(), d,
                               [](Date x, const ElectionCycle& c) { return x < c.first_date; });
    if (it == cycles_.begin()) return nullptr;
    --it;
    return it->contains(d) ? &*it : nullptr;
}

const ElectionCycle* CycleSet::by_id(int cycle_id) const {
    for (const auto& c : cycles_)
        if (c.cycle_id == cycle_id) return &c;
    return nullptr;
}

std::vector<int> CycleSet::mask(const TradingCalendar& calendar) const {
    std::vector<int> out(calendar.size(), -1);
    for (std::size_t i = 0; i < calendar.size(); ++i) {
        const ElectionCycle* c = cycle_of(calendar.at(i));
        if (c) out[i] = c->cycle_id;
    }
    return out;
}

bool CycleSet::has_full_lags(const TradingCalendar& calendar, Date d, int lags) const {
    const ElectionCycle* c = cycle_of(d);
    if (!c) return false;
    auto i = calendar.index_of(d);
    if (!i) return false;
    if (static_cast<int>(*i) < lags) return false;
    return calendar.at(*i - static_cast<std::size_t>(lags)) >= c->first_date;
}

}  // namespace eshock
