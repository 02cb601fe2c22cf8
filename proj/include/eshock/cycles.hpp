#pragma once

#include <optional>
#include <string>
#include <vector>

#include "eshock/calendar.hpp"
#include "eshock/date.hpp"

namespace eshock {

enum class Party { Republican, Democrat };

std::string to_string(Party p);
std::optional<Party> parse_party(std::string_view text);

/// One election window: dates carrying betting data, the election date, the
/// winner (once known), and the sitting administration's party.
struct ElectionCycle {
    int cycle_id = 0;  // election year
    Date first_date;
    Date last_date;
    Date election_date;
    std::optional<Party> winner;
    Party incumbent = Party::Democrat;  // constant within the window

    [[nodiscard]] bool contains(Date d) const { return first_date <= d && d <= last_date; }
};

/// Cycles ordered by date, validated pairwise disjoint.
class CycleSet {
public:
    CycleSet() = default;

    /// Sorts by first_date; throws OverlapError on intersecting windows and
    /// ValueError if any window fails first <= election <= last.
    explicit CycleSet(std::vector<ElectionCycle> cycles);

    [[nodiscard]] const std::vector<ElectionCycle>& cycles() const { return cycles_; }
    [[nodiscard]] std::size_t size() const { return cycles_.size(); }
    [[nodiscard]] bool empty() const { return cycles_.empty(); }

    /// Containing cycle of a date, or nullptr.
    [[nodiscard]] const ElectionCycle* cycle_of(Date d) const;
    [[nodiscard]] const ElectionCycle* by_id(int cycle_id) const;

    /// Per-position cycle id over a calendar; -1 where no cycle contains the
    /// date. Lags never cross the boundaries this mask draws.
    [[nodiscard]] std::vector<int> mask(const TradingCalendar& calendar) const;

    /// True when the date has `lags` same-cycle calendar positions before it;
    /// the first `lags` dates of each cycle fail this.
    [[nodiscard]] bool has_full_lags(const TradingCalendar& calendar, Date d, int lags) const;

private:
    std::vector<ElectionCycle> cycles_;
};

}  // namespace eshock
