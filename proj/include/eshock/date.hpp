#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace eshock {

/// Calendar date stored as a serial day count (days since 1970-01-01).
///
/// Proleptic Gregorian; conversions use the standard civil-date algorithms.
/// Comparison and day arithmetic are integer operations on the serial.
class Date {
public:
    Date() = default;
    constexpr explicit Date(std::int32_t serial) : serial_(serial) {}

    static Date from_ymd(int year, unsigned month, unsigned day);

    /// Strict ISO "YYYY-MM-DD"; nullopt on malformed input.
    static std::optional<Date> parse(std::string_view iso);

    [[nodiscard]] std::int32_t serial() const { return serial_; }
    [[nodiscard]] int year() const;
    [[nodiscard]] unsigned month() const;
    [[nodiscard]] unsigned day() const;

    /// 0 = Monday ... 6 = Sunday.
    [[nodiscard]] int weekday() const;
    [[nodiscard]] bool is_weekend() const { return weekday() >= 5; }

    [[nodiscard]] std::string to_string() const;

    auto operator<=>(const Date&) const = default;

    Date operator+(int days) const { return Date(serial_ + days); }
    Date operator-(int days) const { return Date(serial_ - days); }
    int operator-(Date other) const { return serial_ - other.serial_; }
    Date& operator++() { ++serial_; return *this; }

private:
    std::int32_t serial_ = 0;
};

/// Year-month key for monthly data, stored as year*12 + (month-1).
class YearMonth {
public:
    YearMonth() = default;
    constexpr explicit YearMonth(std::int32_t index) : index_(index) {}

    static YearMonth from_ym(int year, unsigned month);
    static YearMonth of(Date d) { return from_ym(d.year(), d.month()); }

    /// Strict "YYYY-MM"; nullopt on malformed input.
    static std::optional<YearMonth> parse(std::string_view text);

    [[nodiscard]] std::int32_t index() const { return index_; }
    [[nodiscard]] int year() const { return index_ >= 0 ? index_ / 12 : (index_ - 11) / 12; }
    [[nodiscard]] unsigned month() const {
        int m = index_ % 12;
        return static_cast<unsigned>(m >= 0 ? m : m + 12) + 1;
    }

    [[nodiscard]] Date first_day() const;
    [[nodiscard]] Date last_day() const;

    [[nodiscard]] std::string to_string() const;

    auto operator<=>(const YearMonth&) const = default;

    YearMonth operator+(int months) const { return YearMonth(index_ + months); }
    YearMonth operator-(int months) const { return YearMonth(index_ - months); }
    int operator-(YearMonth other) const { return index_ - other.index_; }

private:
    std::int32_t index_ = 0;
};

}  // namespace eshock
