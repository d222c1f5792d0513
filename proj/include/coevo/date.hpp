#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace coevo {

/// Calendar day, stored as days since 1970-01-01.
class Date {
public:
    constexpr Date() = default;
    constexpr explicit Date(std::chrono::sys_days d) : days_(d) {}
    Date(int year, unsigned month, unsigned day);

    /// Parses an ISO-8601 calendar date (YYYY-MM-DD). Throws ParseError.
    static Date parse(std::string_view text);

    std::string iso() const;
    constexpr std::chrono::sys_days sys() const { return days_; }
    int serial() const { return static_cast<int>(days_.time_since_epoch().count()); }

    /// Monday..Friday.
    bool is_weekday() const;
    Date next_day() const { return Date(days_ + std::chrono::days{1}); }

    constexpr auto operator<=>(const Date&) const = default;

private:
    std::chrono::sys_days days_{};
};

/// Half-open interval [begin, end).
struct DateRange {
    Date begin;
    Date end;

    bool contains(Date d) const { return begin <= d && d < end; }
    bool empty() const { return !(begin < end); }
    std::string describe() const { return "[" + begin.iso() + ", " + end.iso() + ")"; }
};

}  // namespace coevo
