#include "coevo/date.hpp"

#include <charconv>
#include <cstdio>

#include "coevo/error.hpp"

namespace coevo {

using namespace std::chrono;

Date::Date(int year, unsigned month, unsigned day) {
    const year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
    if (!ymd.ok()) {
        throw ValidationError("invalid calendar date " + std::to_string(year) + "-" + std::to_string(month) +
                              "-" + std::to_string(day));
    }
    days_ = sys_days{ymd};
}

Date Date::parse(std::string_view text) {
    auto field = [&](std::size_t pos, std::size_t len) {
        int value = 0;
        const char* first = text.data() + pos;
        const auto [ptr, ec] = std::from_chars(first, first + len, value);
        if (ec != std::errc{} || ptr != first + len) {
            throw ParseError("malformed date '" + std::string(text) + "' (expected YYYY-MM-DD)");
        }
        return value;
    };
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw ParseError("malformed date '" + std::string(text) + "' (expected YYYY-MM-DD)");
    }
    const int y = field(0, 4);
    const int m = field(5, 2);
    const int d = field(8, 2);
    const year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                             std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) throw ParseError("invalid calendar date '" + std::string(text) + "'");
    return Date(sys_days{ymd});
}

std::string Date::iso() const {
    const year_month_day ymd{days_};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

bool Date::is_weekday() const {
    const weekday wd{days_};
    return wd != Saturday && wd != Sunday;
}

}  // namespace coevo
