#include "time_utils.hpp"

#include <cstdio>

namespace reliafit {

std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);            // [0, 399]
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1; // [0, 365]
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;           // [0, 146096]
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& year, int& month, int& day) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    day = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    month = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    year = static_cast<int>(y + (month <= 2));
}

int weekday_from_days(std::int64_t days) {
    // 1970-01-01 was a Thursday (Monday-based index 3).
    return static_cast<int>(((days % 7) + 10) % 7);
}

bool is_valid_civil(int year, int month, int day) {
    if (month < 1 || month > 12 || day < 1) return false;
    static const int md[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int limit = md[month - 1];
    const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    if (month == 2 && leap) limit = 29;
    return day <= limit;
}

bool parse_iso8601_utc(std::string_view text, std::int64_t& epoch_seconds) {
    if (text.size() != 20) return false;
    int y, mo, d, h, mi, s;
    char tsep, z;
    char buf[24];
    text.copy(buf, text.size());
    buf[text.size()] = '\0';
    if (std::sscanf(buf, "%4d-%2d-%2d%c%2d:%2d:%2d%c", &y, &mo, &d, &tsep, &h, &mi, &s, &z) != 8)
        return false;
    if (tsep != 'T' || z != 'Z') return false;
    // sscanf tolerates stray signs/spaces inside fixed-width fields; re-check layout.
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u, 11u, 12u, 14u, 15u, 17u, 18u})
        if (buf[i] < '0' || buf[i] > '9') return false;
    if (buf[4] != '-' || buf[7] != '-' || buf[13] != ':' || buf[16] != ':') return false;
    if (!is_valid_civil(y, mo, d)) return false;
    if (h > 23 || mi > 59 || s > 59) return false;
    epoch_seconds = days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
    return true;
}

std::string format_iso8601_utc(std::int64_t epoch_seconds) {
    std::int64_t days = epoch_seconds / 86400;
    std::int64_t rem = epoch_seconds % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    int y, mo, d;
    civil_from_days(days, y, mo, d);
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", y, mo, d,
                  static_cast<int>(rem / 3600), static_cast<int>((rem % 3600) / 60),
                  static_cast<int>(rem % 60));
    return buf;
}

} // namespace reliafit
