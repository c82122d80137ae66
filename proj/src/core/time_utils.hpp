#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace reliafit {

// Proleptic-Gregorian civil-date helpers (Howard Hinnant's algorithms).
// All instants are UTC and carried as seconds since the Unix epoch.

/// Days since 1970-01-01 for a civil date.
std::int64_t days_from_civil(int year, int month, int day);

/// Inverse of days_from_civil.
void civil_from_days(std::int64_t days, int& year, int& month, int& day);

/// 0 = Monday ... 6 = Sunday.
int weekday_from_days(std::int64_t days);

bool is_valid_civil(int year, int month, int day);

/// Strict `YYYY-MM-DDTHH:MM:SSZ` parser. Returns false on any deviation.
bool parse_iso8601_utc(std::string_view text, std::int64_t& epoch_seconds);

std::string format_iso8601_utc(std::int64_t epoch_seconds);

} // namespace reliafit
