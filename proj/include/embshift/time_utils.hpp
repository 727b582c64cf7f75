#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace embshift {

// Days since 1970-01-01 for a proleptic Gregorian civil date.
std::int64_t days_from_civil(int year, int month, int day);

// Inverse of days_from_civil.
void civil_from_days(std::int64_t days, int &year, int &month, int &day);

// Parses "YYYY-MM-DD" or "YYYY-MM-DD[T ]HH:MM:SS[Z]" as UTC epoch seconds.
// Returns nullopt on malformed input or out-of-range fields.
std::optional<std::int64_t> parse_timestamp(std::string_view text);

// Epoch seconds at 00:00:00 UTC on the first day of (year, month).
std::int64_t month_start_epoch(int year, int month);

// (year, month) containing the given epoch second.
std::pair<int, int> year_month_of(std::int64_t epoch_seconds);

// ISO-8601 "YYYY-MM-DDTHH:MM:SSZ".
std::string format_timestamp(std::int64_t epoch_seconds);

}  // namespace embshift
