#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace aeas {

using Timestamp = std::chrono::sys_seconds;
using Date = std::chrono::year_month_day;

/// Parses an RFC 3339 date-time ("2024-01-31T12:00:00Z", offsets and
/// fractional seconds accepted; fractions are truncated to whole seconds).
std::optional<Timestamp> parse_rfc3339(std::string_view text);

/// Accepts an RFC 3339 full-date, or a date-time whose date part is used.
std::optional<Date> parse_date(std::string_view text);

std::string format_rfc3339(Timestamp ts);
std::string format_date(Date date);

Timestamp now_seconds();

/// Elapsed days between two instants as a real number.
double days_between(Timestamp from, Timestamp to);

} // namespace aeas
