#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace dataportraits {

using Timestamp = std::chrono::sys_seconds;
using TimestampMs = std::chrono::sys_time<std::chrono::milliseconds>;

// Parses ISO-8601 UTC timestamps such as "2015-06-01T12:30:00Z",
// "2015-06-01T12:30:00.250Z" or "2015-06-01T12:30:00+00:00".
// Fractional seconds are truncated. Throws std::invalid_argument.
Timestamp parse_timestamp(std::string_view text);
TimestampMs parse_timestamp_ms(std::string_view text);

std::string format_timestamp(Timestamp ts);
// Emits milliseconds only when they are non-zero.
std::string format_timestamp(TimestampMs ts);

// Days since 1970-01-01 for the UTC date containing `ts`.
std::int64_t utc_day(TimestampMs ts);

TimestampMs now_ms();

}  // namespace dataportraits
