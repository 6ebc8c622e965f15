#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace mailproc {

using Timestamp = std::chrono::sys_seconds;

/// Parses `YYYY-MM-DD HH:MM:SS` with an optional zone suffix (`Z`, `+HH:MM`,
/// `+HHMM`), falling back to ISO-8601 `YYYY-MM-DDTHH:MM:SS[.fff][zone]`.
/// A missing zone means UTC. Returns nullopt on malformed or out-of-range input
/// (valid range is [1970-01-01, 2100-01-01)).
std::optional<Timestamp> parse_timestamp(std::string_view text);

/// RFC 2822 date as found in `Date:` headers, e.g. `Tue, 29 Mar 2016 10:34:00 +0200`.
std::optional<Timestamp> parse_rfc2822_date(std::string_view text);

// `YYYY-MM-DD HH:MM:SS`, UTC.
std::string format_timestamp(Timestamp ts);
// `YYYY-MM-DDTHH:MM:SSZ`
std::string format_iso8601(Timestamp ts);
// `YYYY-MM-DDTHH:MM:SS.000+00:00`, the form XES tools emit.
std::string format_xes_date(Timestamp ts);

bool in_supported_range(Timestamp ts);

}  // namespace mailproc
