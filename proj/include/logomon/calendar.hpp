#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace logomon {

using Date = std::chrono::year_month_day;

/// Strict YYYY-MM-DD. Returns nullopt for anything else, including
/// out-of-range days such as 2023-02-29.
std::optional<Date> parse_date(std::string_view text);
std::string format_date(const Date& date);

Date add_days(const Date& date, int days);
Date today_utc();

/// Current UTC instant as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp_now();
/// Accepts YYYY-MM-DDTHH:MM:SSZ only.
bool is_utc_timestamp(std::string_view text);

}  // namespace logomon
