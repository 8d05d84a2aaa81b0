#include "evkit/date.hpp"

#include <charconv>
#include <cstdio>

#include "evkit/errors.hpp"

namespace evkit {

namespace {

int parse_digits(std::string_view text, std::size_t pos, std::size_t len) {
  int value = 0;
  auto first = text.data() + pos;
  auto [ptr, ec] = std::from_chars(first, first + len, value);
  if (ec != std::errc{} || ptr != first + len) {
    throw InputError("invalid date '" + std::string(text) + "' (expected YYYY-MM-DD)");
  }
  return value;
}

}  // namespace

Date::Date(int year, unsigned month, unsigned day) {
  const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                        std::chrono::day{day}};
  if (!ymd.ok()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year, month, day);
    throw InputError(std::string("invalid calendar date ") + buf);
  }
  days_ = static_cast<std::int32_t>(std::chrono::sys_days{ymd}.time_since_epoch().count());
}

Date Date::parse(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw InputError("invalid date '" + std::string(text) + "' (expected YYYY-MM-DD)");
  }
  return Date(parse_digits(text, 0, 4), static_cast<unsigned>(parse_digits(text, 5, 2)),
              static_cast<unsigned>(parse_digits(text, 8, 2)));
}

std::chrono::year_month_day Date::ymd() const {
  return std::chrono::year_month_day{std::chrono::sys_days{std::chrono::days{days_}}};
}

std::string Date::to_string() const {
  const auto d = ymd();
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

}  // namespace evkit
