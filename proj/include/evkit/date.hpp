#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace evkit {

// Calendar date stored as days since 1970-01-01.
class Date {
 public:
  constexpr Date() = default;
  constexpr explicit Date(std::int32_t days_since_epoch) : days_(days_since_epoch) {}
  Date(int year, unsigned month, unsigned day);

  // Parses strict `YYYY-MM-DD`; throws InputError otherwise.
  static Date parse(std::string_view text);

  std::string to_string() const;
  constexpr std::int32_t days() const { return days_; }
  std::chrono::year_month_day ymd() const;

  friend constexpr auto operator<=>(Date, Date) = default;

 private:
  std::int32_t days_ = 0;
};

}  // namespace evkit
