#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "evkit/capm_gls.hpp"
#include "evkit/date.hpp"
#include "evkit/index_engine.hpp"

namespace evkit {

enum class EventType { War, Politics, Regulations, Market };

std::string to_string(EventType type);
EventType parse_event_type(const std::string& text);

struct EventSpec {
  Date date;
  std::string name;
  EventType type = EventType::Market;
};

// events.csv: date,name,type
std::vector<EventSpec> load_events(const std::filesystem::path& path);

struct WindowConfig {
  int estimation_length = 120;
  int pre = 10;
  int post = 10;
  double alpha = 0.05;
};

enum class Sign { plus, minus, zero };

const char* to_string(Sign s);

// "+" when statistic/sd > q_{1-alpha/2}, "-" when below its negative, else "0".
// sd <= 0 throws std::invalid_argument.
Sign classify_sign(double statistic, double sd, double alpha);

// Two-sided standard normal critical value q_{1-alpha/2}.
double normal_critical(double alpha);

// sum sigma2 + (sum z)' M (sum z)
double car_variance(std::span<const double> sigma2, const Eigen::Matrix2d& kappa_cov,
                    std::span<const Eigen::Vector2d> z);

struct EventDay {
  int rel_day = 0;
  double ar = 0.0;
  double var_ar = 0.0;
  double car = 0.0;  // accumulated from -pre
  double var_car = 0.0;
  double scar = 0.0;
  double ci_lo = 0.0;  // CI on CAR
  double ci_hi = 0.0;
};

struct EventResult {
  std::size_t event_index = 0;  // position of day 0 in the input series
  std::vector<EventDay> days;   // rel_day = -pre .. post
  Sign ar_flag = Sign::zero;    // at day 0
  Sign car_flag = Sign::zero;
  Sign scar_flag = Sign::zero;
  std::vector<double> sigma2_forecast;
  CapmFit fit;

  const EventDay& day(int rel) const;
};

// First index whose date is on or after `event` (non-trading days roll forward).
std::optional<std::size_t> locate_event(const std::vector<Date>& dates, Date event);

// Market-model event study around position `event_index`. The estimation
// window is the estimation_length observations ending just before -pre.
// Throws InputError when the series cannot hold both windows.
EventResult run_event_study(std::span<const double> Ri, std::span<const double> Rm, std::size_t event_index,
                            const WindowConfig& window, const EstimatorConfig& estimator);

// Excess returns of one index variant, aligned on `dates`.
struct VariantReturns {
  IndexVariant variant = IndexVariant::PI;
  std::vector<Date> dates;
  std::vector<double> market;
  std::vector<std::pair<std::string, std::vector<double>>> portfolios;
};

struct SignCell {
  std::optional<EventResult> result;
  std::string error;  // set when result is empty
};

struct SignTable {
  IndexVariant variant = IndexVariant::PI;
  std::vector<EventSpec> events;
  std::vector<std::string> portfolios;
  std::vector<std::vector<SignCell>> cells;  // [event][portfolio]
};

// One table per variant; every (event, portfolio) cell is an independent job
// seeded by derive_seed(root_seed, key). A failing cell is reported as NA.
std::vector<SignTable> sign_table(const std::vector<EventSpec>& events, const std::vector<VariantReturns>& variants,
                                  const WindowConfig& window, const EstimatorConfig& estimator,
                                  std::uint64_t root_seed);

std::string cell_seed_key(IndexVariant variant, const std::string& portfolio, const EventSpec& event);

void write_sign_table_csv(const SignTable& table, std::ostream& out);
void write_event_detail_csv(const EventResult& result, std::ostream& out);
void write_event_svg(const EventResult& result, const std::string& title, std::ostream& out);

}  // namespace evkit
