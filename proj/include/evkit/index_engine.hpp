#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "evkit/data_model.hpp"
#include "evkit/date.hpp"

namespace evkit {

enum class IndexVariant { PI, API, TRI };

inline constexpr std::array<IndexVariant, 3> kIndexVariants{IndexVariant::PI, IndexVariant::API,
                                                            IndexVariant::TRI};

std::string to_string(IndexVariant v);
IndexVariant parse_index_variant(const std::string& text);

// Membership predicate over the two classification flags. An empty optional
// matches either value, so the market portfolio leaves both unset.
struct PortfolioSpec {
  std::string name;
  std::optional<bool> zaibatsu;
  std::optional<bool> military;

  bool matches(const SecuritySeries& s) const {
    return (!zaibatsu || *zaibatsu == s.zaibatsu) && (!military || *military == s.military);
  }

  static PortfolioSpec market() { return {"market", std::nullopt, std::nullopt}; }
  static PortfolioSpec of(Group g);
  // The five canonical specs: market, zm, zn, nm, nn.
  static std::vector<PortfolioSpec> canonical();
  static PortfolioSpec by_name(const std::string& name);
};

struct IndexSeries {
  std::string portfolio;
  IndexVariant variant = IndexVariant::PI;
  Date base_date;
  std::vector<Date> dates;
  std::vector<double> levels;    // level(base_date) == 100
  std::vector<double> divisors;  // constituent market value / level
};

enum class ReturnFlavor { raw, excess };

struct ReturnSeries {
  std::vector<Date> dates;
  std::vector<double> values;
  ReturnFlavor flavor = ReturnFlavor::raw;
};

struct CapShareSeries {
  std::vector<Date> dates;
  std::vector<std::array<double, 4>> shares;  // indexed by Group
};

// Theoretical ex-rights price for `new_per_old` new shares subscribed at
// `subscription` per old share held at cum price `cum_price`.
double theoretical_ex_price(double cum_price, double new_per_old, double subscription);

// Per-security adjustment folded into yesterday's close on an ex-date.
struct ExDateAdjustment {
  double adjusted_previous_price = 0.0;  // yesterday's close restated ex-action
  double cash_distribution = 0.0;        // per old share, reinvested by TRI only
};

// Applies every action of one security dated on an ex-date, in file order.
ExDateAdjustment adjust_for_actions(double previous_price, const std::vector<const CorporateAction*>& actions,
                                    IndexVariant variant);

// Capitalization-weighted index of the securities matched by `spec`, chain
// linked through a divisor. Membership and share-count changes take effect at
// the next day's open. Throws InputError when the constituent set is empty on
// any calendar date or `base_date` is not a trading date.
IndexSeries build_index(const PanelDataset& panel, const PortfolioSpec& spec, IndexVariant variant,
                        Date base_date);

// Simple returns r_t = level_t / level_{t-1} - 1 from the second date on.
ReturnSeries compute_returns(const IndexSeries& index);

// r_t - rf_t. `call_rates` is aligned on `calendar`; a missing rate on any
// return date throws InputError.
ReturnSeries compute_excess_returns(const ReturnSeries& returns, const TradingCalendar& calendar,
                                    const std::vector<std::optional<double>>& call_rates);

// Group shares of total market capitalization on each calendar date.
CapShareSeries compute_cap_shares(const PanelDataset& panel);

}  // namespace evkit
