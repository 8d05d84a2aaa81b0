#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "evkit/date.hpp"
#include "evkit/groups.hpp"

namespace evkit {

// Ordered trading dates; strictly increasing.
class TradingCalendar {
 public:
  TradingCalendar() = default;
  explicit TradingCalendar(std::vector<Date> dates);

  const std::vector<Date>& dates() const { return dates_; }
  std::size_t size() const { return dates_.size(); }
  bool empty() const { return dates_.empty(); }
  const Date& operator[](std::size_t i) const { return dates_[i]; }

  std::optional<std::size_t> index_of(Date d) const;
  // First trading date on or after `d`, if any.
  std::optional<std::size_t> index_on_or_after(Date d) const;

  friend bool operator==(const TradingCalendar&, const TradingCalendar&) = default;

 private:
  std::vector<Date> dates_;
};

struct Quote {
  double price = 0.0;               // currency per share, > 0
  double shares_outstanding = 0.0;  // > 0
  friend bool operator==(const Quote&, const Quote&) = default;
};

// One security's quotes indexed on the panel calendar. Absent entries mark
// dates outside the listing span.
struct SecuritySeries {
  std::string id;
  bool zaibatsu = false;
  bool military = false;
  std::vector<std::optional<Quote>> quotes;

  Group group() const { return group_of(zaibatsu, military); }
  friend bool operator==(const SecuritySeries&, const SecuritySeries&) = default;
};

enum class ActionKind { dividend, rights_issue, share_allocation };

struct CorporateAction {
  std::string security_id;
  Date ex_date;
  ActionKind kind = ActionKind::dividend;
  double cash_amount = 0.0;         // currency per old share
  double new_shares_per_old = 0.0;  // ratio
  double subscription_price = 0.0;  // currency per new share
  friend bool operator==(const CorporateAction&, const CorporateAction&) = default;
};

struct PanelDataset {
  TradingCalendar calendar;
  std::vector<SecuritySeries> securities;    // sorted by id
  std::vector<CorporateAction> actions;      // sorted by (ex_date, security_id)
  std::vector<std::optional<double>> call_rates;  // decimal per trading day, on calendar

  const SecuritySeries* find(const std::string& id) const;
  friend bool operator==(const PanelDataset&, const PanelDataset&) = default;
};

std::string to_string(ActionKind kind);
ActionKind parse_action_kind(const std::string& text);

// Loads and validates the three CSV inputs. The calendar is the sorted union
// of dates that carry a price. Throws InputError naming file and line.
PanelDataset load_panel(const std::filesystem::path& prices_path,
                        const std::filesystem::path& actions_path,
                        const std::filesystem::path& rates_path);

// Same as load_panel but from in-memory CSV text (used by tests and tools).
PanelDataset parse_panel(const std::string& prices_csv, const std::string& actions_csv,
                         const std::string& rates_csv);

// Re-indexes every series on `calendar`. Dates outside a listing span become
// absent; nothing is interpolated. Throws InputError naming the first priced
// date the calendar lacks.
PanelDataset align_to_calendar(const PanelDataset& panel, const TradingCalendar& calendar);

// Checks every panel invariant; throws InputError on the first violation.
void validate(const PanelDataset& panel);

void write_prices_csv(const PanelDataset& panel, std::ostream& out);
void write_actions_csv(const PanelDataset& panel, std::ostream& out);
void write_rates_csv(const PanelDataset& panel, std::ostream& out);

}  // namespace evkit
