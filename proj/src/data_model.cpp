#include "evkit/data_model.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <set>
#include <tuple>

#include "evkit/csv.hpp"
#include "evkit/errors.hpp"

namespace evkit {

TradingCalendar::TradingCalendar(std::vector<Date> dates) : dates_(std::move(dates)) {
  for (std::size_t i = 1; i < dates_.size(); ++i) {
    if (!(dates_[i - 1] < dates_[i])) {
      throw InputError("trading calendar must be strictly increasing; problem at " +
                       dates_[i].to_string());
    }
  }
}

std::optional<std::size_t> TradingCalendar::index_of(Date d) const {
  auto it = std::lower_bound(dates_.begin(), dates_.end(), d);
  if (it == dates_.end() || *it != d) return std::nullopt;
  return static_cast<std::size_t>(it - dates_.begin());
}

std::optional<std::size_t> TradingCalendar::index_on_or_after(Date d) const {
  auto it = std::lower_bound(dates_.begin(), dates_.end(), d);
  if (it == dates_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - dates_.begin());
}

const SecuritySeries* PanelDataset::find(const std::string& id) const {
  auto it = std::lower_bound(securities.begin(), securities.end(), id,
                             [](const SecuritySeries& s, const std::string& key) { return s.id < key; });
  if (it == securities.end() || it->id != id) return nullptr;
  return &*it;
}

std::string to_string(ActionKind kind) {
  switch (kind) {
    case ActionKind::dividend: return "dividend";
    case ActionKind::rights_issue: return "rights_issue";
    case ActionKind::share_allocation: return "share_allocation";
  }
  return "?";
}

ActionKind parse_action_kind(const std::string& text) {
  if (text == "dividend") return ActionKind::dividend;
  if (text == "rights_issue") return ActionKind::rights_issue;
  if (text == "share_allocation") return ActionKind::share_allocation;
  throw InputError("unknown corporate action kind '" + text + "'");
}

namespace {

struct RawSecurity {
  bool zaibatsu = false;
  bool military = false;
  std::size_t first_line = 0;
  std::map<Date, Quote> quotes;
};

const std::vector<std::string> kPricesHeader{"security_id", "date",     "price",
                                             "shares_outstanding", "zaibatsu", "military"};
const std::vector<std::string> kActionsHeader{"security_id",        "ex_date",
                                              "kind",               "cash_amount",
                                              "new_shares_per_old", "subscription_price"};
const std::vector<std::string> kRatesHeader{"date", "daily_rate"};

PanelDataset build_panel(const csv::Table& prices, const csv::Table& actions,
                         const csv::Table& rates) {
  prices.require_header(kPricesHeader);
  actions.require_header(kActionsHeader);
  rates.require_header(kRatesHeader);

  std::map<std::string, RawSecurity> raw;
  std::set<Date> all_dates;
  for (const auto& row : prices.rows()) {
    const std::string& id = row.fields[0];
    if (id.empty()) prices.fail(row, "empty security_id");
    Date date;
    try {
      date = Date::parse(row.fields[1]);
    } catch (const InputError& e) {
      prices.fail(row, e.what());
    }
    const double price = prices.number(row, 2);
    const double shares = prices.number(row, 3);
    const bool z = prices.flag(row, 4);
    const bool m = prices.flag(row, 5);
    if (price <= 0.0) prices.fail(row, "non-positive price for " + id);
    if (shares <= 0.0) prices.fail(row, "non-positive share count for " + id);

    auto [it, inserted] = raw.try_emplace(id);
    RawSecurity& sec = it->second;
    if (inserted) {
      sec.zaibatsu = z;
      sec.military = m;
      sec.first_line = row.line;
    } else if (sec.zaibatsu != z || sec.military != m) {
      prices.fail(row, "flags for " + id + " differ from line " + std::to_string(sec.first_line));
    }
    if (!sec.quotes.emplace(date, Quote{price, shares}).second) {
      prices.fail(row, "duplicate (security_id,date) key (" + id + "," + date.to_string() + ")");
    }
    all_dates.insert(date);
  }

  PanelDataset panel;
  panel.calendar = TradingCalendar(std::vector<Date>(all_dates.begin(), all_dates.end()));
  const std::size_t n = panel.calendar.size();
  for (auto& [id, sec] : raw) {
    SecuritySeries series{id, sec.zaibatsu, sec.military, std::vector<std::optional<Quote>>(n)};
    for (const auto& [date, quote] : sec.quotes) {
      series.quotes[*panel.calendar.index_of(date)] = quote;
    }
    panel.securities.push_back(std::move(series));
  }

  for (const auto& row : actions.rows()) {
    CorporateAction a;
    a.security_id = row.fields[0];
    try {
      a.ex_date = Date::parse(row.fields[1]);
      a.kind = parse_action_kind(row.fields[2]);
    } catch (const InputError& e) {
      actions.fail(row, e.what());
    }
    a.cash_amount = actions.number(row, 3);
    a.new_shares_per_old = actions.number(row, 4);
    a.subscription_price = actions.number(row, 5);
    if (a.cash_amount < 0.0 || a.new_shares_per_old < 0.0 || a.subscription_price < 0.0) {
      actions.fail(row, "negative amount in corporate action for " + a.security_id);
    }
    if (a.kind == ActionKind::dividend && a.new_shares_per_old != 0.0) {
      actions.fail(row, "dividend carries share ratio");
    }
    if (a.kind == ActionKind::rights_issue && !(a.new_shares_per_old > 0.0)) {
      actions.fail(row, "rights issue without a positive share ratio");
    }
    const SecuritySeries* sec = panel.find(a.security_id);
    if (sec == nullptr) {
      actions.fail(row, "action references unknown security '" + a.security_id + "'");
    }
    auto idx = panel.calendar.index_of(a.ex_date);
    if (!idx || !sec->quotes[*idx]) {
      actions.fail(row, "ex_date " + a.ex_date.to_string() + " is not a trading date of " +
                            a.security_id);
    }
    panel.actions.push_back(std::move(a));
  }
  std::stable_sort(panel.actions.begin(), panel.actions.end(),
                   [](const CorporateAction& x, const CorporateAction& y) {
                     return std::tie(x.ex_date, x.security_id) < std::tie(y.ex_date, y.security_id);
                   });

  panel.call_rates.assign(n, std::nullopt);
  std::set<Date> seen_rates;
  for (const auto& row : rates.rows()) {
    Date date;
    try {
      date = Date::parse(row.fields[0]);
    } catch (const InputError& e) {
      rates.fail(row, e.what());
    }
    const double rate = rates.number(row, 1);
    if (!seen_rates.insert(date).second) {
      rates.fail(row, "duplicate rate for " + date.to_string());
    }
    if (auto idx = panel.calendar.index_of(date)) panel.call_rates[*idx] = rate;
  }

  validate(panel);
  return panel;
}

}  // namespace

PanelDataset load_panel(const std::filesystem::path& prices_path,
                        const std::filesystem::path& actions_path,
                        const std::filesystem::path& rates_path) {
  return build_panel(csv::Table::read(prices_path), csv::Table::read(actions_path),
                     csv::Table::read(rates_path));
}

PanelDataset parse_panel(const std::string& prices_csv, const std::string& actions_csv,
                         const std::string& rates_csv) {
  return build_panel(csv::Table::parse(prices_csv, "prices.csv"),
                     csv::Table::parse(actions_csv, "actions.csv"),
                     csv::Table::parse(rates_csv, "rates.csv"));
}

void validate(const PanelDataset& panel) {
  const std::size_t n = panel.calendar.size();
  if (panel.call_rates.size() != n) {
    throw InputError("call-rate series is not aligned to the calendar");
  }
  for (std::size_t i = 1; i < panel.securities.size(); ++i) {
    if (!(panel.securities[i - 1].id < panel.securities[i].id)) {
      throw InputError("securities must be unique and sorted by id");
    }
  }
  for (const auto& sec : panel.securities) {
    if (sec.quotes.size() != n) {
      throw InputError("series for " + sec.id + " is not aligned to the calendar");
    }
    std::optional<std::size_t> first, last;
    for (std::size_t t = 0; t < n; ++t) {
      if (sec.quotes[t]) {
        if (!(sec.quotes[t]->price > 0.0) || !(sec.quotes[t]->shares_outstanding > 0.0)) {
          throw InputError("non-positive price or share count for " + sec.id + " on " +
                           panel.calendar[t].to_string());
        }
        if (!first) first = t;
        last = t;
      }
    }
    if (!first) throw InputError("security " + sec.id + " has no prices");
    for (std::size_t t = *first; t <= *last; ++t) {
      if (!sec.quotes[t]) {
        throw InputError("missing price for " + sec.id + " on " + panel.calendar[t].to_string() +
                         " inside its listing span");
      }
    }
  }
  for (const auto& a : panel.actions) {
    const SecuritySeries* sec = panel.find(a.security_id);
    if (sec == nullptr) throw InputError("action references unknown security '" + a.security_id + "'");
    auto idx = panel.calendar.index_of(a.ex_date);
    if (!idx || !sec->quotes[*idx]) {
      throw InputError("ex_date " + a.ex_date.to_string() + " is not a trading date of " + a.security_id);
    }
  }
}

PanelDataset align_to_calendar(const PanelDataset& panel, const TradingCalendar& calendar) {
  PanelDataset out;
  out.calendar = calendar;
  const std::size_t n = calendar.size();
  std::vector<std::optional<std::size_t>> map_old(panel.calendar.size());
  for (std::size_t t = 0; t < panel.calendar.size(); ++t) {
    map_old[t] = calendar.index_of(panel.calendar[t]);
  }
  for (const auto& sec : panel.securities) {
    SecuritySeries s{sec.id, sec.zaibatsu, sec.military, std::vector<std::optional<Quote>>(n)};
    for (std::size_t t = 0; t < sec.quotes.size(); ++t) {
      if (!sec.quotes[t]) continue;
      if (!map_old[t]) {
        throw InputError("calendar is missing traded date " + panel.calendar[t].to_string() +
                         " (" + sec.id + ")");
      }
      s.quotes[*map_old[t]] = sec.quotes[t];
    }
    out.securities.push_back(std::move(s));
  }
  out.actions = panel.actions;
  out.call_rates.assign(n, std::nullopt);
  for (std::size_t t = 0; t < panel.call_rates.size(); ++t) {
    if (panel.call_rates[t] && map_old[t]) out.call_rates[*map_old[t]] = panel.call_rates[t];
  }
  validate(out);
  return out;
}

void write_prices_csv(const PanelDataset& panel, std::ostream& out) {
  csv::write_line(out, kPricesHeader);
  for (const auto& sec : panel.securities) {
    for (std::size_t t = 0; t < sec.quotes.size(); ++t) {
      if (!sec.quotes[t]) continue;
      csv::write_line(out, {sec.id, panel.calendar[t].to_string(), csv::exact(sec.quotes[t]->price),
                            csv::exact(sec.quotes[t]->shares_outstanding), sec.zaibatsu ? "1" : "0",
                            sec.military ? "1" : "0"});
    }
  }
}

void write_actions_csv(const PanelDataset& panel, std::ostream& out) {
  csv::write_line(out, kActionsHeader);
  for (const auto& a : panel.actions) {
    csv::write_line(out, {a.security_id, a.ex_date.to_string(), to_string(a.kind),
                          csv::exact(a.cash_amount), csv::exact(a.new_shares_per_old),
                          csv::exact(a.subscription_price)});
  }
}

void write_rates_csv(const PanelDataset& panel, std::ostream& out) {
  csv::write_line(out, kRatesHeader);
  for (std::size_t t = 0; t < panel.call_rates.size(); ++t) {
    if (panel.call_rates[t]) {
      csv::write_line(out, {panel.calendar[t].to_string(), csv::exact(*panel.call_rates[t])});
    }
  }
}

}  // namespace evkit
