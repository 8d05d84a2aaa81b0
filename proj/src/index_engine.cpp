#include "evkit/index_engine.hpp"

#include <map>
#include <utility>

#include "evkit/errors.hpp"
#include "evkit/parallel.hpp"

namespace evkit {

std::string to_string(IndexVariant v) {
  switch (v) {
    case IndexVariant::PI: return "PI";
    case IndexVariant::API: return "API";
    case IndexVariant::TRI: return "TRI";
  }
  return "?";
}

IndexVariant parse_index_variant(const std::string& text) {
  if (text == "PI" || text == "pi") return IndexVariant::PI;
  if (text == "API" || text == "api") return IndexVariant::API;
  if (text == "TRI" || text == "tri") return IndexVariant::TRI;
  throw InputError("unknown index variant '" + text + "' (expected PI, API or TRI)");
}

PortfolioSpec PortfolioSpec::of(Group g) {
  return {std::string(evkit::name(g)), is_zaibatsu(g), is_military(g)};
}

std::vector<PortfolioSpec> PortfolioSpec::canonical() {
  std::vector<PortfolioSpec> specs{market()};
  for (Group g : kGroups) specs.push_back(of(g));
  return specs;
}

PortfolioSpec PortfolioSpec::by_name(const std::string& text) {
  for (auto& spec : canonical()) {
    if (spec.name == text) return spec;
  }
  throw InputError("unknown portfolio '" + text + "' (expected market, zm, zn, nm or nn)");
}

double theoretical_ex_price(double cum_price, double new_per_old, double subscription) {
  return (cum_price + subscription * new_per_old) / (1.0 + new_per_old);
}

ExDateAdjustment adjust_for_actions(double previous_price,
                                    const std::vector<const CorporateAction*>& actions,
                                    IndexVariant variant) {
  ExDateAdjustment adj{previous_price, 0.0};
  if (variant == IndexVariant::PI) return adj;
  double multiplier = 1.0;  // post-action shares per old share
  double cash_per_old = 0.0;
  for (const CorporateAction* a : actions) {
    cash_per_old += a->cash_amount / multiplier;
    if (a->kind != ActionKind::dividend && a->new_shares_per_old > 0.0) {
      adj.adjusted_previous_price =
          theoretical_ex_price(adj.adjusted_previous_price, a->new_shares_per_old, a->subscription_price);
      multiplier *= 1.0 + a->new_shares_per_old;
    }
  }
  if (variant == IndexVariant::TRI) adj.cash_distribution = cash_per_old / multiplier;
  return adj;
}

IndexSeries build_index(const PanelDataset& panel, const PortfolioSpec& spec, IndexVariant variant,
                        Date base_date) {
  const auto& cal = panel.calendar;
  const std::size_t n = cal.size();
  auto base = cal.index_of(base_date);
  if (!base) {
    throw InputError("base date " + base_date.to_string() + " is not a trading date");
  }

  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < panel.securities.size(); ++i) {
    if (spec.matches(panel.securities[i])) members.push_back(i);
  }

  std::map<std::pair<std::size_t, std::string>, std::vector<const CorporateAction*>> by_day;
  for (const auto& a : panel.actions) {
    by_day[{*cal.index_of(a.ex_date), a.security_id}].push_back(&a);
  }
  const std::vector<const CorporateAction*> none;

  auto market_value = [&](std::size_t t) {
    double mv = 0.0;
    for (std::size_t i : members) {
      const auto& q = panel.securities[i].quotes[t];
      if (q) mv += q->price * q->shares_outstanding;
    }
    return mv;
  };

  std::vector<double> chain(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    if (!(market_value(t) > 0.0)) {
      throw InputError("portfolio " + spec.name + " has no constituents on " + cal[t].to_string());
    }
    if (t == 0) {
      chain[0] = 1.0;
      continue;
    }
    double before = 0.0;
    double after = 0.0;
    for (std::size_t i : members) {
      const auto& sec = panel.securities[i];
      const auto& prev = sec.quotes[t - 1];
      const auto& cur = sec.quotes[t];
      if (!prev || !cur) continue;
      auto it = by_day.find({t, sec.id});
      const auto adj = adjust_for_actions(prev->price, it == by_day.end() ? none : it->second, variant);
      const double growth = (cur->price + adj.cash_distribution) / adj.adjusted_previous_price;
      const double weight = prev->price * prev->shares_outstanding;
      before += weight;
      after += weight * growth;
    }
    if (!(before > 0.0)) {
      throw InputError("portfolio " + spec.name + " has no continuing constituents between " +
                       cal[t - 1].to_string() + " and " + cal[t].to_string());
    }
    chain[t] = chain[t - 1] * (after / before);
  }

  IndexSeries out;
  out.portfolio = spec.name;
  out.variant = variant;
  out.base_date = base_date;
  out.dates = cal.dates();
  out.levels.resize(n);
  out.divisors.resize(n);
  const double base_chain = chain[*base];
  for (std::size_t t = 0; t < n; ++t) {
    out.levels[t] = chain[t] / base_chain * 100.0;
    out.divisors[t] = market_value(t) / out.levels[t];
  }
  return out;
}

ReturnSeries compute_returns(const IndexSeries& index) {
  if (index.levels.size() < 2) {
    throw std::invalid_argument("compute_returns needs at least two index levels");
  }
  ReturnSeries r;
  r.flavor = ReturnFlavor::raw;
  for (std::size_t t = 1; t < index.levels.size(); ++t) {
    r.dates.push_back(index.dates[t]);
    r.values.push_back(index.levels[t] / index.levels[t - 1] - 1.0);
  }
  return r;
}

ReturnSeries compute_excess_returns(const ReturnSeries& returns, const TradingCalendar& calendar,
                                    const std::vector<std::optional<double>>& call_rates) {
  ReturnSeries out;
  out.flavor = ReturnFlavor::excess;
  out.dates = returns.dates;
  out.values.reserve(returns.values.size());
  for (std::size_t k = 0; k < returns.dates.size(); ++k) {
    auto idx = calendar.index_of(returns.dates[k]);
    if (!idx || *idx >= call_rates.size() || !call_rates[*idx]) {
      throw InputError("missing call rate on " + returns.dates[k].to_string());
    }
    out.values.push_back(returns.values[k] - *call_rates[*idx]);
  }
  return out;
}

CapShareSeries compute_cap_shares(const PanelDataset& panel) {
  return par::cap_shares(panel);
}

}  // namespace evkit
