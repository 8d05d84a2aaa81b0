#include "evkit/event_study.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

#include "evkit/csv.hpp"
#include "evkit/errors.hpp"
#include "evkit/parallel.hpp"
#include "evkit/rng.hpp"
#include "evkit/sv_mcmc.hpp"

namespace evkit {

std::string to_string(EventType type) {
  switch (type) {
    case EventType::War: return "War";
    case EventType::Politics: return "Politics";
    case EventType::Regulations: return "Regulations";
    case EventType::Market: return "Market";
  }
  return "?";
}

EventType parse_event_type(const std::string& text) {
  for (EventType t : {EventType::War, EventType::Politics, EventType::Regulations, EventType::Market}) {
    if (text == to_string(t)) return t;
  }
  throw InputError("unknown event type '" + text + "' (expected War, Politics, Regulations or Market)");
}

std::vector<EventSpec> load_events(const std::filesystem::path& path) {
  const auto table = csv::Table::read(path);
  table.require_header({"date", "name", "type"});
  std::vector<EventSpec> out;
  for (const auto& row : table.rows()) {
    EventSpec e;
    try {
      e.date = Date::parse(row.fields[0]);
      e.type = parse_event_type(row.fields[2]);
    } catch (const InputError& err) {
      table.fail(row, err.what());
    }
    e.name = row.fields[1];
    if (e.name.empty()) table.fail(row, "empty event name");
    out.push_back(std::move(e));
  }
  return out;
}

const char* to_string(Sign s) {
  switch (s) {
    case Sign::plus: return "+";
    case Sign::minus: return "-";
    case Sign::zero: return "0";
  }
  return "?";
}

double normal_critical(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("significance level must lie in (0,1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), 1.0 - alpha / 2.0);
}

Sign classify_sign(double statistic, double sd, double alpha) {
  if (!(sd > 0.0)) throw std::invalid_argument("classify_sign: sd must be positive");
  const double z = statistic / sd;
  const double q = normal_critical(alpha);
  if (z > q) return Sign::plus;
  if (z < -q) return Sign::minus;
  return Sign::zero;
}

double car_variance(std::span<const double> sigma2, const Eigen::Matrix2d& kappa_cov,
                    std::span<const Eigen::Vector2d> z) {
  if (sigma2.size() != z.size()) throw std::invalid_argument("car_variance: inputs are not aligned");
  double s = 0.0;
  Eigen::Vector2d zsum = Eigen::Vector2d::Zero();
  for (std::size_t k = 0; k < z.size(); ++k) {
    s += sigma2[k];
    zsum += z[k];
  }
  return s + zsum.dot(kappa_cov * zsum);
}

const EventDay& EventResult::day(int rel) const {
  for (const auto& d : days) {
    if (d.rel_day == rel) return d;
  }
  throw std::out_of_range("relative day " + std::to_string(rel) + " outside the event window");
}

std::optional<std::size_t> locate_event(const std::vector<Date>& dates, Date event) {
  auto it = std::lower_bound(dates.begin(), dates.end(), event);
  if (it == dates.end()) return std::nullopt;
  return static_cast<std::size_t>(it - dates.begin());
}

EventResult run_event_study(std::span<const double> Ri, std::span<const double> Rm, std::size_t e,
                            const WindowConfig& w, const EstimatorConfig& estimator) {
  if (Ri.size() != Rm.size()) throw std::invalid_argument("run_event_study: inputs are not aligned");
  if (w.pre < 0 || w.post < 0 || w.estimation_length <= 0) {
    throw std::invalid_argument("run_event_study: window lengths must be non-negative");
  }
  const std::size_t pre = static_cast<std::size_t>(w.pre);
  const std::size_t post = static_cast<std::size_t>(w.post);
  const std::size_t L = static_cast<std::size_t>(w.estimation_length);
  if (e < pre + L || e + post >= Ri.size()) {
    throw InputError("insufficient history for the event window (need " + std::to_string(L) +
                     " estimation days before day -" + std::to_string(pre) + " and " + std::to_string(post) +
                     " days after day 0)");
  }
  const std::size_t est_begin = e - pre - L;
  EventResult res;
  res.event_index = e;
  res.fit = estimate_capm_arp_sv(Ri.subspan(est_begin, L), Rm.subspan(est_begin, L), estimator);
  const auto& f = res.fit;
  const int horizon = static_cast<int>(pre + post + 1);
  res.sigma2_forecast = forecast_volatility(f.sv, f.h_last_mean, horizon);

  const double q = normal_critical(w.alpha);
  double car = 0.0;
  double s2_sum = 0.0;
  Eigen::Vector2d zsum = Eigen::Vector2d::Zero();
  for (int k = 0; k < horizon; ++k) {
    const std::size_t t = e - pre + static_cast<std::size_t>(k);
    const Eigen::Vector2d z(1.0, Rm[t]);
    EventDay d;
    d.rel_day = k - w.pre;
    d.ar = Ri[t] - (f.alpha + f.beta * Rm[t]);
    d.var_ar = res.sigma2_forecast[k] + z.dot(f.kappa_cov * z);
    car += d.ar;
    s2_sum += res.sigma2_forecast[k];
    zsum += z;
    d.car = car;
    d.var_car = s2_sum + zsum.dot(f.kappa_cov * zsum);
    d.scar = d.car / std::sqrt(d.var_car);
    const double half = q * std::sqrt(d.var_car);
    d.ci_lo = d.car - half;
    d.ci_hi = d.car + half;
    res.days.push_back(d);
  }
  const EventDay& d0 = res.day(0);
  res.ar_flag = classify_sign(d0.ar, std::sqrt(d0.var_ar), w.alpha);
  res.car_flag = classify_sign(d0.car, std::sqrt(d0.var_car), w.alpha);
  res.scar_flag = classify_sign(d0.scar, 1.0, w.alpha);
  return res;
}

std::string cell_seed_key(IndexVariant variant, const std::string& portfolio, const EventSpec& event) {
  return to_string(variant) + "/" + portfolio + "/" + event.date.to_string() + "/" + event.name;
}

std::vector<SignTable> sign_table(const std::vector<EventSpec>& events, const std::vector<VariantReturns>& variants,
                                  const WindowConfig& window, const EstimatorConfig& estimator,
                                  std::uint64_t root_seed) {
  struct Job {
    std::size_t v, e, p;
  };
  std::vector<Job> jobs;
  std::vector<SignTable> tables;
  for (std::size_t v = 0; v < variants.size(); ++v) {
    SignTable t;
    t.variant = variants[v].variant;
    t.events = events;
    for (const auto& [name, _] : variants[v].portfolios) t.portfolios.push_back(name);
    t.cells.assign(events.size(), std::vector<SignCell>(t.portfolios.size()));
    tables.push_back(std::move(t));
    for (std::size_t e = 0; e < events.size(); ++e) {
      for (std::size_t p = 0; p < variants[v].portfolios.size(); ++p) jobs.push_back({v, e, p});
    }
  }
  auto cells = par::map_indexed(jobs.size(), [&](std::size_t j) {
    const Job& job = jobs[j];
    const VariantReturns& vr = variants[job.v];
    const EventSpec& ev = events[job.e];
    const auto& [pname, ri] = vr.portfolios[job.p];
    SignCell cell;
    try {
      auto idx = locate_event(vr.dates, ev.date);
      if (!idx) throw InputError("event date " + ev.date.to_string() + " is after the last trading day");
      EstimatorConfig cfg = estimator;
      cfg.mcmc.seed = derive_seed(root_seed, cell_seed_key(vr.variant, pname, ev));
      cell.result = run_event_study(ri, vr.market, *idx, window, cfg);
    } catch (const std::exception& err) {
      cell.error = err.what();
    }
    return cell;
  });
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    tables[jobs[j].v].cells[jobs[j].e][jobs[j].p] = std::move(cells[j]);
  }
  return tables;
}

void write_sign_table_csv(const SignTable& table, std::ostream& out) {
  std::vector<std::string> header{"event_date", "event_name", "event_type"};
  for (const auto& p : table.portfolios) {
    for (const char* s : {"_ar", "_car", "_scar"}) header.push_back(p + s);
  }
  csv::write_line(out, header);
  for (std::size_t e = 0; e < table.events.size(); ++e) {
    const auto& ev = table.events[e];
    std::vector<std::string> row{ev.date.to_string(), ev.name, to_string(ev.type)};
    for (const auto& cell : table.cells[e]) {
      if (cell.result) {
        row.push_back(to_string(cell.result->ar_flag));
        row.push_back(to_string(cell.result->car_flag));
        row.push_back(to_string(cell.result->scar_flag));
      } else {
        row.insert(row.end(), {"NA", "NA", "NA"});
      }
    }
    csv::write_line(out, row);
  }
}

void write_event_detail_csv(const EventResult& r, std::ostream& out) {
  csv::write_line(out, {"rel_day", "ar", "var_ar", "car", "var_car", "scar", "ci_lo", "ci_hi"});
  for (const auto& d : r.days) {
    csv::write_line(out, {std::to_string(d.rel_day), csv::exact(d.ar), csv::exact(d.var_ar), csv::exact(d.car),
                          csv::exact(d.var_car), csv::exact(d.scar), csv::exact(d.ci_lo), csv::exact(d.ci_hi)});
  }
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void write_event_svg(const EventResult& r, const std::string& title, std::ostream& out) {
  const double W = 640, H = 360, ml = 60, mr = 20, mt = 40, mb = 40;
  double lo = 0.0, hi = 0.0;
  for (const auto& d : r.days) {
    lo = std::min({lo, d.ci_lo, d.car});
    hi = std::max({hi, d.ci_hi, d.car});
  }
  if (hi - lo <= 0.0) hi = lo + 1e-6;
  const int first = r.days.front().rel_day;
  const int last = r.days.back().rel_day;
  const double span = std::max(1, last - first);
  auto X = [&](int day) { return ml + (W - ml - mr) * (day - first) / span; };
  auto Y = [&](double v) { return mt + (H - mt - mb) * (hi - v) / (hi - lo); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  out << "<text x=\"" << ml << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << xml_escape(title)
      << "</text>\n";
  out << "<polygon fill=\"#c6dbef\" stroke=\"none\" points=\"";
  for (const auto& d : r.days) out << csv::number(X(d.rel_day), 6) << ',' << csv::number(Y(d.ci_hi), 6) << ' ';
  for (auto it = r.days.rbegin(); it != r.days.rend(); ++it) {
    out << csv::number(X(it->rel_day), 6) << ',' << csv::number(Y(it->ci_lo), 6) << ' ';
  }
  out << "\"/>\n";
  out << "<line x1=\"" << ml << "\" x2=\"" << W - mr << "\" y1=\"" << csv::number(Y(0.0), 6) << "\" y2=\""
      << csv::number(Y(0.0), 6) << "\" stroke=\"#888\"/>\n";
  out << "<line x1=\"" << csv::number(X(0), 6) << "\" x2=\"" << csv::number(X(0), 6) << "\" y1=\"" << mt
      << "\" y2=\"" << H - mb << "\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n";
  out << "<polyline fill=\"none\" stroke=\"#08519c\" stroke-width=\"2\" points=\"";
  for (const auto& d : r.days) out << csv::number(X(d.rel_day), 6) << ',' << csv::number(Y(d.car), 6) << ' ';
  out << "\"/>\n";
  out << "<text x=\"" << ml << "\" y=\"" << H - 12 << "\" font-family=\"sans-serif\" font-size=\"11\">day " << first
      << "</text>\n";
  out << "<text x=\"" << W - mr - 40 << "\" y=\"" << H - 12
      << "\" font-family=\"sans-serif\" font-size=\"11\">day " << last << "</text>\n";
  out << "</svg>\n";
}

}  // namespace evkit
