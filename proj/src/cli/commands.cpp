#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "evkit/cli.hpp"
#include "evkit/csv.hpp"
#include "evkit/errors.hpp"
#include "evkit/parallel.hpp"
#include "evkit/rng.hpp"
#include "evkit/ts_stats.hpp"

#ifndef EVKIT_VERSION
#define EVKIT_VERSION "0.0.0"
#endif

namespace evkit::cli {

namespace {

// Collects output files and warnings; writes the manifest last.
class Session {
 public:
  Session(const RunConfig& cfg, std::string command, std::ostream& out, std::ostream& err)
      : cfg_(cfg), command_(std::move(command)), out_(out), err_(err) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.out, ec);
    if (ec || !std::filesystem::is_directory(cfg.out)) {
      throw InputError("cannot create output directory " + cfg.out.string());
    }
  }

  std::ofstream open(const std::string& name) {
    const auto path = cfg_.out / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write " + path.string());
    outputs_.push_back(name);
    return f;
  }

  void warn(const std::string& msg) {
    err_ << "warning: " << msg << '\n';
    warnings_.push_back(msg);
  }

  std::ostream& out() { return out_; }
  std::size_t warning_count() const { return warnings_.size(); }

  void finish() {
    std::sort(outputs_.begin(), outputs_.end());
    Json versions = {{"evkit", EVKIT_VERSION},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)},
                     {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                     {"compiler", __VERSION__},
                     {"openmp", _OPENMP}};
    Json manifest = {{"command", command_},          {"config_hash", config_hash(cfg_)}, {"seed", cfg_.seed},
                     {"versions", versions},         {"outputs", outputs_},              {"warnings", warnings_},
                     {"config", [&] {
                        Json c = to_json(cfg_);
                        c.erase("out");
                        return c;
                      }()}};
    std::ofstream f(cfg_.out / "manifest.json", std::ios::binary);
    if (!f) throw InputError("cannot write manifest in " + cfg_.out.string());
    f << manifest.dump(2) << '\n';
  }

 private:
  const RunConfig& cfg_;
  std::string command_;
  std::ostream& out_;
  std::ostream& err_;
  std::vector<std::string> outputs_;
  std::vector<std::string> warnings_;
};

void require_file(const std::filesystem::path& p, const char* what) {
  if (p.empty()) throw InputError(std::string("no ") + what + " file configured");
  if (!std::filesystem::is_regular_file(p)) throw InputError(std::string(what) + " file not found: " + p.string());
}

PanelDataset load_configured_panel(const RunConfig& cfg) {
  require_file(cfg.prices, "prices");
  require_file(cfg.actions, "actions");
  require_file(cfg.rates, "rates");
  return load_panel(cfg.prices, cfg.actions, cfg.rates);
}

std::string num(double v) { return csv::number(v, 12); }

// Excess returns per variant: market plus the non-market portfolios. A
// portfolio whose index cannot be built keeps an empty series.
struct Returns {
  std::vector<VariantReturns> variants;
  std::vector<std::map<std::string, std::string>> errors;  // per variant
};

Returns load_returns(const RunConfig& cfg, Session& s) {
  Returns r;
  if (!cfg.returns.empty()) {
    require_file(cfg.returns, "returns");
    SyntheticReturns sr = read_returns_csv(cfg.returns);
    VariantReturns vr{cfg.returns_variant, std::move(sr.dates), std::move(sr.market), {}};
    for (auto& [name, series] : sr.portfolios) {
      if (name == "market") continue;
      if (std::find(cfg.portfolios.begin(), cfg.portfolios.end(), name) == cfg.portfolios.end()) continue;
      vr.portfolios.emplace_back(name, std::move(series));
    }
    r.variants.push_back(std::move(vr));
    r.errors.emplace_back();
    return r;
  }
  const PanelDataset panel = load_configured_panel(cfg);
  const Date base = cfg.base_date.value_or(panel.calendar[0]);
  for (IndexVariant v : cfg.variants) {
    auto excess = [&](const PortfolioSpec& spec) {
      return compute_excess_returns(compute_returns(build_index(panel, spec, v, base)), panel.calendar,
                                    panel.call_rates);
    };
    const ReturnSeries market = excess(PortfolioSpec::market());
    VariantReturns vr{v, market.dates, market.values, {}};
    std::map<std::string, std::string> errs;
    for (const auto& name : cfg.portfolios) {
      if (name == "market") continue;
      try {
        vr.portfolios.emplace_back(name, excess(PortfolioSpec::by_name(name)).values);
      } catch (const InputError& err) {
        vr.portfolios.emplace_back(name, std::vector<double>{});
        errs[name] = err.what();
        s.warn(to_string(v) + "/" + name + ": " + err.what());
      }
    }
    r.variants.push_back(std::move(vr));
    r.errors.push_back(std::move(errs));
  }
  return r;
}

int cmd_index(const RunConfig& cfg, Session& s) {
  const PanelDataset panel = load_configured_panel(cfg);
  const Date base = cfg.base_date.value_or(panel.calendar[0]);
  for (IndexVariant v : cfg.variants) {
    for (const auto& name : cfg.portfolios) {
      const IndexSeries idx = build_index(panel, PortfolioSpec::by_name(name), v, base);
      auto f = s.open("index_" + to_string(v) + "_" + name + ".csv");
      csv::write_line(f, {"date", "level"});
      for (std::size_t t = 0; t < idx.dates.size(); ++t) csv::write_line(f, {idx.dates[t].to_string(), csv::exact(idx.levels[t])});
    }
  }
  const CapShareSeries shares = compute_cap_shares(panel);
  auto f = s.open("shares.csv");
  csv::write_line(f, {"date", "zm", "zn", "nm", "nn"});
  for (std::size_t t = 0; t < shares.dates.size(); ++t) {
    std::vector<std::string> row{shares.dates[t].to_string()};
    for (double v : shares.shares[t]) row.push_back(csv::exact(v));
    csv::write_line(f, row);
  }
  s.out() << "wrote " << cfg.variants.size() * cfg.portfolios.size() << " index files and shares.csv\n";
  return kOk;
}

int cmd_stats(const RunConfig& cfg, Session& s) {
  const Returns r = load_returns(cfg, s);
  auto f = s.open("stats.csv");
  csv::write_line(f, {"variant", "portfolio", "mean", "sd", "min", "max", "adf_gls", "phi_hat", "lag", "n",
                      "reject_1pct"});
  for (const auto& vr : r.variants) {
    std::vector<std::pair<std::string, const std::vector<double>*>> series{{"market", &vr.market}};
    for (const auto& [name, x] : vr.portfolios) series.emplace_back(name, &x);
    for (const auto& [name, x] : series) {
      std::vector<std::string> row{to_string(vr.variant), name};
      try {
        const Descriptive d = descriptive_stats(*x);
        const AdfGlsResult a = adf_gls(*x, AdfSpec::trend);
        row.insert(row.end(), {num(d.mean), num(d.sd), num(d.min), num(d.max), num(a.statistic), num(a.phi_hat),
                               std::to_string(a.selected_lag), std::to_string(d.n), a.reject_1pct ? "1" : "0"});
      } catch (const std::exception& err) {
        s.warn(to_string(vr.variant) + "/" + name + ": " + err.what());
        row.insert(row.end(), 9, "NA");
      }
      csv::write_line(f, row);
    }
  }
  return kOk;
}

struct SampleWindow {
  std::string name;
  std::size_t begin = 0, end = 0;
};

std::vector<SampleWindow> sample_windows(const RunConfig& cfg, const std::vector<Date>& dates) {
  std::vector<SampleWindow> w{{"full", 0, dates.size()}};
  if (cfg.split_date) {
    const auto split = static_cast<std::size_t>(std::lower_bound(dates.begin(), dates.end(), *cfg.split_date) - dates.begin());
    w.push_back({"pre", 0, split});
    w.push_back({"post", split, dates.size()});
  }
  return w;
}

int cmd_estimate(const RunConfig& cfg, Session& s) {
  const Returns r = load_returns(cfg, s);
  struct Cell {
    std::size_t v, p;
    SampleWindow w;
  };
  std::vector<Cell> cells;
  for (std::size_t v = 0; v < r.variants.size(); ++v) {
    for (const auto& w : sample_windows(cfg, r.variants[v].dates)) {
      for (std::size_t p = 0; p < r.variants[v].portfolios.size(); ++p) cells.push_back({v, p, w});
    }
  }
  struct Outcome {
    std::optional<CapmFit> fit;
    std::string error;
  };
  auto fits = par::map_indexed(cells.size(), [&](std::size_t i) {
    const Cell& c = cells[i];
    const auto& vr = r.variants[c.v];
    const auto& [name, ri] = vr.portfolios[c.p];
    Outcome o;
    try {
      if (ri.empty()) throw InputError(r.errors[c.v].count(name) ? r.errors[c.v].at(name) : "empty portfolio");
      EstimatorConfig ec = cfg.estimator;
      ec.mcmc.seed = derive_seed(cfg.seed, "estimate/" + to_string(vr.variant) + "/" + c.w.name + "/" + name);
      const std::size_t n = c.w.end - c.w.begin;
      o.fit = estimate_capm_arp_sv(std::span(ri).subspan(c.w.begin, n), std::span(vr.market).subspan(c.w.begin, n), ec);
    } catch (const std::exception& err) {
      o.error = err.what();
    }
    return o;
  });
  auto f = s.open("coefficients.csv");
  csv::write_line(f, {"variant", "window", "portfolio", "alpha", "se_alpha", "beta", "se_beta", "p", "adj_r2", "n",
                      "note"});
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Cell& c = cells[i];
    const auto& vr = r.variants[c.v];
    const std::string& name = vr.portfolios[c.p].first;
    std::vector<std::string> row{to_string(vr.variant), c.w.name, name};
    if (fits[i].fit) {
      const CapmFit& k = *fits[i].fit;
      row.insert(row.end(), {num(k.alpha), num(k.se_alpha), num(k.beta), num(k.se_beta), std::to_string(k.p),
                             num(k.adj_r2), std::to_string(k.n), ""});
    } else {
      row.insert(row.end(), 7, "NA");
      row.push_back(fits[i].error);
      s.warn(to_string(vr.variant) + "/" + c.w.name + "/" + name + ": " + fits[i].error);
    }
    csv::write_line(f, row);
  }
  s.out() << "estimated " << cells.size() << " cells, " << s.warning_count() << " warnings\n";
  return kOk;
}

int cmd_event(const RunConfig& cfg, Session& s) {
  require_file(cfg.events, "events");
  const auto events = load_events(cfg.events);
  const Returns r = load_returns(cfg, s);
  const auto tables = sign_table(events, r.variants, cfg.window, cfg.estimator, cfg.seed);
  std::size_t na = 0;
  for (const auto& t : tables) {
    const std::string v = to_string(t.variant);
    {
      auto f = s.open("sign_" + v + ".csv");
      write_sign_table_csv(t, f);
    }
    for (std::size_t e = 0; e < t.events.size(); ++e) {
      for (std::size_t p = 0; p < t.portfolios.size(); ++p) {
        const SignCell& cell = t.cells[e][p];
        const std::string stem = "event_" + v + "_" + t.portfolios[p] + "_" + std::to_string(e) + "_" +
                                 t.events[e].date.to_string();
        if (!cell.result) {
          ++na;
          s.warn(v + "/" + t.portfolios[p] + "/" + t.events[e].date.to_string() + ": " + cell.error);
          continue;
        }
        {
          auto f = s.open(stem + ".csv");
          write_event_detail_csv(*cell.result, f);
        }
        if (cfg.svg) {
          auto f = s.open(stem + ".svg");
          write_event_svg(*cell.result, v + " " + t.portfolios[p] + ": " + t.events[e].name, f);
        }
      }
    }
  }
  s.out() << "event study: " << tables.size() << " sign tables, " << na << " NA cells\n";
  return kOk;
}

int cmd_model_simulate(const RunConfig& cfg, Session& s) {
  const EquilibriumPath e = simulate_equilibrium(cfg.model, derive_seed(cfg.seed, "simulate"));
  for (const auto& w : e.warnings) s.warn(w);
  auto f = s.open("equilibrium.csv");
  write_equilibrium_csv(e, f);
  s.out() << "simulated " << cfg.model.T + 1 << " dates\n";
  return kOk;
}

int cmd_model_check(const RunConfig& cfg, Session& s) {
  std::size_t total = 0;
  auto summary = s.open("props_summary.csv");
  csv::write_line(summary, {"proposition", "draws", "premises", "violations"});
  for (PropSweep which : {PropSweep::prop1, PropSweep::prop2_escalation, PropSweep::prop2_setback, PropSweep::prop4,
                          PropSweep::prop5}) {
    const SweepReport rep = sweep_proposition(which, cfg.sweep_draws, cfg.seed);
    auto f = s.open("sweep_" + to_string(which) + ".csv");
    write_sweep_csv(rep, f);
    csv::write_line(summary, {to_string(which), std::to_string(rep.rows.size()), std::to_string(rep.premises()),
                              std::to_string(rep.violations())});
    s.out() << to_string(which) << ": draws " << rep.rows.size() << ", violations " << rep.violations() << '\n';
    total += rep.violations();
  }
  // staged diffusion identities on a fixed grid
  std::size_t staged_bad = 0;
  for (double pi : {0.1, 0.25, 0.4, 0.5, 0.75, 1.0}) {
    for (double theta : {-0.05, -0.001, 0.0, 0.02, 0.3}) {
      const StagedDiffusion d = staged_diffusion(theta, pi);
      if (d.ar_day0 + d.ar_day1 != d.car || d.ar_day0 != pi * theta) ++staged_bad;
    }
  }
  total += staged_bad;
  s.out() << "violations: " << total << '\n' << (total == 0 ? "PASS" : "FAIL") << '\n';
  return total == 0 ? kOk : kNumerical;
}

int cmd_model_synth(const RunConfig& cfg, Session& s) {
  const std::uint64_t seed = derive_seed(cfg.seed, "synth");
  if (cfg.synth_mode == "capm") {
    const SyntheticReturns r = synth_capm(cfg.truth, cfg.synth_length, seed);
    {
      auto f = s.open("returns.csv");
      write_returns_csv(r, f);
    }
    auto f = s.open("truth.json");
    f << to_json(cfg.truth).dump(2) << '\n';
    s.out() << "synthesized " << r.dates.size() << " days for " << r.portfolios.size() << " portfolios\n";
    return kOk;
  }
  const ModelPanel mp = synth_model(cfg.model, seed);
  for (const auto& w : mp.path.warnings) s.warn(w);
  if (mp.returns.degenerate) s.warn(mp.returns.note);
  {
    auto f = s.open("prices.csv");
    write_prices_csv(mp.panel, f);
  }
  {
    auto f = s.open("actions.csv");
    write_actions_csv(mp.panel, f);
  }
  {
    auto f = s.open("rates.csv");
    write_rates_csv(mp.panel, f);
  }
  {
    auto f = s.open("returns.csv");
    write_returns_csv(mp.returns, f);
  }
  {
    auto f = s.open("equilibrium.csv");
    write_equilibrium_csv(mp.path, f);
  }
  auto f = s.open("truth.json");
  f << to_json(cfg.model).dump(2) << '\n';
  s.out() << "synthesized model panel with " << mp.returns.dates.size() << " return days\n";
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Index construction, CAPM-AR(p)-SV estimation, event studies and model checks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", EVKIT_VERSION);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha;
  std::string out_dir, prices, actions, rates, events, returns, model_path;
  std::optional<std::size_t> draws, length;
  std::string mode;
  bool svg = false;

  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "root seed");
  app.add_option("--alpha", alpha, "two-sided significance level");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--prices", prices, "prices.csv");
  app.add_option("--actions", actions, "actions.csv");
  app.add_option("--rates", rates, "rates.csv");
  app.add_option("--events", events, "events.csv");
  app.add_option("--returns", returns, "excess returns CSV (date,market,...)");
  app.add_option("--model", model_path, "model parameter JSON");
  app.add_option("--draws", draws, "draws per proposition sweep");
  app.add_option("--length", length, "synthetic series length");
  app.add_option("--mode", mode, "synth mode: capm or model")->check(CLI::IsMember({"capm", "model"}));
  app.add_flag("--svg", svg, "emit one SVG per event cell");

  auto* c_index = app.add_subcommand("index", "build PI/API/TRI indices and cap shares")->fallthrough();
  auto* c_stats = app.add_subcommand("stats", "descriptive statistics and ADF-GLS per portfolio")->fallthrough();
  auto* c_est = app.add_subcommand("estimate", "CAPM-AR(p)-SV coefficient table")->fallthrough();
  auto* c_event = app.add_subcommand("event", "event-study sign tables and detail files")->fallthrough();
  auto* c_model = app.add_subcommand("model", "model simulation, proposition checks, synthetic data")->fallthrough();
  c_model->require_subcommand(1);
  auto* m_sim = c_model->add_subcommand("simulate", "simulate one equilibrium path")->fallthrough();
  auto* m_check = c_model->add_subcommand("check-props", "randomized proposition sweeps")->fallthrough();
  auto* m_synth = c_model->add_subcommand("synth", "synthetic returns or model panel")->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (alpha) {
      if (!(*alpha > 0.0 && *alpha < 1.0)) throw InputError("--alpha must lie in (0,1)");
      cfg.window.alpha = *alpha;
    }
    if (!out_dir.empty()) cfg.out = out_dir;
    if (!prices.empty()) cfg.prices = prices;
    if (!actions.empty()) cfg.actions = actions;
    if (!rates.empty()) cfg.rates = rates;
    if (!events.empty()) cfg.events = events;
    if (!returns.empty()) cfg.returns = returns;
    if (!model_path.empty()) {
      std::ifstream in(model_path);
      if (!in) throw InputError("cannot open model config " + model_path);
      Json mj;
      try {
        mj = Json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw InputError(model_path + ": " + e.what());
      }
      cfg.model = ModelParams::defaults();
      apply_model_json(cfg.model, mj);
    }
    if (draws) cfg.sweep_draws = *draws;
    if (length) cfg.synth_length = *length;
    if (!mode.empty()) cfg.synth_mode = mode;
    if (svg) cfg.svg = true;

    std::string name;
    int (*fn)(const RunConfig&, Session&) = nullptr;
    if (*c_index) name = "index", fn = cmd_index;
    else if (*c_stats) name = "stats", fn = cmd_stats;
    else if (*c_est) name = "estimate", fn = cmd_estimate;
    else if (*c_event) name = "event", fn = cmd_event;
    else if (*m_sim) name = "model simulate", fn = cmd_model_simulate;
    else if (*m_check) name = "model check-props", fn = cmd_model_check;
    else if (*m_synth) name = "model synth", fn = cmd_model_synth;
    Session session(cfg, name, out, err);
    const int code = fn(cfg, session);
    session.finish();
    return code;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kInput;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    err << "input error: " << e.what() << '\n';
    return kInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  }
}

}  // namespace evkit::cli
