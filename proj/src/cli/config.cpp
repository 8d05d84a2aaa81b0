#include <fstream>
#include <set>
#include <sstream>

#include "evkit/cli.hpp"
#include "evkit/errors.hpp"
#include "evkit/rng.hpp"

namespace evkit::cli {

namespace {

void reject_unknown(const Json& obj, const std::set<std::string>& known, const std::string& where) {
  if (!obj.is_object()) throw InputError(where + ": expected a JSON object");
  for (const auto& [key, _] : obj.items()) {
    if (!known.count(key)) throw InputError(where + ": unknown key \"" + key + "\"");
  }
}

template <class T>
void read(const Json& obj, const char* key, T& dst, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    dst = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InputError(where + "." + key + ": wrong type");
  }
}

std::filesystem::path resolve(const Json& obj, const char* key, const std::filesystem::path& base,
                              const std::filesystem::path& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_string()) throw InputError(std::string("config.") + key + ": expected a path string");
  std::filesystem::path p = obj.at(key).get<std::string>();
  if (p.empty()) return p;
  return p.is_absolute() ? p : base / p;
}

Json matrix_json(const Eigen::Matrix4d& m) {
  Json rows = Json::array();
  for (int i = 0; i < 4; ++i) rows.push_back({m(i, 0), m(i, 1), m(i, 2), m(i, 3)});
  return rows;
}

Eigen::Matrix4d matrix_from(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 4) throw InputError(where + ": expected a 4x4 array");
  Eigen::Matrix4d m;
  for (int i = 0; i < 4; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || row.size() != 4) throw InputError(where + ": expected a 4x4 array");
    for (int k = 0; k < 4; ++k) {
      if (!row[static_cast<std::size_t>(k)].is_number()) throw InputError(where + ": non-numeric entry");
      m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
    }
  }
  return m;
}

Json state_json(const StateVec& v) {
  Json j = Json::object();
  for (StateKind x : kStates) j[to_string(x)] = v[index(x)];
  return j;
}

void read_states(const Json& obj, const char* key, StateVec& v, const std::string& where) {
  if (!obj.contains(key)) return;
  const Json& j = obj.at(key);
  const std::string w = where + "." + key;
  reject_unknown(j, {"a", "w", "c", "R", "E"}, w);
  for (StateKind x : kStates) read(j, to_string(x).c_str(), v[index(x)], w);
}

Json group_vec_json(const GroupVec& v) {
  Json j = Json::object();
  for (Group g : kGroups) j[std::string(name(g))] = v[index(g)];
  return j;
}

void read_group_vec(const Json& obj, const char* key, GroupVec& v, const std::string& where) {
  if (!obj.contains(key)) return;
  const Json& j = obj.at(key);
  const std::string w = where + "." + key;
  reject_unknown(j, {"zm", "zn", "nm", "nn"}, w);
  for (Group g : kGroups) read(j, std::string(name(g)).c_str(), v[index(g)], w);
}

#define EVKIT_GROUP_FIELDS(X) \
  X(Gamma) X(d_bar) X(p_bar) X(lambda) X(chi) X(lambda_R) X(chi_R) X(lambda_E) X(chi_E) X(tau_R) X(beta_G) X(k0) \
  X(dividend_sd)

#define EVKIT_MODEL_SCALARS(X)                                                                                      \
  X(R) X(gamma) X(delta) X(T) X(extended) X(psi_M) X(psi_ZM) X(varphi_M) X(varphi_ZM) X(nu_N) X(nu_ZN) X(omega_N) \
  X(omega_ZN) X(mu_bar) X(mu_Z) X(mu_M) X(mu_ZM) X(mu_W) X(mu_ZW)

}  // namespace

void apply_model_json(ModelParams& p, const Json& doc) {
  const std::string where = "model";
  std::set<std::string> known{"groups",      "rho",        "innov_sd",   "signal_sd",      "init",
                              "supply_mean", "supply_cov", "payoff_cov", "payoff_cov_path"};
#define X(f) known.insert(#f);
  EVKIT_MODEL_SCALARS(X)
#undef X
  reject_unknown(doc, known, where);
#define X(f) read(doc, #f, p.f, where);
  EVKIT_MODEL_SCALARS(X)
#undef X
  if (doc.contains("groups")) {
    const Json& gj = doc.at("groups");
    reject_unknown(gj, {"zm", "zn", "nm", "nn"}, where + ".groups");
    for (Group g : kGroups) {
      const std::string key(name(g));
      if (!gj.contains(key)) continue;
      const Json& one = gj.at(key);
      const std::string w = where + ".groups." + key;
      std::set<std::string> gknown;
#define X(f) gknown.insert(#f);
      EVKIT_GROUP_FIELDS(X)
#undef X
      reject_unknown(one, gknown, w);
      auto& gp = p.groups[index(g)];
#define X(f) read(one, #f, gp.f, w);
      EVKIT_GROUP_FIELDS(X)
#undef X
    }
  }
  read_states(doc, "rho", p.rho, where);
  read_states(doc, "innov_sd", p.innov_sd, where);
  read_states(doc, "signal_sd", p.signal_sd, where);
  read_states(doc, "init", p.init, where);
  read_group_vec(doc, "supply_mean", p.supply_mean, where);
  if (doc.contains("supply_cov")) p.supply_cov = matrix_from(doc.at("supply_cov"), where + ".supply_cov");
  if (doc.contains("payoff_cov")) p.payoff_cov = matrix_from(doc.at("payoff_cov"), where + ".payoff_cov");
  if (doc.contains("payoff_cov_path")) {
    const Json& path = doc.at("payoff_cov_path");
    if (!path.is_array()) throw InputError(where + ".payoff_cov_path: expected an array of 4x4 arrays");
    p.payoff_cov_path.clear();
    for (const auto& m : path) p.payoff_cov_path.push_back(matrix_from(m, where + ".payoff_cov_path"));
  }
}

Json to_json(const ModelParams& p) {
  Json j = Json::object();
#define X(f) j[#f] = p.f;
  EVKIT_MODEL_SCALARS(X)
#undef X
  Json groups = Json::object();
  for (Group g : kGroups) {
    const auto& gp = p.groups[index(g)];
    Json one = Json::object();
#define X(f) one[#f] = gp.f;
    EVKIT_GROUP_FIELDS(X)
#undef X
    groups[std::string(name(g))] = one;
  }
  j["groups"] = groups;
  j["rho"] = state_json(p.rho);
  j["innov_sd"] = state_json(p.innov_sd);
  j["signal_sd"] = state_json(p.signal_sd);
  j["init"] = state_json(p.init);
  j["supply_mean"] = group_vec_json(p.supply_mean);
  j["supply_cov"] = matrix_json(p.supply_cov);
  j["payoff_cov"] = matrix_json(p.payoff_cov);
  Json path = Json::array();
  for (const auto& m : p.payoff_cov_path) path.push_back(matrix_json(m));
  j["payoff_cov_path"] = path;
  return j;
}

void apply_truth_json(CapmTruth& t, const Json& doc) {
  const std::string where = "truth";
  reject_unknown(doc, {"alpha", "beta", "rho", "sv_mu", "sv_phi", "sv_sigma_tau", "market_sd", "constant_volatility"},
                 where);
  read(doc, "alpha", t.alpha, where);
  read(doc, "beta", t.beta, where);
  read(doc, "rho", t.rho, where);
  read(doc, "sv_mu", t.sv.mu, where);
  read(doc, "sv_phi", t.sv.phi, where);
  read(doc, "sv_sigma_tau", t.sv.sigma_tau, where);
  read(doc, "market_sd", t.market_sd, where);
  read(doc, "constant_volatility", t.constant_volatility, where);
}

Json to_json(const CapmTruth& t) {
  return {{"alpha", t.alpha},         {"beta", t.beta},         {"rho", t.rho},
          {"sv_mu", t.sv.mu},         {"sv_phi", t.sv.phi},     {"sv_sigma_tau", t.sv.sigma_tau},
          {"market_sd", t.market_sd}, {"constant_volatility", t.constant_volatility}};
}

namespace {

Json mcmc_json(const McmcConfig& m) {
  return {{"burn_in", m.burn_in},
          {"draws", m.draws},
          {"offset_scale", m.offset_scale},
          {"priors",
           {{"mu_mean", m.priors.mu_mean},
            {"mu_var", m.priors.mu_var},
            {"phi_a", m.priors.phi_a},
            {"phi_b", m.priors.phi_b},
            {"sigma2_shape", m.priors.sigma2_shape},
            {"sigma2_scale", m.priors.sigma2_scale}}}};
}

void read_mcmc(const Json& j, McmcConfig& m, const std::string& where) {
  reject_unknown(j, {"burn_in", "draws", "offset_scale", "priors"}, where);
  read(j, "burn_in", m.burn_in, where);
  read(j, "draws", m.draws, where);
  read(j, "offset_scale", m.offset_scale, where);
  if (m.burn_in < 0 || m.draws < 10) throw InputError(where + ": burn_in must be >= 0 and draws >= 10");
  if (j.contains("priors")) {
    const Json& pj = j.at("priors");
    const std::string w = where + ".priors";
    reject_unknown(pj, {"mu_mean", "mu_var", "phi_a", "phi_b", "sigma2_shape", "sigma2_scale"}, w);
    read(pj, "mu_mean", m.priors.mu_mean, w);
    read(pj, "mu_var", m.priors.mu_var, w);
    read(pj, "phi_a", m.priors.phi_a, w);
    read(pj, "phi_b", m.priors.phi_b, w);
    read(pj, "sigma2_shape", m.priors.sigma2_shape, w);
    read(pj, "sigma2_scale", m.priors.sigma2_scale, w);
  }
}

Date date_from(const Json& j, const std::string& where) {
  if (!j.is_string()) throw InputError(where + ": expected a YYYY-MM-DD string");
  return Date::parse(j.get<std::string>());
}

}  // namespace

RunConfig config_from_json(const Json& doc, const std::filesystem::path& base_dir) {
  const std::string where = "config";
  reject_unknown(doc,
                 {"prices", "actions", "rates", "events", "returns", "returns_variant", "variants", "portfolios",
                  "base_date", "split_date", "window", "estimator", "seed", "out", "svg", "model", "sweep_draws",
                  "synth"},
                 where);
  RunConfig c;
  c.prices = resolve(doc, "prices", base_dir, c.prices);
  c.actions = resolve(doc, "actions", base_dir, c.actions);
  c.rates = resolve(doc, "rates", base_dir, c.rates);
  c.events = resolve(doc, "events", base_dir, c.events);
  c.returns = resolve(doc, "returns", base_dir, c.returns);
  c.out = resolve(doc, "out", base_dir, c.out);
  if (doc.contains("returns_variant")) {
    c.returns_variant = parse_index_variant(doc.at("returns_variant").get<std::string>());
  }
  if (doc.contains("variants")) {
    std::vector<std::string> names;
    read(doc, "variants", names, where);
    c.variants.clear();
    for (const auto& n : names) c.variants.push_back(parse_index_variant(n));
  }
  read(doc, "portfolios", c.portfolios, where);
  for (const auto& p : c.portfolios) PortfolioSpec::by_name(p);
  if (doc.contains("base_date") && !doc.at("base_date").is_null())
    c.base_date = date_from(doc.at("base_date"), where + ".base_date");
  if (doc.contains("split_date")) {
    if (doc.at("split_date").is_null()) c.split_date.reset();
    else c.split_date = date_from(doc.at("split_date"), where + ".split_date");
  }
  if (doc.contains("window")) {
    const Json& w = doc.at("window");
    reject_unknown(w, {"estimation_length", "pre", "post", "alpha"}, where + ".window");
    read(w, "estimation_length", c.window.estimation_length, where + ".window");
    read(w, "pre", c.window.pre, where + ".window");
    read(w, "post", c.window.post, where + ".window");
    read(w, "alpha", c.window.alpha, where + ".window");
  }
  if (doc.contains("estimator")) {
    const Json& e = doc.at("estimator");
    const std::string w = where + ".estimator";
    reject_unknown(e, {"p_max", "fixed_p", "volatility", "mcmc"}, w);
    read(e, "p_max", c.estimator.p_max, w);
    if (e.contains("fixed_p") && !e.at("fixed_p").is_null()) c.estimator.fixed_p = e.at("fixed_p").get<int>();
    if (e.contains("volatility")) {
      const std::string v = e.at("volatility").get<std::string>();
      if (v == "stochastic") c.estimator.volatility = VolatilityMode::stochastic;
      else if (v == "constant") c.estimator.volatility = VolatilityMode::constant;
      else throw InputError(w + ".volatility: expected \"stochastic\" or \"constant\"");
    }
    if (e.contains("mcmc")) read_mcmc(e.at("mcmc"), c.estimator.mcmc, w + ".mcmc");
  }
  read(doc, "seed", c.seed, where);
  read(doc, "svg", c.svg, where);
  read(doc, "sweep_draws", c.sweep_draws, where);
  if (doc.contains("model")) {
    const Json& m = doc.at("model");
    if (m.is_string()) {
      std::filesystem::path p = m.get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      std::ifstream in(p);
      if (!in) throw InputError("cannot open model config " + p.string());
      Json mj;
      try {
        mj = Json::parse(in);
      } catch (const nlohmann::json::exception& err) {
        throw InputError(p.string() + ": " + err.what());
      }
      apply_model_json(c.model, mj);
    } else {
      apply_model_json(c.model, m);
    }
  }
  if (doc.contains("synth")) {
    const Json& s = doc.at("synth");
    const std::string w = where + ".synth";
    reject_unknown(s, {"mode", "length", "truth"}, w);
    read(s, "mode", c.synth_mode, w);
    if (c.synth_mode != "capm" && c.synth_mode != "model") throw InputError(w + ".mode: expected \"capm\" or \"model\"");
    read(s, "length", c.synth_length, w);
    if (s.contains("truth")) apply_truth_json(c.truth, s.at("truth"));
  }
  if (c.window.estimation_length < 30 || c.window.pre < 0 || c.window.post < 0) {
    throw InputError("config.window: estimation_length must be >= 30 and pre/post >= 0");
  }
  if (!(c.window.alpha > 0.0 && c.window.alpha < 1.0)) throw InputError("config.window.alpha must lie in (0,1)");
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::exception& err) {
    throw InputError(path.string() + ": " + err.what());
  }
  return config_from_json(doc, path.parent_path());
}

Json to_json(const RunConfig& c) {
  Json variants = Json::array();
  for (auto v : c.variants) variants.push_back(to_string(v));
  Json estimator = {{"p_max", c.estimator.p_max},
                    {"fixed_p", c.estimator.fixed_p ? Json(*c.estimator.fixed_p) : Json(nullptr)},
                    {"volatility", c.estimator.volatility == VolatilityMode::stochastic ? "stochastic" : "constant"},
                    {"mcmc", mcmc_json(c.estimator.mcmc)}};
  return {{"prices", c.prices.generic_string()},
          {"actions", c.actions.generic_string()},
          {"rates", c.rates.generic_string()},
          {"events", c.events.generic_string()},
          {"returns", c.returns.generic_string()},
          {"returns_variant", to_string(c.returns_variant)},
          {"variants", variants},
          {"portfolios", c.portfolios},
          {"base_date", c.base_date ? Json(c.base_date->to_string()) : Json(nullptr)},
          {"split_date", c.split_date ? Json(c.split_date->to_string()) : Json(nullptr)},
          {"window",
           {{"estimation_length", c.window.estimation_length},
            {"pre", c.window.pre},
            {"post", c.window.post},
            {"alpha", c.window.alpha}}},
          {"estimator", estimator},
          {"seed", c.seed},
          {"out", c.out.generic_string()},
          {"svg", c.svg},
          {"model", to_json(c.model)},
          {"sweep_draws", c.sweep_draws},
          {"synth", {{"mode", c.synth_mode}, {"length", c.synth_length}, {"truth", to_json(c.truth)}}}};
}

std::string config_hash(const RunConfig& cfg) {
  Json j = to_json(cfg);
  j.erase("out");
  std::ostringstream s;
  s << std::hex;
  s.width(16);
  s.fill('0');
  s << fnv1a(j.dump());
  return s.str();
}

}  // namespace evkit::cli
