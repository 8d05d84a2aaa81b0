#include "evkit/model_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "evkit/csv.hpp"
#include "evkit/errors.hpp"
#include "evkit/parallel.hpp"

namespace evkit {

std::string to_string(StateKind x) {
  constexpr std::array<const char*, kNumStates> names{"a", "w", "c", "R", "E"};
  return names[index(x)];
}

ModelParams ModelParams::defaults() {
  ModelParams p;
  auto& g = p.groups;
  // policy control helps ZM, squeezes the rest
  g[index(Group::ZM)].lambda = 0.02;
  g[index(Group::ZN)].lambda = -0.03;
  g[index(Group::NM)].lambda = -0.02;
  g[index(Group::NN)].lambda = -0.01;
  g[index(Group::ZM)].chi = 0.03;
  g[index(Group::ZN)].chi = -0.04;
  g[index(Group::NM)].chi = -0.03;
  g[index(Group::NN)].chi = -0.01;
  // zaibatsu portfolios are insulated from regime risk
  g[index(Group::ZM)].lambda_R = 0.001;
  g[index(Group::ZN)].lambda_R = -0.001;
  g[index(Group::NM)].lambda_R = 0.03;
  g[index(Group::NN)].lambda_R = -0.04;
  g[index(Group::ZM)].chi_R = 0.002;
  g[index(Group::ZN)].chi_R = -0.002;
  g[index(Group::NM)].chi_R = 0.04;
  g[index(Group::NN)].chi_R = -0.05;
  // embedded rents accrue to ZM
  g[index(Group::ZM)].lambda_E = 0.05;
  g[index(Group::ZM)].chi_E = 0.06;
  for (Group h : {Group::ZN, Group::NM, Group::NN}) {
    g[index(h)].lambda_E = 0.002;
    g[index(h)].chi_E = 0.002;
  }
  g[index(Group::ZM)].tau_R = 0.005;
  g[index(Group::ZN)].tau_R = 0.005;
  g[index(Group::NM)].tau_R = 0.03;
  g[index(Group::NN)].tau_R = 0.04;
  g[index(Group::ZM)].beta_G = 0.02;
  g[index(Group::ZN)].beta_G = 0.03;
  for (auto& gp : g) gp.dividend_sd = 0.01;
  p.payoff_cov = 0.01 * Eigen::Matrix4d::Identity() + 0.005 * (Eigen::Matrix4d::Ones() - Eigen::Matrix4d::Identity());
  return p;
}

void ModelParams::validate() const {
  auto fail = [](const std::string& m) { throw InputError("model parameters: " + m); };
  if (!(R > 1.0)) fail("R must exceed 1");
  if (!(gamma > 0.0)) fail("gamma must be positive");
  if (!(delta > 0.0 && delta < 1.0)) fail("delta must lie in (0,1)");
  if (T < 1) fail("horizon T must be >= 1");
  for (Group g : kGroups) {
    if (!(groups[index(g)].Gamma > 0.0)) fail("Gamma_" + std::string(name(g)) + " must be positive");
    if (!(groups[index(g)].k0 > 0.0)) fail("initial capital of " + std::string(name(g)) + " must be positive");
    if (groups[index(g)].dividend_sd < 0.0) fail("dividend_sd must be >= 0");
  }
  if (!(psi_M > 0.0)) fail("psi_M must be positive");
  if (varphi_M < 0.0 || psi_ZM < 0.0 || varphi_ZM < 0.0) fail("war-demand loadings must be >= 0");
  if (!(mu_Z > 0.0 && mu_M > 0.0 && mu_ZM > 0.0)) fail("mu_Z, mu_M, mu_ZM must be positive");
  if (extended && !(mu_W > 0.0 && mu_ZW > 0.0)) fail("mu_W, mu_ZW must be positive");
  for (StateKind x : kStates) {
    const auto i = index(x);
    if (!(rho[i] >= 0.0 && rho[i] < 1.0)) fail("rho_" + to_string(x) + " must lie in [0,1)");
    if (innov_sd[i] < 0.0 || signal_sd[i] < 0.0) fail("standard deviations must be >= 0");
  }
  if (!payoff_cov_path.empty() && payoff_cov_path.size() != static_cast<std::size_t>(T) + 1) {
    fail("payoff covariance path must have T+1 entries");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(supply_cov);
  if (es.eigenvalues().minCoeff() < -1e-12) fail("supply covariance is not positive semidefinite");
}

const Eigen::Matrix4d& ModelParams::sigma_at(int t) const {
  return payoff_cov_path.empty() ? payoff_cov : payoff_cov_path[static_cast<std::size_t>(t)];
}

double loading_l(const ModelParams& p, Group g, StateKind x) {
  const double Z = is_zaibatsu(g) ? 1.0 : 0.0;
  const double M = is_military(g) ? 1.0 : 0.0;
  const auto& gp = p.groups[index(g)];
  switch (x) {
    case StateKind::a: return gp.lambda;
    case StateKind::w: return p.psi_M * M + p.psi_ZM * Z * M;
    case StateKind::c: return p.nu_N * (1.0 - M) + p.nu_ZN * Z * (1.0 - M);
    case StateKind::R: return gp.lambda_R;
    case StateKind::E: return gp.lambda_E;
  }
  return 0.0;
}

double loading_m(const ModelParams& p, Group g, StateKind x) {
  const double Z = is_zaibatsu(g) ? 1.0 : 0.0;
  const double M = is_military(g) ? 1.0 : 0.0;
  const auto& gp = p.groups[index(g)];
  switch (x) {
    case StateKind::a: return gp.chi;
    case StateKind::w: return p.varphi_M * M + p.varphi_ZM * Z * M;
    case StateKind::c: return p.omega_N * (1.0 - M) + p.omega_ZN * Z * (1.0 - M);
    case StateKind::R: return gp.chi_R;
    case StateKind::E: return gp.chi_E;
  }
  return 0.0;
}

bool is_active(const ModelParams& p, StateKind x) {
  if (x == StateKind::w || x == StateKind::c) return true;
  return p.extended ? (x == StateKind::R || x == StateKind::E) : x == StateKind::a;
}

HorizonWeights horizon_weights(double rho, double R, int H) {
  if (H < 1) throw std::invalid_argument("horizon_weights: H must be >= 1");
  if (!(R > 1.0)) throw std::invalid_argument("horizon_weights: R must exceed 1");
  HorizonWeights w{1.0 / R, 1.0 / R};
  for (int h = 2; h <= H; ++h) {
    w.A = (1.0 + rho * w.A) / R;
    w.B = rho * w.B / R;
  }
  return w;
}

namespace {

double beta_of(const ModelParams& p, Group g, StateKind x, int H, double p_pre) {
  const HorizonWeights hw = horizon_weights(p.rho[index(x)], p.R, H);
  return (hw.A * loading_l(p, g, x) + hw.B * loading_m(p, g, x)) / p_pre;
}

GroupVec decompose(const ModelParams& p, int H, const StateVec& delta, double delta_G, const GroupVec& p_pre) {
  GroupVec ar{0, 0, 0, 0};
  for (Group g : kGroups) {
    const double pp = p_pre[index(g)];
    if (!(pp > 0.0)) throw std::invalid_argument("pre-event price must be positive");
    double v = 0.0;
    for (StateKind x : kStates) {
      if (is_active(p, x)) v += beta_of(p, g, x, H, pp) * delta[index(x)];
    }
    ar[index(g)] = v + p.groups[index(g)].beta_G * delta_G;
  }
  return ar;
}

// Symmetric square root of a PSD matrix; works for singular covariances.
Eigen::Matrix4d psd_root(const Eigen::Matrix4d& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(m);
  Eigen::Vector4d ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

double exposure_beta(const ModelParams& p, Group g, StateKind x, int H, double p_pre) {
  if (!(p_pre > 0.0)) throw std::invalid_argument("exposure_beta: p_pre must be positive");
  return beta_of(p, g, x, H, p_pre);
}

StatePath simulate_states(const ModelParams& p, std::uint64_t seed) {
  Rng state_rng(derive_seed(seed, "states"));
  Rng signal_rng(derive_seed(seed, "signals"));
  std::normal_distribution<double> normal(0.0, 1.0);
  StatePath path;
  const std::size_t n = static_cast<std::size_t>(p.T) + 1;
  path.states.resize(n);
  path.beliefs.resize(n);
  path.states[0] = p.init;
  for (std::size_t t = 1; t < n; ++t) {
    for (std::size_t i = 0; i < kNumStates; ++i) {
      path.states[t][i] = p.rho[i] * path.states[t - 1][i] + p.innov_sd[i] * normal(state_rng);
    }
  }
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t i = 0; i < kNumStates; ++i) {
      path.beliefs[t][i] = path.states[t][i] + p.signal_sd[i] * normal(signal_rng);
    }
  }
  return path;
}

PricingCoefficients pricing_coefficients(const ModelParams& p) {
  const std::size_t T = static_cast<std::size_t>(p.T);
  PricingCoefficients c;
  c.K.resize(T + 1);
  c.C.resize(T + 1);
  const Eigen::Vector4d sbar(p.supply_mean.data());
  for (Group g : kGroups) {
    const auto gi = index(g);
    c.K[T][gi] = (p.groups[gi].p_bar + p.groups[gi].d_bar) / p.R;
    for (StateKind x : kStates) {
      c.C[T][index(x)][gi] = is_active(p, x) ? (loading_l(p, g, x) + loading_m(p, g, x)) / p.R : 0.0;
    }
  }
  for (std::size_t t = T; t-- > 0;) {
    const Eigen::Vector4d risk = p.sigma_at(static_cast<int>(t + 1)) * sbar / (p.R * p.gamma);
    for (Group g : kGroups) {
      const auto gi = index(g);
      c.K[t][gi] = (c.K[t + 1][gi] - risk(gi) + p.groups[gi].d_bar) / p.R;
      for (StateKind x : kStates) {
        const auto xi = index(x);
        c.C[t][xi][gi] = is_active(p, x) ? (loading_l(p, g, x) + p.rho[xi] * c.C[t + 1][xi][gi]) / p.R : 0.0;
      }
    }
  }
  return c;
}

GroupVec price_at(const ModelParams& p, const PricingCoefficients& coef, int t, const StateVec& belief,
                  const GroupVec& supply) {
  const auto ti = static_cast<std::size_t>(t);
  const Eigen::Vector4d risk = p.sigma_at(t) * Eigen::Vector4d(supply.data()) / (p.R * p.gamma);
  GroupVec out{};
  for (std::size_t g = 0; g < 4; ++g) {
    double v = coef.K[ti][g];
    for (std::size_t x = 0; x < kNumStates; ++x) v += coef.C[ti][x][g] * belief[x];
    out[g] = v - risk(static_cast<Eigen::Index>(g));
  }
  return out;
}

namespace {

GroupVec terminal_value(const ModelParams& p, const StateVec& x) {
  GroupVec out{};
  for (Group g : kGroups) {
    double v = p.groups[index(g)].p_bar;
    for (StateKind k : kStates) {
      if (is_active(p, k)) v += loading_m(p, g, k) * x[index(k)];
    }
    out[index(g)] = v;
  }
  return out;
}

}  // namespace

PricePath price_backward(const ModelParams& p, const std::vector<StateVec>& beliefs,
                         const std::vector<GroupVec>& supply) {
  const std::size_t n = static_cast<std::size_t>(p.T) + 1;
  if (beliefs.size() != n || supply.size() != n) {
    throw std::invalid_argument("price_backward: belief and supply paths need T+1 entries");
  }
  const PricingCoefficients coef = pricing_coefficients(p);
  PricePath out;
  out.prices.resize(n + 1);
  for (std::size_t t = 0; t < n; ++t) out.prices[t] = price_at(p, coef, static_cast<int>(t), beliefs[t], supply[t]);
  out.prices[n] = terminal_value(p, beliefs[n - 1]);
  for (std::size_t t = 0; t <= n; ++t) {
    for (Group g : kGroups) {
      if (!(out.prices[t][index(g)] > 0.0)) out.nonpositive.emplace_back(static_cast<int>(t), g);
    }
  }
  return out;
}

double wedge(const ModelParams& p, Group g, const StateVec& x, bool extended) {
  const double Z = is_zaibatsu(g) ? 1.0 : 0.0;
  const double M = is_military(g) ? 1.0 : 0.0;
  if (!extended) {
    const double a = x[index(StateKind::a)];
    return p.mu_bar - p.mu_Z * Z - p.mu_M * M * a - p.mu_ZM * Z * M * a;
  }
  const double w = x[index(StateKind::w)];
  return p.mu_bar - p.mu_Z * Z - p.mu_W * M * w - p.mu_ZW * Z * M * w +
         p.groups[index(g)].tau_R * x[index(StateKind::R)];
}

double step_capital(double price, double wedge_g, double Gamma, double delta, double k) {
  if (!(k > 0.0)) throw std::invalid_argument("step_capital: capital must be positive");
  const double i = Gamma * (price - 1.0 - wedge_g);
  const double next = k * (1.0 - delta + i);
  if (!(next > 0.0)) {
    std::ostringstream msg;
    msg << "capital leaves the positive domain (k=" << k << ", investment rate " << i << ", next " << next << ")";
    throw NumericalError(msg.str());
  }
  return next;
}

GroupVec cap_shares(const GroupVec& prices, const GroupVec& capital) {
  GroupVec mc{};
  for (std::size_t g = 0; g < 4; ++g) mc[g] = prices[g] * capital[g];
  const double total = ((mc[0] + mc[1]) + mc[2]) + mc[3];
  if (!(total > 0.0)) throw NumericalError("non-positive total market capitalization");
  return {mc[0] / total, mc[1] / total, mc[2] / total, mc[3] / total};
}

EquilibriumPath simulate_equilibrium(const ModelParams& p, std::uint64_t seed) {
  p.validate();
  const std::size_t T = static_cast<std::size_t>(p.T);
  EquilibriumPath e;
  e.states = simulate_states(p, seed);

  Rng supply_rng(derive_seed(seed, "supply"));
  Rng div_rng(derive_seed(seed, "dividends"));
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::Matrix4d root = psd_root(p.supply_cov);
  e.supply.resize(T + 1);
  for (auto& s : e.supply) {
    Eigen::Vector4d z;
    for (int i = 0; i < 4; ++i) z(i) = normal(supply_rng);
    const Eigen::Vector4d v = Eigen::Vector4d(p.supply_mean.data()) + root * z;
    for (int i = 0; i < 4; ++i) s[static_cast<std::size_t>(i)] = v(i);
  }

  PricePath pp = price_backward(p, e.states.beliefs, e.supply);
  e.prices = std::move(pp.prices);
  e.prices[T + 1] = terminal_value(p, e.states.states[T]);
  std::vector<std::pair<int, Group>> bad = std::move(pp.nonpositive);
  bad.erase(std::remove_if(bad.begin(), bad.end(), [&](const auto& b) { return b.first == p.T + 1; }), bad.end());
  for (Group g : kGroups) {
    if (!(e.prices[T + 1][index(g)] > 0.0)) bad.emplace_back(p.T + 1, g);
  }
  if (!bad.empty()) {
    std::ostringstream msg;
    msg << "prices leave the positive domain at";
    for (std::size_t i = 0; i < bad.size() && i < 10; ++i) msg << " (t=" << bad[i].first << "," << name(bad[i].second) << ")";
    if (bad.size() > 10) msg << " and " << bad.size() - 10 << " more";
    throw NumericalError(msg.str());
  }

  e.dividends.assign(T + 2, GroupVec{0, 0, 0, 0});
  for (std::size_t t = 0; t <= T; ++t) {
    for (Group g : kGroups) {
      const auto gi = index(g);
      double d = p.groups[gi].d_bar;
      for (StateKind x : kStates) {
        if (is_active(p, x)) d += loading_l(p, g, x) * e.states.states[t][index(x)];
      }
      e.dividends[t + 1][gi] = d + p.groups[gi].dividend_sd * normal(div_rng);
    }
  }

  e.wedges.resize(T + 1);
  e.capital.resize(T + 1);
  e.investment.resize(T);
  for (Group g : kGroups) e.capital[0][index(g)] = p.groups[index(g)].k0;
  for (std::size_t t = 0; t <= T; ++t) {
    for (Group g : kGroups) e.wedges[t][index(g)] = wedge(p, g, e.states.states[t], p.extended);
    if (t == T) break;
    for (Group g : kGroups) {
      const auto gi = index(g);
      e.investment[t][gi] = p.groups[gi].Gamma * (e.prices[t][gi] - 1.0 - e.wedges[t][gi]);
      try {
        e.capital[t + 1][gi] = step_capital(e.prices[t][gi], e.wedges[t][gi], p.groups[gi].Gamma, p.delta,
                                            e.capital[t][gi]);
      } catch (const NumericalError& err) {
        throw NumericalError(std::string(err.what()) + " at t=" + std::to_string(t) + " for " +
                             std::string(name(g)));
      }
    }
  }
  e.market_cap.resize(T + 1);
  e.shares.resize(T + 1);
  for (std::size_t t = 0; t <= T; ++t) {
    for (std::size_t g = 0; g < 4; ++g) e.market_cap[t][g] = e.prices[t][g] * e.capital[t][g];
    e.shares[t] = cap_shares(e.prices[t], e.capital[t]);
  }

  bool any_shock = p.supply_cov.cwiseAbs().maxCoeff() > 0.0;
  for (std::size_t i = 0; i < kNumStates; ++i) any_shock = any_shock || p.innov_sd[i] > 0.0 || p.signal_sd[i] > 0.0;
  for (const auto& g : p.groups) any_shock = any_shock || g.dividend_sd > 0.0;
  if (!any_shock) e.warnings.push_back("degenerate path: every shock scale is zero, prices are deterministic");
  return e;
}

void write_equilibrium_csv(const EquilibriumPath& e, std::ostream& out) {
  std::vector<std::string> header{"t"};
  for (StateKind x : kStates) header.push_back("state_" + to_string(x));
  for (const char* field : {"p", "d", "mu", "k", "share"}) {
    for (Group g : kGroups) header.push_back(std::string(field) + "_" + std::string(name(g)));
  }
  csv::write_line(out, header);
  for (std::size_t t = 0; t < e.shares.size(); ++t) {
    std::vector<std::string> row{std::to_string(t)};
    for (double v : e.states.states[t]) row.push_back(csv::exact(v));
    for (const auto* series : {&e.prices, &e.dividends, &e.wedges, &e.capital, &e.shares}) {
      for (double v : (*series)[t]) row.push_back(csv::exact(v));
    }
    csv::write_line(out, row);
  }
}

GroupVec event_decomposition(const ModelParams& p, const EventExperiment& ex) {
  const int H = p.T + 1 - ex.tau;
  if (ex.tau < 0 || H < 1) throw std::invalid_argument("event date outside the model horizon");
  return decompose(p, H, ex.delta, ex.delta_G, ex.p_pre);
}

StagedDiffusion staged_diffusion(double theta, double pi) {
  if (!(pi > 0.0 && pi <= 1.0)) throw std::invalid_argument("staged_diffusion: pi must lie in (0,1]");
  StagedDiffusion s;
  s.ar_day0 = pi * theta;
  s.ar_day1 = theta - s.ar_day0;
  s.car = s.ar_day0 + s.ar_day1;
  return s;
}

Prop1Result check_prop1(const GroupVec& p_t, const GroupVec& p_t1, const GroupVec& mu_t, const ModelParams& p,
                        const GroupVec& k_t) {
  for (std::size_t g = 0; g < 4; ++g) {
    if (!(p_t[g] > 0.0 && p_t1[g] > 0.0 && k_t[g] > 0.0)) {
      throw NumericalError("check_prop1: prices and capital must be positive");
    }
  }
  GroupVec growth{}, finance{}, k_next{};
  for (Group g : kGroups) {
    const auto gi = index(g);
    growth[gi] = p_t1[gi] / p_t[gi];
    finance[gi] = 1.0 - p.delta + p.groups[gi].Gamma * (p_t[gi] - 1.0 - mu_t[gi]);
    k_next[gi] = step_capital(p_t[gi], mu_t[gi], p.groups[gi].Gamma, p.delta, k_t[gi]);
  }
  Prop1Result r;
  const auto zm = index(Group::ZM);
  r.condition_holds = true;
  for (Group h : {Group::ZN, Group::NM, Group::NN}) {
    const auto hi = index(h);
    if (!((growth[zm] / growth[hi]) * (finance[zm] / finance[hi]) > 1.0)) r.condition_holds = false;
  }
  r.share_t = cap_shares(p_t, k_t)[zm];
  r.share_t1 = cap_shares(p_t1, k_next)[zm];
  r.share_rises = r.share_t1 > r.share_t;
  r.consistent = !r.condition_holds || r.share_rises;
  return r;
}

Prop2Result check_prop2(const ModelParams& params, const StateVec& delta, Prop2Variant variant, int H,
                        const GroupVec& p_pre) {
  ModelParams p = params;
  p.extended = false;
  auto b = [&](Group g, StateKind x) { return exposure_beta(p, g, x, H, p_pre[index(g)]); };
  using G = Group;
  using S = StateKind;
  const double da = delta[index(S::a)], dw = delta[index(S::w)], dc = delta[index(S::c)];

  const bool structural = b(G::ZM, S::w) > 0.0 && b(G::ZM, S::a) >= 0.0 && b(G::ZM, S::c) == 0.0 &&
                          b(G::ZN, S::a) < 0.0 && b(G::ZN, S::w) == 0.0 && b(G::ZN, S::c) <= 0.0 &&
                          b(G::NM, S::a) < 0.0 && b(G::NM, S::w) > 0.0 && b(G::NM, S::c) == 0.0 &&
                          b(G::NN, S::c) > 0.0 && b(G::NN, S::w) == 0.0 && b(G::NN, S::a) <= 0.0;
  Prop2Result r;
  bool event = false;
  bool nm_extra = false;
  if (variant == Prop2Variant::escalation) {
    event = da > 0.0 && dw > 0.0 && dc > 0.0 && b(G::NN, S::c) * dc > std::abs(b(G::NN, S::a)) * da &&
            std::abs(b(G::NM, S::a)) * da > b(G::NM, S::w) * dw;
    r.predicted = {+1, -1, -1, +1};
  } else {
    event = da < 0.0 && dw < 0.0 && dc > 0.0 && std::abs(b(G::ZN, S::a) * da) > std::abs(b(G::ZN, S::c) * dc) &&
            b(G::NN, S::c) * dc > std::abs(b(G::NN, S::a) * da);
    nm_extra = std::abs(b(G::NM, S::a) * da) <= std::abs(b(G::NM, S::w) * dw);
    // -2 encodes "nonpositive"
    r.predicted = {-1, +1, nm_extra ? -2 : 0, +1};
  }
  r.premises_hold = structural && event;
  r.vacuous = !r.premises_hold;

  EventExperiment ex;
  ex.tau = p.T + 1 - H;
  ex.delta = {da, dw, dc, 0.0, 0.0};
  ex.p_pre = p_pre;
  r.realized = decompose(p, H, ex.delta, 0.0, p_pre);
  bool ok = true;
  for (std::size_t g = 0; g < 4; ++g) {
    const double v = r.realized[g];
    switch (r.predicted[g]) {
      case +1: ok = ok && v > 0.0; break;
      case -1: ok = ok && v < 0.0; break;
      case -2: ok = ok && v <= 0.0; break;
      default: break;
    }
  }
  r.consistent = r.vacuous || ok;
  return r;
}

Prop4Result check_prop4(const ModelParams& params, double delta_R, int H, const GroupVec& p_pre, double eps_Z_bar,
                        double eps_N) {
  ModelParams p = params;
  p.extended = true;
  Prop4Result r;
  for (Group g : kGroups) r.theta[index(g)] = exposure_beta(p, g, StateKind::R, H, p_pre[index(g)]) * delta_R;
  const auto zm = index(Group::ZM), zn = index(Group::ZN), nm = index(Group::NM), nn = index(Group::NN);
  r.premise = delta_R != 0.0 && eps_Z_bar >= 0.0 && eps_Z_bar < eps_N && std::abs(r.theta[zm]) <= eps_Z_bar &&
              std::abs(r.theta[zn]) <= eps_Z_bar && std::abs(r.theta[nm]) >= eps_N && std::abs(r.theta[nn]) >= eps_N;
  r.opposite_premise = r.theta[nm] * r.theta[nn] < 0.0;

  StateVec d{0, 0, 0, 0, 0};
  d[index(StateKind::R)] = delta_R;
  const GroupVec ar = decompose(p, H, d, 0.0, p_pre);
  GroupVec car{};
  for (std::size_t g = 0; g < 4; ++g) car[g] = staged_diffusion(ar[g], 1.0).car;
  const double z_max = std::max(std::abs(ar[zm]), std::abs(ar[zn]));
  const double n_min = std::min(std::abs(ar[nm]), std::abs(ar[nn]));
  bool ok = z_max <= eps_Z_bar && n_min >= eps_N && z_max < n_min;
  if (r.opposite_premise) ok = ok && ar[nm] * ar[nn] < 0.0 && car[nm] * car[nn] < 0.0;
  for (std::size_t g = 0; g < 4; ++g) ok = ok && std::signbit(car[g]) == std::signbit(ar[g]);
  r.consequent = ok;
  r.consistent = !r.premise || r.consequent;
  return r;
}

Prop5Result check_prop5(const ModelParams& params, double delta_E, double pi, int H, const GroupVec& p_pre,
                        double eps_O_bar, double eps_ZM, double c_AR, double c_CAR) {
  ModelParams p = params;
  p.extended = true;
  Prop5Result r;
  for (Group g : kGroups) r.theta[index(g)] = exposure_beta(p, g, StateKind::E, H, p_pre[index(g)]) * delta_E;
  const auto zm = index(Group::ZM);
  bool others_small = true, others_below = true;
  for (Group h : {Group::ZN, Group::NM, Group::NN}) {
    others_small = others_small && std::abs(r.theta[index(h)]) <= eps_O_bar;
    others_below = others_below && std::abs(r.theta[index(h)]) < c_CAR;
  }
  r.premise = delta_E != 0.0 && pi > 0.0 && pi < 1.0 && eps_O_bar >= 0.0 && eps_O_bar < eps_ZM &&
              std::abs(r.theta[zm]) >= eps_ZM && others_small && std::abs(pi * r.theta[zm]) < c_AR &&
              std::abs(r.theta[zm]) > c_CAR && others_below;

  StateVec d{0, 0, 0, 0, 0};
  d[index(StateKind::E)] = delta_E;
  const GroupVec theta = decompose(p, H, d, 0.0, p_pre);
  for (std::size_t g = 0; g < 4; ++g) r.staged[g] = staged_diffusion(theta[g], pi);
  bool ok = std::abs(r.staged[zm].ar_day0) < c_AR && std::abs(r.staged[zm].car) > c_CAR;
  for (Group h : {Group::ZN, Group::NM, Group::NN}) ok = ok && std::abs(r.staged[index(h)].car) < c_CAR;
  r.consequent = ok;
  r.consistent = !r.premise || r.consequent;
  return r;
}

std::string to_string(PropSweep s) {
  switch (s) {
    case PropSweep::prop1: return "prop1";
    case PropSweep::prop2_escalation: return "prop2_escalation";
    case PropSweep::prop2_setback: return "prop2_setback";
    case PropSweep::prop4: return "prop4";
    case PropSweep::prop5: return "prop5";
  }
  return "?";
}

std::size_t SweepReport::violations() const {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const SweepRow& r) { return !r.consistent; }));
}

std::size_t SweepReport::premises() const {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const SweepRow& r) { return r.premise; }));
}

namespace {

constexpr int kMaxTries = 1'000'000;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

ModelParams random_model(Rng& rng, bool extended) {
  ModelParams p;
  p.extended = extended;
  p.T = 250;
  p.R = uniform(rng, 1.001, 1.1);
  for (auto& r : p.rho) r = uniform(rng, 0.0, 0.99);
  for (Group g : kGroups) {
    auto& gp = p.groups[index(g)];
    gp.lambda = uniform(rng, -1, 1);
    gp.chi = uniform(rng, -1, 1);
    const double rs = is_zaibatsu(g) ? uniform(rng, 0.0, 0.2) : 1.0;
    gp.lambda_R = uniform(rng, -rs, rs);
    gp.chi_R = uniform(rng, -rs, rs);
    const double es = g == Group::ZM ? 1.0 : uniform(rng, 0.0, 0.2);
    gp.lambda_E = uniform(rng, -es, es);
    gp.chi_E = uniform(rng, -es, es);
  }
  p.psi_M = uniform(rng, 0.01, 1);
  p.psi_ZM = uniform(rng, 0, 1);
  p.varphi_M = uniform(rng, 0, 1);
  p.varphi_ZM = uniform(rng, 0, 1);
  p.nu_N = uniform(rng, -1, 1);
  p.nu_ZN = uniform(rng, -1, 1);
  p.omega_N = uniform(rng, -1, 1);
  p.omega_ZN = uniform(rng, -1, 1);
  return p;
}

int random_horizon(Rng& rng) { return std::uniform_int_distribution<int>(1, 120)(rng); }

GroupVec random_prices(Rng& rng) {
  return {uniform(rng, 0.2, 5), uniform(rng, 0.2, 5), uniform(rng, 0.2, 5), uniform(rng, 0.2, 5)};
}

[[noreturn]] void no_instance(PropSweep which) {
  throw NumericalError("could not construct a premise-satisfying instance for " + to_string(which));
}

SweepRow draw_prop1(Rng& rng) {
  for (int tries = 0; tries < kMaxTries; ++tries) {
    ModelParams p;
    p.delta = uniform(rng, 0.01, 0.3);
    GroupVec pt{}, pt1{}, mu{}, k{};
    bool domain = true;
    for (std::size_t g = 0; g < 4; ++g) {
      p.groups[g].Gamma = uniform(rng, 0.01, 2.0);
      pt[g] = uniform(rng, 0.5, 3.0);
      pt1[g] = pt[g] * uniform(rng, 0.7, 1.4);
      mu[g] = uniform(rng, -0.3, 0.5);
      k[g] = uniform(rng, 0.1, 10.0);
      domain = domain && 1.0 - p.delta + p.groups[g].Gamma * (pt[g] - 1.0 - mu[g]) > 0.0;
    }
    if (!domain) continue;
    const Prop1Result r = check_prop1(pt, pt1, mu, p, k);
    if (!r.condition_holds) continue;
    return {0, r.condition_holds, r.share_rises, r.consistent};
  }
  no_instance(PropSweep::prop1);
}

SweepRow draw_prop2(Rng& rng, Prop2Variant v) {
  for (int tries = 0; tries < kMaxTries; ++tries) {
    const ModelParams p = random_model(rng, false);
    const int H = random_horizon(rng);
    const GroupVec pre = random_prices(rng);
    StateVec d{0, 0, 0, 0, 0};
    const double sa = v == Prop2Variant::escalation ? 1.0 : -1.0;
    d[index(StateKind::a)] = sa * uniform(rng, 0.01, 1.0);
    d[index(StateKind::w)] = sa * uniform(rng, 0.01, 1.0);
    d[index(StateKind::c)] = uniform(rng, 0.01, 1.0);
    // cheap screen on the structural signs before the full check
    std::array<HorizonWeights, 3> hw{};
    for (std::size_t x = 0; x < 3; ++x) hw[x] = horizon_weights(p.rho[x], p.R, H);
    auto sgn = [&](Group g, StateKind x) {
      const auto& w = hw[index(x)];
      return w.A * loading_l(p, g, x) + w.B * loading_m(p, g, x);
    };
    using G = Group;
    using S = StateKind;
    if (!(sgn(G::ZM, S::a) >= 0.0 && sgn(G::ZN, S::a) < 0.0 && sgn(G::ZN, S::c) <= 0.0 && sgn(G::NM, S::a) < 0.0 &&
          sgn(G::NN, S::c) > 0.0 && sgn(G::NN, S::a) <= 0.0)) {
      continue;
    }
    const Prop2Result r = check_prop2(p, d, v, H, pre);
    if (!r.premises_hold) continue;
    return {0, true, !r.vacuous && r.consistent, r.consistent};
  }
  no_instance(v == Prop2Variant::escalation ? PropSweep::prop2_escalation : PropSweep::prop2_setback);
}

SweepRow draw_prop4(Rng& rng) {
  for (int tries = 0; tries < kMaxTries; ++tries) {
    const ModelParams p = random_model(rng, true);
    const int H = random_horizon(rng);
    const GroupVec pre = random_prices(rng);
    const double dR = (uniform(rng, 0, 1) < 0.5 ? -1.0 : 1.0) * uniform(rng, 0.01, 1.0);
    GroupVec th{};
    for (Group g : kGroups) th[index(g)] = exposure_beta(p, g, StateKind::R, H, pre[index(g)]) * dR;
    const double zmax = std::max(std::abs(th[0]), std::abs(th[1]));
    const double nmin = std::min(std::abs(th[2]), std::abs(th[3]));
    // bounds bracketing the gap, with random slack
    const double eps_Z = zmax + uniform(rng, 0.0, 0.5) * std::max(0.0, nmin - zmax);
    const double eps_N = nmin - uniform(rng, 0.0, 0.5) * std::max(0.0, nmin - zmax);
    const Prop4Result r = check_prop4(p, dR, H, pre, eps_Z, eps_N);
    if (!r.premise) continue;
    return {0, true, r.consequent, r.consistent};
  }
  no_instance(PropSweep::prop4);
}

SweepRow draw_prop5(Rng& rng) {
  for (int tries = 0; tries < kMaxTries; ++tries) {
    const ModelParams p = random_model(rng, true);
    const int H = random_horizon(rng);
    const GroupVec pre = random_prices(rng);
    const double dE = (uniform(rng, 0, 1) < 0.5 ? -1.0 : 1.0) * uniform(rng, 0.01, 1.0);
    const double pi = uniform(rng, 0.01, 0.99);
    GroupVec th{};
    for (Group g : kGroups) th[index(g)] = exposure_beta(p, g, StateKind::E, H, pre[index(g)]) * dE;
    const double zm = std::abs(th[0]);
    const double omax = std::max({std::abs(th[1]), std::abs(th[2]), std::abs(th[3])});
    const double gap = std::max(0.0, zm - omax);
    const double eps_O = omax + uniform(rng, 0.0, 0.3) * gap;
    const double eps_ZM = zm - uniform(rng, 0.0, 0.3) * gap;
    const double c_CAR = omax + uniform(rng, 0.0, 1.0) * gap;
    const double c_AR = pi * zm * uniform(rng, 1.0, 3.0);
    const Prop5Result r = check_prop5(p, dE, pi, H, pre, eps_O, eps_ZM, c_AR, c_CAR);
    if (!r.premise) continue;
    return {0, true, r.consequent, r.consistent};
  }
  no_instance(PropSweep::prop5);
}

}  // namespace

SweepRow prop_draw(PropSweep which, std::uint64_t seed, std::uint64_t draw_id) {
  Rng rng(derive_seed(seed, draw_id));
  SweepRow row;
  switch (which) {
    case PropSweep::prop1: row = draw_prop1(rng); break;
    case PropSweep::prop2_escalation: row = draw_prop2(rng, Prop2Variant::escalation); break;
    case PropSweep::prop2_setback: row = draw_prop2(rng, Prop2Variant::setback); break;
    case PropSweep::prop4: row = draw_prop4(rng); break;
    case PropSweep::prop5: row = draw_prop5(rng); break;
  }
  row.draw_id = draw_id;
  return row;
}

SweepReport sweep_proposition(PropSweep which, std::size_t draws, std::uint64_t seed) {
  const std::uint64_t key = derive_seed(seed, to_string(which));
  return {which, par::map_indexed(draws, [&](std::size_t i) { return prop_draw(which, key, i); })};
}

SweepReport serial::sweep_proposition(PropSweep which, std::size_t draws, std::uint64_t seed) {
  const std::uint64_t key = derive_seed(seed, to_string(which));
  return {which, serial::map_indexed(draws, [&](std::size_t i) { return prop_draw(which, key, i); })};
}

void write_sweep_csv(const SweepReport& report, std::ostream& out) {
  csv::write_line(out, {"draw_id", "premise", "consequent", "consistent"});
  for (const auto& r : report.rows) {
    csv::write_line(out, {std::to_string(r.draw_id), r.premise ? "1" : "0", r.consequent ? "1" : "0",
                          r.consistent ? "1" : "0"});
  }
}

CapmSeries simulate_capm_given_market(const CapmTruth& truth, std::span<const double> rm, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t T = rm.size();
  const std::size_t burn = 200;
  const std::size_t p = truth.rho.size();
  const auto& sv = truth.sv;
  if (!truth.constant_volatility && !(std::abs(sv.phi) < 1.0)) throw std::invalid_argument("SV phi must lie in (-1,1)");
  std::vector<double> eps(burn + T, 0.0);
  CapmSeries out;
  out.rm.assign(rm.begin(), rm.end());
  out.ri.resize(T);
  out.sigma2.resize(T);
  double h = truth.constant_volatility ? sv.mu : sv.mu + sv.sigma_tau / std::sqrt(1.0 - sv.phi * sv.phi) * normal(rng);
  for (std::size_t t = 0; t < burn + T; ++t) {
    if (t > 0 && !truth.constant_volatility) h = sv.mu + sv.phi * (h - sv.mu) + sv.sigma_tau * normal(rng);
    double e = std::exp(0.5 * h) * normal(rng);
    for (std::size_t j = 1; j <= p && j <= t; ++j) e += truth.rho[j - 1] * eps[t - j];
    eps[t] = e;
    if (t >= burn) {
      const std::size_t s = t - burn;
      out.ri[s] = truth.alpha + truth.beta * rm[s] + e;
      out.sigma2[s] = std::exp(h);
    }
  }
  return out;
}

CapmSeries simulate_capm(const CapmTruth& truth, std::size_t T, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> rm(T);
  for (auto& v : rm) v = truth.market_sd * normal(rng);
  return simulate_capm_given_market(truth, rm, rng);
}

std::vector<Date> business_days(Date start, std::size_t n) {
  std::vector<Date> out;
  out.reserve(n);
  std::int32_t d = start.days();
  while (out.size() < n) {
    const std::chrono::weekday wd{std::chrono::sys_days{std::chrono::days{d}}};
    if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) out.emplace_back(d);
    ++d;
  }
  return out;
}

SyntheticReturns synth_capm(const CapmTruth& truth, std::size_t T, std::uint64_t seed) {
  SyntheticReturns r;
  r.dates = business_days(Date(1930, 1, 6), T);
  Rng mrng(derive_seed(seed, "market"));
  std::normal_distribution<double> normal(0.0, 1.0);
  r.market.resize(T);
  for (auto& v : r.market) v = truth.market_sd * normal(mrng);
  for (Group g : kGroups) {
    Rng rng(derive_seed(seed, name(g)));
    r.portfolios.emplace_back(std::string(name(g)), simulate_capm_given_market(truth, r.market, rng).ri);
  }
  return r;
}

ModelPanel synth_model(const ModelParams& p, std::uint64_t seed) {
  ModelPanel mp;
  mp.path = simulate_equilibrium(p, seed);
  const auto& e = mp.path;
  const std::size_t T = static_cast<std::size_t>(p.T);
  const auto dates = business_days(Date(1930, 1, 6), T + 1);

  auto& panel = mp.panel;
  panel.calendar = TradingCalendar(dates);
  for (Group g : kGroups) {
    SecuritySeries s;
    std::string id(name(g));
    std::transform(id.begin(), id.end(), id.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    s.id = id;
    s.zaibatsu = is_zaibatsu(g);
    s.military = is_military(g);
    for (std::size_t t = 0; t <= T; ++t) s.quotes.push_back(Quote{e.prices[t][index(g)], e.capital[t][index(g)]});
    panel.securities.push_back(std::move(s));
  }
  std::sort(panel.securities.begin(), panel.securities.end(),
            [](const SecuritySeries& a, const SecuritySeries& b) { return a.id < b.id; });
  for (std::size_t t = 1; t <= T; ++t) {
    for (const auto& s : panel.securities) {
      const double d = e.dividends[t][index(s.group())];
      if (d < 0.0) {
        throw NumericalError("negative model dividend at t=" + std::to_string(t) + " for " + s.id +
                             "; the path cannot be written as a panel");
      }
      if (d > 0.0) panel.actions.push_back({s.id, dates[t], ActionKind::dividend, d, 0.0, 0.0});
    }
  }
  panel.call_rates.assign(T + 1, p.R - 1.0);
  validate(panel);

  auto& r = mp.returns;
  r.dates.assign(dates.begin() + 1, dates.end());
  r.market.assign(T, 0.0);
  for (Group g : kGroups) r.portfolios.emplace_back(std::string(name(g)), std::vector<double>(T));
  for (std::size_t t = 1; t <= T; ++t) {
    double num = 0.0, den = 0.0;
    for (Group g : kGroups) {
      const auto gi = index(g);
      const double ret = (e.prices[t][gi] + e.dividends[t][gi]) / e.prices[t - 1][gi] - 1.0 - (p.R - 1.0);
      r.portfolios[gi].second[t - 1] = ret;
      num += e.market_cap[t - 1][gi] * ret;
      den += e.market_cap[t - 1][gi];
    }
    r.market[t - 1] = num / den;
  }
  bool flat = true;
  for (const auto& [_, series] : r.portfolios) {
    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= static_cast<double>(series.size());
    double ss = 0.0;
    for (double v : series) ss += (v - mean) * (v - mean);
    if (std::sqrt(ss / static_cast<double>(series.size())) > 1e-12) flat = false;
  }
  if (!e.warnings.empty() || flat) {
    r.degenerate = true;
    r.note = "degenerate: zero shocks give deterministic prices and no excess-return variation";
  }
  return mp;
}

void write_returns_csv(const SyntheticReturns& r, std::ostream& out) {
  std::vector<std::string> header{"date", "market"};
  for (const auto& [name, _] : r.portfolios) header.push_back(name);
  csv::write_line(out, header);
  for (std::size_t t = 0; t < r.dates.size(); ++t) {
    std::vector<std::string> row{r.dates[t].to_string(), csv::exact(r.market[t])};
    for (const auto& [_, series] : r.portfolios) row.push_back(csv::exact(series[t]));
    csv::write_line(out, row);
  }
}

SyntheticReturns read_returns_csv(const std::filesystem::path& path) {
  const auto table = csv::Table::read(path);
  const auto& h = table.header();
  if (h.size() < 3 || h[0] != "date" || h[1] != "market") {
    throw InputError(path.string() + ": returns header must start with date,market and name at least one portfolio");
  }
  SyntheticReturns r;
  for (std::size_t c = 2; c < h.size(); ++c) r.portfolios.emplace_back(h[c], std::vector<double>{});
  for (const auto& row : table.rows()) {
    try {
      r.dates.push_back(Date::parse(row.fields[0]));
    } catch (const InputError& err) {
      table.fail(row, err.what());
    }
    if (r.dates.size() > 1 && !(r.dates[r.dates.size() - 2] < r.dates.back())) {
      table.fail(row, "dates must be strictly increasing");
    }
    r.market.push_back(table.number(row, 1));
    for (std::size_t c = 2; c < h.size(); ++c) r.portfolios[c - 2].second.push_back(table.number(row, c));
  }
  return r;
}

}  // namespace evkit
