#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "evkit/data_model.hpp"
#include "evkit/groups.hpp"
#include "evkit/rng.hpp"
#include "evkit/sv_mcmc.hpp"

namespace evkit {

// Pricing states: policy control a, war demand w, civilian substitution c,
// regime risk R, embedded rent E.
enum class StateKind : std::size_t { a = 0, w = 1, c = 2, R = 3, E = 4 };
inline constexpr std::size_t kNumStates = 5;
inline constexpr std::array<StateKind, kNumStates> kStates{StateKind::a, StateKind::w, StateKind::c, StateKind::R,
                                                          StateKind::E};
using StateVec = std::array<double, kNumStates>;
using GroupVec = std::array<double, 4>;

std::string to_string(StateKind x);
constexpr std::size_t index(StateKind x) { return static_cast<std::size_t>(x); }

struct GroupParams {
  double Gamma = 0.05;  // issuance sensitivity
  double d_bar = 0.05;
  double p_bar = 1.2;
  double lambda = 0.0;  // policy control: dividend / terminal
  double chi = 0.0;
  double lambda_R = 0.0;  // regime risk
  double chi_R = 0.0;
  double lambda_E = 0.0;  // embedded rent
  double chi_E = 0.0;
  double tau_R = 0.0;   // regime-risk wedge loading
  double beta_G = 0.0;  // group-continuation exposure
  double k0 = 1.0;
  double dividend_sd = 0.0;
};

struct ModelParams {
  double R = 1.01;
  double gamma = 2.0;
  double delta = 0.05;
  int T = 60;
  std::array<GroupParams, 4> groups{};

  // war demand: psi_g = psi_M M + psi_ZM Z M, varphi_g likewise
  double psi_M = 0.03, psi_ZM = 0.02, varphi_M = 0.05, varphi_ZM = 0.03;
  // civilian substitution: nu_g = nu_N (1-M) + nu_ZN Z (1-M), omega_g likewise
  double nu_N = 0.03, nu_ZN = -0.04, omega_N = 0.04, omega_ZN = -0.05;
  // financing wedge
  double mu_bar = 0.1, mu_Z = 0.03, mu_M = 0.02, mu_ZM = 0.02, mu_W = 0.02, mu_ZW = 0.02;

  StateVec rho{0.9, 0.9, 0.9, 0.9, 0.9};
  StateVec innov_sd{0.1, 0.1, 0.1, 0.1, 0.1};
  StateVec signal_sd{0.0, 0.0, 0.0, 0.0, 0.0};
  StateVec init{0.0, 0.0, 0.0, 0.0, 0.0};
  bool extended = false;

  GroupVec supply_mean{0.1, 0.1, 0.1, 0.1};
  Eigen::Matrix4d supply_cov = 0.0001 * Eigen::Matrix4d::Identity();
  Eigen::Matrix4d payoff_cov = 0.01 * Eigen::Matrix4d::Identity();
  // Optional per-date payoff covariance, t = 0..T; empty means payoff_cov.
  std::vector<Eigen::Matrix4d> payoff_cov_path;

  static ModelParams defaults();
  // Throws InputError naming the first violated range constraint.
  void validate() const;
  const Eigen::Matrix4d& sigma_at(int t) const;
};

// Dividend loading l and terminal loading m of group g on state x.
double loading_l(const ModelParams& p, Group g, StateKind x);
double loading_m(const ModelParams& p, Group g, StateKind x);
// Baseline prices on {a, w, c}; extended on {R, E, w, c}.
bool is_active(const ModelParams& p, StateKind x);

struct HorizonWeights {
  double A = 0.0;  // sum_{j=1..H} R^-j rho^(j-1)
  double B = 0.0;  // R^-H rho^(H-1), 0^0 = 1
};
HorizonWeights horizon_weights(double rho, double R, int H);

// (A_H l + B_H m) / p_pre. Throws std::invalid_argument for p_pre <= 0.
double exposure_beta(const ModelParams& p, Group g, StateKind x, int H, double p_pre);

// t = 0..T
struct StatePath {
  std::vector<StateVec> states;
  std::vector<StateVec> beliefs;
};
StatePath simulate_states(const ModelParams& p, std::uint64_t seed);

// p_t = K_t + sum_x C^x_t xhat^x_t - Sigma_t s_t / (R gamma), t = 0..T.
struct PricingCoefficients {
  std::vector<GroupVec> K;                      // t = 0..T
  std::vector<std::array<GroupVec, kNumStates>> C;  // [t][state][group]
};
PricingCoefficients pricing_coefficients(const ModelParams& p);

GroupVec price_at(const ModelParams& p, const PricingCoefficients& coef, int t, const StateVec& belief,
                  const GroupVec& supply);

struct PricePath {
  std::vector<GroupVec> prices;  // t = 0..T+1 (T+1 is the terminal value)
  std::vector<std::pair<int, Group>> nonpositive;
};
// Backward induction from the terminal value. Non-positive prices are listed,
// not clipped.
PricePath price_backward(const ModelParams& p, const std::vector<StateVec>& beliefs,
                         const std::vector<GroupVec>& supply);

double wedge(const ModelParams& p, Group g, const StateVec& x, bool extended);

// k (1 - delta + Gamma (p - 1 - wedge)); NumericalError when the result is <= 0.
double step_capital(double price, double wedge_g, double Gamma, double delta, double k);

GroupVec cap_shares(const GroupVec& prices, const GroupVec& capital);

struct EquilibriumPath {
  StatePath states;
  std::vector<GroupVec> supply;     // t = 0..T
  std::vector<GroupVec> prices;     // t = 0..T+1
  std::vector<GroupVec> dividends;  // d_t for t = 1..T+1, index 0 unused (zero)
  std::vector<GroupVec> wedges;     // t = 0..T
  std::vector<GroupVec> investment; // t = 0..T-1
  std::vector<GroupVec> capital;    // t = 0..T
  std::vector<GroupVec> market_cap; // t = 0..T
  std::vector<GroupVec> shares;     // t = 0..T
  std::vector<std::string> warnings;
};
// Throws NumericalError listing dates and groups when prices or capital leave
// the positive domain.
EquilibriumPath simulate_equilibrium(const ModelParams& p, std::uint64_t seed);
void write_equilibrium_csv(const EquilibriumPath& path, std::ostream& out);

struct EventExperiment {
  int tau = 1;  // horizon H = T + 1 - tau
  StateVec delta{0, 0, 0, 0, 0};
  double delta_G = 0.0;
  double pi = 1.0;
  GroupVec p_pre{1, 1, 1, 1};
};

// AR_g = sum over active states of beta^x_g delta_x, plus beta_G delta_G.
GroupVec event_decomposition(const ModelParams& p, const EventExperiment& ex);

struct StagedDiffusion {
  double ar_day0 = 0.0;
  double ar_day1 = 0.0;
  double car = 0.0;  // ar_day0 + ar_day1
};
// pi in (0, 1]; ar_day0 = pi theta, ar_day1 = theta - ar_day0.
StagedDiffusion staged_diffusion(double theta, double pi);

// Propositions as checkers: each reports the premise, the realized
// consequent, and whether the implication holds on the instance.
struct Prop1Result {
  bool condition_holds = false;
  bool share_rises = false;
  bool consistent = true;
  double share_t = 0.0;
  double share_t1 = 0.0;
};
Prop1Result check_prop1(const GroupVec& prices_t, const GroupVec& prices_t1, const GroupVec& wedges_t,
                        const ModelParams& p, const GroupVec& k_t);

enum class Prop2Variant { escalation, setback };
struct Prop2Result {
  bool premises_hold = false;
  bool vacuous = true;
  std::array<int, 4> predicted{0, 0, 0, 0};  // +1, -1, 0 = no prediction
  GroupVec realized{0, 0, 0, 0};
  bool consistent = true;
};
// delta holds the a, w, c revisions (R and E are ignored).
Prop2Result check_prop2(const ModelParams& p, const StateVec& delta, Prop2Variant variant, int H,
                        const GroupVec& p_pre);

struct Prop4Result {
  GroupVec theta{0, 0, 0, 0};
  bool premise = false;
  bool opposite_premise = false;
  bool consequent = false;
  bool consistent = true;
};
Prop4Result check_prop4(const ModelParams& p, double delta_R, int H, const GroupVec& p_pre, double eps_Z_bar,
                        double eps_N);

struct Prop5Result {
  GroupVec theta{0, 0, 0, 0};
  std::array<StagedDiffusion, 4> staged{};
  bool premise = false;
  bool consequent = false;
  bool consistent = true;
};
Prop5Result check_prop5(const ModelParams& p, double delta_E, double pi, int H, const GroupVec& p_pre,
                        double eps_O_bar, double eps_ZM, double c_AR, double c_CAR);

enum class PropSweep { prop1, prop2_escalation, prop2_setback, prop4, prop5 };
std::string to_string(PropSweep s);

struct SweepRow {
  std::uint64_t draw_id = 0;
  bool premise = false;
  bool consequent = false;
  bool consistent = true;
};
struct SweepReport {
  PropSweep which = PropSweep::prop1;
  std::vector<SweepRow> rows;
  std::size_t violations() const;
  std::size_t premises() const;
};

// One premise-satisfying random instance per draw, seeded by
// derive_seed(seed, draw_id).
SweepRow prop_draw(PropSweep which, std::uint64_t seed, std::uint64_t draw_id);
SweepReport sweep_proposition(PropSweep which, std::size_t draws, std::uint64_t seed);
namespace serial {
SweepReport sweep_proposition(PropSweep which, std::size_t draws, std::uint64_t seed);
}
void write_sweep_csv(const SweepReport& report, std::ostream& out);

// Direct CAPM-AR(p)-SV data generating process.
struct CapmTruth {
  double alpha = 0.0005;
  double beta = 1.1;
  std::vector<double> rho{0.3};
  SvParams sv{-9.0, 0.95, 0.2};
  double market_sd = 0.01;
  bool constant_volatility = false;  // eta ~ N(0, exp(sv.mu))
};

struct CapmSeries {
  std::vector<double> ri;
  std::vector<double> rm;
  std::vector<double> sigma2;  // true conditional variance of eta_t
};
CapmSeries simulate_capm(const CapmTruth& truth, std::size_t T, Rng& rng);
// Same, with a caller-supplied market series.
CapmSeries simulate_capm_given_market(const CapmTruth& truth, std::span<const double> rm, Rng& rng);

struct SyntheticReturns {
  std::vector<Date> dates;
  std::vector<double> market;
  std::vector<std::pair<std::string, std::vector<double>>> portfolios;
  bool degenerate = false;
  std::string note;
};

// Weekdays starting on or after `start`.
std::vector<Date> business_days(Date start, std::size_t n);

// Mode (b): four portfolios sharing one market series, each with its own keyed
// seed.
SyntheticReturns synth_capm(const CapmTruth& truth, std::size_t T, std::uint64_t seed);

// Mode (a): model-implied excess returns plus a one-security-per-group panel
// (price p, shares k, dividend actions, rate R - 1). Zero excess-return
// variance is flagged degenerate.
struct ModelPanel {
  PanelDataset panel;
  SyntheticReturns returns;
  EquilibriumPath path;
};
ModelPanel synth_model(const ModelParams& p, std::uint64_t seed);

void write_returns_csv(const SyntheticReturns& r, std::ostream& out);
SyntheticReturns read_returns_csv(const std::filesystem::path& path);

}  // namespace evkit
