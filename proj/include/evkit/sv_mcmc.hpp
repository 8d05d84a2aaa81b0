#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace evkit {

// h_t = mu + phi (h_{t-1} - mu) + sigma_tau xi_t, eta_t = exp(h_t / 2) eps_t
struct SvParams {
  double mu = 0.0;
  double phi = 0.0;
  double sigma_tau = 0.0;
};

// Ten-component normal mixture approximating log chi^2_1.
struct MixtureComponent {
  double prob;
  double mean;
  double var;
};
const std::array<MixtureComponent, 10>& log_chi2_mixture();

struct SvPriors {
  double mu_mean = 0.0;
  double mu_var = 10.0;
  double phi_a = 20.0;  // (phi + 1) / 2 ~ Beta(phi_a, phi_b)
  double phi_b = 1.5;
  double sigma2_shape = 2.5;  // sigma_tau^2 ~ IG(shape, scale)
  double sigma2_scale = 0.025;
};

struct McmcConfig {
  int burn_in = 5000;
  int draws = 5000;
  std::uint64_t seed = 1;
  double offset_scale = 1e-6;  // offset_c = offset_scale * sample variance
  SvPriors priors;
};

struct ParamSummary {
  double mean = 0.0;
  double sd = 0.0;
  double q05 = 0.0;
  double q95 = 0.0;
  double rhat = 0.0;  // split-chain potential scale reduction
};

struct SvDraw {
  double mu;
  double phi;
  double sigma_tau;
};

struct SvFit {
  ParamSummary mu;
  ParamSummary phi;
  ParamSummary sigma_tau;
  std::vector<double> h_mean;  // posterior mean of h_t
  std::vector<double> sigma2;  // posterior mean of exp(h_t)
  double phi_acceptance = 0.0;
  double offset_c = 0.0;
  std::vector<SvDraw> draws;  // post burn-in

  SvParams point() const { return {mu.mean, phi.mean, sigma_tau.mean}; }
};

// Gibbs sampler on the mixture representation of log(eta^2 + offset_c):
// indicators, FFBS for h, independence MH for phi, conjugate sigma_tau^2 and mu.
// Throws std::invalid_argument when shorter than 50, InputError on non-finite
// or all-zero input.
SvFit fit_sv(std::span<const double> innovations, const McmcConfig& config);

// exp(E[h_{t+k}] + Var[h_{t+k}] / 2) for k = 1..horizon. sigma_tau = 0 is
// allowed and gives the deterministic path.
std::vector<double> forecast_volatility(const SvParams& params, double h_last_mean, int horizon);

void write_draws_csv(const SvFit& fit, std::ostream& out);

}  // namespace evkit
