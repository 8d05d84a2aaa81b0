#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "evkit/sv_mcmc.hpp"

namespace evkit {

struct OlsFit {
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<double> residuals;
};

// Ri = alpha + beta Rm + eps. Needs T >= 30; constant Rm throws NumericalError.
OlsFit fit_ols(std::span<const double> Ri, std::span<const double> Rm);

struct ArFit {
  std::vector<double> rho;  // rho[j-1] multiplies eps_{t-j}
  int p = 0;
  std::vector<double> eta_tilde;  // eps_t for t <= p, AR innovations after
};

// Lag by BIC (select_ar_order_bic), rho by least squares on all rows that
// have p lags.
ArFit fit_ar_residuals(std::span<const double> residuals, int p_max);
ArFit fit_ar_residuals_fixed(std::span<const double> residuals, int p);

// True when every root of 1 - rho_1 z - ... - rho_p z^p lies outside the unit
// circle (companion eigenvalues strictly inside).
bool is_stationary(std::span<const double> rho);

// Stacked weighted regression y = Z kappa + u, Var(u_t) = sigma2_t.
struct QdSystem {
  Eigen::VectorXd y;
  Eigen::MatrixXd Z;  // columns: transformed constant, transformed market
  Eigen::VectorXd sigma2;
  std::vector<std::size_t> t_index;  // 0-based source date of each row

  std::size_t rows() const { return static_cast<std::size_t>(y.size()); }
};

// Quasi-differenced rows for t > p (1-based). Throws NumericalError when rho is
// not stationary.
QdSystem build_qd2(std::span<const double> Ri, std::span<const double> Rm, std::span<const double> rho,
                   std::span<const double> sigma2);

// Weights applied to (x_t, x_{t-1}, ..., x_1) to form head row t = 1..p: the
// first row of the innovation (triangular, current-first) root of the leading
// t x t block of Gamma_t, scaled by sigma_t. Gamma_t = A Gamma_{t-1} A' + Q_t
// with Gamma_0 = 0.
std::vector<std::vector<double>> qd1_head_weights(std::span<const double> rho, std::span<const double> sigma2);

// Head rows t = 1..p; row 1 is the raw observation.
QdSystem build_qd1(std::span<const double> Ri, std::span<const double> Rm, std::span<const double> rho,
                   std::span<const double> sigma2);

QdSystem stack(const QdSystem& head, const QdSystem& tail);

struct CapmFit {
  double alpha = 0.0;
  double beta = 0.0;
  double se_alpha = 0.0;
  double se_beta = 0.0;
  std::vector<double> rho;
  int p = 0;
  std::vector<double> sigma2_path;
  double adj_r2 = 0.0;
  Eigen::Matrix2d kappa_cov = Eigen::Matrix2d::Zero();
  std::size_t n = 0;
  SvParams sv;             // point estimates behind sigma2_path
  double h_last_mean = 0;  // log-variance at the last estimation date
  double phi_acceptance = 0.0;
};

// kappa = (Z'WZ)^-1 Z'Wy with W = diag(1/sigma2); kappa_cov = (Z'WZ)^-1.
// adj_r2 uses the weighted R^2 about the weighted mean of y, k = 2.
CapmFit fit_gls(const QdSystem& qd);

enum class VolatilityMode { stochastic, constant };

struct EstimatorConfig {
  int p_max = 5;
  std::optional<int> fixed_p;
  VolatilityMode volatility = VolatilityMode::stochastic;
  McmcConfig mcmc;
};

// OLS, AR(p) on residuals, SV on the AR innovations, quasi-differencing of
// head and tail rows, GLS. Needs T >= 120.
CapmFit estimate_capm_arp_sv(std::span<const double> Ri, std::span<const double> Rm, const EstimatorConfig& config);

}  // namespace evkit
