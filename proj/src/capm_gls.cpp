#include "evkit/capm_gls.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "evkit/errors.hpp"
#include "evkit/ts_stats.hpp"

namespace evkit {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

void require_aligned(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string(what) + ": inputs are not aligned");
}

void require_finite(std::span<const double> x, const char* what) {
  for (double v : x) {
    if (!std::isfinite(v)) throw InputError(std::string(what) + ": non-finite input");
  }
}

}  // namespace

OlsFit fit_ols(std::span<const double> Ri, std::span<const double> Rm) {
  require_aligned(Ri.size(), Rm.size(), "fit_ols");
  const std::size_t T = Ri.size();
  if (T < 30) throw std::invalid_argument("fit_ols needs T >= 30");
  require_finite(Ri, "fit_ols");
  require_finite(Rm, "fit_ols");
  double mx = 0.0, my = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    mx += Rm[t];
    my += Ri[t];
  }
  mx /= static_cast<double>(T);
  my /= static_cast<double>(T);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    sxx += (Rm[t] - mx) * (Rm[t] - mx);
    sxy += (Rm[t] - mx) * (Ri[t] - my);
  }
  double scale = 0.0;
  for (double v : Rm) scale = std::max(scale, std::abs(v));
  if (!(sxx > 1e-28 * std::max(1.0, scale * scale) * static_cast<double>(T))) {
    throw NumericalError("singular OLS design: market return is constant");
  }
  OlsFit f;
  f.beta = sxy / sxx;
  f.alpha = my - f.beta * mx;
  f.residuals.resize(T);
  for (std::size_t t = 0; t < T; ++t) f.residuals[t] = Ri[t] - f.alpha - f.beta * Rm[t];
  return f;
}

ArFit fit_ar_residuals_fixed(std::span<const double> e, int p) {
  if (p < 0) throw std::invalid_argument("AR order must be >= 0");
  const std::size_t n = e.size();
  if (n <= static_cast<std::size_t>(p) + 10) throw std::invalid_argument("fit_ar_residuals: series too short");
  ArFit f;
  f.p = p;
  f.eta_tilde.assign(e.begin(), e.end());
  if (p == 0) return f;
  const Eigen::Index rows = static_cast<Eigen::Index>(n) - p;
  MatrixXd X(rows, p);
  VectorXd y(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    y(r) = e[r + p];
    for (int j = 1; j <= p; ++j) X(r, j - 1) = e[r + p - j];
  }
  Eigen::ColPivHouseholderQR<MatrixXd> qr(X);
  if (qr.rank() < p) throw NumericalError("singular lag regression for AR(" + std::to_string(p) + ")");
  const VectorXd rho = qr.solve(y);
  f.rho.assign(rho.data(), rho.data() + p);
  for (std::size_t t = static_cast<std::size_t>(p); t < n; ++t) {
    double v = e[t];
    for (int j = 1; j <= p; ++j) v -= f.rho[j - 1] * e[t - j];
    f.eta_tilde[t] = v;
  }
  return f;
}

ArFit fit_ar_residuals(std::span<const double> e, int p_max) {
  return fit_ar_residuals_fixed(e, select_ar_order_bic(e, p_max));
}

bool is_stationary(std::span<const double> rho) {
  const Eigen::Index p = static_cast<Eigen::Index>(rho.size());
  if (p == 0) return true;
  MatrixXd A = MatrixXd::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) A(0, j) = rho[j];
  for (Eigen::Index j = 1; j < p; ++j) A(j, j - 1) = 1.0;
  Eigen::EigenSolver<MatrixXd> es(A, false);
  for (Eigen::Index j = 0; j < p; ++j) {
    if (!(std::abs(es.eigenvalues()(j)) < 1.0)) return false;
  }
  return true;
}

QdSystem build_qd2(std::span<const double> Ri, std::span<const double> Rm, std::span<const double> rho,
                   std::span<const double> sigma2) {
  require_aligned(Ri.size(), Rm.size(), "build_qd2");
  require_aligned(Ri.size(), sigma2.size(), "build_qd2");
  if (!is_stationary(rho)) throw NumericalError("nonstationary AR coefficients in quasi-differencing");
  const std::size_t T = Ri.size();
  const std::size_t p = rho.size();
  if (T <= p) throw std::invalid_argument("build_qd2: fewer observations than lags");
  double rsum = 0.0;
  for (double r : rho) rsum += r;
  QdSystem q;
  const Eigen::Index rows = static_cast<Eigen::Index>(T - p);
  q.y.resize(rows);
  q.Z.resize(rows, 2);
  q.sigma2.resize(rows);
  for (std::size_t t = p; t < T; ++t) {
    double y = Ri[t];
    double x = Rm[t];
    for (std::size_t j = 1; j <= p; ++j) {
      y -= rho[j - 1] * Ri[t - j];
      x -= rho[j - 1] * Rm[t - j];
    }
    const Eigen::Index r = static_cast<Eigen::Index>(t - p);
    q.y(r) = y;
    q.Z(r, 0) = 1.0 - rsum;
    q.Z(r, 1) = x;
    if (!(sigma2[t] > 0.0)) throw InputError("build_qd2: non-positive variance weight");
    q.sigma2(r) = sigma2[t];
    q.t_index.push_back(t);
  }
  return q;
}

std::vector<std::vector<double>> qd1_head_weights(std::span<const double> rho, std::span<const double> sigma2) {
  const Eigen::Index p = static_cast<Eigen::Index>(rho.size());
  if (p < 1) throw std::invalid_argument("qd1_head_weights needs p >= 1");
  if (static_cast<Eigen::Index>(sigma2.size()) < p) throw std::invalid_argument("qd1_head_weights: sigma2 too short");
  if (!is_stationary(rho)) throw NumericalError("nonstationary AR coefficients in head transform");
  MatrixXd A = MatrixXd::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) A(0, j) = rho[j];
  for (Eigen::Index j = 1; j < p; ++j) A(j, j - 1) = 1.0;

  std::vector<std::vector<double>> out;
  MatrixXd gamma = MatrixXd::Zero(p, p);
  for (Eigen::Index t = 1; t <= p; ++t) {
    const double s2 = sigma2[t - 1];
    if (!(s2 > 0.0)) throw InputError("qd1_head_weights: non-positive variance weight");
    gamma = A * gamma * A.transpose();
    gamma(0, 0) += s2;
    // Leading block covers (x_t, ..., x_1); reverse it so a lower Cholesky
    // factor orders oldest first, then read off the current-date innovation.
    const MatrixXd G = gamma.topLeftCorner(t, t);
    const MatrixXd Grev = G.reverse();
    Eigen::LLT<MatrixXd> llt(Grev);
    const MatrixXd L = llt.matrixL();
    double min_ratio = 1.0;
    for (Eigen::Index i = 0; i < t; ++i) min_ratio = std::min(min_ratio, L(i, i) / std::sqrt(Grev(i, i)));
    if (llt.info() != Eigen::Success || !(min_ratio > 1e-10)) {
      throw NumericalError("Gamma_t numerically singular at head date t=" + std::to_string(t));
    }
    VectorXd e = VectorXd::Zero(t);
    e(t - 1) = 1.0;
    const VectorXd last_row = L.transpose().triangularView<Eigen::Upper>().solve(e);
    std::vector<double> w(static_cast<std::size_t>(t));
    const double s = std::sqrt(s2);
    for (Eigen::Index j = 0; j < t; ++j) w[j] = last_row(t - 1 - j) * s;
    out.push_back(std::move(w));
  }
  return out;
}

QdSystem build_qd1(std::span<const double> Ri, std::span<const double> Rm, std::span<const double> rho,
                   std::span<const double> sigma2) {
  require_aligned(Ri.size(), Rm.size(), "build_qd1");
  require_aligned(Ri.size(), sigma2.size(), "build_qd1");
  const std::size_t p = rho.size();
  if (Ri.size() < p) throw std::invalid_argument("build_qd1: fewer observations than lags");
  const auto weights = qd1_head_weights(rho, sigma2);
  QdSystem q;
  const Eigen::Index rows = static_cast<Eigen::Index>(p);
  q.y.resize(rows);
  q.Z.resize(rows, 2);
  q.sigma2.resize(rows);
  for (std::size_t t = 0; t < p; ++t) {
    const auto& w = weights[t];
    double y = 0.0, c = 0.0, x = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      y += w[j] * Ri[t - j];
      c += w[j];
      x += w[j] * Rm[t - j];
    }
    const Eigen::Index r = static_cast<Eigen::Index>(t);
    q.y(r) = y;
    q.Z(r, 0) = c;
    q.Z(r, 1) = x;
    q.sigma2(r) = sigma2[t];
    q.t_index.push_back(t);
  }
  return q;
}

QdSystem stack(const QdSystem& head, const QdSystem& tail) {
  QdSystem q;
  const Eigen::Index n = head.y.size() + tail.y.size();
  q.y.resize(n);
  q.Z.resize(n, 2);
  q.sigma2.resize(n);
  q.y << head.y, tail.y;
  q.Z << head.Z, tail.Z;
  q.sigma2 << head.sigma2, tail.sigma2;
  q.t_index = head.t_index;
  q.t_index.insert(q.t_index.end(), tail.t_index.begin(), tail.t_index.end());
  return q;
}

CapmFit fit_gls(const QdSystem& qd) {
  const Eigen::Index n = qd.y.size();
  if (n < 4) throw std::invalid_argument("fit_gls needs at least 4 rows");
  for (Eigen::Index r = 0; r < n; ++r) {
    if (!(qd.sigma2(r) > 0.0)) throw InputError("fit_gls: non-positive variance weight");
  }
  const VectorXd w = qd.sigma2.cwiseInverse();
  const VectorXd sw = w.cwiseSqrt();
  const MatrixXd Zs = sw.asDiagonal() * qd.Z;
  const VectorXd ys = sw.cwiseProduct(qd.y);
  Eigen::ColPivHouseholderQR<MatrixXd> qr(Zs);
  qr.setThreshold(1e-12);
  if (qr.rank() < 2) throw NumericalError("rank-deficient GLS design");
  const VectorXd kappa = qr.solve(ys);

  const Eigen::Matrix2d ztwz = Zs.transpose() * Zs;
  CapmFit f;
  f.alpha = kappa(0);
  f.beta = kappa(1);
  f.kappa_cov = ztwz.inverse();
  f.kappa_cov = 0.5 * (f.kappa_cov + f.kappa_cov.transpose()).eval();
  f.se_alpha = std::sqrt(f.kappa_cov(0, 0));
  f.se_beta = std::sqrt(f.kappa_cov(1, 1));
  f.n = static_cast<std::size_t>(n);

  const VectorXd u = qd.y - qd.Z * kappa;
  const double ybar = w.dot(qd.y) / w.sum();
  double ssr = 0.0, sst = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    ssr += w(r) * u(r) * u(r);
    sst += w(r) * (qd.y(r) - ybar) * (qd.y(r) - ybar);
  }
  const double r2 = sst > 0.0 ? 1.0 - ssr / sst : 0.0;
  const double nn = static_cast<double>(n);
  f.adj_r2 = 1.0 - (1.0 - r2) * (nn - 1.0) / (nn - 3.0);
  return f;
}

CapmFit estimate_capm_arp_sv(std::span<const double> Ri, std::span<const double> Rm, const EstimatorConfig& cfg) {
  require_aligned(Ri.size(), Rm.size(), "estimate_capm_arp_sv");
  const std::size_t T = Ri.size();
  if (T < 120) throw std::invalid_argument("estimate_capm_arp_sv needs T >= 120 (got " + std::to_string(T) + ")");

  const OlsFit ols = fit_ols(Ri, Rm);
  const ArFit ar = cfg.fixed_p ? fit_ar_residuals_fixed(ols.residuals, *cfg.fixed_p)
                               : fit_ar_residuals(ols.residuals, cfg.p_max);
  if (!is_stationary(ar.rho)) throw NumericalError("estimated AR coefficients are nonstationary");

  std::vector<double> sigma2;
  SvParams sv;
  double h_last = 0.0;
  double acceptance = 0.0;
  if (cfg.volatility == VolatilityMode::constant) {
    double mean = 0.0;
    for (double v : ar.eta_tilde) mean += v;
    mean /= static_cast<double>(T);
    double var = 0.0;
    for (double v : ar.eta_tilde) var += (v - mean) * (v - mean);
    var /= static_cast<double>(T - 1);
    if (!(var > 0.0)) throw NumericalError("zero residual variance");
    sigma2.assign(T, var);
    sv = {std::log(var), 0.0, 0.0};
    h_last = sv.mu;
  } else {
    const SvFit svf = fit_sv(ar.eta_tilde, cfg.mcmc);
    sigma2 = svf.sigma2;
    sv = svf.point();
    h_last = svf.h_mean.back();
    acceptance = svf.phi_acceptance;
  }

  QdSystem qd = build_qd2(Ri, Rm, ar.rho, sigma2);
  if (ar.p > 0) qd = stack(build_qd1(Ri, Rm, ar.rho, sigma2), qd);
  CapmFit fit = fit_gls(qd);
  fit.rho = ar.rho;
  fit.p = ar.p;
  fit.sigma2_path = std::move(sigma2);
  fit.sv = sv;
  fit.h_last_mean = h_last;
  fit.phi_acceptance = acceptance;
  return fit;
}

}  // namespace evkit
