#include "evkit/ts_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "evkit/errors.hpp"

namespace evkit {

Descriptive descriptive_stats(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 2) throw std::invalid_argument("descriptive_stats needs at least 2 observations");
  Descriptive d;
  d.n = n;
  double sum = 0.0;
  d.min = x[0];
  d.max = x[0];
  for (double v : x) {
    if (!std::isfinite(v)) throw InputError("descriptive_stats: non-finite observation");
    sum += v;
    d.min = std::min(d.min, v);
    d.max = std::max(d.max, v);
  }
  d.mean = sum / static_cast<double>(n);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double c = v - d.mean;
    const double c2 = c * c;
    m2 += c2;
    m3 += c2 * c;
    m4 += c2 * c2;
  }
  if (m2 == 0.0) throw std::invalid_argument("zero variance");
  const double nn = static_cast<double>(n);
  d.sd = std::sqrt(m2 / (nn - 1.0));
  m2 /= nn;
  m3 /= nn;
  m4 /= nn;
  d.skewness = m3 / std::pow(m2, 1.5);
  d.kurtosis = m4 / (m2 * m2);
  return d;
}

std::string to_string(AdfSpec spec) { return spec == AdfSpec::trend ? "trend" : "constant"; }

double adf_critical_value_1pct(AdfSpec spec) { return spec == AdfSpec::trend ? -3.42 : -2.58; }

int default_max_lag(std::size_t T) {
  return static_cast<int>(std::floor(12.0 * std::pow(static_cast<double>(T) / 100.0, 0.25)));
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Ols {
  VectorXd coef;
  double rss = 0.0;
  MatrixXd xtx_inv;
};

Ols least_squares(const MatrixXd& X, const VectorXd& y, const char* what) {
  Eigen::ColPivHouseholderQR<MatrixXd> qr(X);
  if (qr.rank() < X.cols()) throw NumericalError(std::string("singular ") + what + " regression");
  Ols out;
  out.coef = qr.solve(y);
  out.rss = (y - X * out.coef).squaredNorm();
  if (X.cols() > 0) {
    // (X'X)^-1 = P R^-1 R^-T P'
    const MatrixXd R = qr.matrixR().topLeftCorner(X.cols(), X.cols()).triangularView<Eigen::Upper>();
    const MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(MatrixXd::Identity(X.cols(), X.cols()));
    const MatrixXd inner = Rinv * Rinv.transpose();
    out.xtx_inv = qr.colsPermutation() * inner * qr.colsPermutation().transpose();
  }
  return out;
}

VectorXd gls_detrend(std::span<const double> y, AdfSpec spec) {
  const Eigen::Index T = static_cast<Eigen::Index>(y.size());
  const double cbar = spec == AdfSpec::trend ? -13.5 : -7.0;
  const double a = 1.0 + cbar / static_cast<double>(T);
  const Eigen::Index k = spec == AdfSpec::trend ? 2 : 1;
  MatrixXd z(T, k);
  for (Eigen::Index t = 0; t < T; ++t) {
    z(t, 0) = 1.0;
    if (k == 2) z(t, 1) = static_cast<double>(t + 1);
  }
  VectorXd yq(T);
  MatrixXd zq(T, k);
  yq(0) = y[0];
  zq.row(0) = z.row(0);
  for (Eigen::Index t = 1; t < T; ++t) {
    yq(t) = y[t] - a * y[t - 1];
    zq.row(t) = z.row(t) - a * z.row(t - 1);
  }
  const VectorXd beta = least_squares(zq, yq, "detrending").coef;
  VectorXd out(T);
  for (Eigen::Index t = 0; t < T; ++t) out(t) = y[t] - z.row(t).dot(beta);
  return out;
}

// Rows t = first..T-1 of the ADF regression with k lagged differences.
void adf_design(const VectorXd& yd, int k, Eigen::Index first, MatrixXd& X, VectorXd& dy) {
  const Eigen::Index T = yd.size();
  const Eigen::Index rows = T - first;
  X.resize(rows, k + 1);
  dy.resize(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Eigen::Index t = first + r;
    dy(r) = yd(t) - yd(t - 1);
    X(r, 0) = yd(t - 1);
    for (int j = 1; j <= k; ++j) X(r, j) = yd(t - j) - yd(t - j - 1);
  }
}

}  // namespace

AdfGlsResult adf_gls(std::span<const double> y, AdfSpec spec, int max_lag) {
  const std::size_t T = y.size();
  if (max_lag < 0) max_lag = default_max_lag(T);
  if (T <= static_cast<std::size_t>(max_lag) + 10) {
    throw std::invalid_argument("adf_gls: series too short for max_lag " + std::to_string(max_lag));
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw InputError("adf_gls: non-finite observation");
  }
  const VectorXd yd = gls_detrend(y, spec);
  // A constant (or exactly linear) input leaves only rounding noise.
  double scale = 1.0;
  for (double v : y) scale = std::max(scale, std::abs(v));
  if (yd.lpNorm<Eigen::Infinity>() <= 1e-10 * scale) {
    throw NumericalError("adf_gls: series is deterministic after detrending");
  }

  // Lag selection on the common sample t = max_lag+1 .. T-1.
  const Eigen::Index first = max_lag + 1;
  const double N = static_cast<double>(static_cast<Eigen::Index>(T) - first);
  int best = 0;
  double best_ic = std::numeric_limits<double>::infinity();
  MatrixXd X;
  VectorXd dy;
  for (int k = 0; k <= max_lag; ++k) {
    adf_design(yd, k, first, X, dy);
    const Ols fit = least_squares(X, dy, "ADF");
    const double s2 = fit.rss / N;
    const double b0 = fit.coef(0);
    const double tau = b0 * b0 * X.col(0).squaredNorm() / s2;
    const double ic = std::log(s2) + std::log(N) * (tau + k) / N;
    if (ic < best_ic) {
      best_ic = ic;
      best = k;
    }
  }

  adf_design(yd, best, best + 1, X, dy);
  const Ols fit = least_squares(X, dy, "ADF");
  const double dof = static_cast<double>(X.rows() - X.cols());
  const double s2 = fit.rss / dof;
  const double se = std::sqrt(s2 * fit.xtx_inv(0, 0));

  AdfGlsResult r;
  r.statistic = fit.coef(0) / se;
  r.selected_lag = best;
  r.phi_hat = 1.0 + fit.coef(0);
  r.spec = spec;
  r.critical_value = adf_critical_value_1pct(spec);
  r.reject_1pct = r.statistic < r.critical_value;
  r.n = static_cast<std::size_t>(X.rows());
  return r;
}

int select_ar_order_bic(std::span<const double> e, int p_max) {
  if (p_max < 0) throw std::invalid_argument("select_ar_order_bic: p_max must be >= 0");
  const std::size_t n = e.size();
  if (n <= static_cast<std::size_t>(p_max) + 10) {
    throw std::invalid_argument("select_ar_order_bic: series too short for p_max " + std::to_string(p_max));
  }
  const Eigen::Index rows = static_cast<Eigen::Index>(n) - p_max;
  const double ne = static_cast<double>(rows);
  VectorXd y(rows);
  for (Eigen::Index r = 0; r < rows; ++r) y(r) = e[r + p_max];

  int best = 0;
  double best_bic = ne * std::log(y.squaredNorm() / ne);
  for (int p = 1; p <= p_max; ++p) {
    MatrixXd X(rows, p);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (int j = 1; j <= p; ++j) X(r, j - 1) = e[r + p_max - j];
    }
    const double rss = least_squares(X, y, "AR lag").rss;
    const double bic = ne * std::log(rss / ne) + p * std::log(ne);
    if (bic < best_bic) {
      best_bic = bic;
      best = p;
    }
  }
  return best;
}

}  // namespace evkit
