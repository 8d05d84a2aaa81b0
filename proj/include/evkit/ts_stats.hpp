#pragma once

#include <cstddef>
#include <span>
#include <string>

namespace evkit {

struct Descriptive {
  double mean = 0.0;
  double sd = 0.0;        // n-1 denominator
  double min = 0.0;
  double max = 0.0;
  double skewness = 0.0;  // m3 / m2^1.5
  double kurtosis = 0.0;  // m4 / m2^2, normal -> 3
  std::size_t n = 0;
};

// Throws std::invalid_argument for n < 2 or zero variance.
Descriptive descriptive_stats(std::span<const double> x);

enum class AdfSpec { constant, trend };

std::string to_string(AdfSpec spec);

struct AdfGlsResult {
  double statistic = 0.0;
  int selected_lag = 0;
  double phi_hat = 0.0;  // 1 + coefficient on the lagged detrended level
  AdfSpec spec = AdfSpec::trend;
  double critical_value = 0.0;
  bool reject_1pct = false;
  std::size_t n = 0;
};

// 1% critical values: -3.42 with a trend, -2.58 with a constant only.
double adf_critical_value_1pct(AdfSpec spec);

// floor(12 (T/100)^(1/4))
int default_max_lag(std::size_t T);

// GLS-detrended ADF test (cbar = -7 constant, -13.5 trend). The lag is chosen
// by the modified BIC on a common sample, then the regression is refit on all
// rows available at that lag. max_lag < 0 selects default_max_lag.
// Throws NumericalError on a singular regression.
AdfGlsResult adf_gls(std::span<const double> y, AdfSpec spec, int max_lag = -1);

// argmin_p of n ln(RSS_p / n) + p ln n over p = 0..p_max, AR without
// intercept, with the first p_max observations dropped for every candidate.
// Ties go to the smaller p.
int select_ar_order_bic(std::span<const double> e, int p_max);

}  // namespace evkit
