#include "evkit/sv_mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "evkit/csv.hpp"
#include "evkit/errors.hpp"
#include "evkit/rng.hpp"

namespace evkit {

const std::array<MixtureComponent, 10>& log_chi2_mixture() {
  static const std::array<MixtureComponent, 10> table{{
      {0.00609, 1.92677, 0.11265},
      {0.04775, 1.34744, 0.17788},
      {0.13057, 0.73504, 0.26768},
      {0.20674, 0.02266, 0.40611},
      {0.22715, -0.85173, 0.62699},
      {0.18842, -1.97278, 0.98583},
      {0.12047, -3.46788, 1.57469},
      {0.05591, -5.55246, 2.54498},
      {0.01575, -8.68384, 4.16591},
      {0.00115, -14.65000, 7.33342},
  }};
  return table;
}

namespace {

constexpr std::size_t kComponents = 10;

struct State {
  double mu;
  double phi;
  double sigma2;
};

double log_phi_target(double phi, double sigma2, double x1, const SvPriors& pr) {
  const double one_m = 1.0 - phi * phi;
  return (pr.phi_a - 1.0) * std::log1p(phi) + (pr.phi_b - 1.0) * std::log1p(-phi) + 0.5 * std::log(one_m) -
         0.5 * one_m * x1 * x1 / sigma2;
}

ParamSummary summarize(std::vector<double> v) {
  ParamSummary s;
  const double n = static_cast<double>(v.size());
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.sd = std::sqrt(ss / (n - 1.0));

  // split-chain Rhat on the two halves
  const std::size_t half = v.size() / 2;
  if (half >= 2) {
    double m[2], w[2];
    for (int c = 0; c < 2; ++c) {
      const auto b = v.begin() + static_cast<std::ptrdiff_t>(c * half);
      m[c] = std::accumulate(b, b + static_cast<std::ptrdiff_t>(half), 0.0) / static_cast<double>(half);
      double acc = 0.0;
      for (auto it = b; it != b + static_cast<std::ptrdiff_t>(half); ++it) acc += (*it - m[c]) * (*it - m[c]);
      w[c] = acc / static_cast<double>(half - 1);
    }
    const double W = 0.5 * (w[0] + w[1]);
    const double grand = 0.5 * (m[0] + m[1]);
    const double B_over_n = (m[0] - grand) * (m[0] - grand) + (m[1] - grand) * (m[1] - grand);
    const double nh = static_cast<double>(half);
    const double var_plus = (nh - 1.0) / nh * W + B_over_n;
    s.rhat = W > 0.0 ? std::sqrt(var_plus / W) : 1.0;
  }

  std::sort(v.begin(), v.end());
  auto q = [&](double p) {
    const double pos = p * (n - 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  s.q05 = q(0.05);
  s.q95 = q(0.95);
  return s;
}

}  // namespace

SvFit fit_sv(std::span<const double> innovations, const McmcConfig& cfg) {
  const std::size_t T = innovations.size();
  if (T < 50) throw std::invalid_argument("series too short for fit_sv (need >= 50, got " + std::to_string(T) + ")");
  if (cfg.burn_in <= 0 || cfg.draws <= 0) throw std::invalid_argument("burn_in and draws must be positive");
  double mean = 0.0;
  bool all_zero = true;
  for (double v : innovations) {
    if (!std::isfinite(v)) throw InputError("fit_sv: non-finite innovation");
    if (v != 0.0) all_zero = false;
    mean += v;
  }
  if (all_zero) throw InputError("fit_sv: degenerate all-zero input");
  mean /= static_cast<double>(T);
  double var = 0.0;
  for (double v : innovations) var += (v - mean) * (v - mean);
  var /= static_cast<double>(T - 1);

  const SvPriors& pr = cfg.priors;
  const auto& mix = log_chi2_mixture();
  std::array<double, kComponents> log_w{}, inv_v{};
  for (std::size_t j = 0; j < kComponents; ++j) {
    log_w[j] = std::log(mix[j].prob) - 0.5 * std::log(mix[j].var);
    inv_v[j] = 1.0 / mix[j].var;
  }

  SvFit fit;
  fit.offset_c = cfg.offset_scale * var;
  std::vector<double> ystar(T);
  for (std::size_t t = 0; t < T; ++t) {
    ystar[t] = std::log(innovations[t] * innovations[t] + fit.offset_c);
  }

  Rng rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  State st{std::accumulate(ystar.begin(), ystar.end(), 0.0) / static_cast<double>(T) + 1.2704, 0.9, 0.05};
  std::vector<double> h(T, st.mu);
  std::vector<std::uint8_t> comp(T, 4);
  std::vector<double> filt_m(T), filt_c(T);

  std::vector<double> h_sum(T, 0.0), s2_sum(T, 0.0);
  std::vector<double> mu_d, phi_d, sig_d;
  mu_d.reserve(cfg.draws);
  phi_d.reserve(cfg.draws);
  sig_d.reserve(cfg.draws);
  long accepted = 0;
  const int total = cfg.burn_in + cfg.draws;

  for (int it = 0; it < total; ++it) {
    // 1. mixture indicators
    for (std::size_t t = 0; t < T; ++t) {
      const double r = ystar[t] - h[t];
      std::array<double, kComponents> cum{};
      double acc = 0.0;
      for (std::size_t j = 0; j < kComponents; ++j) {
        const double d = r - mix[j].mean;
        acc += std::exp(log_w[j] - 0.5 * d * d * inv_v[j]);
        cum[j] = acc;
      }
      const double u = unif(rng) * acc;
      std::size_t j = 0;
      while (j + 1 < kComponents && cum[j] < u) ++j;
      comp[t] = static_cast<std::uint8_t>(j);
    }

    // 2. FFBS for h
    {
      double a = st.mu;
      double P = st.sigma2 / (1.0 - st.phi * st.phi);
      for (std::size_t t = 0; t < T; ++t) {
        const auto& c = mix[comp[t]];
        const double y = ystar[t] - c.mean;
        const double F = P + c.var;
        const double K = P / F;
        filt_m[t] = a + K * (y - a);
        filt_c[t] = P * c.var / F;
        a = st.mu + st.phi * (filt_m[t] - st.mu);
        P = st.phi * st.phi * filt_c[t] + st.sigma2;
      }
      h[T - 1] = filt_m[T - 1] + std::sqrt(filt_c[T - 1]) * normal(rng);
      for (std::size_t t = T - 1; t-- > 0;) {
        const double C = filt_c[t];
        const double denom = st.phi * st.phi * C + st.sigma2;
        const double gain = C * st.phi / denom;
        const double m = filt_m[t] + gain * (h[t + 1] - st.mu - st.phi * (filt_m[t] - st.mu));
        const double v = C * st.sigma2 / denom;
        h[t] = m + std::sqrt(v) * normal(rng);
      }
    }

    // 3. phi | h, mu, sigma2: truncated-normal regression proposal
    {
      double sxx = 0.0, sxy = 0.0;
      for (std::size_t t = 1; t < T; ++t) {
        const double xp = h[t - 1] - st.mu;
        sxx += xp * xp;
        sxy += xp * (h[t] - st.mu);
      }
      const double phat = sxy / sxx;
      const double sd = std::sqrt(st.sigma2 / sxx);
      double prop;
      do {
        prop = phat + sd * normal(rng);
      } while (!(prop > -1.0 && prop < 1.0));
      const double x1 = h[0] - st.mu;
      const double log_ratio = log_phi_target(prop, st.sigma2, x1, pr) - log_phi_target(st.phi, st.sigma2, x1, pr);
      if (std::log(unif(rng)) < log_ratio) {
        st.phi = prop;
        if (it >= cfg.burn_in) ++accepted;
      }
    }

    // 4. sigma2 | h, mu, phi
    {
      const double x1 = h[0] - st.mu;
      double ss = (1.0 - st.phi * st.phi) * x1 * x1;
      for (std::size_t t = 1; t < T; ++t) {
        const double e = (h[t] - st.mu) - st.phi * (h[t - 1] - st.mu);
        ss += e * e;
      }
      std::gamma_distribution<double> gam(pr.sigma2_shape + 0.5 * static_cast<double>(T), 1.0);
      st.sigma2 = (pr.sigma2_scale + 0.5 * ss) / gam(rng);
    }

    // 5. mu | h, phi, sigma2
    {
      const double one_m = 1.0 - st.phi;
      double prec = 1.0 / pr.mu_var + (1.0 - st.phi * st.phi) / st.sigma2;
      double num = pr.mu_mean / pr.mu_var + (1.0 - st.phi * st.phi) * h[0] / st.sigma2;
      double sum = 0.0;
      for (std::size_t t = 1; t < T; ++t) sum += h[t] - st.phi * h[t - 1];
      prec += static_cast<double>(T - 1) * one_m * one_m / st.sigma2;
      num += one_m * sum / st.sigma2;
      st.mu = num / prec + normal(rng) / std::sqrt(prec);
    }

    if (it >= cfg.burn_in) {
      for (std::size_t t = 0; t < T; ++t) {
        h_sum[t] += h[t];
        s2_sum[t] += std::exp(h[t]);
      }
      mu_d.push_back(st.mu);
      phi_d.push_back(st.phi);
      sig_d.push_back(std::sqrt(st.sigma2));
    }
  }

  const double nd = static_cast<double>(cfg.draws);
  fit.h_mean.resize(T);
  fit.sigma2.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    fit.h_mean[t] = h_sum[t] / nd;
    fit.sigma2[t] = s2_sum[t] / nd;
  }
  fit.phi_acceptance = static_cast<double>(accepted) / nd;
  fit.draws.reserve(cfg.draws);
  for (int d = 0; d < cfg.draws; ++d) fit.draws.push_back({mu_d[d], phi_d[d], sig_d[d]});
  fit.mu = summarize(std::move(mu_d));
  fit.phi = summarize(std::move(phi_d));
  fit.sigma_tau = summarize(std::move(sig_d));
  return fit;
}

std::vector<double> forecast_volatility(const SvParams& p, double h_last_mean, int horizon) {
  if (horizon < 1) throw std::invalid_argument("forecast_volatility: horizon must be >= 1");
  std::vector<double> out;
  out.reserve(horizon);
  const double s2 = p.sigma_tau * p.sigma_tau;
  double phik = 1.0;
  double var = 0.0;
  for (int k = 1; k <= horizon; ++k) {
    phik *= p.phi;
    // Var_k = phi^2 Var_{k-1} + s2, equal to s2 (1 - phi^2k) / (1 - phi^2)
    var = p.phi * p.phi * var + s2;
    out.push_back(std::exp(p.mu + phik * (h_last_mean - p.mu) + 0.5 * var));
  }
  return out;
}

void write_draws_csv(const SvFit& fit, std::ostream& out) {
  csv::write_line(out, {"iteration", "mu", "phi", "sigma_tau"});
  for (std::size_t i = 0; i < fit.draws.size(); ++i) {
    const auto& d = fit.draws[i];
    csv::write_line(out, {std::to_string(i + 1), csv::exact(d.mu), csv::exact(d.phi), csv::exact(d.sigma_tau)});
  }
}

}  // namespace evkit
