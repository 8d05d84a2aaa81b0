// Serial reference vs OpenMP for each data-parallel kernel. Thread count comes
// from OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "evkit/data_model.hpp"
#include "evkit/event_study.hpp"
#include "evkit/model_lab.hpp"
#include "evkit/parallel.hpp"
#include "evkit/rng.hpp"
#include "evkit/ts_stats.hpp"

using namespace evkit;

namespace {

// One Monte Carlo replication: simulate a random walk, run ADF-GLS.
double adf_rep(std::size_t i) {
  Rng rng(derive_seed(99, i));
  std::normal_distribution<double> z;
  std::vector<double> w(500);
  double acc = 0.0;
  for (auto& v : w) v = acc += z(rng);
  return adf_gls(w, AdfSpec::trend).statistic;
}

double event_rep(std::size_t i) {
  CapmTruth truth;
  truth.rho = {};
  Rng rng(derive_seed(5, i));
  const auto s = simulate_capm(truth, 141, rng);
  EstimatorConfig cfg;
  cfg.mcmc.burn_in = 500;
  cfg.mcmc.draws = 500;
  cfg.mcmc.seed = i;
  return run_event_study(s.ri, s.rm, 130, WindowConfig{}, cfg).day(0).car;
}

const PanelDataset& fixture_panel() {
  static const PanelDataset p = [] {
    const std::filesystem::path d(EVKIT_TEST_DATA);
    return load_panel(d / "panel/prices.csv", d / "panel/actions.csv", d / "panel/rates.csv");
  }();
  return p;
}

// 200 securities over 1500 days so per-date work is visible.
const PanelDataset& wide_panel() {
  static const PanelDataset p = [] {
    const auto dates = business_days(Date(1930, 1, 6), 1500);
    std::string prices = "security_id,date,price,shares_outstanding,zaibatsu,military\n";
    std::string rates = "date,daily_rate\n";
    Rng rng(11);
    std::normal_distribution<double> z(0.0, 0.01);
    for (int s = 0; s < 200; ++s) {
      double price = 50.0;
      const std::string tail = "," + std::to_string(1000 + s) + "," + std::to_string(s % 2) + "," + std::to_string(s / 2 % 2) + "\n";
      for (const auto& d : dates) {
        price *= std::exp(z(rng));
        prices += "S" + std::to_string(s) + "," + d.to_string() + "," + std::to_string(price) + tail;
      }
    }
    for (const auto& d : dates) rates += d.to_string() + ",0.0001\n";
    return parse_panel(prices, "security_id,ex_date,kind,cash_amount,new_shares_per_old,subscription_price\n", rates);
  }();
  return p;
}

}  // namespace

static void BM_adf_serial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(serial::map_indexed(static_cast<std::size_t>(st.range(0)), adf_rep));
}
static void BM_adf_par(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(par::map_indexed(static_cast<std::size_t>(st.range(0)), adf_rep));
}
BENCHMARK(BM_adf_serial)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_adf_par)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_event_serial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(serial::map_indexed(static_cast<std::size_t>(st.range(0)), event_rep));
}
static void BM_event_par(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(par::map_indexed(static_cast<std::size_t>(st.range(0)), event_rep));
}
BENCHMARK(BM_event_serial)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_event_par)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_sweep_serial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(serial::sweep_proposition(PropSweep::prop2_escalation, 2000, 1));
}
static void BM_sweep_par(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(sweep_proposition(PropSweep::prop2_escalation, 2000, 1));
}
BENCHMARK(BM_sweep_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sweep_par)->Unit(benchmark::kMillisecond);

static void BM_cap_shares_serial(benchmark::State& st) {
  const auto& p = st.range(0) ? wide_panel() : fixture_panel();
  for (auto _ : st) benchmark::DoNotOptimize(serial::cap_shares(p));
}
static void BM_cap_shares_par(benchmark::State& st) {
  const auto& p = st.range(0) ? wide_panel() : fixture_panel();
  for (auto _ : st) benchmark::DoNotOptimize(par::cap_shares(p));
}
BENCHMARK(BM_cap_shares_serial)->Arg(0)->Arg(1);
BENCHMARK(BM_cap_shares_par)->Arg(0)->Arg(1);

BENCHMARK_MAIN();
