#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "evkit/capm_gls.hpp"
#include "evkit/event_study.hpp"
#include "evkit/index_engine.hpp"
#include "evkit/model_lab.hpp"

namespace evkit::cli {

using Json = nlohmann::json;

enum ExitCode : int { kOk = 0, kUsage = 1, kInput = 2, kNumerical = 3 };

struct RunConfig {
  std::filesystem::path prices, actions, rates, events;
  // Optional pre-computed excess returns (date,market,<portfolio>...) used by
  // estimate/event instead of the panel. Treated as `returns_variant`.
  std::filesystem::path returns;
  IndexVariant returns_variant = IndexVariant::TRI;

  std::vector<IndexVariant> variants{kIndexVariants.begin(), kIndexVariants.end()};
  std::vector<std::string> portfolios{"market", "zm", "zn", "nm", "nn"};
  std::optional<Date> base_date;  // defaults to the first trading date
  std::optional<Date> split_date = Date(1937, 7, 7);

  WindowConfig window;
  EstimatorConfig estimator;
  std::uint64_t seed = 1;
  std::filesystem::path out = "out";
  bool svg = false;

  ModelParams model = ModelParams::defaults();
  std::size_t sweep_draws = 10'000;
  std::string synth_mode = "capm";  // capm | model
  std::size_t synth_length = 3000;
  CapmTruth truth;
};

// Strict JSON readers: unknown keys are InputErrors. Relative paths resolve
// against `base_dir`. Keys absent from the document keep their defaults.
RunConfig config_from_json(const Json& doc, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);
Json to_json(const RunConfig& cfg);

void apply_model_json(ModelParams& p, const Json& doc);
Json to_json(const ModelParams& p);
void apply_truth_json(CapmTruth& t, const Json& doc);
Json to_json(const CapmTruth& t);

// FNV-1a of the effective configuration, excluding the output directory.
std::string config_hash(const RunConfig& cfg);

// Entry point behind the evkit binary; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace evkit::cli
