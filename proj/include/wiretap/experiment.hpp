#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wiretap/serialize.hpp"

namespace wiretap {

enum class Scenario { wyner, type2, type2_noisy, hybrid, compound, avc_eve };
std::string to_string(Scenario s);
Scenario parse_scenario(const std::string& name);

struct ExperimentConfig {
  Scenario scenario = Scenario::wyner;
  std::vector<Dmc> mains;
  std::vector<Dmc> eves;
  std::optional<std::uint32_t> best_eve;  // index into eves (avc_eve)
  SourceSpec source = SourceSpec::uniform_identity();
  std::size_t K = 256, L = 1, B = 1;
  std::optional<std::size_t> B0;  // at least the derived value
  std::string alpha = "0";
  double beta = 0.4, backoff = 0.0, xi = 1e-3;
  std::vector<std::size_t> multipliers;  // compound only, one per main, first = 1
  std::optional<std::size_t> r;
  std::optional<ProfileMode> profile_mode;  // default: exact for K <= 8
  std::size_t samples = 20000;              // Monte Carlo profile samples
  std::uint64_t seed = 1;
  std::size_t trials = 0;
  unsigned threads = 1;
  TapStrategy tap = TapStrategy::first;
  std::vector<std::size_t> custom_tap;
  std::optional<Exposure::EveStates> eve_states;  // default: alternating for avc_eve
  std::optional<bool> leakage;                      // default: only for tiny codes
  SampleMode sample_mode = SampleMode::random;
  double aux_rate_fraction = 0.5;
  std::uint64_t leakage_cap = std::uint64_t{1} << 22;
  std::string out;  // report path used by the CLI when --out is absent

  ChannelFamily family() const;
  ProfileMode effective_profile_mode() const;
  std::size_t N() const;
  bool tiny() const;
};

struct ConfigIssue {
  std::string field;
  std::string message;
};

class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues);
  const std::vector<ConfigIssue>& issues() const { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

// Parses and validates. Unknown keys are reported; scenario presets fill in
// the channels they fix (type2: noiseless main, pure-noise eve).
ExperimentConfig config_from_json(const json& j, const std::filesystem::path& base_dir = {});
json to_json(const ExperimentConfig& c);
// Applies presets and throws ConfigError listing every problem.
void validate(ExperimentConfig& c);

WiretapCode build_code(const ExperimentConfig& c, const ProfileStore* store = nullptr);

// Code parameters and index sets.
json construct_report(const ExperimentConfig& c, const ProfileStore* store = nullptr);
// Exact leakage checks; throws std::length_error if the code is too large.
json leakage_report(const ExperimentConfig& c, const WiretapCode& code);
// construct, init_phase, sessions per main state, leakage if tiny.
json run(const ExperimentConfig& c, const ProfileStore* store = nullptr);

struct Interval {
  double lo = 0, hi = 0;
};
// Wilson score interval at 95%.
Interval wilson_interval(std::size_t successes, std::size_t n);

// Numeric axes: K, L, B, B0, alpha, beta, backoff, xi, r, samples, seed,
// trials, aux_rate_fraction. One CSV row per value; failed runs fill the
// error column.
std::vector<std::string> sweep_axes();
std::string sweep(const json& base, const std::string& axis, const std::vector<std::string>& values,
                  const std::filesystem::path& base_dir = {}, const ProfileStore* store = nullptr);

// Timing of gf_mul through the hardware and portable carry-less paths.
json bench_gf(const std::vector<unsigned>& degrees, std::size_t iterations, std::uint64_t seed);

// Profile cache in the directory named by WIRETAP_CACHE_DIR, if set.
std::unique_ptr<ProfileStore> store_from_env();

}  // namespace wiretap
