#include "wiretap/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include <fmt/format.h>

namespace wiretap {

namespace {

const char* const kScenarioNames[] = {"wyner", "type2", "type2_noisy", "hybrid", "compound", "avc_eve"};

std::string eve_states_name(Exposure::EveStates s) {
  switch (s) {
    case Exposure::EveStates::constant: return "constant";
    case Exposure::EveStates::alternating: return "alternating";
    case Exposure::EveStates::iid: return "iid";
  }
  return "?";
}

Exposure::EveStates parse_eve_states(const std::string& name) {
  if (name == "constant") return Exposure::EveStates::constant;
  if (name == "alternating") return Exposure::EveStates::alternating;
  if (name == "iid") return Exposure::EveStates::iid;
  throw std::invalid_argument("expected constant, alternating or iid");
}

SampleMode parse_sample_mode(const std::string& name) {
  if (name == "random") return SampleMode::random;
  if (name == "argmax") return SampleMode::argmax;
  throw std::invalid_argument("expected random or argmax");
}

ProfileMode parse_profile_mode(const std::string& name) {
  if (name == "exact") return ProfileMode::exact;
  if (name == "monte_carlo") return ProfileMode::monte_carlo;
  throw std::invalid_argument("expected exact or monte_carlo");
}

bool is_noiseless(const Dmc& c) { return c.outputs() == 2 && c.table.isApprox(Eigen::Matrix2d::Identity(), 1e-12); }

bool is_pure_noise(const Dmc& c) { return (c.table.row(0) - c.table.row(1)).cwiseAbs().maxCoeff() < 1e-12; }

bool power_of_two(std::size_t k) { return k >= 2 && (k & (k - 1)) == 0; }

}  // namespace

std::string to_string(Scenario s) { return kScenarioNames[static_cast<int>(s)]; }

Scenario parse_scenario(const std::string& name) {
  for (int i = 0; i < 6; ++i)
    if (name == kScenarioNames[i]) return static_cast<Scenario>(i);
  throw std::invalid_argument("unknown scenario '" + name + "'");
}

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : std::invalid_argument([&] {
        std::string msg = "invalid config:";
        for (const auto& i : issues) msg += "\n  " + i.field + ": " + i.message;
        return msg;
      }()),
      issues_(std::move(issues)) {}

ChannelFamily ExperimentConfig::family() const {
  ChannelFamily f{mains, eves, std::nullopt};
  if (best_eve && *best_eve < eves.size()) {
    std::vector<double> w(eves.size(), 0.0);
    w[*best_eve] = 1.0;
    f.best_eve_weights = w;
  }
  return f;
}

ProfileMode ExperimentConfig::effective_profile_mode() const {
  return profile_mode.value_or(K <= 8 ? ProfileMode::exact : ProfileMode::monte_carlo);
}

std::size_t ExperimentConfig::N() const {
  std::size_t pieces = 1;
  if (scenario == Scenario::compound)
    for (auto m : multipliers) pieces *= m;
  return K * pieces * L;
}

bool ExperimentConfig::tiny() const { return N() <= 4 && B <= 2; }

// ---------------------------------------------------------------------------

ExperimentConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError(std::vector<ConfigIssue>{{"(root)", "config must be a JSON object"}});
  ExperimentConfig c;
  std::vector<ConfigIssue> issues;
  auto field = [&](const char* name, auto&& fn) {
    if (!j.contains(name)) return;
    try {
      fn(j.at(name));
    } catch (const std::exception& e) {
      issues.push_back({name, e.what()});
    }
  };
  static const std::vector<std::string> known = {
      "scenario", "main",    "mains",      "eve",   "eves",    "best_eve",    "source",      "K",
      "L",        "B",       "B0",         "alpha", "beta",    "backoff",     "xi",          "multipliers",
      "r",        "profile_mode", "samples", "seed", "trials", "threads",     "tap",         "custom_tap",
      "eve_states", "leakage", "sample_mode", "aux_rate_fraction", "leakage_cap", "out"};
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end()) issues.push_back({key, "unknown field"});

  field("scenario", [&](const json& v) { c.scenario = parse_scenario(v.get<std::string>()); });
  if (j.contains("main") && j.contains("mains")) issues.push_back({"main", "give either main or mains"});
  if (j.contains("eve") && j.contains("eves")) issues.push_back({"eve", "give either eve or eves"});
  field("main", [&](const json& v) { c.mains = {channel_from_json(v, base_dir)}; });
  field("eve", [&](const json& v) { c.eves = {channel_from_json(v, base_dir)}; });
  field("mains", [&](const json& v) {
    for (const auto& e : v) c.mains.push_back(channel_from_json(e, base_dir));
  });
  field("eves", [&](const json& v) {
    for (const auto& e : v) c.eves.push_back(channel_from_json(e, base_dir));
  });
  field("best_eve", [&](const json& v) { c.best_eve = v.get<std::uint32_t>(); });
  field("source", [&](const json& v) { c.source = source_from_json(v); });
  field("K", [&](const json& v) { c.K = v.get<std::size_t>(); });
  field("L", [&](const json& v) { c.L = v.get<std::size_t>(); });
  field("B", [&](const json& v) { c.B = v.get<std::size_t>(); });
  field("B0", [&](const json& v) { c.B0 = v.get<std::size_t>(); });
  field("alpha", [&](const json& v) {
    c.alpha = v.is_string() ? v.get<std::string>() : v.dump();
    Fraction::parse(c.alpha);
  });
  field("beta", [&](const json& v) { c.beta = v.get<double>(); });
  field("backoff", [&](const json& v) { c.backoff = v.get<double>(); });
  field("xi", [&](const json& v) { c.xi = v.get<double>(); });
  field("multipliers", [&](const json& v) { c.multipliers = v.get<std::vector<std::size_t>>(); });
  field("r", [&](const json& v) { c.r = v.get<std::size_t>(); });
  field("profile_mode", [&](const json& v) { c.profile_mode = parse_profile_mode(v.get<std::string>()); });
  field("samples", [&](const json& v) { c.samples = v.get<std::size_t>(); });
  field("seed", [&](const json& v) { c.seed = v.get<std::uint64_t>(); });
  field("trials", [&](const json& v) { c.trials = v.get<std::size_t>(); });
  field("threads", [&](const json& v) { c.threads = v.get<unsigned>(); });
  field("tap", [&](const json& v) { c.tap = parse_tap_strategy(v.get<std::string>()); });
  field("custom_tap", [&](const json& v) { c.custom_tap = v.get<std::vector<std::size_t>>(); });
  field("eve_states", [&](const json& v) { c.eve_states = parse_eve_states(v.get<std::string>()); });
  field("leakage", [&](const json& v) { c.leakage = v.get<bool>(); });
  field("sample_mode", [&](const json& v) { c.sample_mode = parse_sample_mode(v.get<std::string>()); });
  field("aux_rate_fraction", [&](const json& v) { c.aux_rate_fraction = v.get<double>(); });
  field("leakage_cap", [&](const json& v) { c.leakage_cap = v.get<std::uint64_t>(); });
  field("out", [&](const json& v) { c.out = v.get<std::string>(); });
  // report everything at once, parse problems first
  try {
    validate(c);
  } catch (const ConfigError& e) {
    for (const auto& i : e.issues())
      if (std::none_of(issues.begin(), issues.end(), [&](const ConfigIssue& o) { return o.field == i.field; }))
        issues.push_back(i);
  }
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return c;
}

void validate(ExperimentConfig& c) {
  std::vector<ConfigIssue> issues;
  auto bad = [&](std::string f, std::string m) { issues.push_back({std::move(f), std::move(m)}); };

  if (!power_of_two(c.K)) bad("K", "must be a power of two, at least 2");
  if (c.L == 0) bad("L", "must be positive");
  if (c.B == 0) bad("B", "must be positive");
  if (!(c.beta > 0 && c.beta < 0.5)) bad("beta", "must lie in (0, 1/2)");
  if (!(c.backoff >= 0 && c.backoff < 1)) bad("backoff", "must lie in [0, 1)");
  if (!(c.xi > 0)) bad("xi", "must be positive");
  if (c.threads == 0) bad("threads", "must be positive");
  if (!(c.aux_rate_fraction > 0 && c.aux_rate_fraction <= 1)) bad("aux_rate_fraction", "must lie in (0, 1]");
  double alpha = 0;
  try {
    alpha = Fraction::parse(c.alpha).value();
    if (alpha < 0 || alpha > 1) bad("alpha", "must lie in [0, 1]");
  } catch (const std::exception& e) {
    bad("alpha", e.what());
  }
  if (c.tap == TapStrategy::custom && c.custom_tap.empty() && alpha > 0)
    bad("custom_tap", "required when tap is custom");

  const auto one_channel = [&](const char* name, std::vector<Dmc>& v) {
    if (v.size() != 1) bad(name, fmt::format("this scenario takes exactly one channel, got {}", v.size()));
  };
  const Dmc silent = Dmc::pure_noise(Eigen::VectorXd::Ones(1));
  switch (c.scenario) {
    case Scenario::wyner:
      if (alpha != 0) bad("alpha", "wyner scenario has no tapping; alpha must be 0");
      one_channel("main", c.mains);
      one_channel("eve", c.eves);
      break;
    case Scenario::type2:
      if (c.mains.empty()) c.mains = {Dmc::noiseless()};
      if (c.eves.empty()) c.eves = {silent};
      if (c.mains.size() != 1 || !is_noiseless(c.mains[0])) bad("main", "type2 scenario fixes a noiseless main channel");
      if (c.eves.size() != 1 || !is_pure_noise(c.eves[0]))
        bad("eve", "type2 scenario fixes an eavesdropper channel independent of the input");
      break;
    case Scenario::type2_noisy:
      if (c.eves.empty()) c.eves = {silent};
      one_channel("main", c.mains);
      if (c.eves.size() != 1 || !is_pure_noise(c.eves[0]))
        bad("eve", "type2_noisy scenario fixes an eavesdropper channel independent of the input");
      break;
    case Scenario::hybrid:
      one_channel("main", c.mains);
      one_channel("eve", c.eves);
      break;
    case Scenario::compound:
      if (c.mains.empty()) bad("mains", "at least one main channel required");
      if (c.eves.empty()) bad("eves", "at least one eavesdropper channel required");
      if (c.multipliers.size() != c.mains.size())
        bad("multipliers", fmt::format("need one per main channel ({}), got {}", c.mains.size(), c.multipliers.size()));
      else if (c.multipliers[0] != 1)
        bad("multipliers", "first multiplier must be 1");
      for (auto m : c.multipliers)
        if (m == 0) bad("multipliers", "multipliers must be positive");
      break;
    case Scenario::avc_eve:
      one_channel("main", c.mains);
      if (c.eves.size() < 2) bad("eves", "avc_eve needs at least two eavesdropper states");
      if (!c.best_eve) bad("best_eve", "avc_eve requires the index of the best eavesdropper channel");
      else if (*c.best_eve >= c.eves.size()) bad("best_eve", "index out of range");
      if (!c.eve_states) c.eve_states = Exposure::EveStates::alternating;
      break;
  }
  if (c.scenario != Scenario::compound && !c.multipliers.empty() &&
      !(c.multipliers.size() == 1 && c.multipliers[0] == 1))
    bad("multipliers", "only the compound scenario takes multipliers");
  if (c.scenario != Scenario::avc_eve && c.best_eve) bad("best_eve", "only the avc_eve scenario takes best_eve");

  if (issues.empty()) {
    try {
      c.family().validate();
    } catch (const std::exception& e) {
      bad("channels", e.what());
    }
    try {
      c.source.validate();
    } catch (const std::exception& e) {
      bad("source", e.what());
    }
  }
  if (issues.empty() && c.scenario == Scenario::avc_eve) {
    auto fam = c.family();
    auto cert = check_degraded(fam, *fam.best_eve_weights);
    if (!cert.degraded) bad("best_eve", "no degradation certificate: " + cert.reason);
  }
  if (!issues.empty()) throw ConfigError(std::move(issues));
}

json to_json(const ExperimentConfig& c) {
  json mains = json::array(), eves = json::array();
  for (const auto& m : c.mains) mains.push_back(to_json(m));
  for (const auto& e : c.eves) eves.push_back(to_json(e));
  json j = {{"scenario", to_string(c.scenario)},
            {"mains", mains},
            {"eves", eves},
            {"source", to_json(c.source)},
            {"K", c.K},
            {"L", c.L},
            {"B", c.B},
            {"alpha", c.alpha},
            {"beta", c.beta},
            {"backoff", c.backoff},
            {"xi", c.xi},
            {"profile_mode", to_string(c.effective_profile_mode())},
            {"samples", c.samples},
            {"seed", c.seed},
            {"trials", c.trials},
            {"tap", to_string(c.tap)},
            {"sample_mode", to_string(c.sample_mode)},
            {"aux_rate_fraction", c.aux_rate_fraction}};
  if (c.best_eve) j["best_eve"] = *c.best_eve;
  if (c.B0) j["B0"] = *c.B0;
  if (c.r) j["r"] = *c.r;
  if (!c.multipliers.empty()) j["multipliers"] = c.multipliers;
  if (!c.custom_tap.empty()) j["custom_tap"] = c.custom_tap;
  if (c.eve_states) j["eve_states"] = eve_states_name(*c.eve_states);
  return j;
}

// ---------------------------------------------------------------------------

WiretapCode build_code(const ExperimentConfig& c, const ProfileStore* store) {
  CompoundOptions opt;
  opt.multipliers = c.scenario == Scenario::compound ? c.multipliers : std::vector<std::size_t>{1};
  opt.params = PolarParams::make(c.K, c.beta);
  opt.profile = {c.effective_profile_mode(), c.samples, derive_seed(c.seed, 1), c.threads, store};
  opt.derive.L = c.L;
  opt.derive.B = c.B;
  opt.derive.alpha = Fraction::parse(c.alpha);
  opt.derive.xi = c.xi;
  opt.derive.backoff = c.backoff;
  opt.derive.r_override = c.r;
  opt.derive.sample_mode = c.sample_mode;
  opt.aux.rate_fraction = c.aux_rate_fraction;
  opt.aux.samples = c.samples;
  opt.aux.seed = derive_seed(c.seed, 2);
  opt.aux.threads = c.threads;
  opt.aux.store = store;
  auto code = make_compound_wiretap_code(c.source, c.family(), opt);
  if (c.B0) {
    code.config.B0 = *c.B0;
    code.config.check();
  }
  return code;
}

namespace {

Exposure exposure_for(const ExperimentConfig& c, std::uint32_t main_state) {
  Exposure ex;
  ex.main_state = main_state;
  ex.eve_states = c.eve_states.value_or(Exposure::EveStates::constant);
  ex.eve_state = c.best_eve.value_or(0);
  ex.eve_weights.assign(c.eves.size(), 1.0 / static_cast<double>(c.eves.size()));
  ex.tap = c.tap;
  ex.custom_tap = IndexSet(c.custom_tap.begin(), c.custom_tap.end());
  return ex;
}

json code_summary(const ExperimentConfig& c, const WiretapCode& code) {
  json j = to_json(code.config);
  json fam = {{"mains", json::array()}, {"eves", json::array()}};
  for (const auto& m : c.mains) fam["mains"].push_back(to_json(m));
  for (const auto& e : c.eves) fam["eves"].push_back(to_json(e));
  if (c.best_eve) fam["best_eve"] = *c.best_eve;
  j["family"] = fam;
  return j;
}

struct TrialOutcome {
  bool agreed = false;
  std::size_t block_errors = 0;
  bool session_error = false;
};

TrialOutcome run_trial(const ExperimentConfig& c, const WiretapCode& code, const ChannelFamily& fam,
                       std::uint32_t main_state, std::size_t trial) {
  const std::uint64_t base = derive_seed(c.seed, 1000 + trial);
  RngSource enc(derive_seed(base, 2 * main_state)), ch(derive_seed(base, 2 * main_state + 1));
  const Exposure ex = exposure_for(c, main_state);
  TrialOutcome out;
  auto init = init_phase(code, fam, ex, {enc, ch});
  out.agreed = init.agreed();
  auto msgs = draw_messages(code.config, enc);
  auto tr = encode_session(code, msgs, init.transmitter, fam, ex, {enc, ch});
  auto got = decode_session(code, receiver_view(tr), init.receiver);
  for (std::size_t b = 0; b < msgs.size(); ++b)
    if (b >= got.size() || got[b] != msgs[b]) ++out.block_errors;
  out.session_error = out.block_errors > 0;
  return out;
}

// Results land in slots indexed by work item, so the worker count does not
// change the report.
std::vector<TrialOutcome> run_trials(const ExperimentConfig& c, const WiretapCode& code) {
  const auto fam = c.family();
  const std::size_t mains = c.mains.size(), total = mains * c.trials;
  std::vector<TrialOutcome> out(total);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < total;) {
      try {
        out[i] = run_trial(c, code, fam, static_cast<std::uint32_t>(i / c.trials), i % c.trials);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = total;
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(c.threads, static_cast<unsigned>(std::max<std::size_t>(total, 1))));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

json interval_json(Interval i) { return json::array({i.lo, i.hi}); }

}  // namespace

Interval wilson_interval(std::size_t successes, std::size_t n) {
  if (n == 0) return {0.0, 1.0};
  const double z = 1.959963984540054;
  const double nn = static_cast<double>(n), p = static_cast<double>(successes) / nn;
  const double denom = 1 + z * z / nn;
  const double centre = (p + z * z / (2 * nn)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / nn + z * z / (4 * nn * nn)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

json construct_report(const ExperimentConfig& c, const ProfileStore* store) {
  const auto code = build_code(c, store);
  return {{"config", to_json(c)}, {"code", code_summary(c, code)}, {"index_sets", to_json(code.config.sets)}};
}

json leakage_report(const ExperimentConfig& c, const WiretapCode& code) {
  const auto fam = c.family();
  const Exposure ex = exposure_for(c, 0);
  json j = json::object();
  auto attempt = [&](const char* name, auto&& fn) {
    try {
      j[name] = fn();
    } catch (const std::length_error& e) {
      j[name] = {{"skipped", e.what()}};
    }
  };
  attempt("sampler_divergence", [&] { return to_json(check_sampler_divergence(code, fam, c.leakage_cap)); });
  attempt("leftover_hash", [&] { return to_json(check_leftover_hash(code, fam, ex, c.leakage_cap)); });
  if (c.B >= 2 && c.B <= 3)
    attempt("joint_blocks", [&] {
      auto jl = joint_block_leakage(code, fam, ex, c.leakage_cap);
      json r = to_json(jl.report);
      r["per_block"] = jl.per_block;
      r["joint"] = jl.joint;
      json d4 = json::object();
      for (auto [g, v] : jl.delta4_bound) d4[fmt::format("{}", g)] = v;
      r["delta4_bound"] = d4;
      return r;
    });
  if (c.scenario == Scenario::avc_eve)
    attempt("best_eve", [&] { return to_json(check_best_eve_bound(code, fam, *c.best_eve, c.leakage_cap)); });
  return j;
}

json run(const ExperimentConfig& c, const ProfileStore* store) {
  const auto start = std::chrono::steady_clock::now();
  const auto code = build_code(c, store);
  json rep = {{"config", to_json(c)},
              {"code", code_summary(c, code)},
              {"theoretical_rate", code.config.rate_theoretical},
              {"achieved_rate", code.config.achieved_rate()},
              {"trials", c.trials}};
  if (c.trials > 0) {
    const auto outcomes = run_trials(c, code);
    json per_main = json::array();
    std::size_t agreed = 0, sessions_bad = 0, blocks_bad = 0;
    for (std::size_t t = 0; t < c.mains.size(); ++t) {
      std::size_t a = 0, s = 0, b = 0;
      for (std::size_t i = 0; i < c.trials; ++i) {
        const auto& o = outcomes[t * c.trials + i];
        a += o.agreed;
        s += o.session_error;
        b += o.block_errors;
      }
      const std::size_t blocks = c.trials * c.B;
      per_main.push_back({{"main_state", t},
                          {"key_agreement_rate", static_cast<double>(a) / static_cast<double>(c.trials)},
                          {"session_error_rate", static_cast<double>(s) / static_cast<double>(c.trials)},
                          {"session_error_ci95", interval_json(wilson_interval(s, c.trials))},
                          {"block_errors", b},
                          {"blocks", blocks},
                          {"bler", static_cast<double>(b) / static_cast<double>(blocks)},
                          {"bler_ci95", interval_json(wilson_interval(b, blocks))}});
      agreed += a;
      sessions_bad += s;
      blocks_bad += b;
    }
    const std::size_t sessions = c.trials * c.mains.size(), blocks = sessions * c.B;
    rep["per_main"] = per_main;
    rep["key_agreement_rate"] = static_cast<double>(agreed) / static_cast<double>(sessions);
    rep["session_error_rate"] = static_cast<double>(sessions_bad) / static_cast<double>(sessions);
    rep["session_error_ci95"] = interval_json(wilson_interval(sessions_bad, sessions));
    rep["bler"] = static_cast<double>(blocks_bad) / static_cast<double>(blocks);
    rep["bler_ci95"] = interval_json(wilson_interval(blocks_bad, blocks));
  }
  if (c.leakage.value_or(c.tiny())) rep["leakage_checks"] = leakage_report(c, code);
  rep["wall_time"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

// ---------------------------------------------------------------------------

namespace {

enum class AxisKind { integer, real, fraction };

const std::vector<std::pair<std::string, AxisKind>>& axis_table() {
  static const std::vector<std::pair<std::string, AxisKind>> t = {
      {"K", AxisKind::integer},        {"L", AxisKind::integer},       {"B", AxisKind::integer},
      {"B0", AxisKind::integer},       {"alpha", AxisKind::fraction},  {"beta", AxisKind::real},
      {"backoff", AxisKind::real},     {"xi", AxisKind::real},         {"r", AxisKind::integer},
      {"samples", AxisKind::integer},  {"seed", AxisKind::integer},    {"trials", AxisKind::integer},
      {"aux_rate_fraction", AxisKind::real}};
  return t;
}

json axis_value(AxisKind kind, const std::string& text) {
  std::size_t pos = 0;
  switch (kind) {
    case AxisKind::integer: {
      if (text.empty() || text[0] == '-') throw std::invalid_argument("expected a nonnegative integer");
      auto v = std::stoull(text, &pos);
      if (pos != text.size()) throw std::invalid_argument("expected a nonnegative integer");
      return v;
    }
    case AxisKind::real: {
      double v = std::stod(text, &pos);
      if (pos != text.size()) throw std::invalid_argument("expected a number");
      return v;
    }
    case AxisKind::fraction:
      Fraction::parse(text);
      return text;
  }
  return nullptr;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

std::string num(const json& v) { return v.is_null() ? "" : v.dump(); }

}  // namespace

std::vector<std::string> sweep_axes() {
  std::vector<std::string> names;
  for (const auto& [n, _] : axis_table()) names.push_back(n);
  return names;
}

std::string sweep(const json& base, const std::string& axis, const std::vector<std::string>& values,
                  const std::filesystem::path& base_dir, const ProfileStore* store) {
  const auto& table = axis_table();
  auto it = std::find_if(table.begin(), table.end(), [&](const auto& e) { return e.first == axis; });
  if (it == table.end()) throw std::invalid_argument("'" + axis + "' is not a numeric config field");
  std::ostringstream csv;
  csv << "axis,value,scenario,K,N,L,B,r,theoretical_rate,achieved_rate,key_agreement_rate,session_error_rate,"
         "bler,bler_lo,bler_hi,wall_time,error\n";
  for (const auto& value : values) {
    csv << csv_field(axis) << ',' << csv_field(value) << ',';
    try {
      json j = base;
      j[axis] = axis_value(it->second, value);
      const auto cfg = config_from_json(j, base_dir);
      const auto rep = run(cfg, store);
      const auto& code = rep.at("code");
      const bool trials = rep.contains("bler");
      csv << to_string(cfg.scenario) << ',' << cfg.K << ',' << code.at("N").dump() << ',' << cfg.L << ',' << cfg.B
          << ',' << code.at("r").dump() << ',' << num(rep.at("theoretical_rate")) << ','
          << num(rep.at("achieved_rate")) << ',' << (trials ? num(rep.at("key_agreement_rate")) : "") << ','
          << (trials ? num(rep.at("session_error_rate")) : "") << ',' << (trials ? num(rep.at("bler")) : "") << ','
          << (trials ? num(rep.at("bler_ci95")[0]) : "") << ',' << (trials ? num(rep.at("bler_ci95")[1]) : "")
          << ',' << num(rep.at("wall_time")) << ",\n";
    } catch (const std::exception& e) {
      std::string msg = e.what();
      for (std::size_t p; (p = msg.find("\n  ")) != std::string::npos;) msg.replace(p, 3, " ");
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      csv << ",,,,,,,,,,,,,," << csv_field(msg) << '\n';
    }
  }
  return csv.str();
}

json bench_gf(const std::vector<unsigned>& degrees, std::size_t iterations, std::uint64_t seed) {
  RngSource rng(seed);
  json rows = json::array();
  const bool hw = clmul_hardware_available();
  for (unsigned n : degrees) {
    const auto spec = std_modulus(n);
    std::vector<FieldElem> a, b;
    const std::size_t pool = std::min<std::size_t>(iterations, 256);
    for (std::size_t i = 0; i < pool; ++i) {
      a.push_back(FieldElem::from_bits(rng.uniform_bits(n)));
      b.push_back(FieldElem::from_bits(rng.uniform_bits(n)));
    }
    auto time = [&](ClmulPath path, FieldElem& acc) {
      acc = FieldElem::zero(n);
      const auto t0 = std::chrono::steady_clock::now();
      for (std::size_t i = 0; i < iterations; ++i) acc ^= gf_mul(a[i % pool], b[(i * 7 + 3) % pool], spec, path);
      return std::chrono::duration<double, std::nano>(std::chrono::steady_clock::now() - t0).count() /
             static_cast<double>(std::max<std::size_t>(iterations, 1));
    };
    FieldElem acc_p, acc_h;
    const double portable = time(ClmulPath::portable, acc_p);
    json row = {{"degree", n}, {"modulus", spec.describe()}, {"iterations", iterations}, {"portable_ns", portable}};
    if (hw) {
      const double hardware = time(ClmulPath::hardware, acc_h);
      row["hardware_ns"] = hardware;
      row["speedup"] = hardware > 0 ? portable / hardware : 0.0;
      row["agree"] = acc_p == acc_h;
    } else {
      row["hardware_ns"] = nullptr;
    }
    rows.push_back(row);
  }
  return {{"hardware_available", hw}, {"results", rows}};
}

std::unique_ptr<ProfileStore> store_from_env() {
  const char* dir = std::getenv("WIRETAP_CACHE_DIR");
  if (!dir || !*dir) return nullptr;
  return std::make_unique<DirectoryProfileStore>(dir);
}

}  // namespace wiretap
