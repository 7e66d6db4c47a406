#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "wiretap/experiment.hpp"

using namespace wiretap;

namespace {

struct Common {
  std::string config, out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<unsigned> threads;
};

void add_common(CLI::App* cmd, Common& c, bool trials) {
  cmd->add_option("-c,--config", c.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("-o,--out", c.out, "output file (default: config \"out\" or stdout)");
  cmd->add_option("--seed", c.seed, "master seed");
  if (trials) cmd->add_option("--trials", c.trials, "session trials per main channel");
  cmd->add_option("--threads", c.threads, "worker threads");
}

json load_config(const Common& c) {
  std::ifstream in(c.config);
  json j = json::parse(in);
  if (c.seed) j["seed"] = *c.seed;
  if (c.trials) j["trials"] = *c.trials;
  if (c.threads) j["threads"] = *c.threads;
  return j;
}

std::filesystem::path base_dir(const Common& c) { return std::filesystem::path(c.config).parent_path(); }

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
  } else {
    write_text_atomic(out, text);
  }
}

std::string out_path(const Common& c, const ExperimentConfig& cfg) { return c.out.empty() ? cfg.out : c.out; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polar-coded wiretap experiments"};
  app.require_subcommand(1);

  Common construct_opt, run_opt, sweep_opt, leak_opt;
  auto* construct_cmd = app.add_subcommand("construct", "build index sets and derived code parameters");
  add_common(construct_cmd, construct_opt, false);
  auto* run_cmd = app.add_subcommand("run", "init phase and encode/decode trials; JSON report");
  add_common(run_cmd, run_opt, true);
  auto* sweep_cmd = app.add_subcommand("sweep", "one run per value of a numeric field; CSV");
  add_common(sweep_cmd, sweep_opt, true);
  std::string axis;
  std::vector<std::string> values;
  sweep_cmd->add_option("--axis", axis, "config field to vary")->required();
  sweep_cmd->add_option("--values", values, "values (comma separated)")->delimiter(',');
  auto* leak_cmd = app.add_subcommand("leakage", "exact leakage checks for a tiny code");
  add_common(leak_cmd, leak_opt, false);

  auto* bench_cmd = app.add_subcommand("bench-gf", "time GF(2^n) multiplication per carry-less path");
  std::vector<unsigned> degrees{64, 256, 1024, 4096, 16384};
  std::size_t iterations = 2000;
  std::uint64_t bench_seed = 1;
  std::string bench_out;
  bench_cmd->add_option("--degrees", degrees, "field degrees")->delimiter(',');
  bench_cmd->add_option("--iterations", iterations, "multiplications per path and degree");
  bench_cmd->add_option("--seed", bench_seed, "operand seed");
  bench_cmd->add_option("-o,--out", bench_out, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    auto store = store_from_env();
    if (*construct_cmd) {
      auto cfg = config_from_json(load_config(construct_opt), base_dir(construct_opt));
      emit(construct_report(cfg, store.get()).dump(2), out_path(construct_opt, cfg));
    } else if (*run_cmd) {
      auto cfg = config_from_json(load_config(run_opt), base_dir(run_opt));
      emit(run(cfg, store.get()).dump(2), out_path(run_opt, cfg));
    } else if (*sweep_cmd) {
      json base = load_config(sweep_opt);
      std::string out = sweep_opt.out;
      if (out.empty() && base.contains("out")) out = base["out"].get<std::string>();
      base.erase("out");
      emit(sweep(base, axis, values, base_dir(sweep_opt), store.get()), out);
    } else if (*leak_cmd) {
      json j = load_config(leak_opt);
      j["leakage"] = true;
      auto cfg = config_from_json(j, base_dir(leak_opt));
      const auto code = build_code(cfg, store.get());
      json rep = {{"config", to_json(cfg)}, {"leakage_checks", leakage_report(cfg, code)}};
      emit(rep.dump(2), out_path(leak_opt, cfg));
    } else if (*bench_cmd) {
      emit(bench_gf(degrees, iterations, bench_seed).dump(2), bench_out);
    }
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
