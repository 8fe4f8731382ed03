#include <chrono>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>

#include "CLI11.hpp"
#include "commands.hpp"
#include "slm/kernels.hpp"
#include "slm/parallel.hpp"
#include "slm/rng.hpp"

#ifndef SLMTK_VERSION
#define SLMTK_VERSION "unknown"
#endif

namespace {

namespace fs = std::filesystem;
using slmtk::Json;

struct Flags {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::string> seed, trials, out_dir, threads;
  bool full_size = false;
};

std::string key_help(const std::vector<slmtk::KeySpec>& keys) {
  std::string s = "Keys (--set key=value or config file):\n";
  for (const auto& k : keys) s += "  " + k.name + " = " + k.default_value + "    " + k.help + "\n";
  return s;
}

slmtk::Config resolve(const slmtk::Command& cmd, const Flags& f) {
  auto schema = slmtk::common_keys();
  schema.insert(schema.end(), cmd.keys.begin(), cmd.keys.end());
  slmtk::Config cfg(schema);
  if (!f.config.empty()) cfg.load_file(f.config);
  for (const auto& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw slmtk::ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1), "--set");
  }
  if (f.seed) cfg.set("seed", *f.seed, "--seed");
  if (f.trials) cfg.set("trials", *f.trials, "--trials");
  if (f.out_dir) cfg.set("out_dir", *f.out_dir, "--out-dir");
  if (f.threads) cfg.set("threads", *f.threads, "--threads");
  if (f.full_size) cfg.set("full_size", "true", "--full-size");
  return cfg;
}

int execute(const slmtk::Command& cmd, const Flags& flags) {
  const auto cfg = resolve(cmd, flags);
  const auto threads = cfg.get_int("threads");
  if (threads < 0) throw slmtk::ConfigError("threads must be >= 0");
  slm::set_thread_count(static_cast<std::size_t>(threads));

  slmtk::RunContext ctx;
  ctx.out_dir = cfg.get_text("out_dir");
  fs::create_directories(ctx.out_dir);
  const fs::path failed = ctx.out_dir / "FAILED";
  std::error_code ec;
  fs::remove(ctx.out_dir / "manifest.json", ec);

  Json manifest;
  manifest["command"] = cmd.name;
  manifest["version"] = SLMTK_VERSION;
  manifest["rng"] = slm::RandomStream::kAlgorithm;
  manifest["isa"] = std::string(slm::kernels::isa_name(slm::kernels::active().isa));
  Json config = Json::object();
  for (const auto& [k, v] : cfg.entries()) config[k] = v;
  manifest["config"] = config;

  const auto t0 = std::chrono::steady_clock::now();
  try {
    cmd.run(cfg, ctx);
  } catch (const std::exception& e) {
    slm::write_file_atomic(failed, std::string(e.what()) + "\n");
    throw;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  manifest["artifacts"] = ctx.artifacts;
  manifest["wall_clock_seconds"] = secs;
  manifest["results"] = ctx.results;
  slm::write_file_atomic(ctx.out_dir / "manifest.json", manifest.dump(2) + "\n");
  fs::remove(failed, ec);
  std::cout << cmd.name << ": wrote " << ctx.artifacts.size() << " artifacts to "
            << ctx.out_dir.string() << " (" << secs << " s)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayes-optimal inference in the standard linear model"};
  app.set_version_flag("--version", SLMTK_VERSION);
  app.require_subcommand(1);

  const auto& cmds = slmtk::commands();
  std::map<std::string, Flags> flags;
  for (const auto& cmd : cmds) {
    auto& f = flags[cmd.name];
    auto* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("--config", f.config, "key = value file")->check(CLI::ExistingFile);
    sub->add_option("--set", f.sets, "override one key (repeatable)");
    sub->add_option("--seed", f.seed, "RNG seed");
    sub->add_option("--trials", f.trials, "number of trials");
    sub->add_option("--out-dir", f.out_dir, "output directory");
    sub->add_option("--threads", f.threads, "worker threads (0 = all cores)");
    sub->add_flag("--full-size", f.full_size, "N = 10000 unless N is set");
    std::vector<slmtk::KeySpec> all = slmtk::common_keys();
    all.insert(all.end(), cmd.keys.begin(), cmd.keys.end());
    sub->footer(key_help(all));
  }

  CLI11_PARSE(app, argc, argv);

  for (const auto& cmd : cmds) {
    if (!app.got_subcommand(cmd.name)) continue;
    try {
      return execute(cmd, flags[cmd.name]);
    } catch (const slmtk::ConfigError& e) {
      std::cerr << "slmtk " << cmd.name << ": configuration error: " << e.what() << "\n";
      return 2;
    } catch (const std::exception& e) {
      std::cerr << "slmtk " << cmd.name << ": " << e.what() << "\n";
      return 1;
    }
  }
  return 1;
}
