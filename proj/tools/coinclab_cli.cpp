// coinclab command-line tool. Talks to the library through the C API only.

#include <CLI11.hpp>

#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "coinclab/coinclab.h"

namespace {

struct ConfigDeleter {
  void operator()(coinclab_config* c) const { coinclab_config_destroy(c); }
};
using ConfigPtr = std::unique_ptr<coinclab_config, ConfigDeleter>;

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::vector<std::string> overrides;
  bool timings = false;
};

struct Args {
  CommonOptions common;
  std::string events_path;
  std::string freeze_fits;
};

int exit_code(coinclab_status s) {
  switch (s) {
    case COINCLAB_OK: return 0;
    case COINCLAB_ERR_CONFIG:
    case COINCLAB_ERR_DOMAIN: return 2;
    case COINCLAB_ERR_FIT: return 3;
    case COINCLAB_ERR_IO: return 4;
    case COINCLAB_ERR_INTERNAL: break;
  }
  return 1;
}

int report(coinclab_status s, const char* what) {
  if (s != COINCLAB_OK) std::fprintf(stderr, "coinclab %s: %s\n", what, coinclab_last_error());
  return exit_code(s);
}

std::string key_reference() {
  std::string out = "\nConfiguration keys (config file lines `key = value`, '#' starts a comment):\n";
  for (size_t i = 0; i < coinclab_config_key_count(); ++i) {
    ConfigPtr defaults;
    coinclab_config* raw = nullptr;
    coinclab_config_create(&raw);
    defaults.reset(raw);
    const char* key = coinclab_config_key_name(i);
    std::string value;
    size_t needed = 0;
    if (defaults && coinclab_config_get(defaults.get(), key, nullptr, 0, &needed) == COINCLAB_OK) {
      value.resize(needed);
      coinclab_config_get(defaults.get(), key, value.data(), value.size(), &needed);
      value.pop_back();
    }
    out += "  " + std::string(key) + " (default " + value + ")\n      " + coinclab_config_key_help(i) + "\n";
  }
  out += "\nSeed precedence: config file < COINCLAB_SEED < --seed.\n"
         "Exit codes: 0 success, 2 configuration error, 3 fit failure, 4 I/O error.\n";
  return out;
}

// Builds the effective configuration: defaults, file, --set, environment, --seed, --out.
coinclab_status build_config(const CommonOptions& o, ConfigPtr& out) {
  coinclab_config* raw = nullptr;
  coinclab_status s = coinclab_config_create(&raw);
  if (s != COINCLAB_OK) return s;
  out.reset(raw);
  if (!o.config_path.empty() && (s = coinclab_config_load_file(raw, o.config_path.c_str())) != COINCLAB_OK) {
    return s;
  }
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    const std::string key = eq == std::string::npos ? kv : kv.substr(0, eq);
    const std::string value = eq == std::string::npos ? "" : kv.substr(eq + 1);
    if ((s = coinclab_config_set(raw, key.c_str(), value.c_str())) != COINCLAB_OK) return s;
  }
  if ((s = coinclab_config_apply_environment(raw)) != COINCLAB_OK) return s;
  if (o.seed && (s = coinclab_config_set(raw, "seed", std::to_string(*o.seed).c_str())) != COINCLAB_OK) return s;
  if (!o.out_dir.empty() && (s = coinclab_config_set(raw, "out.dir", o.out_dir.c_str())) != COINCLAB_OK) return s;
  return coinclab_config_validate(raw);
}

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "configuration file (key = value lines)")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "random seed; overrides the config file and COINCLAB_SEED");
  cmd->add_option("--out", o.out_dir, "output directory; overrides out.dir");
  cmd->add_option("--set", o.overrides, "override one configuration key, KEY=VALUE (repeatable)");
  cmd->add_flag("--timings", o.timings, "print per-stage wall-clock timings to stderr");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coinclab: photon-pair coincidence simulator and likelihood-ratio discrimination"};
  app.set_version_flag("--version", std::string(coinclab_version()));
  app.require_subcommand(1);
  app.footer(key_reference());

  Args args;
  auto* simulate = app.add_subcommand("simulate", "generate and detect photons; writes events.csv, simulation.json");
  add_common(simulate, args.common);

  auto* pipeline = app.add_subcommand("pipeline", "simulate, pair, fit, discriminate and sweep; writes all outputs");
  add_common(pipeline, args.common);
  pipeline->add_option("--freeze-fits", args.freeze_fits, "JSON with fixed time/spectral fit parameters")
      ->check(CLI::ExistingFile);

  auto* analyze = app.add_subcommand("analyze", "run the analysis on an existing events file");
  add_common(analyze, args.common);
  analyze->add_option("events", args.events_path, "events CSV")->required();
  analyze->add_option("--freeze-fits", args.freeze_fits, "JSON with fixed time/spectral fit parameters")
      ->check(CLI::ExistingFile);

  auto* sweep = app.add_subcommand("sweep", "efficiency-purity curves of the four methods; writes curves.csv");
  add_common(sweep, args.common);
  sweep->add_option("events", args.events_path, "events CSV with truth tags")->required();
  sweep->add_option("--freeze-fits", args.freeze_fits, "JSON with fixed time/spectral fit parameters")
      ->check(CLI::ExistingFile);

  auto* ygrid = app.add_subcommand("ygrid", "likelihood-ratio surface on a grid; writes ygrid.csv");
  add_common(ygrid, args.common);
  ygrid->add_option("events", args.events_path, "events CSV (optional with complete --freeze-fits)");
  ygrid->add_option("--freeze-fits", args.freeze_fits, "JSON with fixed time/spectral fit parameters")
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  ConfigPtr config;
  if (const auto s = build_config(args.common, config); s != COINCLAB_OK) return report(s, "config");

  const char* freeze = args.freeze_fits.empty() ? nullptr : args.freeze_fits.c_str();
  const char* events = args.events_path.empty() ? nullptr : args.events_path.c_str();
  coinclab_status status = COINCLAB_OK;
  const char* name = "";
  if (simulate->parsed()) {
    name = "simulate";
    status = coinclab_run_simulate(config.get());
  } else if (pipeline->parsed()) {
    name = "pipeline";
    status = coinclab_run_pipeline(config.get(), freeze);
  } else if (analyze->parsed()) {
    name = "analyze";
    status = coinclab_run_analyze(config.get(), events, freeze);
  } else if (sweep->parsed()) {
    name = "sweep";
    status = coinclab_run_sweep(config.get(), events, freeze);
  } else if (ygrid->parsed()) {
    name = "ygrid";
    status = coinclab_run_ygrid(config.get(), events, freeze);
  }
  if (args.common.timings) std::fprintf(stderr, "%s\n", coinclab_last_timings());
  return report(status, name);
}
