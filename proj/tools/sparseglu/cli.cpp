// Copyright (C) 2026 The sparseglu Authors
// SPDX-License-Identifier: Apache-2.0

#include "sparseglu/cli.hpp"

#include <array>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "sparseglu/accounting.hpp"
#include "sparseglu/bench.hpp"
#include "sparseglu/container.hpp"
#include "sparseglu/digest.hpp"
#include "sparseglu/error.hpp"
#include "sparseglu/harness.hpp"
#include "sparseglu/report_io.hpp"
#include "sparseglu/stats.hpp"
#include "sparseglu/tiny_lm.hpp"

namespace sparseglu::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

/// Raised for flag values that parse but fall outside their domain.
struct UsageError : ConfigError {
  using ConfigError::ConfigError;
};

struct RunConfig {
  std::string model;
  std::string manifest;
  std::string data;
  std::string site = "intermediate";
  std::string rule = "topp";
  std::vector<double> thresholds;
  std::uint64_t seed = 0;
  std::string out;
  unsigned threads = 1;
  std::string config;
  std::string run_manifest;
  std::map<std::string, std::string> expect_sha;  // file flag -> expected SHA-256

  // single-purpose flags
  std::string fit_head;
  std::string input;
  std::string column = "critical_sparsity";
  std::string x_column = "params";
  std::string y_column = "sparsity";
  std::vector<double> retention{0.99};
  std::size_t points = 512;
  double bandwidth = 0.0;
  double pad = 8.0;
  std::size_t hidden = 0;
  std::size_t intermediate = 0;
  std::string mode = "value";
  double sparsity = 0.0;
  double threshold = 1.0;
  unsigned repeats = 3;
  std::size_t max_tokens = 4096;
};

// Fills options that were not given on the command line from a flat JSON object whose
// keys are long flag names. Keys without a matching flag are ignored.
void apply_json_config(CLI::App& sub, const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw UsageError("config '" + path + "': invalid JSON: " + e.what());
  }
  if (!doc.is_object()) throw UsageError("config '" + path + "': top level must be an object");
  for (const auto& [key, value] : doc.items()) {
    auto* opt = sub.get_option_no_throw("--" + key);
    if (opt == nullptr || opt->count() > 0 || key == "config") continue;
    std::vector<std::string> results;
    auto scalar = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
    if (value.is_array()) {
      for (const auto& v : value) results.push_back(scalar(v));
    } else if (value.is_object() || value.is_null()) {
      continue;
    } else {
      results.push_back(scalar(value));
    }
    if (results.empty()) continue;
    opt->add_result(results);
    try {
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw UsageError("config '" + path + "': bad value for '" + key + "': " + e.what());
    }
  }
}

constexpr std::array<const char*, 5> kFileFlags = {"model", "manifest", "data", "input", "fit-head"};

// Hashes every file flag given to `sub`, failing on a mismatch with its --<flag>-sha256 expectation.
json hash_inputs(const CLI::App& sub, const RunConfig& cfg) {
  json hashes = json::object();
  for (const char* flag : kFileFlags) {
    const auto* opt = sub.get_option_no_throw(std::string("--") + flag);
    if (opt == nullptr || opt->count() == 0) continue;
    const auto digest = sha256_hex(read_file_bytes(opt->as<std::string>()));
    const auto want = cfg.expect_sha.find(flag);
    if (want != cfg.expect_sha.end() && !want->second.empty() && want->second != digest) {
      throw SchemaError(std::string(flag) + " hash mismatch: expected " + want->second + ", found " + digest);
    }
    hashes[std::string(flag) + "-sha256"] = digest;
  }
  return hashes;
}

// Every flag that took part in the run, in a shape --config accepts, plus input hashes.
std::string effective_config_json(const CLI::App& sub, const json& hashes) {
  json doc = {{"command", sub.get_name()}};
  for (const auto* opt : sub.get_options()) {
    const auto name = opt->get_single_name();
    if (opt->count() == 0 || name == "help" || name == "config" || name == "run-manifest") continue;
    if (name.size() > 7 && name.ends_with("-sha256")) continue;
    const auto& results = opt->results();
    if (opt->get_expected_max() > 1) {
      doc[name] = results;
    } else {
      doc[name] = results.back();
    }
  }
  for (const auto& [key, value] : hashes.items()) doc[key] = value;
  return doc.dump(2) + "\n";
}

struct LoadedRun {
  TinyLm model;
  std::vector<Token> tokens;
  std::string model_sha;
  std::string manifest_sha;
  std::string data_sha;
};

LoadedRun load_run(const RunConfig& cfg) {
  const auto model_bytes = read_file_bytes(cfg.model);
  const auto manifest_text = read_text_file(cfg.manifest);
  const auto data_bytes = read_file_bytes(cfg.data);
  LoadedRun run{TinyLm::from_tensors(parse_manifest(manifest_text), load_container(model_bytes)),
                byte_tokenize(data_bytes), sha256_hex(model_bytes), sha256_hex(manifest_text),
                sha256_hex(data_bytes)};
  if (run.tokens.size() < 2) throw InputError("data file holds fewer than 2 tokens");
  return run;
}

ActivationSite site_flag(const RunConfig& cfg) {
  try {
    return parse_site(cfg.site);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
}

RuleKind rule_flag(const RunConfig& cfg) {
  try {
    return parse_rule_kind(cfg.rule);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
}

std::vector<double> threshold_grid(const RunConfig& cfg, const ModelManifest& m, ActivationSite site, RuleKind rule) {
  const auto len = site == ActivationSite::Input ? m.hidden_dim : m.intermediate_dim;
  auto grid = cfg.thresholds.empty() ? default_threshold_grid(rule, len) : cfg.thresholds;
  for (double t : grid) {
    try {
      const auto r = rule_for_threshold(rule, t);
      if (rule == RuleKind::TopK && r.k > len) {
        throw InputError("top-k threshold " + std::to_string(r.k) + " exceeds activation length " + std::to_string(len));
      }
    } catch (const InputError& e) {
      throw UsageError(std::string("--thresholds: ") + e.what());
    }
  }
  std::sort(grid.begin(), grid.end());
  if (std::adjacent_find(grid.begin(), grid.end()) != grid.end()) throw UsageError("--thresholds: duplicate value");
  return grid;
}

void write_or_print(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
  } else {
    write_text_file(path, text);
  }
}

RunManifest base_manifest(const char* command, const RunConfig& cfg, const LoadedRun& run,
                          ActivationSite site, RuleKind rule, std::vector<double> grid) {
  RunManifest rm;
  rm.command = command;
  rm.model = cfg.model;
  rm.manifest = cfg.manifest;
  rm.data = cfg.data;
  rm.model_sha256 = run.model_sha;
  rm.manifest_sha256 = run.manifest_sha;
  rm.data_sha256 = run.data_sha;
  rm.site = std::string(to_string(site));
  rm.rule = std::string(to_string(rule));
  rm.thresholds = std::move(grid);
  rm.seed = cfg.seed;
  rm.threads = cfg.threads;
  return rm;
}

int cmd_gen_model(const RunConfig& cfg, std::ostream& out) {
  const auto manifest = read_manifest_file(cfg.manifest);
  auto tensors = generate_weights(manifest, cfg.seed);
  if (!cfg.fit_head.empty()) {
    const auto corpus = byte_tokenize(read_file_bytes(cfg.fit_head));
    tensors = fit_output_head(TinyLm::from_tensors(manifest, std::move(tensors)), corpus);
  }
  write_container_file(cfg.out, tensors);
  out << fmt::format("wrote {} tensors to {}\n", tensors.size(), cfg.out);
  for (const auto& t : tensors) {
    std::string dims;
    for (auto d : t.dims()) dims += (dims.empty() ? "" : "x") + std::to_string(d);
    out << fmt::format("  {:<28} {}\n", t.name(), dims);
  }
  return kOk;
}

int cmd_sweep(const RunConfig& cfg, bool heatmap, std::ostream& out) {
  const auto site = site_flag(cfg);
  const auto rule = rule_flag(cfg);
  const auto run = load_run(cfg);
  const auto grid = threshold_grid(cfg, run.model.manifest(), site, rule);

  const auto study = run_threshold_study(run.model, run.tokens, site, rule, grid, SweepOptions{cfg.threads});
  fs::create_directories(cfg.out);
  auto rm = base_manifest(heatmap ? "heatmap" : "sweep", cfg, run, site, rule, grid);
  rm.dense_metric = study.curve.dense_metric;
  const auto crit = critical_sparsity(study.curve, 0.99);
  rm.critical_sparsity_099 = crit.value;
  if (heatmap) {
    rm.metric_per_threshold = study.heatmap.metric_per_threshold;
    write_text_file(fs::path(cfg.out) / "heatmap.csv", heatmap_csv(study.heatmap));
  } else {
    write_text_file(fs::path(cfg.out) / "sweep.csv", sweep_csv(study.curve));
  }
  write_text_file(fs::path(cfg.out) / "run_manifest.json", run_manifest_json(rm));
  if (!cfg.run_manifest.empty()) write_text_file(cfg.run_manifest, run_manifest_json(rm));
  out << fmt::format("site={} rule={} dense_top1={} points={}\n", to_string(site), to_string(rule),
                     format_number(study.curve.dense_metric), study.curve.points.size());
  out << fmt::format("critical_sparsity@0.99={}\n", format_number(crit.value));
  return kOk;
}

int cmd_critical(const RunConfig& cfg, std::ostream& out) {
  const auto curve = parse_sweep_csv(read_text_file(cfg.input));
  std::vector<CriticalSparsity> results;
  for (double r : cfg.retention) {
    if (!(r > 0.0 && r <= 1.0)) throw UsageError("--retention must lie in (0, 1]");
    results.push_back(critical_sparsity(curve, r));
  }
  write_or_print(cfg.out, critical_csv(curve, results), out);
  return kOk;
}

int cmd_kde(const RunConfig& cfg, std::ostream& out) {
  const auto xs = read_csv_column(read_text_file(cfg.input), cfg.column);
  if (xs.empty()) throw InputError("kde: column '" + cfg.column + "' is empty");
  const double h = cfg.bandwidth > 0.0 ? cfg.bandwidth : silverman_bandwidth(xs);
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  const auto grid = linspace(*lo - cfg.pad * h, *hi + cfg.pad * h, cfg.points);
  write_or_print(cfg.out, kde_csv(grid, gaussian_kde(xs, h, grid)), out);
  return kOk;
}

int cmd_trend(const RunConfig& cfg, std::ostream& out) {
  const auto text = read_text_file(cfg.input);
  auto xs = read_csv_column(text, cfg.x_column);
  const auto ys = read_csv_column(text, cfg.y_column);
  for (double& x : xs) {
    if (!(x > 0.0)) throw InputError("trend: parameter counts must be positive");
    x = std::log10(x);
  }
  write_or_print(cfg.out, trend_json(ols_trend(xs, ys)), out);
  return kOk;
}

int cmd_flops(const RunConfig& cfg, std::ostream& out) {
  const auto site = site_flag(cfg);
  SkipMode mode;
  try {
    mode = parse_skip_mode(cfg.mode);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  MacCount c;
  try {
    c = ffn_mac_count(cfg.hidden, cfg.intermediate, site, mode, cfg.sparsity);
  } catch (const InputError& e) {
    throw UsageError(e.what());
  }
  json doc = {
      {"hidden_dim", cfg.hidden},
      {"intermediate_dim", cfg.intermediate},
      {"site", to_string(site)},
      {"mode", to_string(mode)},
      {"sparsity", cfg.sparsity},
      {"macs", c.macs},
      {"dense_macs", c.dense_macs},
      {"savings", c.savings()},
      {"elementwise_ops", c.elementwise_ops},
      {"activation_ops", c.activation_ops},
      {"weight_bytes", c.weight_bytes},
      {"dense_weight_bytes", c.dense_weight_bytes},
      {"schedule", schedule_description(site, mode)},
  };
  write_or_print(cfg.out, doc.dump(2) + "\n", out);
  return kOk;
}

int cmd_bench(const RunConfig& cfg, std::ostream& out) {
  BenchConfig bc;
  bc.site = site_flag(cfg);
  const auto rule = rule_flag(cfg);
  try {
    bc.rule = rule_for_threshold(rule, cfg.threshold);
    bc.mode = parse_skip_mode(cfg.mode);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (bc.mode == SkipMode::OraclePredictor && bc.site != ActivationSite::Intermediate) {
    throw UsageError("--mode oracle requires --site intermediate");
  }
  bc.repeats = cfg.repeats;
  bc.max_tokens = cfg.max_tokens;
  const auto run = load_run(cfg);
  const auto rep = run_ffn_bench(run.model, run.tokens, bc);
  const auto pos = static_cast<double>(rep.positions);
  json doc = {
      {"site", to_string(bc.site)},
      {"rule", to_string(rule)},
      {"threshold", cfg.threshold},
      {"mode", to_string(bc.mode)},
      {"positions", rep.positions},
      {"ffn_evaluations", rep.evaluations},
      {"measured_sparsity", rep.measured_sparsity},
      {"dense_seconds", rep.dense_seconds},
      {"sparse_seconds", rep.sparse_seconds},
      {"dense_tokens_per_sec", pos / rep.dense_seconds},
      {"sparse_tokens_per_sec", pos / rep.sparse_seconds},
      {"speedup", rep.dense_seconds / rep.sparse_seconds},
      {"dense_macs_per_token", rep.dense_macs_per_token},
      {"measured_macs_per_token", rep.measured_macs_per_token},
      {"predicted_macs_per_token", rep.predicted_macs_per_token},
      {"mac_reduction", (rep.dense_macs_per_token - rep.measured_macs_per_token) / rep.dense_macs_per_token},
      {"mac_relative_error", rep.mac_relative_error},
      {"model-sha256", run.model_sha},
      {"data-sha256", run.data_sha},
  };
  write_or_print(cfg.out, doc.dump(2) + "\n", out);
  return kOk;
}

void add_threads(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--threads", cfg.threads, "Worker threads (default 1)")
      ->envname("SPARSEGLU_THREADS")
      ->check(CLI::Range(1u, 256u));
}

void add_model_flags(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--model", cfg.model, "GSPT weight container")->check(CLI::ExistingFile);
  sub->add_option("--manifest", cfg.manifest, "Model manifest JSON")->check(CLI::ExistingFile);
  sub->add_option("--data", cfg.data, "Evaluation corpus (raw bytes)")->check(CLI::ExistingFile);
  sub->add_option("--site", cfg.site, "input | up | gate | intermediate");
  sub->add_option("--rule", cfg.rule, "topp | topk | maxp");
  sub->add_option("--seed", cfg.seed, "Recorded in the run manifest");
}

// Adds --<flag>-sha256 for each file flag the subcommand accepts.
void add_hash_flags(CLI::App* sub, RunConfig& cfg) {
  for (const char* flag : kFileFlags) {
    if (sub->get_option_no_throw(std::string("--") + flag) == nullptr) continue;
    sub->add_option(std::string("--") + flag + "-sha256", cfg.expect_sha[flag],
                    std::string("Expected SHA-256 of --") + flag);
  }
}

int dispatch(const std::string& name, const RunConfig& cfg, std::ostream& out) {
  if (name == "gen-model") return cmd_gen_model(cfg, out);
  if (name == "sweep") return cmd_sweep(cfg, false, out);
  if (name == "heatmap") return cmd_sweep(cfg, true, out);
  if (name == "critical") return cmd_critical(cfg, out);
  if (name == "kde") return cmd_kde(cfg, out);
  if (name == "trend") return cmd_trend(cfg, out);
  if (name == "flops") return cmd_flops(cfg, out);
  if (name == "bench") return cmd_bench(cfg, out);
  throw std::logic_error("unhandled subcommand " + name);
}

void report_error(std::ostream& err, int code, const char* kind, const std::string& message) {
  json doc = {{"error", {{"code", code}, {"kind", kind}, {"message", message}}}};
  err << doc.dump() << "\n";
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"sparseglu: activation sparsity laboratory for GLU feed-forward transformers", "sparseglu"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* gen = app.add_subcommand("gen-model", "Write deterministic synthetic weights for a manifest");
  gen->add_option("--manifest", cfg.manifest, "Model manifest JSON")->check(CLI::ExistingFile);
  gen->add_option("--seed", cfg.seed, "Generator seed");
  gen->add_option("--out", cfg.out, "Output GSPT container");
  gen->add_option("--fit-head", cfg.fit_head, "Corpus for a least-squares lm_head readout")->check(CLI::ExistingFile);

  auto* sweep_cmd = app.add_subcommand("sweep", "Sparsity-performance sweep over a threshold grid");
  auto* heat_cmd = app.add_subcommand("heatmap", "Per-layer induced sparsity for each threshold");
  for (auto* sub : {sweep_cmd, heat_cmd}) {
    add_model_flags(sub, cfg);
    sub->add_option("--thresholds", cfg.thresholds, "Comma-separated grid (default grid when omitted)")
        ->delimiter(',');
    sub->add_option("--out", cfg.out, "Output directory");
    add_threads(sub, cfg);
  }

  auto* crit = app.add_subcommand("critical", "Critical sparsity from a sweep CSV");
  crit->add_option("--input", cfg.input, "Sweep CSV")->check(CLI::ExistingFile);
  crit->add_option("--retention", cfg.retention, "Retention thresholds (default 0.99)")->delimiter(',');
  crit->add_option("--out", cfg.out, "Output CSV (stdout when omitted)");

  auto* kde = app.add_subcommand("kde", "Gaussian KDE with Silverman bandwidth");
  kde->add_option("--input", cfg.input, "CSV holding the sample")->check(CLI::ExistingFile);
  kde->add_option("--column", cfg.column, "Sample column (default critical_sparsity)");
  kde->add_option("--points", cfg.points, "Grid size")->check(CLI::Range(std::size_t{2}, std::size_t{1} << 24));
  kde->add_option("--bandwidth", cfg.bandwidth, "Override the Silverman bandwidth");
  kde->add_option("--pad", cfg.pad, "Grid padding beyond the data range, in bandwidths");
  kde->add_option("--out", cfg.out, "Output CSV (stdout when omitted)");

  auto* trend = app.add_subcommand("trend", "Least-squares trend of sparsity against log10 parameter count");
  trend->add_option("--input", cfg.input, "CSV with parameter counts and sparsities")->check(CLI::ExistingFile);
  trend->add_option("--x-column", cfg.x_column, "Parameter-count column (default params)");
  trend->add_option("--y-column", cfg.y_column, "Sparsity column (default sparsity)");
  trend->add_option("--out", cfg.out, "Output JSON (stdout when omitted)");

  auto* flops = app.add_subcommand("flops", "MAC accounting for one FFN token");
  flops->add_option("--hidden", cfg.hidden, "Hidden dimension h")->check(CLI::PositiveNumber);
  flops->add_option("--intermediate", cfg.intermediate, "Intermediate dimension d")->check(CLI::PositiveNumber);
  flops->add_option("--site", cfg.site, "input | up | gate | intermediate");
  flops->add_option("--mode", cfg.mode, "value | oracle");
  flops->add_option("--sparsity", cfg.sparsity, "Sparsity fraction in [0, 1]");
  flops->add_option("--out", cfg.out, "Output JSON (stdout when omitted)");

  auto* bench = app.add_subcommand("bench", "Time dense vs skipping FFN kernels on captured activations");
  add_model_flags(bench, cfg);
  bench->add_option("--threshold", cfg.threshold, "Rule threshold (p, or k for topk)");
  bench->add_option("--mode", cfg.mode, "value | oracle");
  bench->add_option("--repeats", cfg.repeats, "Timing repeats (best is reported)")->check(CLI::Range(1u, 1000u));
  bench->add_option("--max-tokens", cfg.max_tokens, "Cap on replayed token positions");
  bench->add_option("--out", cfg.out, "Output JSON (stdout when omitted)");

  const std::map<std::string, std::vector<std::string>> required = {
      {"gen-model", {"--manifest", "--out"}},
      {"sweep", {"--model", "--manifest", "--data", "--out"}},
      {"heatmap", {"--model", "--manifest", "--data", "--out"}},
      {"critical", {"--input"}},
      {"kde", {"--input"}},
      {"trend", {"--input"}},
      {"flops", {"--hidden", "--intermediate"}},
      {"bench", {"--model", "--manifest", "--data"}},
  };
  for (const char* flag : kFileFlags) cfg.expect_sha[flag];
  for (auto* sub : app.get_subcommands({})) {
    add_hash_flags(sub, cfg);
    sub->add_option("--config", cfg.config, "JSON file supplying any long flag")->check(CLI::ExistingFile);
    sub->add_option("--run-manifest", cfg.run_manifest, "Write the effective configuration and input hashes here");
  }

  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);

  try {
    app.parse(args);
    auto* sub = app.get_subcommands().front();
    if (!cfg.config.empty()) apply_json_config(*sub, cfg.config);
    // Required flags are checked after the config merge so a config file can supply them.
    for (const auto& flag : required.at(sub->get_name())) {
      if (sub->get_option(flag)->count() == 0) throw UsageError(flag + " is required");
    }
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report_error(err, kConfigError, "config", e.what());
    return kConfigError;
  } catch (const Error& e) {
    report_error(err, kConfigError, "config", e.what());
    return kConfigError;
  }

  const auto* sub = app.get_subcommands().front();
  const auto name = sub->get_name();
  try {
    const auto hashes = hash_inputs(*sub, cfg);
    const int code = dispatch(name, cfg, out);
    if (!cfg.run_manifest.empty() && name != "sweep" && name != "heatmap") {
      write_text_file(cfg.run_manifest, effective_config_json(*sub, hashes));
    }
    return code;
  } catch (const ConfigError& e) {
    report_error(err, kConfigError, "config", e.what());
    return kConfigError;
  } catch (const FormatError& e) {
    report_error(err, kFormatError, "format", e.what());
    return kFormatError;
  } catch (const SchemaError& e) {
    report_error(err, kFormatError, "model", e.what());
    return kFormatError;
  } catch (const IoError& e) {
    report_error(err, kFormatError, "io", e.what());
    return kFormatError;
  } catch (const InputError& e) {
    report_error(err, kFormatError, "data", e.what());
    return kFormatError;
  } catch (const ShapeError& e) {
    report_error(err, kFormatError, "shape", e.what());
    return kFormatError;
  } catch (const std::exception& e) {
    report_error(err, kInternalError, "internal", e.what());
    return kInternalError;
  }
}

}  // namespace sparseglu::cli
