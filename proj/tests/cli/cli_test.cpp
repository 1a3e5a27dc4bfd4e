// Copyright (C) 2026 The sparseglu Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "sparseglu/cli.hpp"
#include "sparseglu/container.hpp"
#include "sparseglu/digest.hpp"
#include "sparseglu/report_io.hpp"
#include "sparseglu/stats.hpp"
#include "sparseglu/tiny_lm.hpp"

namespace sparseglu {
namespace {

using json = nlohmann::json;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "sparseglu");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = std::make_unique<testing::TempDir>("cli");
    auto m = testing::small_manifest(2, 32, 96);
    m.max_seq_len = 64;
    write_text_file(path("m.json"), manifest_to_json(m));
    write_text_file(path("corpus.txt"), testing::make_corpus(2048, 60));
    const auto r = run_cli({"gen-model", "--manifest", path("m.json"), "--seed", "3", "--out", path("w.gspt"),
                            "--fit-head", path("corpus.txt")});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  static void TearDownTestSuite() { dir_.reset(); }

  static std::string path(const std::string& name) { return (*dir_ / name).string(); }

  static std::vector<std::string> model_args() {
    return {"--model", path("w.gspt"), "--manifest", path("m.json"), "--data", path("corpus.txt")};
  }

  static Outcome sweep(const std::string& out_dir, std::vector<std::string> extra) {
    std::vector<std::string> args{"sweep"};
    for (auto& a : model_args()) args.push_back(a);
    args.push_back("--out");
    args.push_back(path(out_dir));
    for (auto& a : extra) args.push_back(a);
    return run_cli(args);
  }

  static std::unique_ptr<testing::TempDir> dir_;
};

std::unique_ptr<testing::TempDir> CliTest::dir_;

TEST_F(CliTest, GenModelIsDeterministicAndHasTheExpectedTensors) {
  ASSERT_EQ(run_cli({"gen-model", "--manifest", path("m.json"), "--seed", "9", "--out", path("a.gspt")}).code, 0);
  ASSERT_EQ(run_cli({"gen-model", "--manifest", path("m.json"), "--seed", "9", "--out", path("b.gspt")}).code, 0);
  ASSERT_EQ(run_cli({"gen-model", "--manifest", path("m.json"), "--seed", "10", "--out", path("c.gspt")}).code, 0);
  const auto a = read_file_bytes(path("a.gspt"));
  EXPECT_EQ(a, read_file_bytes(path("b.gspt")));
  EXPECT_NE(a, read_file_bytes(path("c.gspt")));

  std::set<std::string> names;
  for (const auto& t : load_container(a)) names.insert(t.name());
  std::set<std::string> want{"embed.tokens", "embed.positions", "final_norm.weight", "lm_head"};
  for (int l = 0; l < 2; ++l) {
    const std::string p = "layers." + std::to_string(l) + ".";
    for (const char* s : {"attn_norm.weight", "attn.w_q", "attn.w_k", "attn.w_v", "attn.w_o", "ffn_norm.weight",
                          "ffn.w_gate", "ffn.w_up", "ffn.w_down"}) {
      want.insert(p + s);
    }
  }
  EXPECT_EQ(names, want);
}

TEST_F(CliTest, IndivisibleHeadsNameBothFields) {
  json doc = json::parse(manifest_to_json(testing::small_manifest(1, 32, 16)));
  doc["hidden_dim"] = 30;
  write_text_file(path("bad_heads.json"), doc.dump());
  const auto r = run_cli({"gen-model", "--manifest", path("bad_heads.json"), "--out", path("x.gspt")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("n_heads"), std::string::npos);
  EXPECT_NE(r.err.find("hidden_dim"), std::string::npos);
  const auto err = json::parse(r.err);
  EXPECT_EQ(err["error"]["code"], 2);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
  EXPECT_EQ(run_cli({"flops", "--hidden", "4"}).code, 2);
  EXPECT_EQ(run_cli({"flops", "--hidden", "4", "--intermediate", "8", "--site", "elbow"}).code, 2);
  EXPECT_EQ(run_cli({"flops", "--hidden", "4", "--intermediate", "8", "--sparsity", "1.5"}).code, 2);
  EXPECT_EQ(sweep("bad_grid", {"--thresholds", "1.5"}).code, 2);

  write_text_file(path("junk.gspt"), "GSPTjunk");
  auto args = model_args();
  args[1] = path("junk.gspt");
  args.insert(args.begin(), "sweep");
  args.push_back("--out");
  args.push_back(path("junk_out"));
  const auto r = run_cli(args);
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(json::parse(r.err)["error"]["kind"], "format");

  write_text_file(path("bad.csv"), "nope\n1\n");
  EXPECT_EQ(run_cli({"critical", "--input", path("bad.csv")}).code, 3);
  EXPECT_EQ(run_cli({"kde", "--input", path("bad.csv")}).code, 3);
}

TEST_F(CliTest, FlopsAccounting) {
  auto get = [](std::vector<std::string> a) {
    const auto r = run_cli(a);
    EXPECT_EQ(r.code, 0) << r.err;
    return json::parse(r.out);
  };
  const auto zero = get({"flops", "--hidden", "4", "--intermediate", "8", "--site", "gate", "--sparsity", "0"});
  EXPECT_EQ(zero["savings"], 0.0);
  EXPECT_EQ(zero["dense_macs"], 96.0);
  const auto third = get({"flops", "--hidden", "4", "--intermediate", "8", "--sparsity", "1"});
  EXPECT_EQ(third["savings"].get<double>(), 1.0 / 3.0);
  EXPECT_EQ(third["macs"], 64.0);
  const auto all = get({"flops", "--hidden", "4", "--intermediate", "8", "--mode", "oracle", "--sparsity", "1"});
  EXPECT_EQ(all["savings"], 1.0);
  EXPECT_EQ(run_cli({"flops", "--hidden", "4", "--intermediate", "8", "--site", "gate", "--mode", "oracle"}).code, 2);
}

TEST_F(CliTest, IdentitySweepNormalizesToOne) {
  const auto r = sweep("identity", {"--thresholds", "1.0", "--site", "gate"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto curve = parse_sweep_csv(read_text_file(path("identity/sweep.csv")));
  ASSERT_EQ(curve.points.size(), 1u);
  EXPECT_EQ(curve.points[0].normalized_metric, 1.0);
  EXPECT_EQ(curve.points[0].induced_sparsity, 0.0);
}

TEST_F(CliTest, SweepIsByteIdenticalAcrossThreadCounts) {
  ASSERT_EQ(sweep("t1", {"--threads", "1"}).code, 0);
  ASSERT_EQ(sweep("t4", {"--threads", "4"}).code, 0);
  EXPECT_EQ(read_text_file(path("t1/sweep.csv")), read_text_file(path("t4/sweep.csv")));
  ASSERT_EQ(setenv("SPARSEGLU_THREADS", "3", 1), 0);
  const auto r = sweep("env", {});
  unsetenv("SPARSEGLU_THREADS");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_text_file(path("t1/sweep.csv")), read_text_file(path("env/sweep.csv")));
  EXPECT_EQ(json::parse(read_text_file(path("env/run_manifest.json")))["threads"], 3);
}

TEST_F(CliTest, RunManifestReplaysTheSweep) {
  ASSERT_EQ(sweep("orig", {"--site", "up", "--rule", "maxp", "--thresholds", "0.2,0.6,1", "--seed", "5"}).code, 0);
  const auto rm = json::parse(read_text_file(path("orig/run_manifest.json")));
  EXPECT_EQ(rm["model-sha256"], sha256_hex(read_file_bytes(path("w.gspt"))));
  EXPECT_EQ(rm["data-sha256"], sha256_hex(read_file_bytes(path("corpus.txt"))));
  EXPECT_EQ(rm["thresholds"], json::array({0.2, 0.6, 1.0}));
  EXPECT_EQ(rm["seed"], 5);
  EXPECT_EQ(rm["site"], "up");

  const auto r = run_cli({"sweep", "--config", path("orig/run_manifest.json"), "--out", path("replay")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_text_file(path("orig/sweep.csv")), read_text_file(path("replay/sweep.csv")));

  auto tampered = rm;
  tampered["data-sha256"] = std::string(64, '0');
  write_text_file(path("tampered.json"), tampered.dump());
  const auto bad = run_cli({"sweep", "--config", path("tampered.json"), "--out", path("tampered_out")});
  EXPECT_EQ(bad.code, 3);
  EXPECT_NE(bad.err.find("hash mismatch"), std::string::npos);
}

TEST_F(CliTest, EffectiveConfigIsRecordedForOtherCommands) {
  const auto r = run_cli({"flops", "--hidden", "4", "--intermediate", "8", "--sparsity", "0.5", "--run-manifest",
                          path("flops_rm.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rm = json::parse(read_text_file(path("flops_rm.json")));
  EXPECT_EQ(rm["command"], "flops");
  EXPECT_EQ(rm["hidden"], "4");
  const auto again = run_cli({"flops", "--config", path("flops_rm.json")});
  ASSERT_EQ(again.code, 0) << again.err;
  EXPECT_EQ(again.out, r.out);
}

TEST_F(CliTest, DenseBaselineAgreesAcrossSites) {
  double ref = -1.0;
  for (const char* site : {"input", "up", "gate", "intermediate"}) {
    ASSERT_EQ(sweep(std::string("base_") + site, {"--site", site, "--thresholds", "0.9,1"}).code, 0);
    const auto rm = json::parse(read_text_file(path(std::string("base_") + site + "/run_manifest.json")));
    const double d = rm["dense_metric"];
    if (ref < 0) ref = d;
    EXPECT_EQ(d, ref) << site;
  }
  EXPECT_GT(ref, 0.0);
}

TEST_F(CliTest, HeatmapCriticalKdeTrend) {
  std::vector<std::string> args{"heatmap"};
  for (auto& a : model_args()) args.push_back(a);
  for (const char* a : {"--thresholds", "0.5,0.9,1", "--out"}) args.push_back(a);
  args.push_back(path("hm"));
  ASSERT_EQ(run_cli(args).code, 0);
  const auto hm = read_text_file(path("hm/heatmap.csv"));
  EXPECT_EQ(hm.substr(0, hm.find('\n')), "p,layer,sparsity");
  EXPECT_EQ(std::count(hm.begin(), hm.end(), '\n'), 1 + 3 * 2);
  EXPECT_EQ(json::parse(read_text_file(path("hm/run_manifest.json")))["metric_per_threshold"].size(), 3u);

  ASSERT_EQ(sweep("for_crit", {}).code, 0);
  const auto crit = run_cli({"critical", "--input", path("for_crit/sweep.csv"), "--retention", "0.9,0.99,1"});
  ASSERT_EQ(crit.code, 0) << crit.err;
  EXPECT_EQ(crit.out.substr(0, crit.out.find('\n')), "site,rule,retention,critical_sparsity,p,normalized_metric");
  EXPECT_EQ(std::count(crit.out.begin(), crit.out.end(), '\n'), 4);
  const auto cs = read_csv_column(crit.out, "critical_sparsity");
  EXPECT_GE(cs[0], cs[1]);
  EXPECT_GE(cs[1], cs[2]);

  write_text_file(path("sample.csv"), "critical_sparsity\n1\n2\n3\n4\n5\n");
  const auto kde = run_cli({"kde", "--input", path("sample.csv"), "--points", "4001", "--out", path("kde.csv")});
  ASSERT_EQ(kde.code, 0) << kde.err;
  const auto text = read_text_file(path("kde.csv"));
  const auto g = read_csv_column(text, "grid");
  const auto d = read_csv_column(text, "density");
  ASSERT_EQ(g.size(), 4001u);
  EXPECT_NEAR(trapezoid(g, d), 1.0, 1e-3);

  write_text_file(path("family.csv"), "params,sparsity\n1e9,50.22\n4e9,58.56\n12e9,69.46\n27e9,74.12\n");
  const auto tr = run_cli({"trend", "--input", path("family.csv")});
  ASSERT_EQ(tr.code, 0) << tr.err;
  const auto fit = json::parse(tr.out);
  EXPECT_NEAR(fit["slope"].get<double>(), 17.277190516612563, 1e-9);
  EXPECT_EQ(fit["n"], 4);
}

TEST_F(CliTest, BenchSmoke) {
  std::vector<std::string> args{"bench"};
  for (auto& a : model_args()) args.push_back(a);
  for (const char* a : {"--site", "intermediate", "--rule", "topk", "--threshold", "16", "--repeats", "1",
                        "--max-tokens", "128"}) {
    args.push_back(a);
  }
  const auto r = run_cli(args);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = json::parse(r.out);
  EXPECT_EQ(doc["positions"], 128);
  EXPECT_EQ(doc["ffn_evaluations"], 256);
  EXPECT_NEAR(doc["measured_sparsity"].get<double>(), 80.0 / 96.0, 1e-12);
  EXPECT_LT(doc["mac_relative_error"].get<double>(), 0.01);
  args.push_back("--mode");
  args.push_back("oracle");
  const auto o = run_cli(args);
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_NEAR(json::parse(o.out)["mac_reduction"].get<double>(), 80.0 / 96.0, 1e-9);
}

}  // namespace
}  // namespace sparseglu
