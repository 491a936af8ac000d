#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>

#include "json.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run ctxkit(const std::string& args) {
  std::string cmd = std::string(CTXKIT_BIN) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

Json report(const std::string& args, int expected_code = 0) {
  auto r = ctxkit(args);
  EXPECT_EQ(r.code, expected_code) << args;
  return Json::parse(r.out);
}

fs::path temp_file(const std::string& name, const std::string& text) {
  auto dir = fs::temp_directory_path() / "ctxkit_cli_test";
  fs::create_directories(dir);
  auto p = dir / name;
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST(Cli, EnvelopeFields) {
  auto j = report("validate fixture:kcbs");
  EXPECT_EQ(j["schema_version"], "1.0");
  EXPECT_EQ(j["command"], "validate");
  EXPECT_EQ(j["input_digest"].get<std::string>().rfind("fnv1a64:", 0), 0u);
  EXPECT_EQ(j["input_digest"].get<std::string>().size(), 8u + 16u);
  EXPECT_TRUE(j.contains("tolerances"));
  EXPECT_FALSE(j.contains("wall_time_s"));
  EXPECT_TRUE(report("--timing validate fixture:kcbs").contains("wall_time_s"));
}

TEST(Cli, ClassifyFixtures) {
  EXPECT_EQ(report("classify fixture:pr_box")["result"]["level"], "strong");
  EXPECT_EQ(report("classify fixture:hardy")["result"]["level"], "possibilistic");
  EXPECT_EQ(report("classify fixture:chsh_tsirelson")["result"]["level"], "probabilistic");
  EXPECT_EQ(report("classify fixture:classical")["result"]["level"], "noncontextual");
}

TEST(Cli, CounterfactualDefault) {
  auto j = report("counterfactual");
  EXPECT_EQ(j["result"]["verdict"], "INFEASIBLE");
  EXPECT_EQ(j["result"]["drop_one"].size(), 5u);
}

TEST(Cli, GraphAndDot) {
  auto dot = fs::temp_directory_path() / "ctxkit_cli_test" / "c5.dot";
  fs::create_directories(dot.parent_path());
  auto j = report("graph fixture:c5 --dot " + dot.string());
  EXPECT_EQ(j["result"]["alpha"]["value"], 2.0);
  EXPECT_EQ(j["result"]["fractional_packing"]["value"], "5/2");
  EXPECT_NEAR(j["result"]["theta"]["value"].get<double>(), std::sqrt(5.0), 1e-6);
  EXPECT_TRUE(j["result"]["squeeze"].get<bool>());
  std::ifstream f(dot);
  std::string text((std::istreambuf_iterator<char>(f)), {});
  EXPECT_NE(text.find("graph"), std::string::npos);
}

TEST(Cli, CompressAndValidate) {
  auto j = report("compress fixture:contextual_gleason");
  EXPECT_LE(j["result"]["checks"]["prediction_error"].get<double>(), 1e-10);
  EXPECT_GE(j["result"]["negative_entries"].get<int>(), 1);
  auto v = report("validate fixture:six_state_latent");
  EXPECT_EQ(v["result"]["factorisability"]["verdict"], "not factorisable / fine-tuned");
}

TEST(Cli, LoopOnBoxes) {
  auto j = report("loop fixture:copy_box");
  EXPECT_TRUE(j["result"]["audit"]["determinism_fails"].get<bool>());
  auto o = report("loop fixture:ontic_box");
  EXPECT_TRUE(o["result"]["audit"]["forced_zero"].get<bool>());
}

TEST(Cli, MarbleIsDeterministicAcrossJobs) {
  auto a = ctxkit("--seed 5 --jobs 1 marble fixture:ks_pair");
  auto b = ctxkit("--seed 5 --jobs 3 marble fixture:ks_pair");
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  auto j = Json::parse(a.out);
  EXPECT_TRUE(j["result"].contains("gleason_gap"));
  EXPECT_FALSE(j["result"]["exported_model"]["measurement_contextuality"].empty());
}

TEST(Cli, ByteIdenticalReruns) {
  for (const std::string args : {"classify fixture:hardy", "graph fixture:c5", "compress fixture:contextual_gleason",
                                 "counterfactual", "loop fixture:xor_box"}) {
    auto a = ctxkit(args), b = ctxkit(args);
    EXPECT_EQ(a.out, b.out) << args;
  }
}

TEST(Cli, ExitCodes) {
  auto bad = temp_file("bad.json", "{\"kind\": \"scenario\", \"measurements\": [");
  auto r = ctxkit("validate " + bad.string());
  EXPECT_EQ(r.code, 2);
  auto j = Json::parse(r.out);
  EXPECT_EQ(j["error"]["kind"], "input");
  EXPECT_NE(j["error"]["message"].get<std::string>().find("bad.json:1:"), std::string::npos);

  EXPECT_EQ(ctxkit("validate fixture:nope").code, 2);
  EXPECT_EQ(ctxkit("validate /nonexistent/file.json").code, 2);
  EXPECT_EQ(ctxkit("--format yaml validate fixture:kcbs").code, 2);
  EXPECT_EQ(ctxkit("classify fixture:kcbs").code, 2);
  EXPECT_EQ(ctxkit("--cap 4 classify fixture:pr_box").code, 3);

  // A Gleason-violating model cannot be compressed.
  auto m = report("fixtures extract contextual_gleason");
  m["preparations"]["P5"] = {0.1, 0.2, 0.3, 0.4};
  auto f = temp_file("violating.json", m.dump());
  auto c = report("compress " + f.string(), 1);
  EXPECT_EQ(c["error"]["kind"], "precondition");
}

TEST(Cli, SignallingClassifyIsDomainVerdict) {
  auto m = report("fixtures extract classical");
  auto& t = m["tables"][0]["distribution"];
  ASSERT_TRUE(t.is_object());
  std::swap(t["0,0"], t["1,1"]);
  auto f = temp_file("signalling.json", m.dump());
  auto r = ctxkit("classify " + f.string());
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(Json::parse(r.out)["result"].contains("error"));
}

TEST(Cli, FixtureRoundTrip) {
  auto list = ctxkit("fixtures list");
  EXPECT_EQ(list.code, 0);
  EXPECT_NE(list.out.find("six_state"), std::string::npos);
  auto out = fs::temp_directory_path() / "ctxkit_cli_test" / "pr.json";
  fs::create_directories(out.parent_path());
  EXPECT_EQ(ctxkit("fixtures extract pr_box -o " + out.string()).code, 0);
  auto a = report("classify " + out.string());
  auto b = report("classify fixture:pr_box");
  EXPECT_EQ(a["result"], b["result"]);
  EXPECT_EQ(a["input_digest"], b["input_digest"]);
}

TEST(Cli, CsvFormat) {
  auto r = ctxkit("--format csv graph fixture:c5");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("path,value\n", 0), 0u);
  EXPECT_NE(r.out.find("\nschema_version,1.0\n"), std::string::npos);
  EXPECT_NE(r.out.find("\nresult.alpha.value,"), std::string::npos);
}
