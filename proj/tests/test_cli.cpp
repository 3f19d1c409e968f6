#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "support/fixtures.hpp"

namespace fs = std::filesystem;

namespace {

struct Output {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("pcs_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Output pcs(const std::string& args) {
    std::string cmd = std::string(PCS_TOOL_PATH) + " " + args + " >" + (dir_ / "out").string() + " 2>" +
                      (dir_ / "err").string();
    int status = std::system(cmd.c_str());
    Output r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(dir_ / "out");
    r.err = slurp(dir_ / "err");
    return r;
  }
  std::string fx(const std::string& name) const { return fixtures::path(name); }
  std::string tmp(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_F(Cli, SummarizeWritesGoldenStoreAndTsvStats) {
  auto r = pcs("summarize " + fx("servicefw.ir") + " -o " + tmp("out.pcs.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(tmp("out.pcs.json")), fixtures::read("servicefw.pcs.json"));
  EXPECT_EQ(lines(r.out), (std::vector<std::string>{"api\ticfg_nodes\tpcs_nodes\tcallbacks\tpredicates\tupdates",
                                                    "ContextImpl.bindService/1\t4\t2\t0\t0\t0",
                                                    "ContextImpl.startService/1\t28\t7\t3\t1\t1",
                                                    "ContextImpl.unbindService/1\t12\t5\t2\t1\t0"}));
}

TEST_F(Cli, SummarizeToStdoutKeepsStatsOnStderr) {
  auto r = pcs("summarize " + fx("servicefw.ir"));
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, fixtures::read("servicefw.pcs.json"));
  EXPECT_EQ(lines(r.err).size(), 4u);
}

TEST_F(Cli, NoApiMethodsGivesAnEmptyStore) {
  std::ofstream(tmp("none.ir")) << "framework class A { public void onX() { return; } }\n";
  auto r = pcs("summarize " + tmp("none.ir"));
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(nlohmann::json::parse(r.out)["summaries"].empty());
}

TEST_F(Cli, MissingInputNamesThePath) {
  auto r = pcs("summarize " + tmp("absent.ir"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("absent.ir"), std::string::npos);
}

TEST_F(Cli, ParseErrorsExitOneWithPositions) {
  std::ofstream(tmp("bad.ir")) << "framework class A {\n  void m() { x = ; }\n}\n";
  auto r = pcs("summarize " + tmp("bad.ir"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("bad.ir:2:"), std::string::npos) << r.err;
}

TEST_F(Cli, UsageErrorsExitOneAndHelpExitsZero) {
  EXPECT_EQ(pcs("").code, 1);
  EXPECT_EQ(pcs("summarize").code, 1);
  EXPECT_EQ(pcs("summarize " + fx("servicefw.ir") + " --format yaml").code, 1);
  EXPECT_EQ(pcs("summarize " + fx("servicefw.ir") + " --api nothingHere").code, 1);
  EXPECT_EQ(pcs("summarize " + fx("servicefw.ir") + " --max-chain 0").code, 1);
  EXPECT_EQ(pcs("--help").code, 0);
}

TEST_F(Cli, BadTemplateFileIsAnInputError) {
  std::ofstream(tmp("t.txt")) << "java.util.List | isEmpty\n";
  auto r = pcs("summarize " + fx("servicefw.ir") + " --templates " + tmp("t.txt"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("template table line 1"), std::string::npos);
  EXPECT_EQ(pcs("summarize " + fx("servicefw.ir") + " --templates " + fx("templates.txt")).code, 0);
}

TEST_F(Cli, ApplyReportsTheServiceDefect) {
  ASSERT_EQ(pcs("summarize " + fx("servicefw.ir") + " -o " + tmp("s.json")).code, 0);
  auto r = pcs("apply " + tmp("s.json") + " " + fx("servicefw.ir") + " " + fx("connectbot.ir") + " --infeasible");
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(r.out);
  int reports = 0;
  for (const auto& t : j["tops"]) {
    reports += static_cast<int>(t["reports"].size());
    EXPECT_GE(t["longest_path"].get<int>(), 3);
  }
  EXPECT_EQ(reports, 1);
  auto stats = lines(r.err);
  ASSERT_EQ(stats.size(), 4u);
  EXPECT_EQ(stats[0], "top\tcallbacks\tapi_calls\timpl_min\timpl_avg\timpl_max\tlongest_path\treports");
  EXPECT_EQ(stats[1], "HostListActivity.onRestart\t5\t2\t1\t1.00\t1\t5\t1");
}

TEST_F(Cli, UnsummarizedApisPassThrough) {
  ASSERT_EQ(pcs("summarize " + fx("servicefw.ir") + " --api bindService -o " + tmp("s.json")).code, 0);
  auto r = pcs("apply " + tmp("s.json") + " " + fx("servicefw.ir") + " " + fx("connectbot.ir"));
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(r.out);
  for (const auto& t : j["tops"])
    if (t["top"] == "HostListActivity.onStop") {
      EXPECT_EQ(t["api_calls"], 0);
    }
}

TEST_F(Cli, ApplyDotWritesOneFilePerTopLevel) {
  ASSERT_EQ(pcs("summarize " + fx("servicefw.ir") + " -o " + tmp("s.json")).code, 0);
  auto r = pcs("apply " + tmp("s.json") + " " + fx("servicefw.ir") + " " + fx("connectbot.ir") +
               " --format dot -o " + tmp("graphs"));
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* top : {"HostListActivity.onStart", "HostListActivity.onStop", "HostListActivity.onRestart"}) {
    auto text = slurp(dir_ / "graphs" / (std::string(top) + ".dot"));
    EXPECT_EQ(text.rfind("digraph", 0), 0u) << top;
  }
}

TEST_F(Cli, ApplyDotOnStdoutCarriesNoStats) {
  ASSERT_EQ(pcs("summarize " + fx("servicefw.ir") + " -o " + tmp("s.json")).code, 0);
  auto r = pcs("apply " + tmp("s.json") + " " + fx("servicefw.ir") + " " + fx("connectbot.ir") + " --format dot");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("digraph", 0), 0u);
  EXPECT_EQ(r.out.find("top\t"), std::string::npos);
  EXPECT_EQ(r.err.rfind("top\t", 0), 0u);
}

TEST_F(Cli, CorruptStoreIsAnInputError) {
  std::ofstream(tmp("s.json")) << R"({"version":1,"metadata":{"max_callers":5,"max_chain":16,"seed":0,"tool_version":"pcs 1.0.0"},"summaries":{"X.y/0":{"api":"X.y/0","edges":[]}}})";
  auto r = pcs("apply " + tmp("s.json") + " " + fx("servicefw.ir") + " " + fx("connectbot.ir"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("missing field nodes in summary X.y/0"), std::string::npos) << r.err;
}

TEST_F(Cli, DotExportsMatchGoldensAndRepeat) {
  auto a = pcs("dot " + fx("servicefw.ir") + " --api startService");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, fixtures::read("golden/startService.pcs.dot"));
  EXPECT_EQ(pcs("dot " + fx("servicefw.ir") + " --api startService").out, a.out);
  auto cfg = pcs("dot " + fx("servicefw.ir") + " --kind cfg --api ContextImpl.startService");
  EXPECT_EQ(cfg.out, fixtures::read("golden/startService.cfg.dot"));
  auto store = pcs("dot " + fx("servicefw.pcs.json") + " --api ContextImpl.startService");
  EXPECT_EQ(store.out, a.out);
  auto icfg = pcs("dot " + fx("servicefw.ir") + " --kind icfg --api unbindService");
  EXPECT_NE(icfg.out.find("cluster"), std::string::npos);
}

TEST_F(Cli, TrivialSummaryDotHasOnlyEntryAndExit) {
  auto r = pcs("dot " + fx("servicefw.ir") + " --api bindService");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out,
            "digraph \"ContextImpl.bindService/1\" {\n  node [fontname=\"monospace\"];\n"
            "  n0 [label=\"entry\", shape=plaintext];\n  n1 [label=\"exit\", shape=plaintext];\n  n0 -> n1;\n}\n");
}

TEST_F(Cli, PathsAndInfeasibleSubcommands) {
  ASSERT_EQ(pcs("summarize " + fx("loaderfw.ir") + " -o " + tmp("s.json")).code, 0);
  auto inputs = tmp("s.json") + " " + fx("loaderfw.ir") + " " + fx("loaderapp.ir");
  auto p = pcs("paths " + inputs);
  ASSERT_EQ(p.code, 0) << p.err;
  auto j = nlohmann::json::parse(p.out);
  EXPECT_EQ(j["ListActivity.onCreate"]["longest"], 4);
  auto i = pcs("infeasible " + inputs);
  ASSERT_EQ(i.code, 0);
  auto reports = nlohmann::json::parse(i.out);
  ASSERT_EQ(reports.size(), 1u);
  EXPECT_EQ(reports[0]["top"], "ListActivity.onCreate");
  EXPECT_EQ(reports[0]["outcome"], "false");
  auto text = pcs("infeasible " + inputs + " --format text");
  EXPECT_EQ(text.out.rfind("infeasible: ", 0), 0u);
}

TEST_F(Cli, JobsDoNotChangeOutput) {
  auto one = pcs("summarize " + fx("servicefw.ir") + " --jobs 1");
  auto four = pcs("summarize " + fx("servicefw.ir") + " --jobs 4");
  EXPECT_EQ(one.out, four.out);
}
