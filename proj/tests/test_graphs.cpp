#include <gtest/gtest.h>

#include <json.hpp>

#include "pcs/callbacks.hpp"
#include "pcs/dot.hpp"
#include "pcs/graphs.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace pcs;

namespace {

const ir::MethodDef& method(const ir::Program& p, const char* cls, const char* name) {
  const auto* m = p.find_method(cls, name);
  if (!m) throw std::runtime_error(std::string("missing ") + cls + "." + name);
  return *m;
}

std::string kind_name(graphs::CallKind k) {
  switch (k) {
    case graphs::CallKind::Static: return "static";
    case graphs::CallKind::Virtual: return "virtual";
    case graphs::CallKind::Special: return "special";
    case graphs::CallKind::Async: return "async";
  }
  return "?";
}

}  // namespace

TEST(Cfg, StartServiceIsADiamond) {
  auto p = fixtures::load({"servicefw.ir"});
  graphs::Cfg cfg(method(p, "ContextImpl", "startService"));
  EXPECT_EQ(cfg.node_count(), 13);
  const auto& out = cfg.succ(1);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].label, graphs::EdgeLabel::True);
  EXPECT_EQ(out[0].to, 5);
  EXPECT_EQ(out[1].label, graphs::EdgeLabel::False);
  EXPECT_EQ(out[1].to, 2);
  EXPECT_EQ(dot::cfg_to_dot(cfg), fixtures::read("golden/startService.cfg.dot"));
}

TEST(Cfg, UnreachableStatementsAreFlagged) {
  auto p = fixtures::parse("framework class A { void m() { return; return; } }");
  graphs::Cfg cfg(p.find_class("A")->methods[0]);
  EXPECT_TRUE(cfg.reachable(0));
  EXPECT_FALSE(cfg.reachable(1));
}

TEST(ControlDependence, StartServiceCallbacksDependOnTheThreadCheck) {
  auto p = fixtures::load({"servicefw.ir"});
  graphs::Cfg cfg(method(p, "ContextImpl", "startService"));
  auto inf = graphs::influence(cfg, 1);
  EXPECT_EQ(inf, (std::set<int>{2, 3, 4, 5, 6, 7, 8}));
  EXPECT_EQ(inf, oracle::influence(cfg, 1));
}

TEST(ControlDependence, DoublyNestedGuard) {
  auto p = fixtures::parse(R"(framework class A { void m(int x) {
    if x == 0 goto La;
    goto Ldone;
  La:
    if x == 1 goto Lb;
    goto Ldone;
  Lb:
    x = 2;
  Ldone:
    return;
  } })");
  graphs::Cfg cfg(p.find_class("A")->methods[0]);
  EXPECT_TRUE(graphs::influence(cfg, 0).count(4));
  EXPECT_TRUE(graphs::influence(cfg, 2).count(4));
  EXPECT_EQ(graphs::influence(cfg, 0), oracle::influence(cfg, 0));
}

TEST(ControlDependence, RejectsNonBranches) {
  auto p = fixtures::load({"servicefw.ir"});
  graphs::Cfg cfg(method(p, "ContextImpl", "startService"));
  EXPECT_THROW(graphs::influence(cfg, 0), std::invalid_argument);
}

TEST(ControlDependence, NeverContainsPostdominators) {
  for (const auto& set : std::vector<std::vector<std::string>>{{"servicefw.ir"}, {"loaderfw.ir"}, {"textviewfw.ir"}}) {
    auto p = fixtures::load(set);
    for (const auto& c : p.classes())
      for (const auto& m : c.methods) {
        graphs::Cfg cfg(m);
        for (int b = 0; b < cfg.statement_count(); ++b) {
          if (!cfg.stmt(b).is_branch()) continue;
          for (int s : graphs::influence(cfg, b))
            if (s != b) EXPECT_FALSE(oracle::postdominates(cfg, s, b)) << m.qualified_name() << " " << b << " " << s;
        }
      }
  }
}

class RandomCdOracle : public ::testing::TestWithParam<int> {};

TEST_P(RandomCdOracle, MatchesBruteForce) {
  oracle::RandomCfgs gen(20240 + GetParam());
  for (int round = 0; round < 20; ++round) {
    auto p = fixtures::parse(gen.next_source(10));
    graphs::Cfg cfg(p.find_class("R")->methods[0]);
    ASSERT_LE(cfg.node_count(), 12);
    for (int b = 0; b < cfg.statement_count(); ++b)
      if (cfg.stmt(b).is_branch()) EXPECT_EQ(graphs::influence(cfg, b), oracle::influence(cfg, b));
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomCdOracle, ::testing::Range(0, 10));

TEST(CallGraph, MatchesHandEnumeratedGolden) {
  auto p = fixtures::load({"servicefw.ir"});
  auto cg = graphs::build_call_graph(p);
  callbacks::link_async_handlers(p, cg);
  std::set<std::tuple<std::string, int, std::string, std::string>> got, want;
  for (const auto& e : cg.edges())
    got.insert({e.caller->qualified_name(), e.stmt, e.callee->qualified_name(), kind_name(e.kind)});
  auto golden = nlohmann::json::parse(fixtures::read("servicefw.cg.json"));
  EXPECT_EQ(golden["policy"], cg.policy);
  for (const auto& e : golden["edges"])
    want.insert({e["caller"].get<std::string>(), e["stmt"].get<int>(), e["callee"].get<std::string>(),
                 e["kind"].get<std::string>()});
  EXPECT_EQ(got, want);
}

TEST(CallGraph, VirtualCallReachesEveryOverride) {
  auto p = fixtures::load({"servicefw.ir", "connectbot.ir"});
  auto cg = graphs::build_call_graph(p);
  auto out = cg.callees(&method(p, "CreateHandler", "handleMessage"), 1);
  std::set<std::string> names;
  for (const auto& e : out) names.insert(e.callee->qualified_name());
  EXPECT_EQ(names, (std::set<std::string>{"Service.onCreate", "TrackRecordingService.onCreate"}));
}

TEST(Icfg, UnbindServiceInlinesItsHelperAndCallbacks) {
  auto p = fixtures::load({"servicefw.ir"});
  auto cg = graphs::build_call_graph(p);
  const auto& api = method(p, "ContextImpl", "unbindService");
  auto g = graphs::build_icfg(p, api, cg);
  // without opaque sites the default Service bodies are inlined too
  int want = 0;
  for (auto [cls, name] : std::vector<std::pair<const char*, const char*>>{
           {"ContextImpl", "unbindService"}, {"ContextImpl", "doUnbind"}, {"Service", "onUnbind"}, {"Service", "onDestroy"}})
    want += graphs::Cfg(method(p, cls, name)).node_count();
  EXPECT_EQ(g.instances.size(), 4u);
  EXPECT_EQ(g.node_count(), want);
  EXPECT_EQ(g.interprocedural_edge_count(), 6);  // a call and a return edge per callee
}

TEST(Icfg, SendMessageGetsAsyncEdgesAfterLinking) {
  auto p = fixtures::load({"servicefw.ir"});
  auto cg = graphs::build_call_graph(p);
  const auto& api = method(p, "ContextImpl", "startService");
  auto before = graphs::build_icfg(p, api, cg);
  EXPECT_EQ(before.instances.size(), 1u);
  callbacks::link_async_handlers(p, cg);
  auto g = graphs::build_icfg(p, api, cg);
  // one handler instance per sendMessage site; onCreate and the shared
  // onStartCommand body below them
  std::map<std::string, int> count;
  int async_instances = 0;
  for (const auto& inst : g.instances) {
    ++count[inst.method->qualified_name()];
    async_instances += inst.async;
  }
  EXPECT_EQ(count, (std::map<std::string, int>{{"ContextImpl.startService", 1},
                                               {"CreateHandler.handleMessage", 1},
                                               {"StartHandler.handleMessage", 2},
                                               {"Service.onCreate", 1},
                                               {"Service.onStartCommand", 1}}));
  EXPECT_GE(async_instances, 3);
  int async_calls = 0;
  for (const auto& e : g.edges) async_calls += e.kind == graphs::IcfgEdgeKind::AsyncCall;
  EXPECT_EQ(async_calls, 3);
}
