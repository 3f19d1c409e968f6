#include <gtest/gtest.h>

#include "pcs/callbacks.hpp"
#include "pcs/receivers.hpp"
#include "support/fixtures.hpp"

using namespace pcs;
using receivers::Receiver;

namespace {

std::vector<receivers::ReceiverResolution> resolve(const ir::Program& p, int k = 5) {
  auto cg = graphs::build_call_graph(p);
  callbacks::link_async_handlers(p, cg);
  auto cs = callbacks::find_call_chains(p, cg, callbacks::callback_signatures(p));
  return receivers::resolve_receivers(cs, k);
}

std::vector<std::string> receivers_for(const std::vector<receivers::ReceiverResolution>& rs, const std::string& api,
                                       const std::string& callback) {
  std::vector<std::string> out;
  for (const auto& r : rs) {
    if (r.chain.head()->qualified_name() != api || r.site.signature.sig.name != callback) continue;
    for (const auto& x : r.receivers) out.push_back(x.str());
  }
  return out;
}

}  // namespace

TEST(Receivers, OnDestroyIsCalledOnTheConnection) {
  auto p = fixtures::load({"servicefw.ir"});
  auto rs = resolve(p);
  EXPECT_EQ(receivers_for(rs, "ContextImpl.unbindService", "onDestroy"), std::vector<std::string>{"param(0)"});
  EXPECT_EQ(receivers_for(rs, "ContextImpl.unbindService", "onUnbind"), std::vector<std::string>{"param(0)"});
}

TEST(Receivers, HandlerCallbacksReadTheIntentField) {
  auto p = fixtures::load({"servicefw.ir"});
  auto rs = resolve(p);
  EXPECT_EQ(receivers_for(rs, "ContextImpl.startService", "onCreate"), std::vector<std::string>{"param(0).service"});
  auto start = receivers_for(rs, "ContextImpl.startService", "onStartCommand");
  ASSERT_EQ(start.size(), 2u);  // two sendMessage sites
  for (const auto& r : start) EXPECT_EQ(r, "param(0).service");
}

TEST(Receivers, CallingObjectIsThis) {
  auto p = fixtures::load({"layoutfw.ir"});
  auto rs = resolve(p);
  EXPECT_EQ(receivers_for(rs, "View.layout", "onLayout"), std::vector<std::string>{"this"});
}

TEST(Receivers, StateStoredByAnotherApiIsUnknown) {
  auto p = fixtures::load({"textviewfw.ir"});
  auto rs = resolve(p);
  EXPECT_EQ(receivers_for(rs, "TextView.setText", "onTextChanged"), std::vector<std::string>{"unknown"});
}

TEST(Receivers, LongPathsTruncateToUnknown) {
  auto p = fixtures::parse(R"(framework class N {
    N next;
    public void onVisit() { return; }
    api void walk(N n) {
      N a, b, c;
      a = n.next;
      b = a.next;
      c = b.next;
      virtual c.onVisit();
      return;
    }
  })");
  EXPECT_EQ(receivers_for(resolve(p, 5), "N.walk", "onVisit"), std::vector<std::string>{"param(0).next.next.next"});
  EXPECT_EQ(receivers_for(resolve(p, 2), "N.walk", "onVisit"), std::vector<std::string>{"unknown"});
}

TEST(Receivers, MergingBranchesGivesBothAliases) {
  auto p = fixtures::parse(R"(framework class M {
    public void onPick() { return; }
    api void pick(M a, M b, int which) {
      M x;
      x = a;
      if which == 0 goto Ldone;
      x = b;
    Ldone:
      virtual x.onPick();
      return;
    }
  })");
  EXPECT_EQ(receivers_for(resolve(p), "M.pick", "onPick"), (std::vector<std::string>{"param(0)", "param(1)"}));
}

TEST(Receivers, NeverEmptyAndUnknownOnlyAlone) {
  for (const auto& set : std::vector<std::vector<std::string>>{
           {"servicefw.ir"}, {"loaderfw.ir"}, {"textviewfw.ir"}, {"layoutfw.ir"}}) {
    auto p = fixtures::load(set);
    for (const auto& r : resolve(p)) {
      ASSERT_FALSE(r.receivers.empty());
      if (r.receivers.size() > 1)
        for (const auto& x : r.receivers) EXPECT_NE(x.kind, Receiver::Kind::Unknown);
    }
  }
}

TEST(Receivers, KLimitedAliasReportsTruncation) {
  auto p = fixtures::load({"servicefw.ir"});
  auto cg = graphs::build_call_graph(p);
  callbacks::link_async_handlers(p, cg);
  auto cs = callbacks::find_call_chains(p, cg, callbacks::callback_signatures(p));
  for (std::size_t i = 0; i < cs.sites.size(); ++i) {
    if (cs.sites[i].signature.sig.name != "onCreate") continue;
    auto a = receivers::backward_alias("s", cs.chains[i][0], 0);
    EXPECT_TRUE(a.truncated);
    EXPECT_TRUE(a.aliases.empty());
  }
}
