#include <gtest/gtest.h>

#include "pcs/predicates.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace pcs;

namespace {

sym::AbstractVariable self_var(const std::string& cls, std::vector<std::pair<std::string, bool>> tokens) {
  sym::AbstractVariable v;
  v.scope = sym::Scope::CallingObject;
  v.class_name = cls;
  for (auto& [name, call] : tokens) v.path.push_back({name, call});
  return v;
}

std::set<sym::AbstractVariable> term_vars(const predicates::AbstractExpr& e) {
  std::set<sym::AbstractVariable> out;
  for (const auto& t : e.terms) {
    EXPECT_EQ(t.lhs.kind, sym::Value::Kind::Var);
    out.insert(t.lhs.var);
  }
  return out;
}

}  // namespace

TEST(PredicateNodes, ThreadCheckGuardsBothHandlerSends) {
  auto p = fixtures::load({"servicefw.ir"});
  graphs::Cfg cfg(*p.find_method("ContextImpl", "startService"));
  EXPECT_EQ(predicates::identify_predicate_nodes(cfg, 6), std::vector<int>{1});
  EXPECT_EQ(predicates::identify_predicate_nodes(cfg, 3), std::vector<int>{1});
  EXPECT_TRUE(predicates::identify_predicate_nodes(cfg, 9).empty());
  EXPECT_THROW(predicates::identify_predicate_nodes(cfg, cfg.entry()), std::invalid_argument);
}

TEST(PredicateNodes, MatchesInfluenceOracle) {
  auto p = fixtures::load({"loaderfw.ir"});
  graphs::Cfg cfg(*p.find_method("LoaderManager", "initLoader"));
  for (int s = 0; s < cfg.statement_count(); ++s) {
    std::vector<int> want;
    for (int b = 0; b < cfg.statement_count(); ++b)
      if (cfg.stmt(b).is_branch() && oracle::influence(cfg, b).count(s)) want.push_back(b);
    EXPECT_EQ(predicates::identify_predicate_nodes(cfg, s), want) << s;
  }
}

TEST(BackSubstitution, InitLoaderHaveDataIsATwoTermDisjunction) {
  auto p = fixtures::load({"loaderfw.ir"});
  const auto* m = p.find_method("LoaderManager", "initLoader");
  sym::ChainContext ctx{{m}, {}};
  graphs::Cfg cfg(*m);
  auto guards = predicates::identify_predicate_nodes(cfg, 9);
  ASSERT_EQ(guards, std::vector<int>{7});
  auto e = predicates::back_substitute(ctx, 7);
  EXPECT_FALSE(e.unresolved);
  ASSERT_EQ(e.terms.size(), 2u);
  EXPECT_EQ(term_vars(e), (std::set<sym::AbstractVariable>{
                              self_var("LoaderManager", {{"oldLoader", false}, {"mHaveData", false}}),
                              self_var("LoaderManager", {{"mLoaders", false}, {"get", true}, {"mHaveData", false}})}));
  for (const auto& t : e.terms) {
    EXPECT_EQ(t.op, ir::RelOp::Eq);
    EXPECT_EQ(t.rhs.str(), "true");
  }
}

TEST(BackSubstitution, NullCheckOnMapLookup) {
  auto p = fixtures::load({"loaderfw.ir"});
  const auto* m = p.find_method("LoaderManager", "initLoader");
  auto e = predicates::back_substitute({{m}, {}}, 2);
  ASSERT_EQ(e.terms.size(), 1u);
  EXPECT_EQ(e.terms[0].lhs.var, self_var("LoaderManager", {{"mLoaders", false}, {"get", true}}));
  EXPECT_EQ(e.terms[0].op, ir::RelOp::Ne);
  EXPECT_EQ(e.terms[0].rhs.str(), "null");
}

TEST(BackSubstitution, StaticsStayStatic) {
  auto p = fixtures::load({"servicefw.ir"});
  const auto* m = p.find_method("ContextImpl", "unbindService");
  auto e = predicates::back_substitute({{m}, {}}, 2);
  ASSERT_EQ(e.terms.size(), 1u);
  EXPECT_EQ(e.terms[0].lhs.var.scope, sym::Scope::Static);
  EXPECT_EQ(e.terms[0].lhs.var.str(), "(static, Global, started)");
  EXPECT_EQ(e.terms[0].str(), "(static, Global, started) != true");
}

TEST(BackSubstitution, RebasesParametersThroughTheChain) {
  auto p = fixtures::parse(R"(framework class Q {
    int limit;
    public void onFull() { return; }
    api void offer(Q q, int n) { static Q.check(q, n); return; }
    static void check(Q target, int count) {
      int cap;
      cap = target.limit;
      if count < cap goto Lok;
      virtual target.onFull();
    Lok:
      return;
    }
  })");
  const auto* api = p.find_method("Q", "offer");
  const auto* helper = p.find_method("Q", "check");
  auto e = predicates::back_substitute({{api, helper}, {0}}, 1);
  ASSERT_EQ(e.terms.size(), 1u);
  EXPECT_EQ(e.terms[0].str(), "(param1, int, ) < (param0, Q, limit)");
}

TEST(BackSubstitution, ArithmeticIsKept) {
  auto p = fixtures::parse(R"(framework class A {
    int size;
    public void onGrow() { return; }
    api void grow(int by) {
      int s, t;
      s = this.size;
      t = s + by;
      if t > 10 goto Lbig;
      return;
    Lbig:
      virtual this.onGrow();
      return;
    }
  })");
  auto e = predicates::back_substitute({{p.find_method("A", "grow")}, {}}, 2);
  ASSERT_EQ(e.terms.size(), 1u);
  EXPECT_EQ(e.terms[0].lhs.kind, sym::Value::Kind::Arith);
  EXPECT_EQ(e.terms[0].rhs.str(), "10");
}

TEST(BackSubstitution, RejectsNonBranches) {
  auto p = fixtures::load({"servicefw.ir"});
  EXPECT_THROW(predicates::back_substitute({{p.find_method("ContextImpl", "startService")}, {}}, 0),
               std::invalid_argument);
}

TEST(BackSubstitution, TooManyPathsIsUnresolved) {
  // 7 independent diamonds give 2^7 = 128 distinct paths for x.
  std::string body;
  for (int i = 0; i < 7; ++i) {
    std::string k = std::to_string(i);
    body += "if c == " + k + " goto La" + k + ";\n x = x + " + std::to_string(i + 1) + ";\n goto Lb" + k +
            ";\n La" + k + ": x = x - " + std::to_string(i + 1) + ";\n Lb" + k + ": c = c + 0;\n";
  }
  auto p = fixtures::parse("framework class A { public void onHit() { return; }\n api void m(int c, int x) {\n" +
                           body + " if x == 0 goto Lh;\n return;\n Lh: virtual this.onHit();\n return; } }");
  const auto* m = p.find_method("A", "m");
  int branch = -1;
  for (const auto& s : m->body)
    if (s.is_branch() && s.rhs.kind == ir::Operand::Kind::Int && s.lhs.name == "x") branch = s.id;
  ASSERT_GE(branch, 0);
  auto e = predicates::back_substitute({{m}, {}}, branch);
  EXPECT_TRUE(e.unresolved);
  EXPECT_LE(e.terms.size(), predicates::kMaxTerms);
}
