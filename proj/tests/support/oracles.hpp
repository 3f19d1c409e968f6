#pragma once

// Brute-force reference computations used by the tests.

#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "pcs/graphs.hpp"
#include "pcs/ir_parser.hpp"
#include "pcs/summary.hpp"

namespace oracle {

using pcs::graphs::Cfg;
using pcs::graphs::EdgeLabel;

// Can `from` reach `to` without stepping on `banned`?
inline bool reaches_avoiding(const Cfg& cfg, int from, int to, int banned) {
  if (from == banned) return false;
  std::vector<bool> seen(cfg.node_count(), false);
  std::vector<int> stack{from};
  seen[from] = true;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    if (v == to) return true;
    for (const auto& e : cfg.succ(v))
      if (e.to != banned && !seen[e.to]) {
        seen[e.to] = true;
        stack.push_back(e.to);
      }
  }
  return false;
}

// y postdominates x (reflexive): every path x ~> exit meets y.
inline bool postdominates(const Cfg& cfg, int y, int x) {
  return x == y || !reaches_avoiding(cfg, x, cfg.exit(), y);
}

// Ferrante-style definition: y depends on x when some successor s of x is
// postdominated by y and y does not strictly postdominate x.
inline std::set<int> direct_dependents(const Cfg& cfg, int x) {
  std::set<int> out;
  for (int y = 0; y < cfg.node_count(); ++y) {
    if (y != x && postdominates(cfg, y, x)) continue;
    for (const auto& e : cfg.succ(x))
      if (postdominates(cfg, y, e.to)) {
        out.insert(y);
        break;
      }
  }
  return out;
}

inline std::set<int> influence(const Cfg& cfg, int branch) {
  std::set<int> out;
  std::vector<int> work;
  for (int y : direct_dependents(cfg, branch)) work.push_back(y);
  while (!work.empty()) {
    int v = work.back();
    work.pop_back();
    if (!cfg.is_statement(v) || !out.insert(v).second) continue;
    for (int w : direct_dependents(cfg, v)) work.push_back(w);
  }
  return out;
}

// Every node can reach the exit.
inline bool exit_reachable_everywhere(const Cfg& cfg) {
  for (int v = 0; v < cfg.node_count(); ++v)
    if (!reaches_avoiding(cfg, v, cfg.exit(), -1)) return false;
  return true;
}

// Random method bodies of 1..max_stmts statements over one int local. Bodies
// whose CFG has a node unable to reach the exit are redrawn.
class RandomCfgs {
 public:
  explicit RandomCfgs(std::uint64_t seed) : rng_(seed) {}

  std::string next_source(int max_stmts) {
    for (;;) {
      std::string src = draw(max_stmts);
      auto r = pcs::ir::parse_program(src);
      if (!r.ok()) continue;
      const auto& m = r.program->find_class("R")->methods.front();
      if (exit_reachable_everywhere(Cfg(m))) return src;
    }
  }

 private:
  std::string draw(int max_stmts) {
    int n = std::uniform_int_distribution<int>(1, max_stmts)(rng_);
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); };
    std::string body;
    for (int i = 0; i < n; ++i) {
      body += "  L" + std::to_string(i) + ": ";
      int kind = pick(0, 9);
      if (kind < 4) body += "if x == " + std::to_string(pick(0, 2)) + " goto L" + std::to_string(pick(0, n - 1)) + ";\n";
      else if (kind < 5) body += "goto L" + std::to_string(pick(0, n - 1)) + ";\n";
      else if (kind < 6) body += "return;\n";
      else body += "x = x + " + std::to_string(pick(1, 3)) + ";\n";
    }
    return "framework class R {\n  void m(int x) {\n" + body + "  }\n}\n";
  }

  std::mt19937_64 rng_;
};

// Marked-node sequences along valid entry-to-exit ICFG paths. Calls descend
// into a callee (with a return stack); a call with an un-inlined target may
// also fall through. Each node is entered at most twice per path.
struct MarkedStep {
  std::string label;
  EdgeLabel outcome = EdgeLabel::None;
  auto operator<=>(const MarkedStep&) const = default;
};
using MarkedSequence = std::vector<MarkedStep>;

inline std::string icfg_label(const pcs::graphs::Icfg& g, int n) {
  auto [inst, local] = g.locate(n);
  const auto& m = *g.instances[inst].method;
  return m.qualified_name() + "#" + std::to_string(local) + ": " + pcs::ir::stmt_text(m.body.at(local));
}

inline std::set<MarkedSequence> icfg_marked_sequences(const pcs::summary::MarkedIcfg& mg, long max_steps = 2000000) {
  using pcs::graphs::IcfgEdgeKind;
  const auto& g = mg.icfg;
  std::set<MarkedSequence> out;
  std::vector<int> visits(g.node_count(), 0);
  std::vector<int> ret_stack;
  MarkedSequence seq;
  long steps = 0;
  std::function<void(int)> walk = [&](int n) {
    if (++steps > max_steps || visits[n] >= 2) return;
    ++visits[n];
    if (n == g.exit()) {
      out.insert(seq);
      --visits[n];
      return;
    }
    bool marked = mg.marked(n);
    if (marked) seq.push_back({icfg_label(g, n), EdgeLabel::None});
    std::vector<const pcs::graphs::IcfgEdge*> calls, intra, rets;
    for (int ei : g.succ_edges(n)) {
      const auto& e = g.edges[ei];
      if (e.kind == IcfgEdgeKind::Call || e.kind == IcfgEdgeKind::AsyncCall) calls.push_back(&e);
      else if (e.kind == IcfgEdgeKind::Intra) intra.push_back(&e);
      else rets.push_back(&e);
    }
    if (!rets.empty()) {
      // method exit: return to the caller on top of the stack
      int to = ret_stack.back();
      ret_stack.pop_back();
      walk(to);
      ret_stack.push_back(to);
    } else if (!calls.empty()) {
      bool async = calls.front()->kind == IcfgEdgeKind::AsyncCall;
      int fall = intra.empty() ? -1 : intra.front()->to;
      for (const auto* e : calls) {
        ret_stack.push_back(fall);
        walk(e->to);
        ret_stack.pop_back();
      }
      if (!async && mg.partial_calls.count(n) && fall != -1) walk(fall);
    } else {
      for (const auto* e : intra) {
        if (marked && mg.predicates.count(n)) seq.back().outcome = e->label;
        walk(e->to);
      }
    }
    if (marked) seq.pop_back();
    --visits[n];
  };
  walk(g.entry());
  return out;
}

// Node sequences (with predicate outcomes) along entry-to-exit PCS paths.
inline std::set<MarkedSequence> pcs_sequences(const pcs::summary::Pcs& pcs) {
  std::set<MarkedSequence> out;
  MarkedSequence seq;
  std::vector<int> visits(pcs.nodes.size(), 0);
  std::function<void(int)> walk = [&](int n) {
    if (visits[n] >= 2) return;
    if (n == pcs.exit()) {
      out.insert(seq);
      return;
    }
    ++visits[n];
    bool inner = n != pcs.entry();
    if (inner) seq.push_back({pcs.nodes[n].label(), EdgeLabel::None});
    for (const auto& e : pcs.out_edges(n)) {
      if (inner) seq.back().outcome = e.label;
      walk(e.to);
    }
    if (inner) seq.pop_back();
    --visits[n];
  };
  walk(pcs.entry());
  return out;
}

}  // namespace oracle
