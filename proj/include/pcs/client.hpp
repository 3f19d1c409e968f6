#pragma once

// Client analyses over inter-callback ICFGs: callback sequence enumeration
// and demand-driven branch correlation for infeasible callback edges.

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcs/client_graph.hpp"
#include "pcs/dot.hpp"

namespace pcs::client {

// ---------------------------------------------------------------------------
// Grounding summary variables at a splice

// A summary variable tied to an app object: the copy class of an app local
// (root) or a static field base.
struct GroundVar {
  bool is_static = false;
  std::string root;  // "<method>::<local rep>" or the static class
  sym::AccessChain path;
  auto operator<=>(const GroundVar&) const = default;
  std::string str() const { return (is_static ? "static " : "") + root + (path.empty() ? "" : "." + sym::chain_text(path)); }
};

struct GroundValue {
  std::optional<GroundVar> var;
  std::optional<ir::Operand> constant;
  bool operator==(const GroundValue&) const = default;
};

inline std::optional<GroundVar> ground_local(const AppInstance& a, const std::string& local, sym::AccessChain path) {
  return GroundVar{false, a.method->qualified_name() + "::" + a.copies.rep(local), std::move(path)};
}

inline std::optional<GroundValue> ground(const InterCallbackIcfg& g, int splice, const sym::Value& v) {
  if (v.kind == sym::Value::Kind::Const) return GroundValue{std::nullopt, v.constant};
  if (v.kind != sym::Value::Kind::Var) return std::nullopt;
  const Splice& sp = g.splices[splice];
  const AppInstance& a = g.apps[sp.app_instance];
  const ir::Stmt& call = a.method->body[sp.call_stmt];
  const sym::AbstractVariable& av = v.var;
  switch (av.scope) {
    case sym::Scope::Static: return GroundValue{GroundVar{true, av.class_name, av.path}, std::nullopt};
    case sym::Scope::CallingObject:
      if (call.kind != ir::StmtKind::VirtualCall) return std::nullopt;
      return GroundValue{ground_local(a, call.base, av.path), std::nullopt};
    case sym::Scope::Param: {
      if (av.param < 0 || av.param >= static_cast<int>(call.args.size())) return std::nullopt;
      const ir::Operand& arg = call.args[av.param];
      if (arg.is_local()) return GroundValue{ground_local(a, arg.name, av.path), std::nullopt};
      if (av.path.empty()) return GroundValue{std::nullopt, arg};
      return std::nullopt;
    }
  }
  return std::nullopt;
}

// Three-valued constant comparison.
inline std::optional<bool> compare(const ir::Operand& a, ir::RelOp op, const ir::Operand& b) {
  using K = ir::Operand::Kind;
  if (a.kind == K::Int && b.kind == K::Int) {
    auto x = a.int_value, y = b.int_value;
    switch (op) {
      case ir::RelOp::Lt: return x < y;
      case ir::RelOp::Gt: return x > y;
      case ir::RelOp::Le: return x <= y;
      case ir::RelOp::Ge: return x >= y;
      case ir::RelOp::Eq: return x == y;
      case ir::RelOp::Ne: return x != y;
    }
  }
  if (op != ir::RelOp::Eq && op != ir::RelOp::Ne) return std::nullopt;
  bool eq = a == b;
  return op == ir::RelOp::Eq ? eq : !eq;
}

inline ir::RelOp swap_sides(ir::RelOp op) {
  switch (op) {
    case ir::RelOp::Lt: return ir::RelOp::Gt;
    case ir::RelOp::Gt: return ir::RelOp::Lt;
    case ir::RelOp::Le: return ir::RelOp::Ge;
    case ir::RelOp::Ge: return ir::RelOp::Le;
    default: return op;
  }
}

// A term normalized to `var op constant`.
struct GroundTerm {
  GroundVar var;
  ir::RelOp op = ir::RelOp::Eq;
  ir::Operand constant;
  bool operator==(const GroundTerm&) const = default;
  std::string str() const { return var.str() + " " + std::string(ir::to_string(op)) + " " + ir::to_string(constant); }
};

inline std::optional<GroundTerm> ground_term(const InterCallbackIcfg& g, int splice, const predicates::Term& t) {
  auto l = ground(g, splice, t.lhs), r = ground(g, splice, t.rhs);
  if (!l || !r) return std::nullopt;
  if (l->var && r->constant) return GroundTerm{*l->var, t.op, *r->constant};
  if (r->var && l->constant) return GroundTerm{*r->var, swap_sides(t.op), *l->constant};
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Callback sequences

struct PathOptions {
  int bound = 16;           // max callbacks per sequence
  long max_steps = 1000000;  // DFS budget per top-level graph
};

struct CallbackPaths {
  std::set<std::vector<std::string>> sequences;  // prefix-closed
  int longest = 0;
  bool truncated = false;
};

// Edges (predicate client node, outcome) excluded from traversal.
using EdgeFilter = std::set<std::pair<int, EdgeLabel>>;

inline CallbackPaths enumerate_callback_paths(const InterCallbackIcfg& g, const PathOptions& opt = {},
                                              const EdgeFilter& skip = {}) {
  if (opt.bound < 1) throw std::invalid_argument("enumerate_callback_paths: bound must be >= 1");
  CallbackPaths out;
  std::vector<bool> used(g.edges.size(), false);
  std::vector<std::string> seq;
  long steps = 0;
  auto record = [&] {
    if (seq.empty()) return;
    out.sequences.insert(seq);
    out.longest = std::max(out.longest, static_cast<int>(seq.size()));
  };
  // `callback`: n was entered as a callback implementation (or is the top).
  std::function<void(int, bool)> dfs = [&](int n, bool callback) {
    if (++steps > opt.max_steps) {
      out.truncated = true;
      return;
    }
    bool pushed = false;
    if (callback && static_cast<int>(seq.size()) < opt.bound) {
      seq.push_back(g.app_method(n)->qualified_name());
      pushed = true;
      record();
    }
    for (int ei : g.succ(n)) {
      const Edge& e = g.edges[ei];
      if (used[ei] || skip.count({e.from, e.label})) continue;
      used[ei] = true;
      dfs(e.to, e.kind == EdgeKind::CallbackImpl);
      used[ei] = false;
      if (out.truncated) break;
    }
    if (pushed) seq.pop_back();
  };
  dfs(g.entry(), true);
  return out;
}

// ---------------------------------------------------------------------------
// Branch correlation

struct CorrelationOptions {
  long budget = 10000;  // propagation steps per query
};

struct InfeasibleReport {
  int predicate = 0;  // client node
  EdgeLabel outcome = EdgeLabel::True;
  std::vector<int> witness;  // client nodes, entry to predicate
  int resolver = 0;
  std::string description;
};

struct Resolution {
  enum class Kind { Value, Opaque, None };
  Kind kind = Kind::None;
  bool value = false;
};

namespace detail {

inline bool adds(const std::string& method) {
  return !(method.rfind("remove", 0) == 0 || method == "delete");
}

// Value of `term` right after update `u` (grounded as `target`) executes.
inline Resolution apply_update(const GroundTerm& term, const GroundVar& target, const summary::UpdatePayload& u) {
  if (!(target == term.var)) return {};
  if (u.effect.kind == updates::Effect::Kind::Assign) {
    if (!u.effect.constant) return {Resolution::Kind::Opaque, false};
    auto r = compare(*u.effect.constant, term.op, term.constant);
    return r ? Resolution{Resolution::Kind::Value, *r} : Resolution{Resolution::Kind::Opaque, false};
  }
  const std::string& pm = term.var.path.back().name;
  if (!adds(u.effect.method)) return {Resolution::Kind::Opaque, false};
  std::optional<bool> r;
  if (updates::name_matches("get*", pm) || updates::name_matches("value*", pm)) {
    if (term.constant.kind == ir::Operand::Kind::Null && (term.op == ir::RelOp::Eq || term.op == ir::RelOp::Ne))
      r = term.op == ir::RelOp::Ne;
  } else if (updates::name_matches("contains*", pm)) {
    r = compare(ir::Operand::boolean(true), term.op, term.constant);
  } else if (pm == "isEmpty") {
    r = compare(ir::Operand::boolean(false), term.op, term.constant);
  }
  return r ? Resolution{Resolution::Kind::Value, *r} : Resolution{Resolution::Kind::Opaque, false};
}

class Query {
 public:
  Query(const InterCallbackIcfg& g, const GroundTerm& term, long budget) : g_(g), term_(term), budget_(budget) {}

  // Every backward path from `start` must resolve to `!outcome`.
  bool contradicted(int start, bool outcome) {
    outcome_ = outcome;
    std::map<int, int> visits;
    path_.assign({start});
    walk(start, visits);
    return ok_ && !exhausted_ && found_;
  }
  int resolver() const { return resolver_; }
  const std::vector<int>& segment() const { return segment_; }

 private:
  // Resolution of the term when control arrives at `to` from `n` along edge `e`.
  Resolution at(int n, const Edge& e) {
    if (const auto* pn = g_.pcs_node(n)) {
      int splice = g_.nodes[n].owner;
      if (pn->kind == summary::NodeKind::Update) {
        Resolution best;
        for (const auto& u : pn->updates) {
          auto gv = ground(g_, splice, sym::Value::of_var(u.target));
          if (!gv || !gv->var) continue;
          auto r = apply_update(term_, *gv->var, u);
          if (r.kind != Resolution::Kind::None) best = r;
        }
        return best;
      }
      if (pn->kind == summary::NodeKind::Predicate && pn->predicate.terms.size() == 1 && !pn->predicate.unresolved &&
          e.label != EdgeLabel::None) {
        auto t = ground_term(g_, splice, pn->predicate.terms[0]);
        if (t && *t == term_) return {Resolution::Kind::Value, e.label == EdgeLabel::True};
      }
      return {};
    }
    if (const ir::Stmt* s = g_.app_stmt(n)) {
      const AppInstance& a = g_.apps[g_.nodes[n].owner];
      std::optional<GroundVar> target;
      if (s->kind == ir::StmtKind::StaticStore) target = GroundVar{true, s->class_name, {{s->member, false}}};
      else if (s->kind == ir::StmtKind::FieldStore) target = ground_local(a, s->base, {{s->member, false}});
      if (target && *target == term_.var) {
        if (!s->lhs.is_constant()) return {Resolution::Kind::Opaque, false};
        auto r = compare(s->lhs, term_.op, term_.constant);
        return r ? Resolution{Resolution::Kind::Value, *r} : Resolution{Resolution::Kind::Opaque, false};
      }
    }
    return {};
  }

  void walk(int node, std::map<int, int>& visits) {
    if (!ok_ || exhausted_) return;
    if (node == g_.entry()) {
      ok_ = false;  // unresolved at the top-level entry
      return;
    }
    for (int ei : g_.pred(node)) {
      if (!ok_ || exhausted_) return;
      if (++steps_ > budget_) {
        exhausted_ = true;
        return;
      }
      const Edge& e = g_.edges[ei];
      int& count = visits[e.from];
      if (count >= 2) continue;
      ++count;
      path_.push_back(e.from);
      Resolution r = at(e.from, e);
      if (r.kind == Resolution::Kind::Value) {
        if (r.value == outcome_) ok_ = false;
        else if (!found_) {
          found_ = true;
          resolver_ = e.from;
          segment_.assign(path_.rbegin(), path_.rend());
        }
      } else if (r.kind == Resolution::Kind::Opaque) {
        ok_ = false;
      } else {
        walk(e.from, visits);
      }
      path_.pop_back();
      --count;
    }
    if (g_.pred(node).empty()) ok_ = false;
  }

  const InterCallbackIcfg& g_;
  GroundTerm term_;
  long budget_;
  bool outcome_ = true;
  long steps_ = 0;
  bool ok_ = true;
  bool exhausted_ = false;
  bool found_ = false;
  int resolver_ = -1;
  std::vector<int> path_;
  std::vector<int> segment_;  // resolver ... start
};

inline std::vector<int> shortest_path(const InterCallbackIcfg& g, int from, int to) {
  std::vector<int> prev(g.nodes.size(), -1);
  std::vector<bool> seen(g.nodes.size(), false);
  std::deque<int> q{from};
  seen[from] = true;
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    if (v == to) break;
    for (int ei : g.succ(v)) {
      int w = g.edges[ei].to;
      if (!seen[w]) {
        seen[w] = true;
        prev[w] = v;
        q.push_back(w);
      }
    }
  }
  if (!seen[to]) return {};
  std::vector<int> path;
  for (int v = to; v != -1; v = prev[v]) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace detail

inline std::vector<InfeasibleReport> detect_infeasible_paths(const InterCallbackIcfg& g,
                                                             const CorrelationOptions& opt = {}) {
  std::vector<InfeasibleReport> out;
  for (int n = 0; n < static_cast<int>(g.nodes.size()); ++n) {
    const summary::PcsNode* pn = g.pcs_node(n);
    if (!pn || pn->kind != summary::NodeKind::Predicate || pn->predicate.unresolved || pn->predicate.terms.empty())
      continue;
    std::set<EdgeLabel> outcomes;
    for (int ei : g.succ(n))
      if (g.edges[ei].label != EdgeLabel::None) outcomes.insert(g.edges[ei].label);
    for (EdgeLabel outcome : outcomes) {
      bool all = true;
      int resolver = -1;
      std::vector<int> segment;
      std::string terms;
      for (const auto& t : pn->predicate.terms) {
        auto gt = ground_term(g, g.nodes[n].owner, t);
        if (!gt) {
          all = false;
          break;
        }
        detail::Query q(g, *gt, opt.budget);
        if (!q.contradicted(n, outcome == EdgeLabel::True)) {
          all = false;
          break;
        }
        if (resolver == -1) {
          resolver = q.resolver();
          segment = q.segment();
        }
        terms += (terms.empty() ? "" : " || ") + gt->str();
      }
      if (!all) continue;
      InfeasibleReport r;
      r.predicate = n;
      r.outcome = outcome;
      r.resolver = resolver;
      r.witness = detail::shortest_path(g, g.entry(), resolver);
      if (!r.witness.empty()) r.witness.pop_back();
      r.witness.insert(r.witness.end(), segment.begin(), segment.end());
      r.description = g.label(n) + " cannot take its " + std::string(graphs::to_string(outcome)) + " edge: " + terms +
                      " is decided at " + g.label(resolver);
      out.push_back(std::move(r));
    }
  }
  return out;
}

inline EdgeFilter infeasible_edges(const std::vector<InfeasibleReport>& reports) {
  EdgeFilter out;
  for (const auto& r : reports) out.insert({r.predicate, r.outcome});
  return out;
}

inline std::string to_dot(const InterCallbackIcfg& g) {
  std::string out = "digraph \"" + dot::escape(g.top->qualified_name()) + "\" {\n  node [fontname=\"monospace\"];\n";
  for (int n = 0; n < static_cast<int>(g.nodes.size()); ++n) {
    std::string shape = "shape=box";
    if (const auto* pn = g.pcs_node(n)) {
      switch (pn->kind) {
        case summary::NodeKind::Callback: shape = "shape=ellipse"; break;
        case summary::NodeKind::Predicate: shape = "shape=diamond"; break;
        case summary::NodeKind::Update: shape = "shape=box, style=filled, fillcolor=palegreen"; break;
        default: shape = "shape=plaintext"; break;
      }
    } else if (g.nodes[n].kind == NodeKind::CallbackReturn) {
      shape = "shape=point";
    }
    out += "  n" + std::to_string(n) + " [label=\"" + dot::escape(g.label(n)) + "\", " + shape + "];\n";
  }
  for (const auto& e : g.edges) {
    out += "  n" + std::to_string(e.from) + " -> n" + std::to_string(e.to);
    if (e.label != EdgeLabel::None) out += " [label=\"" + std::string(graphs::to_string(e.label)) + "\"]";
    else if (e.kind == EdgeKind::CallbackImpl || e.kind == EdgeKind::CallbackReturn) out += " [style=bold]";
    else if (e.kind != EdgeKind::Intra && e.kind != EdgeKind::Summary) out += " [style=dashed]";
    out += ";\n";
  }
  return out + "}\n";
}

}  // namespace pcs::client
