#pragma once

// Control-flow graphs, postdominance, control dependence, the CHA call graph
// and per-API-method interprocedural CFGs.

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "pcs/ir.hpp"

namespace pcs::graphs {

enum class EdgeLabel { None, True, False };

inline std::string_view to_string(EdgeLabel l) {
  switch (l) {
    case EdgeLabel::True: return "true";
    case EdgeLabel::False: return "false";
    case EdgeLabel::None: break;
  }
  return "";
}

struct CfgEdge {
  int from = 0;
  int to = 0;
  EdgeLabel label = EdgeLabel::None;
  auto operator<=>(const CfgEdge&) const = default;
};

// Nodes 0..n-1 are statement ids; n is the synthetic entry and n+1 the exit.
class Cfg {
 public:
  explicit Cfg(const ir::MethodDef& method) : method_(&method) {
    const auto& body = method.body;
    n_ = static_cast<int>(body.size());
    succ_.resize(n_ + 2);
    pred_.resize(n_ + 2);
    add(entry(), n_ > 0 ? 0 : exit(), EdgeLabel::None);
    for (int i = 0; i < n_; ++i) {
      const ir::Stmt& s = body[i];
      int fall = i + 1 < n_ ? i + 1 : exit();
      switch (s.kind) {
        case ir::StmtKind::IfGoto:
          add(i, s.target, EdgeLabel::True);
          add(i, fall, EdgeLabel::False);
          break;
        case ir::StmtKind::Goto: add(i, s.target, EdgeLabel::None); break;
        case ir::StmtKind::Return: add(i, exit(), EdgeLabel::None); break;
        default: add(i, fall, EdgeLabel::None); break;
      }
    }
    reachable_.assign(n_ + 2, false);
    std::vector<int> stack{entry()};
    reachable_[entry()] = true;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (const auto& e : succ_[v])
        if (!reachable_[e.to]) {
          reachable_[e.to] = true;
          stack.push_back(e.to);
        }
    }
  }

  const ir::MethodDef& method() const { return *method_; }
  int statement_count() const { return n_; }
  int node_count() const { return n_ + 2; }
  int entry() const { return n_; }
  int exit() const { return n_ + 1; }
  bool is_statement(int node) const { return node >= 0 && node < n_; }
  const ir::Stmt& stmt(int node) const { return method_->body.at(node); }
  const std::vector<CfgEdge>& succ(int node) const { return succ_.at(node); }
  const std::vector<CfgEdge>& pred(int node) const { return pred_.at(node); }
  std::vector<CfgEdge> edges() const {
    std::vector<CfgEdge> out;
    for (const auto& s : succ_) out.insert(out.end(), s.begin(), s.end());
    return out;
  }
  // Statements not reachable from entry stay in the graph but are flagged.
  bool reachable(int node) const { return reachable_.at(node); }
  // Successor along the non-jump path (the return point of a call).
  int fallthrough(int node) const { return node + 1 < n_ ? node + 1 : exit(); }

 private:
  void add(int from, int to, EdgeLabel label) {
    succ_[from].push_back({from, to, label});
    pred_[to].push_back({from, to, label});
  }

  const ir::MethodDef* method_;
  int n_ = 0;
  std::vector<std::vector<CfgEdge>> succ_;
  std::vector<std::vector<CfgEdge>> pred_;
  std::vector<bool> reachable_;
};

inline Cfg build_cfg(const ir::MethodDef& method) { return Cfg(method); }

// Immediate postdominators by the iterative Cooper-Harvey-Kennedy scheme on
// the reverse graph. Nodes that cannot reach the exit are treated as if they
// had an edge to it. ipdom[exit] == exit.
inline std::vector<int> immediate_postdominators(const Cfg& cfg) {
  const int n = cfg.node_count();
  const int exit = cfg.exit();
  // Reverse graph successors = CFG predecessors; add exit links for sinks.
  std::vector<std::vector<int>> rsucc(n), rpred(n);
  std::vector<bool> reaches(n, false);
  {
    std::vector<int> stack{exit};
    reaches[exit] = true;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (const auto& e : cfg.pred(v))
        if (!reaches[e.from]) {
          reaches[e.from] = true;
          stack.push_back(e.from);
        }
    }
  }
  for (int v = 0; v < n; ++v) {
    for (const auto& e : cfg.succ(v)) {
      rsucc[e.to].push_back(v);
      rpred[v].push_back(e.to);
    }
    if (!reaches[v] && v != exit) {
      rsucc[exit].push_back(v);
      rpred[v].push_back(exit);
    }
  }
  // Reverse postorder of the reverse graph from exit.
  std::vector<int> order, po_index(n, -1);
  std::vector<bool> seen(n, false);
  std::function<void(int)> dfs = [&](int v) {
    seen[v] = true;
    for (int w : rsucc[v])
      if (!seen[w]) dfs(w);
    po_index[v] = static_cast<int>(order.size());
    order.push_back(v);
  };
  dfs(exit);
  std::vector<int> ipdom(n, -1);
  ipdom[exit] = exit;
  auto intersect = [&](int a, int b) {
    while (a != b) {
      while (po_index[a] < po_index[b]) a = ipdom[a];
      while (po_index[b] < po_index[a]) b = ipdom[b];
    }
    return a;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      int v = *it;
      if (v == exit) continue;
      int nd = -1;
      for (int p : rpred[v]) {
        if (ipdom[p] == -1) continue;
        nd = nd == -1 ? p : intersect(p, nd);
      }
      if (nd != -1 && ipdom[v] != nd) {
        ipdom[v] = nd;
        changed = true;
      }
    }
  }
  return ipdom;
}

// Direct control dependences: deps[x] = nodes control dependent on x.
inline std::vector<std::set<int>> control_dependences(const Cfg& cfg) {
  std::vector<int> ipdom = immediate_postdominators(cfg);
  std::vector<std::set<int>> deps(cfg.node_count());
  for (int x = 0; x < cfg.node_count(); ++x) {
    for (const auto& e : cfg.succ(x)) {
      // Walk from the successor up the postdominator tree to ipdom(x).
      int y = e.to;
      while (y != -1 && y != ipdom[x]) {
        deps[x].insert(y);
        if (y == ipdom[y]) break;
        y = ipdom[y];
      }
    }
  }
  return deps;
}

// Statements transitively control dependent on `branch`.
inline std::set<int> influence(const Cfg& cfg, int branch) {
  if (!cfg.is_statement(branch) || !cfg.stmt(branch).is_branch())
    throw std::invalid_argument("influence: node " + std::to_string(branch) + " of " +
                                cfg.method().qualified_name() + " is not a conditional branch");
  auto deps = control_dependences(cfg);
  std::set<int> out;
  std::vector<int> work(deps[branch].begin(), deps[branch].end());
  while (!work.empty()) {
    int v = work.back();
    work.pop_back();
    if (!cfg.is_statement(v) || !out.insert(v).second) continue;
    for (int w : deps[v]) work.push_back(w);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Call graph

enum class CallKind { Static, Virtual, Special, Async };

struct CallEdge {
  const ir::MethodDef* caller = nullptr;
  int stmt = 0;
  const ir::MethodDef* callee = nullptr;
  CallKind kind = CallKind::Virtual;
};

class CallGraph {
 public:
  std::string policy = "CHA";

  void add(CallEdge e) {
    if (!seen_.insert({e.caller, e.stmt, e.callee, e.kind}).second) return;
    out_[{e.caller, e.stmt}].push_back(edges_.size());
    in_[e.callee].push_back(edges_.size());
    edges_.push_back(e);
  }
  const std::vector<CallEdge>& edges() const { return edges_; }

  std::vector<CallEdge> callees(const ir::MethodDef* caller, int stmt) const {
    std::vector<CallEdge> out;
    auto it = out_.find({caller, stmt});
    if (it != out_.end())
      for (auto i : it->second) out.push_back(edges_[i]);
    return out;
  }
  std::vector<CallEdge> callers(const ir::MethodDef* callee) const {
    std::vector<CallEdge> out;
    auto it = in_.find(callee);
    if (it != in_.end())
      for (auto i : it->second) out.push_back(edges_[i]);
    return out;
  }
  bool has_edge(const ir::MethodDef* caller, int stmt, const ir::MethodDef* callee) const {
    for (const auto& e : callees(caller, stmt))
      if (e.callee == callee) return true;
    return false;
  }

 private:
  std::vector<CallEdge> edges_;
  std::set<std::tuple<const ir::MethodDef*, int, const ir::MethodDef*, CallKind>> seen_;
  std::map<std::pair<const ir::MethodDef*, int>, std::vector<std::size_t>> out_;
  std::map<const ir::MethodDef*, std::vector<std::size_t>> in_;
};

// CHA targets of a call statement inside `caller`.
inline std::vector<const ir::MethodDef*> call_targets(const ir::Program& p, const ir::MethodDef& caller,
                                                      const ir::Stmt& s) {
  std::vector<const ir::MethodDef*> out;
  auto push = [&](const ir::MethodDef* m) {
    if (m && std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  };
  ir::Signature sig{s.member, static_cast<int>(s.args.size())};
  if (s.kind == ir::StmtKind::StaticCall) {
    push(p.resolve_dispatch(s.class_name, sig));
    return out;
  }
  if (s.kind != ir::StmtKind::VirtualCall) return out;
  std::string type = caller.type_of(s.base);
  if (type.empty()) return out;
  if (s.special) {
    push(p.resolve_dispatch(type, sig));
    return out;
  }
  if (p.find_class(type)) {
    push(p.resolve_dispatch(type, sig));
    for (const auto* c : p.subtype_cone(type))
      if (auto* m = c->find_method(sig)) push(m);
  } else if (p.find_interface(type)) {
    for (const auto* c : p.subtype_cone(type)) push(p.resolve_dispatch(c->name, sig));
  }
  return out;
}

inline CallGraph build_call_graph(const ir::Program& p) {
  CallGraph cg;
  for (const auto& c : p.classes())
    for (const auto& m : c.methods)
      for (const auto& s : m.body) {
        if (!s.is_call()) continue;
        CallKind kind = s.kind == ir::StmtKind::StaticCall ? CallKind::Static
                        : s.special                         ? CallKind::Special
                                                            : CallKind::Virtual;
        for (const auto* t : call_targets(p, m, s)) cg.add({&m, s.id, t, kind});
      }
  return cg;
}

// ---------------------------------------------------------------------------
// Interprocedural CFG rooted at one API method

enum class IcfgEdgeKind { Intra, Call, Return, AsyncCall, AsyncReturn };

struct IcfgEdge {
  int from = 0;
  int to = 0;
  IcfgEdgeKind kind = IcfgEdgeKind::Intra;
  EdgeLabel label = EdgeLabel::None;
};

// One materialized method body. Synchronous callees are shared per root;
// asynchronous handlers are inlined once per sendMessage site.
struct MethodInstance {
  const ir::MethodDef* method = nullptr;
  Cfg cfg;
  int offset = 0;           // global id of local node 0
  int parent = -1;          // instance that first reached this one
  int parent_call = -1;     // local call node in the parent
  int depth = 1;            // methods on the discovery path, root = 1
  bool async = false;       // reached through a sendMessage link
};

class Icfg {
 public:
  const ir::MethodDef* root = nullptr;
  std::vector<MethodInstance> instances;
  std::vector<IcfgEdge> edges;

  int node_count() const {
    return instances.empty() ? 0 : instances.back().offset + instances.back().cfg.node_count();
  }
  int global(int instance, int local) const { return instances.at(instance).offset + local; }
  std::pair<int, int> locate(int node) const {
    for (int i = static_cast<int>(instances.size()) - 1; i >= 0; --i)
      if (node >= instances[i].offset) return {i, node - instances[i].offset};
    throw std::out_of_range("icfg node " + std::to_string(node));
  }
  int entry() const { return global(0, instances.at(0).cfg.entry()); }
  int exit() const { return global(0, instances.at(0).cfg.exit()); }

  const std::vector<int>& succ_edges(int node) const { return succ_.at(node); }
  const std::vector<int>& pred_edges(int node) const { return pred_.at(node); }

  // Interprocedural callee instances entered from a call node.
  std::vector<int> callee_instances(int call_node) const {
    std::vector<int> out;
    for (int e : succ_.at(call_node)) {
      const auto& edge = edges[e];
      if (edge.kind == IcfgEdgeKind::Call || edge.kind == IcfgEdgeKind::AsyncCall)
        out.push_back(locate(edge.to).first);
    }
    return out;
  }
  // Number of interprocedural edges.
  int interprocedural_edge_count() const {
    int k = 0;
    for (const auto& e : edges) k += e.kind != IcfgEdgeKind::Intra;
    return k;
  }

  void finalize() {
    succ_.assign(node_count(), {});
    pred_.assign(node_count(), {});
    for (std::size_t i = 0; i < edges.size(); ++i) {
      succ_[edges[i].from].push_back(static_cast<int>(i));
      pred_[edges[i].to].push_back(static_cast<int>(i));
    }
  }

 private:
  std::vector<std::vector<int>> succ_;
  std::vector<std::vector<int>> pred_;
};

struct IcfgOptions {
  int max_depth = 16;  // methods on any discovery path
  // Call sites that must not be inlined (callback call sites).
  std::function<bool(const ir::MethodDef&, int)> is_opaque_site;
};

// Materializes framework method bodies reachable from `api` along the call
// graph. Call/return edge pairs are always added together.
inline Icfg build_icfg(const ir::Program& p, const ir::MethodDef& api, const CallGraph& cg,
                       const IcfgOptions& opt = {}) {
  Icfg g;
  g.root = &api;
  std::map<const ir::MethodDef*, int> shared;
  auto make = [&](const ir::MethodDef* m, int parent, int parent_call, int depth, bool async) {
    MethodInstance inst{m, Cfg(*m), 0, parent, parent_call, depth, async};
    inst.offset = g.instances.empty() ? 0 : g.instances.back().offset + g.instances.back().cfg.node_count();
    g.instances.push_back(std::move(inst));
    return static_cast<int>(g.instances.size()) - 1;
  };
  shared[&api] = make(&api, -1, -1, 1, false);
  auto on_async_stack = [&](int inst, const ir::MethodDef* m) {
    for (int i = inst; i != -1; i = g.instances[i].parent)
      if (g.instances[i].method == m) return true;
    return false;
  };
  std::vector<std::tuple<int, int, int, bool>> links;  // caller inst, call node, callee inst, async
  for (std::size_t i = 0; i < g.instances.size(); ++i) {
    const int inst = static_cast<int>(i);
    const ir::MethodDef* m = g.instances[inst].method;
    const int depth = g.instances[inst].depth;
    for (int s = 0; s < static_cast<int>(m->body.size()); ++s) {
      if (!m->body[s].is_call()) continue;
      if (opt.is_opaque_site && opt.is_opaque_site(*m, s)) continue;
      for (const auto& e : cg.callees(m, s)) {
        const ir::MethodDef* callee = e.callee;
        if (!callee->has_body || p.origin(callee->owner) != ir::Origin::Framework) continue;
        if (e.kind == CallKind::Async) {
          if (depth + 1 > opt.max_depth || on_async_stack(inst, callee)) continue;
          int ci = make(callee, inst, s, depth + 1, true);
          links.emplace_back(inst, s, ci, true);
          continue;
        }
        auto it = shared.find(callee);
        int ci;
        if (it != shared.end()) {
          ci = it->second;
        } else {
          if (depth + 1 > opt.max_depth) continue;
          ci = make(callee, inst, s, depth + 1, g.instances[inst].async);
          shared[callee] = ci;
        }
        links.emplace_back(inst, s, ci, false);
      }
    }
  }
  for (std::size_t i = 0; i < g.instances.size(); ++i) {
    const auto& inst = g.instances[i];
    for (const auto& e : inst.cfg.edges())
      g.edges.push_back({inst.offset + e.from, inst.offset + e.to, IcfgEdgeKind::Intra, e.label});
  }
  for (auto [ci, call, ti, async] : links) {
    const auto& caller = g.instances[ci];
    const auto& callee = g.instances[ti];
    int site = caller.offset + call;
    int ret = caller.offset + caller.cfg.fallthrough(call);
    g.edges.push_back({site, callee.offset + callee.cfg.entry(), async ? IcfgEdgeKind::AsyncCall : IcfgEdgeKind::Call,
                       EdgeLabel::None});
    g.edges.push_back({callee.offset + callee.cfg.exit(), ret, async ? IcfgEdgeKind::AsyncReturn : IcfgEdgeKind::Return,
                       EdgeLabel::None});
  }
  g.finalize();
  return g;
}

}  // namespace pcs::graphs
