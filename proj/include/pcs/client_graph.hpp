#pragma once

// Inter-callback ICFG: an app top-level method's ICFG with a copy of the
// stored summary spliced in at every API call site and each summary
// callback node linked to the app methods implementing it.

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pcs/graphs.hpp"
#include "pcs/store.hpp"
#include "pcs/summary.hpp"

namespace pcs::client {

using graphs::EdgeLabel;

enum class NodeKind { App, Pcs, CallbackReturn };

struct Node {
  NodeKind kind = NodeKind::App;
  int owner = 0;  // app instance index, or splice index
  int local = 0;  // CFG node, or summary node id
};

enum class EdgeKind { Intra, Call, Return, Splice, SpliceReturn, Summary, CallbackImpl, CallbackReturn, Bypass };

struct Edge {
  int from = 0;
  int to = 0;
  EdgeLabel label = EdgeLabel::None;
  EdgeKind kind = EdgeKind::Intra;
};

// Locals of one app method grouped by copy statements, with the string
// constants each group may hold.
class CopyClasses {
 public:
  explicit CopyClasses(const ir::MethodDef& m) {
    for (const auto& p : m.params) find(p.name);
    for (const auto& s : m.body)
      if (s.kind == ir::StmtKind::AssignLocal && s.lhs.is_local()) unite(s.dst, s.lhs.name);
    for (const auto& s : m.body)
      if (s.kind == ir::StmtKind::AssignLocal && s.lhs.kind == ir::Operand::Kind::Str)
        strings_[find(s.dst)].insert(s.lhs.name);
  }
  std::string find(const std::string& x) {
    auto it = parent_.find(x);
    if (it == parent_.end()) return parent_[x] = x;
    if (it->second == x) return x;
    return it->second = find(it->second);
  }
  std::string rep(const std::string& x) const {
    std::string cur = x;
    for (auto it = parent_.find(cur); it != parent_.end() && it->second != cur; it = parent_.find(cur)) cur = it->second;
    return cur;
  }
  std::set<std::string> strings(const std::string& x) const {
    auto it = strings_.find(rep(x));
    return it == strings_.end() ? std::set<std::string>{} : it->second;
  }

 private:
  void unite(const std::string& a, const std::string& b) {
    std::string ra = find(a), rb = find(b);
    if (ra != rb) parent_[std::max(ra, rb)] = std::min(ra, rb);
  }
  std::map<std::string, std::string> parent_;
  std::map<std::string, std::set<std::string>> strings_;
};

struct AppInstance {
  const ir::MethodDef* method = nullptr;
  graphs::Cfg cfg;
  int offset = 0;
  CopyClasses copies;
};

struct Splice {
  const summary::Pcs* pcs = nullptr;
  const ir::MethodDef* api = nullptr;
  int app_instance = 0;
  int call_stmt = 0;
  int offset = 0;
  std::map<int, int> callback_return;      // summary callback node -> return node
  std::map<int, std::vector<int>> impls;  // summary callback node -> impl instances
};

struct InterCallbackIcfg {
  const ir::MethodDef* top = nullptr;
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  std::vector<AppInstance> apps;
  std::vector<Splice> splices;
  std::vector<std::string> diagnostics;
  std::set<const ir::MethodDef*> impl_targets;
  int passthrough_calls = 0;

  int entry() const { return apps.at(0).offset + apps[0].cfg.entry(); }
  int exit() const { return apps.at(0).offset + apps[0].cfg.exit(); }
  const std::vector<int>& succ(int n) const { return succ_.at(n); }
  const std::vector<int>& pred(int n) const { return pred_.at(n); }

  bool is_pcs(int n, summary::NodeKind k) const {
    const Node& node = nodes[n];
    return node.kind == NodeKind::Pcs && splices[node.owner].pcs->nodes[node.local].kind == k;
  }
  const summary::PcsNode* pcs_node(int n) const {
    const Node& node = nodes[n];
    return node.kind == NodeKind::Pcs ? &splices[node.owner].pcs->nodes[node.local] : nullptr;
  }
  const ir::Stmt* app_stmt(int n) const {
    const Node& node = nodes[n];
    if (node.kind != NodeKind::App) return nullptr;
    const auto& cfg = apps[node.owner].cfg;
    return cfg.is_statement(node.local) ? &cfg.stmt(node.local) : nullptr;
  }
  // Entry of an app method instance.
  bool is_app_entry(int n) const {
    const Node& node = nodes[n];
    return node.kind == NodeKind::App && node.local == apps[node.owner].cfg.entry();
  }
  const ir::MethodDef* app_method(int n) const {
    const Node& node = nodes[n];
    return node.kind == NodeKind::App ? apps[node.owner].method : nullptr;
  }

  std::string label(int n) const {
    const Node& node = nodes[n];
    switch (node.kind) {
      case NodeKind::App: {
        const auto& a = apps[node.owner];
        if (node.local == a.cfg.entry()) return a.method->qualified_name() + ":entry";
        if (node.local == a.cfg.exit()) return a.method->qualified_name() + ":exit";
        return a.method->qualified_name() + "#" + std::to_string(node.local) + ": " + ir::stmt_text(a.cfg.stmt(node.local));
      }
      case NodeKind::Pcs: {
        const auto& sp = splices[node.owner];
        return "[" + sp.pcs->api + " @" + apps[sp.app_instance].method->qualified_name() + "#" +
               std::to_string(sp.call_stmt) + "] " + sp.pcs->nodes[node.local].label();
      }
      case NodeKind::CallbackReturn: {
        const auto& sp = splices[node.owner];
        return "[" + sp.pcs->api + " @" + apps[sp.app_instance].method->qualified_name() + "#" +
               std::to_string(sp.call_stmt) + "] return of " + std::to_string(node.local);
      }
    }
    return "?";
  }

  int add_node(Node n) {
    nodes.push_back(n);
    succ_.emplace_back();
    pred_.emplace_back();
    return static_cast<int>(nodes.size()) - 1;
  }
  void add_edge(Edge e) {
    edges.push_back(e);
    succ_[e.from].push_back(static_cast<int>(edges.size()) - 1);
    pred_[e.to].push_back(static_cast<int>(edges.size()) - 1);
  }

 private:
  std::vector<std::vector<int>> succ_;
  std::vector<std::vector<int>> pred_;
};

struct ClientContext {
  const ir::Program& program;
  const store::SummaryStore& store;
  callbacks::SignatureSet signatures;
};

inline ClientContext make_context(const ir::Program& p, const store::SummaryStore& s) {
  return {p, s, callbacks::callback_signatures(p)};
}
// The context refers to both arguments.
ClientContext make_context(ir::Program&&, const store::SummaryStore&) = delete;
ClientContext make_context(const ir::Program&, store::SummaryStore&&) = delete;

namespace detail {

// Static type of `local.path` in `m`, empty when a step does not resolve.
inline std::string path_type(const ir::Program& p, const ir::MethodDef& m, const std::string& local,
                             const sym::AccessChain& path) {
  std::string t = m.type_of(local);
  for (const auto& tok : path) {
    if (tok.call || t.empty()) return "";
    const ir::FieldDef* f = p.resolve_field(t, tok.name);
    if (!f) return "";
    t = f->type;
  }
  return t;
}

inline void add_cone(const ir::Program& p, const std::string& type, std::set<std::string>& out) {
  if (type.empty()) return;
  for (const auto* c : p.subtype_cone(type)) out.insert(c->name);
}

}  // namespace detail

// Possible dynamic types of a summary callback node's receiver at an API call.
inline std::set<std::string> receiver_types(const ClientContext& ctx, const AppInstance& caller, const ir::Stmt& call,
                                            const receivers::Receiver& r) {
  const ir::Program& p = ctx.program;
  std::set<std::string> out;
  if (r.kind == receivers::Receiver::Kind::This) {
    if (call.kind == ir::StmtKind::VirtualCall) detail::add_cone(p, caller.method->type_of(call.base), out);
    return out;
  }
  if (r.kind != receivers::Receiver::Kind::Param || r.index >= static_cast<int>(call.args.size())) return out;
  const ir::Operand& arg = call.args[r.index];
  // Component names travel as strings and name the receiving class.
  std::set<std::string> names;
  if (arg.kind == ir::Operand::Kind::Str) names.insert(arg.name);
  else if (arg.is_local()) names = caller.copies.strings(arg.name);
  for (const auto& n : names)
    if (p.find_class(n)) detail::add_cone(p, n, out);
  if (!names.empty() || !arg.is_local()) return out;
  detail::add_cone(p, detail::path_type(p, *caller.method, arg.name, r.path), out);
  return out;
}

inline std::vector<const ir::MethodDef*> resolve_callback_impl(const ClientContext& ctx, const summary::PcsNode& node,
                                                                const AppInstance& caller, const ir::Stmt& call,
                                                                std::vector<std::string>* diagnostics = nullptr) {
  std::set<const ir::MethodDef*> impls;
  const auto& sig = node.callback.signature.sig;
  for (const auto& r : node.callback.receivers) {
    if (r.kind == receivers::Receiver::Kind::Unknown) {
      if (diagnostics)
        diagnostics->push_back("skipped callback " + node.callback.signature.str() + " with unknown receiver at " +
                               caller.method->qualified_name() + "#" + std::to_string(call.id));
      continue;
    }
    for (const auto& t : receiver_types(ctx, caller, call, r)) {
      const ir::MethodDef* m = ctx.program.resolve_dispatch(t, sig);
      if (m && m->has_body && ctx.program.origin(m->owner) == ir::Origin::App) impls.insert(m);
    }
  }
  std::vector<const ir::MethodDef*> out(impls.begin(), impls.end());
  std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->qualified_name() < b->qualified_name(); });
  return out;
}

inline InterCallbackIcfg build_inter_callback_icfg(const ClientContext& ctx, const ir::MethodDef& top) {
  const ir::Program& p = ctx.program;
  InterCallbackIcfg g;
  g.top = &top;
  std::map<const ir::MethodDef*, int> instance_of;
  std::deque<int> work;
  auto instance = [&](const ir::MethodDef* m) {
    if (auto it = instance_of.find(m); it != instance_of.end()) return it->second;
    int idx = static_cast<int>(g.apps.size());
    g.apps.push_back({m, graphs::Cfg(*m), static_cast<int>(g.nodes.size()), CopyClasses(*m)});
    for (int n = 0; n < g.apps.back().cfg.node_count(); ++n) g.add_node({NodeKind::App, idx, n});
    instance_of[m] = idx;
    work.push_back(idx);
    return idx;
  };
  instance(&top);

  struct PendingCallback {
    int splice;
    int pcs_node;
  };
  std::vector<PendingCallback> pending;

  auto splice = [&](int inst, const ir::Stmt& call, const ir::MethodDef* api, const summary::Pcs* pcs) {
    int si = static_cast<int>(g.splices.size());
    Splice sp{pcs, api, inst, call.id, static_cast<int>(g.nodes.size()), {}, {}};
    g.splices.push_back(sp);
    for (const auto& n : pcs->nodes) g.add_node({NodeKind::Pcs, si, n.id});
    for (const auto& n : pcs->nodes)
      if (n.kind == summary::NodeKind::Callback) {
        g.splices[si].callback_return[n.id] = g.add_node({NodeKind::CallbackReturn, si, n.id});
        pending.push_back({si, n.id});
      }
    const auto& s = g.splices[si];
    for (const auto& e : pcs->edges) {
      int from = pcs->nodes[e.from].kind == summary::NodeKind::Callback ? s.callback_return.at(e.from) : s.offset + e.from;
      g.add_edge({from, s.offset + e.to, e.label, EdgeKind::Summary});
    }
    const auto& a = g.apps[inst];
    g.add_edge({a.offset + call.id, s.offset + pcs->entry(), EdgeLabel::None, EdgeKind::Splice});
    g.add_edge({s.offset + pcs->exit(), a.offset + a.cfg.fallthrough(call.id), EdgeLabel::None, EdgeKind::SpliceReturn});
  };

  std::vector<std::tuple<int, int, int>> calls;  // caller inst, stmt, callee inst
  while (!work.empty() || !pending.empty()) {
    while (!work.empty()) {
      int inst = work.front();
      work.pop_front();
      const ir::MethodDef* m = g.apps[inst].method;
      // Calls whose every target is spliced or inlined lose the direct
      // fall-through edge.
      std::set<int> covered;
      for (const auto& s : m->body) {
        if (!s.is_call()) continue;
        auto targets = graphs::call_targets(p, *m, s);
        bool all = !targets.empty();
        for (const auto* t : targets) {
          bool framework = p.origin(t->owner) == ir::Origin::Framework;
          if (framework && t->is_api) {
            auto it = ctx.store.summaries.find(summary::api_id(*t));
            if (it != ctx.store.summaries.end()) {
              splice(inst, s, t, &it->second);
            } else {
              all = false;
              ++g.passthrough_calls;
              g.diagnostics.push_back("no summary for " + summary::api_id(*t) + " at " + m->qualified_name() + "#" +
                                      std::to_string(s.id));
            }
          } else if (!framework && t->has_body) {
            calls.emplace_back(inst, s.id, instance(t));
          } else {
            all = false;
          }
        }
        if (all) covered.insert(s.id);
      }
      const auto& a = g.apps[inst];
      for (const auto& e : a.cfg.edges())
        if (!covered.count(e.from)) g.add_edge({a.offset + e.from, a.offset + e.to, e.label, EdgeKind::Intra});
    }
    while (!pending.empty()) {
      auto [si, pn] = pending.back();
      pending.pop_back();
      const Splice& sp = g.splices[si];
      const auto& caller = g.apps[sp.app_instance];
      const ir::Stmt& call = caller.method->body[sp.call_stmt];
      const auto& node = sp.pcs->nodes[pn];
      auto impls = resolve_callback_impl(ctx, node, caller, call, &g.diagnostics);
      std::vector<int> targets;
      for (const auto* m : impls) {
        targets.push_back(instance(m));
        g.impl_targets.insert(m);
      }
      g.splices[si].impls[pn] = targets;
    }
  }
  // Interprocedural edges once every instance exists.
  for (auto [ci, stmt, ti] : calls) {
    const auto& caller = g.apps[ci];
    const auto& callee = g.apps[ti];
    g.add_edge({caller.offset + stmt, callee.offset + callee.cfg.entry(), EdgeLabel::None, EdgeKind::Call});
    g.add_edge({callee.offset + callee.cfg.exit(), caller.offset + caller.cfg.fallthrough(stmt), EdgeLabel::None,
                EdgeKind::Return});
  }
  for (const auto& sp : g.splices)
    for (const auto& [pn, targets] : sp.impls) {
      int c = sp.offset + pn, r = sp.callback_return.at(pn);
      if (targets.empty()) g.add_edge({c, r, EdgeLabel::None, EdgeKind::Bypass});
      for (int ti : targets) {
        const auto& callee = g.apps[ti];
        g.add_edge({c, callee.offset + callee.cfg.entry(), EdgeLabel::None, EdgeKind::CallbackImpl});
        g.add_edge({callee.offset + callee.cfg.exit(), r, EdgeLabel::None, EdgeKind::CallbackReturn});
      }
    }
  return g;
}

// App methods overriding a callback signature, minus those reached as a
// callback implementation from some other candidate's graph.
inline std::vector<const ir::MethodDef*> top_level_methods(const ClientContext& ctx) {
  const ir::Program& p = ctx.program;
  std::vector<const ir::MethodDef*> candidates;
  for (const auto& c : p.classes()) {
    if (c.origin != ir::Origin::App) continue;
    for (const auto& m : c.methods) {
      if (!m.has_body || m.is_static) continue;
      for (const ir::ClassDef* s = p.find_class(c.super_name); s; s = s->name == "Object" ? nullptr : p.find_class(s->super_name)) {
        if (const auto* d = s->find_method(m.signature());
            d && ctx.signatures.count({s->name, m.signature(), false})) {
          candidates.push_back(&m);
          break;
        }
      }
    }
  }
  std::set<const ir::MethodDef*> targeted;
  for (const auto* m : candidates) {
    auto g = build_inter_callback_icfg(ctx, *m);
    for (const auto* t : g.impl_targets)
      if (t != m) targeted.insert(t);
  }
  std::vector<const ir::MethodDef*> out;
  for (const auto* m : candidates)
    if (!targeted.count(m)) out.push_back(m);
  std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->qualified_name() < b->qualified_name(); });
  return out;
}

}  // namespace pcs::client
