#pragma once

// Marked ICFGs and the predicate-callback summary graph built from them.

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "pcs/callbacks.hpp"
#include "pcs/graphs.hpp"
#include "pcs/predicates.hpp"
#include "pcs/receivers.hpp"
#include "pcs/updates.hpp"

namespace pcs::summary {

using graphs::EdgeLabel;

inline std::string api_id(const ir::MethodDef& m) { return m.qualified_name() + "/" + std::to_string(m.params.size()); }

struct UpdatePayload {
  sym::AbstractVariable target;
  updates::Effect effect;
  bool operator==(const UpdatePayload&) const = default;
};

struct CallbackPayload {
  callbacks::CallbackSignature signature;
  std::vector<receivers::Receiver> receivers;
  bool async = false;
  bool operator==(const CallbackPayload&) const = default;
};

// ICFG of one API method with callback, predicate and update nodes marked.
struct MarkedIcfg {
  graphs::Icfg icfg;
  std::map<int, CallbackPayload> callbacks;
  std::map<int, predicates::AbstractExpr> predicates;
  std::map<int, std::vector<UpdatePayload>> updates;
  std::set<int> partial_calls;  // call nodes with a CG target that was not inlined
  std::vector<bool> relevant;   // per instance: reaches a marked node

  bool marked(int n) const { return callbacks.count(n) || predicates.count(n) || updates.count(n); }
  std::size_t marked_count() const { return callbacks.size() + predicates.size() + updates.size(); }

  void compute_relevance() {
    const int k = static_cast<int>(icfg.instances.size());
    relevant.assign(k, false);
    for (int n = 0; n < icfg.node_count(); ++n)
      if (marked(n)) relevant[icfg.locate(n).first] = true;
    for (bool changed = true; changed;) {
      changed = false;
      for (const auto& e : icfg.edges) {
        if (e.kind != graphs::IcfgEdgeKind::Call && e.kind != graphs::IcfgEdgeKind::AsyncCall) continue;
        int from = icfg.locate(e.from).first, to = icfg.locate(e.to).first;
        if (relevant[to] && !relevant[from]) relevant[from] = changed = true;
      }
    }
  }

  // Successors used by summary generation. Calls step into callee bodies
  // that reach a marked node; a sendMessage site continues only into its
  // inlined handlers.
  std::vector<std::pair<int, EdgeLabel>> succ(int n) const {
    std::vector<std::pair<int, EdgeLabel>> out;
    std::vector<const graphs::IcfgEdge*> sync, async;
    const graphs::IcfgEdge* fall = nullptr;
    for (int ei : icfg.succ_edges(n)) {
      const auto& e = icfg.edges[ei];
      if (e.kind == graphs::IcfgEdgeKind::Call) sync.push_back(&e);
      else if (e.kind == graphs::IcfgEdgeKind::AsyncCall) async.push_back(&e);
      else if (e.kind == graphs::IcfgEdgeKind::Intra) fall = &e;
    }
    if (sync.empty() && async.empty()) {
      for (int ei : icfg.succ_edges(n)) out.emplace_back(icfg.edges[ei].to, icfg.edges[ei].label);
      return out;
    }
    bool keep_fall = sync.empty() ? true : partial_calls.count(n) > 0;
    for (const auto* e : async.empty() ? sync : async) {
      if (relevant[icfg.locate(e->to).first]) {
        out.emplace_back(e->to, EdgeLabel::None);
        if (!async.empty()) keep_fall = false;
      } else {
        keep_fall = true;
      }
    }
    if (keep_fall && fall) out.emplace_back(fall->to, fall->label);
    return out;
  }
};

struct MarkOptions {
  int max_chain = 16;
  int k_limit = 5;
};

// Builds the ICFG of `api` and marks callback and predicate nodes. Update
// nodes need the pool of every API and are added by mark_updates().
inline MarkedIcfg mark_icfg(const ir::Program& p, const ir::MethodDef& api, const graphs::CallGraph& cg,
                            const callbacks::SignatureSet& sigs, const callbacks::CallSiteSet& cs,
                            const MarkOptions& opt = {}) {
  graphs::IcfgOptions io;
  io.max_depth = opt.max_chain;
  io.is_opaque_site = [&](const ir::MethodDef& m, int s) {
    return callbacks::match_callback(p, sigs, m, m.body[s]).has_value();
  };
  MarkedIcfg mg{graphs::build_icfg(p, api, cg, io), {}, {}, {}, {}, {}};
  const auto& g = mg.icfg;

  for (int i = 0; i < static_cast<int>(g.instances.size()); ++i) {
    const auto& inst = g.instances[i];
    for (const auto& s : inst.method->body) {
      if (!s.is_call()) continue;
      int node = g.global(i, s.id);
      if (auto sig = callbacks::match_callback(p, sigs, *inst.method, s)) {
        CallbackPayload cb{*sig, {}, inst.async};
        std::set<receivers::Receiver> recv;
        sym::ChainContext ctx = sym::context_of_instance(g, i);
        callbacks::CallChain own{ctx.methods, ctx.hops, {}, s.id};
        for (auto r : receivers::receivers_from_aliases(receivers::backward_alias(s.base, own, opt.k_limit)))
          recv.insert(r);
        for (std::size_t k = 0; k < cs.sites.size(); ++k) {
          if (cs.sites[k].method != inst.method || cs.sites[k].stmt != s.id) continue;
          for (const auto& ch : cs.chains[k])
            if (ch.head() == &api)
              for (auto r : receivers::receivers_from_aliases(receivers::backward_alias(s.base, ch, opt.k_limit)))
                recv.insert(r);
        }
        if (recv.size() > 1) recv.erase(receivers::Receiver::unknown());
        cb.receivers.assign(recv.begin(), recv.end());
        mg.callbacks.emplace(node, std::move(cb));
        continue;
      }
      std::set<const ir::MethodDef*> inlined;
      for (int ci : g.callee_instances(node)) inlined.insert(g.instances[ci].method);
      for (const auto& e : cg.callees(inst.method, s.id))
        if (e.kind != graphs::CallKind::Async && !inlined.count(e.callee)) mg.partial_calls.insert(node);
    }
  }

  // Predicate nodes along the discovery path of every callback node.
  for (const auto& [node, cb] : mg.callbacks) {
    auto [inst, point] = g.locate(node);
    while (inst != -1) {
      for (int b : predicates::identify_predicate_nodes(g.instances[inst].cfg, point)) {
        int pn = g.global(inst, b);
        if (!mg.predicates.count(pn))
          mg.predicates.emplace(pn, predicates::back_substitute(sym::context_of_instance(g, inst), b));
      }
      point = g.instances[inst].parent_call;
      inst = g.instances[inst].parent;
    }
  }
  mg.compute_relevance();
  return mg;
}

inline std::vector<sym::AbstractVariable> predicate_variables(const MarkedIcfg& mg) {
  std::vector<sym::AbstractVariable> out;
  for (const auto& [n, e] : mg.predicates)
    for (auto& v : e.variables()) out.push_back(v);
  return out;
}

inline void mark_updates(const ir::Program& p, MarkedIcfg& mg, const updates::AbstractVariablePool& pool,
                         const updates::TemplateTable& table) {
  auto add = [&](const std::vector<updates::UpdateNode>& found) {
    for (const auto& u : found)
      if (!mg.callbacks.count(u.node) && !mg.predicates.count(u.node)) {
        auto& v = mg.updates[u.node];
        UpdatePayload up{u.target, u.effect};
        if (std::find(v.begin(), v.end(), up) == v.end()) v.push_back(up);
      }
  };
  add(updates::find_update_assignments(mg.icfg, pool));
  add(updates::match_update_templates(p, mg.icfg, pool, table));
  mg.compute_relevance();
}

// ---------------------------------------------------------------------------
// The summary graph

enum class NodeKind { Entry, Exit, Callback, Predicate, Update };

inline std::string_view to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Entry: return "entry";
    case NodeKind::Exit: return "exit";
    case NodeKind::Callback: return "callback";
    case NodeKind::Predicate: return "predicate";
    case NodeKind::Update: return "update";
  }
  return "?";
}

struct PcsNode {
  int id = 0;
  NodeKind kind = NodeKind::Entry;
  std::string method;  // qualified name of the containing method
  int stmt = -1;
  std::string text;  // statement text
  CallbackPayload callback;
  predicates::AbstractExpr predicate;
  std::vector<UpdatePayload> updates;
  bool operator==(const PcsNode&) const = default;

  std::string label() const {
    if (kind == NodeKind::Entry || kind == NodeKind::Exit) return std::string(to_string(kind));
    return method + "#" + std::to_string(stmt) + ": " + text;
  }
};

struct PcsEdge {
  int from = 0;
  int to = 0;
  EdgeLabel label = EdgeLabel::None;
  auto operator<=>(const PcsEdge&) const = default;
};

struct Pcs {
  std::string api;
  std::vector<PcsNode> nodes;  // nodes[0] entry, nodes.back() exit
  std::vector<PcsEdge> edges;  // sorted, unique
  bool operator==(const Pcs&) const = default;

  int entry() const { return 0; }
  int exit() const { return static_cast<int>(nodes.size()) - 1; }
  int count(NodeKind k) const {
    return static_cast<int>(std::count_if(nodes.begin(), nodes.end(), [k](const auto& n) { return n.kind == k; }));
  }
  std::vector<PcsEdge> out_edges(int n) const {
    std::vector<PcsEdge> out;
    for (const auto& e : edges)
      if (e.from == n) out.push_back(e);
    return out;
  }
  bool is_trivial() const { return nodes.size() == 2; }
};

// Worklist over (n, q, label): q is the last marked node on the path and
// label the outcome taken when q is a predicate.
inline std::set<std::tuple<int, int, EdgeLabel>> summary_edges(const MarkedIcfg& mg) {
  const auto& g = mg.icfg;
  std::set<std::tuple<int, int, EdgeLabel>> edges;
  std::set<std::tuple<int, int, EdgeLabel>> visited;
  std::deque<std::tuple<int, int, EdgeLabel>> work;
  auto push_from = [&](int q) {
    bool pred = mg.predicates.count(q) > 0;
    for (auto [s, l] : mg.succ(q)) {
      auto item = std::make_tuple(s, q, pred ? l : EdgeLabel::None);
      if (visited.insert(item).second) work.push_back(item);
    }
  };
  push_from(g.entry());
  while (!work.empty()) {
    auto [n, q, label] = work.front();
    work.pop_front();
    if (mg.marked(n) || n == g.exit()) {
      edges.insert({q, n, label});
      if (n != g.exit()) push_from(n);
      continue;
    }
    for (auto [s, l] : mg.succ(n)) {
      auto item = std::make_tuple(s, q, label);
      if (visited.insert(item).second) work.push_back(item);
    }
  }
  return edges;
}

inline PcsNode make_node(const MarkedIcfg& mg, int n) {
  const auto& g = mg.icfg;
  auto [inst, local] = g.locate(n);
  const ir::MethodDef& m = *g.instances[inst].method;
  PcsNode out;
  out.method = m.qualified_name();
  out.stmt = local;
  out.text = ir::stmt_text(m.body.at(local));
  if (auto it = mg.callbacks.find(n); it != mg.callbacks.end()) {
    out.kind = NodeKind::Callback;
    out.callback = it->second;
  } else if (auto it = mg.predicates.find(n); it != mg.predicates.end()) {
    out.kind = NodeKind::Predicate;
    out.predicate = it->second;
  } else {
    out.kind = NodeKind::Update;
    out.updates = mg.updates.at(n);
  }
  return out;
}

// Nodes are numbered entry first, then marked nodes breadth-first, exit
// last. Nodes not on an entry-to-exit path are dropped.
inline Pcs generate_summary_graph(const MarkedIcfg& mg, std::string api) {
  const auto& g = mg.icfg;
  auto raw = summary_edges(mg);
  std::map<int, std::vector<int>> fwd, bwd;
  for (auto [a, b, l] : raw) {
    fwd[a].push_back(b);
    bwd[b].push_back(a);
  }
  auto reach = [](int start, std::map<int, std::vector<int>>& adj) {
    std::set<int> seen{start};
    std::vector<int> stack{start};
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int w : adj[v])
        if (seen.insert(w).second) stack.push_back(w);
    }
    return seen;
  };
  auto to_exit = reach(g.exit(), bwd);
  // Breadth-first from entry, true outcomes before false, ties by ICFG node.
  std::map<int, std::vector<std::pair<int, int>>> ordered;
  for (auto [a, b, l] : raw) ordered[a].emplace_back(l == EdgeLabel::True ? 0 : l == EdgeLabel::False ? 1 : 2, b);
  std::vector<int> keep;
  std::set<int> seen{g.entry()};
  std::deque<int> queue{g.entry()};
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    auto next = ordered[v];
    std::sort(next.begin(), next.end());
    for (auto [rank, w] : next) {
      if (w == g.exit() || !to_exit.count(w) || !seen.insert(w).second) continue;
      keep.push_back(w);
      queue.push_back(w);
    }
  }

  Pcs pcs;
  pcs.api = std::move(api);
  std::map<int, int> id;
  pcs.nodes.push_back({});
  id[g.entry()] = 0;
  for (int n : keep) {
    id[n] = static_cast<int>(pcs.nodes.size());
    pcs.nodes.push_back(make_node(mg, n));
    pcs.nodes.back().id = id[n];
  }
  id[g.exit()] = static_cast<int>(pcs.nodes.size());
  PcsNode exit;
  exit.kind = NodeKind::Exit;
  exit.id = id[g.exit()];
  pcs.nodes.push_back(exit);

  std::set<PcsEdge> edges;
  for (auto [a, b, l] : raw)
    if (id.count(a) && id.count(b)) edges.insert({id[a], id[b], l});
  if (edges.empty()) edges.insert({0, pcs.exit(), EdgeLabel::None});
  pcs.edges.assign(edges.begin(), edges.end());
  return pcs;
}

struct SummaryStats {
  std::string api;
  int icfg_nodes = 0;
  int pcs_nodes = 0;
  int callbacks = 0;
  int predicates = 0;
  int updates = 0;
  double reduction() const { return icfg_nodes ? 1.0 - double(pcs_nodes) / icfg_nodes : 0.0; }
};

inline SummaryStats stats_of(const MarkedIcfg& mg, const Pcs& pcs) {
  return {pcs.api,
          mg.icfg.node_count(),
          static_cast<int>(pcs.nodes.size()),
          pcs.count(NodeKind::Callback),
          pcs.count(NodeKind::Predicate),
          pcs.count(NodeKind::Update)};
}

}  // namespace pcs::summary
