#pragma once

// Framework-side pipeline: call graph, callback sites and chains, marking,
// update detection and summary generation for every API method.

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "pcs/callbacks.hpp"
#include "pcs/store.hpp"
#include "pcs/summary.hpp"
#include "pcs/updates.hpp"

namespace pcs::pipeline {

struct SummarizeOptions {
  callbacks::ChainBounds bounds;
  int k_limit = 5;
  int jobs = 1;
  std::vector<std::string> apis;  // empty: all
  updates::TemplateTable templates = updates::default_template_table();
};

struct FrameworkAnalysis {
  graphs::CallGraph cg;
  callbacks::SignatureSet signatures;
  callbacks::CallSiteSet sites;
  std::vector<callbacks::AsyncDiagnostic> warnings;
  std::vector<const ir::MethodDef*> apis;  // sorted by id
  std::vector<summary::MarkedIcfg> marked;  // parallel to apis
  updates::AbstractVariablePool pool;
};

// Runs fn(i) for i in [0, n) on up to `jobs` threads.
inline void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  for (int t = 0; t < jobs; ++t)
    threads.emplace_back([&] {
      for (int i; (i = next++) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& th : threads) th.join();
  if (error) std::rethrow_exception(error);
}

inline bool api_selected(const ir::MethodDef& m, const std::vector<std::string>& filter) {
  if (filter.empty()) return true;
  for (const auto& f : filter)
    if (f == m.name || f == m.qualified_name() || f == summary::api_id(m)) return true;
  return false;
}

// The analysis points into `p`.
FrameworkAnalysis analyze_framework(ir::Program&&, const SummarizeOptions& = {}) = delete;

inline FrameworkAnalysis analyze_framework(const ir::Program& p, const SummarizeOptions& opt = {}) {
  FrameworkAnalysis fa;
  fa.cg = graphs::build_call_graph(p);
  fa.warnings = callbacks::link_async_handlers(p, fa.cg);
  fa.signatures = callbacks::callback_signatures(p);
  fa.sites = callbacks::find_call_chains(p, fa.cg, fa.signatures, opt.bounds);
  fa.apis = p.api_methods();
  std::sort(fa.apis.begin(), fa.apis.end(),
            [](const auto* a, const auto* b) { return summary::api_id(*a) < summary::api_id(*b); });

  const int n = static_cast<int>(fa.apis.size());
  fa.marked.resize(n);
  summary::MarkOptions mo{opt.bounds.max_len, opt.k_limit};
  parallel_for(n, opt.jobs, [&](int i) { fa.marked[i] = summary::mark_icfg(p, *fa.apis[i], fa.cg, fa.signatures, fa.sites, mo); });
  // The pool spans every API so a store in one API can resolve a predicate
  // of another.
  for (const auto& mg : fa.marked)
    for (const auto& v : summary::predicate_variables(mg)) fa.pool.insert(v);
  parallel_for(n, opt.jobs, [&](int i) { summary::mark_updates(p, fa.marked[i], fa.pool, opt.templates); });
  return fa;
}

// PCS invariants; returns violations.
inline std::vector<std::string> check_invariants(const summary::MarkedIcfg& mg, const summary::Pcs& pcs) {
  std::vector<std::string> out;
  if (static_cast<int>(pcs.nodes.size()) > mg.icfg.node_count())
    out.push_back(pcs.api + ": summary larger than its ICFG");
  std::vector<std::set<graphs::EdgeLabel>> labels(pcs.nodes.size());
  std::vector<std::vector<int>> fwd(pcs.nodes.size()), bwd(pcs.nodes.size());
  for (const auto& e : pcs.edges) {
    labels[e.from].insert(e.label);
    fwd[e.from].push_back(e.to);
    bwd[e.to].push_back(e.from);
  }
  auto reach = [&](int s, const std::vector<std::vector<int>>& adj) {
    std::vector<bool> seen(adj.size(), false);
    std::vector<int> st{s};
    seen[s] = true;
    while (!st.empty()) {
      int v = st.back();
      st.pop_back();
      for (int w : adj[v])
        if (!seen[w]) seen[w] = true, st.push_back(w);
    }
    return seen;
  };
  auto a = reach(pcs.entry(), fwd), b = reach(pcs.exit(), bwd);
  for (const auto& n : pcs.nodes) {
    if (!a[n.id] || !b[n.id]) out.push_back(pcs.api + ": node " + std::to_string(n.id) + " not on an entry-exit path");
    if (labels[n.id].size() > 2) out.push_back(pcs.api + ": node " + std::to_string(n.id) + " has > 2 outcomes");
    if (n.kind != summary::NodeKind::Predicate && n.kind != summary::NodeKind::Entry && labels[n.id].size() > 1)
      out.push_back(pcs.api + ": non-predicate node " + std::to_string(n.id) + " has labeled edges");
  }
  return out;
}

struct SummarizeResult {
  store::SummaryStore store;
  std::vector<summary::SummaryStats> stats;  // sorted by api
  std::vector<std::string> diagnostics;
  std::vector<std::string> violations;
};

inline SummarizeResult summarize(const ir::Program& p, const SummarizeOptions& opt = {}) {
  for (const auto& f : opt.apis) {
    auto all = p.api_methods();
    bool found = std::any_of(all.begin(), all.end(), [&](const auto* m) { return api_selected(*m, {f}); });
    if (!found) throw std::invalid_argument("no api method named " + f);
  }
  FrameworkAnalysis fa = analyze_framework(p, opt);
  SummarizeResult r;
  r.store.metadata = {opt.bounds.max_len, opt.bounds.max_callers, opt.bounds.seed, store::kToolVersion};
  for (const auto& w : fa.warnings) r.diagnostics.push_back("warning: " + w.message);
  for (std::size_t i = 0; i < fa.apis.size(); ++i) {
    if (!api_selected(*fa.apis[i], opt.apis)) continue;
    std::string id = summary::api_id(*fa.apis[i]);
    summary::Pcs pcs = summary::generate_summary_graph(fa.marked[i], id);
    for (auto& v : check_invariants(fa.marked[i], pcs)) r.violations.push_back(std::move(v));
    r.stats.push_back(summary::stats_of(fa.marked[i], pcs));
    r.store.summaries.emplace(id, std::move(pcs));
  }
  return r;
}

inline std::string stats_header() { return "api\ticfg_nodes\tpcs_nodes\tcallbacks\tpredicates\tupdates"; }

inline std::string stats_line(const summary::SummaryStats& s) {
  return s.api + "\t" + std::to_string(s.icfg_nodes) + "\t" + std::to_string(s.pcs_nodes) + "\t" +
         std::to_string(s.callbacks) + "\t" + std::to_string(s.predicates) + "\t" + std::to_string(s.updates);
}

}  // namespace pcs::pipeline
