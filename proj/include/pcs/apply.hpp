#pragma once

// App-side pipeline: one inter-callback ICFG per top-level method, its
// callback sequences and infeasible-edge reports.

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcs/client.hpp"
#include "pcs/pipeline.hpp"

namespace pcs::apply {

struct ApplyOptions {
  int jobs = 1;
  int bound = 16;
  bool infeasible = false;
  client::CorrelationOptions correlation;
};

struct TopLevelResult {
  const ir::MethodDef* top = nullptr;
  client::InterCallbackIcfg graph;
  client::CallbackPaths paths;
  client::CallbackPaths feasible_paths;  // with reported edges removed
  std::vector<client::InfeasibleReport> reports;
  int callback_nodes = 0;
  std::vector<int> impl_edges;  // per spliced callback node
};

struct ApplyResult {
  std::vector<TopLevelResult> tops;  // sorted by name
};

inline ApplyResult run(const client::ClientContext& ctx, const ApplyOptions& opt = {}) {
  auto tops = client::top_level_methods(ctx);
  ApplyResult r;
  r.tops.resize(tops.size());
  pipeline::parallel_for(static_cast<int>(tops.size()), opt.jobs, [&](int i) {
    TopLevelResult& t = r.tops[i];
    t.top = tops[i];
    t.graph = client::build_inter_callback_icfg(ctx, *tops[i]);
    client::PathOptions po;
    po.bound = opt.bound;
    t.paths = client::enumerate_callback_paths(t.graph, po);
    if (opt.infeasible) {
      t.reports = client::detect_infeasible_paths(t.graph, opt.correlation);
      t.feasible_paths = client::enumerate_callback_paths(t.graph, po, client::infeasible_edges(t.reports));
    } else {
      t.feasible_paths = t.paths;
    }
    for (const auto& sp : t.graph.splices)
      for (const auto& [pn, impls] : sp.impls) {
        ++t.callback_nodes;
        t.impl_edges.push_back(static_cast<int>(impls.size()));
      }
  });
  return r;
}

inline std::string stats_header() {
  return "top\tcallbacks\tapi_calls\timpl_min\timpl_avg\timpl_max\tlongest_path\treports";
}

inline std::string stats_line(const TopLevelResult& t) {
  int mn = 0, mx = 0;
  double avg = 0;
  if (!t.impl_edges.empty()) {
    mn = *std::min_element(t.impl_edges.begin(), t.impl_edges.end());
    mx = *std::max_element(t.impl_edges.begin(), t.impl_edges.end());
    for (int v : t.impl_edges) avg += v;
    avg /= t.impl_edges.size();
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", avg);
  return t.top->qualified_name() + "\t" + std::to_string(t.callback_nodes) + "\t" +
         std::to_string(t.graph.splices.size()) + "\t" + std::to_string(mn) + "\t" + buf + "\t" + std::to_string(mx) +
         "\t" + std::to_string(t.paths.longest) + "\t" + std::to_string(t.reports.size());
}

inline nlohmann::json report_json(const client::InterCallbackIcfg& g, const client::InfeasibleReport& r) {
  nlohmann::json witness = nlohmann::json::array();
  for (int n : r.witness) witness.push_back({{"id", n}, {"label", g.label(n)}});
  return {{"predicate", {{"id", r.predicate}, {"label", g.label(r.predicate)}}},
          {"outcome", std::string(graphs::to_string(r.outcome))},
          {"witness", witness},
          {"resolver", {{"id", r.resolver}, {"label", g.label(r.resolver)}}}};
}

inline nlohmann::json paths_json(const client::CallbackPaths& p) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& s : p.sequences) out.push_back(s);
  return out;
}

inline nlohmann::json to_json(const ApplyResult& r, bool with_paths) {
  nlohmann::json tops = nlohmann::json::array();
  for (const auto& t : r.tops) {
    nlohmann::json reports = nlohmann::json::array();
    for (const auto& rep : t.reports) reports.push_back(report_json(t.graph, rep));
    nlohmann::json jt{{"top", t.top->qualified_name()},
                      {"callbacks", t.callback_nodes},
                      {"api_calls", t.graph.splices.size()},
                      {"longest_path", t.paths.longest},
                      {"reports", reports},
                      {"diagnostics", t.graph.diagnostics}};
    if (with_paths) {
      jt["paths"] = paths_json(t.paths);
      jt["feasible_paths"] = paths_json(t.feasible_paths);
    }
    tops.push_back(jt);
  }
  return {{"tops", tops}};
}

}  // namespace pcs::apply
