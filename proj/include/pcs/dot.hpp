#pragma once

// Graphviz export for CFGs, ICFGs and summary graphs. Node order is stable.

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "pcs/graphs.hpp"
#include "pcs/summary.hpp"

namespace pcs::dot {

inline std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out;
}

inline std::string edge_attrs(graphs::EdgeLabel l) {
  if (l == graphs::EdgeLabel::None) return "";
  return " [label=\"" + std::string(graphs::to_string(l)) + "\"]";
}

inline std::string cfg_to_dot(const graphs::Cfg& cfg) {
  std::ostringstream os;
  const auto& m = cfg.method();
  os << "digraph \"" << escape(m.qualified_name()) << "\" {\n";
  os << "  node [shape=box, fontname=\"monospace\"];\n";
  for (int n = 0; n < cfg.node_count(); ++n) {
    std::string label = n == cfg.entry()  ? "entry"
                        : n == cfg.exit() ? "exit"
                                          : m.qualified_name() + "#" + std::to_string(n) + ": " + ir::stmt_text(cfg.stmt(n));
    os << "  n" << n << " [label=\"" << escape(label) << "\"";
    if (!cfg.reachable(n)) os << ", style=dashed";
    os << "];\n";
  }
  for (const auto& e : cfg.edges()) os << "  n" << e.from << " -> n" << e.to << edge_attrs(e.label) << ";\n";
  os << "}\n";
  return os.str();
}

inline std::string icfg_to_dot(const summary::MarkedIcfg& mg) {
  const auto& g = mg.icfg;
  std::ostringstream os;
  os << "digraph \"" << escape(g.root ? g.root->qualified_name() : "icfg") << "\" {\n";
  os << "  node [shape=box, fontname=\"monospace\"];\n";
  for (std::size_t i = 0; i < g.instances.size(); ++i) {
    const auto& inst = g.instances[i];
    os << "  subgraph cluster_" << i << " {\n    label=\"" << escape(inst.method->qualified_name())
       << (inst.async ? " (async)" : "") << "\";\n";
    for (int n = 0; n < inst.cfg.node_count(); ++n) {
      int gn = inst.offset + n;
      std::string label = n == inst.cfg.entry() ? "entry"
                          : n == inst.cfg.exit() ? "exit"
                                                 : "#" + std::to_string(n) + ": " + ir::stmt_text(inst.cfg.stmt(n));
      os << "    g" << gn << " [label=\"" << escape(label) << "\"";
      if (mg.callbacks.count(gn)) os << ", shape=ellipse";
      else if (mg.predicates.count(gn)) os << ", shape=diamond";
      else if (mg.updates.count(gn)) os << ", style=filled, fillcolor=palegreen";
      os << "];\n";
    }
    os << "  }\n";
  }
  for (const auto& e : g.edges) {
    os << "  g" << e.from << " -> g" << e.to;
    switch (e.kind) {
      case graphs::IcfgEdgeKind::Intra: os << edge_attrs(e.label); break;
      case graphs::IcfgEdgeKind::Call:
      case graphs::IcfgEdgeKind::Return: os << " [style=dashed]"; break;
      case graphs::IcfgEdgeKind::AsyncCall:
      case graphs::IcfgEdgeKind::AsyncReturn: os << " [style=dotted]"; break;
    }
    os << ";\n";
  }
  os << "}\n";
  return os.str();
}

// Second label line: what the node means to a client.
inline std::string payload_text(const summary::PcsNode& n) {
  switch (n.kind) {
    case summary::NodeKind::Callback: {
      std::string recv;
      for (const auto& r : n.callback.receivers) recv += (recv.empty() ? "" : ", ") + r.str();
      return n.callback.signature.str() + " on {" + recv + "}" + (n.callback.async ? " async" : "");
    }
    case summary::NodeKind::Predicate: return n.predicate.str();
    case summary::NodeKind::Update: {
      std::string out;
      for (const auto& u : n.updates) out += (out.empty() ? "" : "; ") + u.target.str() + " := " + u.effect.str();
      return out;
    }
    default: return "";
  }
}

inline std::string node_attrs(const summary::PcsNode& n) {
  std::string label = n.label();
  std::string payload = payload_text(n);
  if (!payload.empty()) label += "\n" + payload;
  std::string shape;
  switch (n.kind) {
    case summary::NodeKind::Entry:
    case summary::NodeKind::Exit: shape = "shape=plaintext"; break;
    case summary::NodeKind::Callback: shape = "shape=ellipse"; break;
    case summary::NodeKind::Predicate: shape = "shape=diamond"; break;
    case summary::NodeKind::Update: shape = "shape=box, style=filled, fillcolor=palegreen"; break;
  }
  return "[label=\"" + escape(label) + "\", " + shape + "]";
}

inline std::string pcs_to_dot(const summary::Pcs& pcs) {
  std::ostringstream os;
  os << "digraph \"" << escape(pcs.api) << "\" {\n";
  os << "  node [fontname=\"monospace\"];\n";
  for (const auto& n : pcs.nodes) os << "  n" << n.id << " " << node_attrs(n) << ";\n";
  for (const auto& e : pcs.edges) os << "  n" << e.from << " -> n" << e.to << edge_attrs(e.label) << ";\n";
  os << "}\n";
  return os.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path);
}

}  // namespace pcs::dot
