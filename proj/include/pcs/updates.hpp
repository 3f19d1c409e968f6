#pragma once

// Update nodes: stores and collection calls that can change an abstract
// variable used by some predicate node.

#include <algorithm>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "pcs/graphs.hpp"
#include "pcs/symbolic.hpp"

namespace pcs::updates {

using AbstractVariablePool = std::set<sym::AbstractVariable>;

// One row pairs the calls that query a collection with those that change it.
// A trailing `*` matches any method name with that prefix.
struct TemplateRow {
  std::string class_name;
  std::vector<std::string> predicate_methods;
  std::vector<std::string> update_methods;
  bool operator==(const TemplateRow&) const = default;
};

using TemplateTable = std::vector<TemplateRow>;

inline TemplateTable default_template_table() {
  return {
      {"java.util.List", {"isEmpty", "size", "get*", "contains*"}, {"add*", "remove*", "set"}},
      {"java.util.Set", {"isEmpty", "size", "contains*"}, {"add*", "remove*"}},
      {"java.util.Map", {"isEmpty", "size", "contains*", "get"}, {"put*", "remove"}},
      {"android.util.ArrayMap", {"isEmpty", "size", "value*", "contains*"}, {"setValueAt", "put*", "remove*"}},
      {"android.util.SparseArray", {"size", "value*"}, {"setValueAt", "put*", "remove*", "delete"}},
  };
}

inline std::string trim(std::string s) {
  auto issp = [](unsigned char c) { return std::isspace(c); };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), issp));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), issp).base(), s.end());
  return s;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

// `class | pred-methods | update-methods`, comma-separated names, `#` comments.
inline TemplateTable parse_template_table(const std::string& text) {
  TemplateTable out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    auto cols = split(line, '|');
    if (cols.size() != 3 || cols[0].empty())
      throw std::runtime_error("template table line " + std::to_string(lineno) + ": expected 'class | preds | updates'");
    TemplateRow row{cols[0], {}, {}};
    for (auto& n : split(cols[1], ','))
      if (!n.empty()) row.predicate_methods.push_back(n);
    for (auto& n : split(cols[2], ','))
      if (!n.empty()) row.update_methods.push_back(n);
    out.push_back(std::move(row));
  }
  return out;
}

inline bool name_matches(std::string_view pattern, std::string_view name) {
  if (!pattern.empty() && pattern.back() == '*') {
    pattern.remove_suffix(1);
    return name.substr(0, pattern.size()) == pattern;
  }
  return pattern == name;
}

inline bool any_matches(const std::vector<std::string>& patterns, std::string_view name) {
  return std::any_of(patterns.begin(), patterns.end(), [&](const auto& p) { return name_matches(p, name); });
}

inline std::string simple_name(std::string_view qualified) {
  auto dot = qualified.rfind('.');
  return std::string(dot == std::string_view::npos ? qualified : qualified.substr(dot + 1));
}

// Rows whose class is the declared type or one of its supertypes.
inline std::vector<const TemplateRow*> rows_for_type(const ir::Program& p, const TemplateTable& table,
                                                     std::string_view type) {
  std::vector<const TemplateRow*> out;
  for (const auto& row : table) {
    std::string cls = simple_name(row.class_name);
    if (type == cls || p.is_subtype(type, cls)) out.push_back(&row);
  }
  return out;
}

struct Effect {
  enum class Kind { Assign, Template };
  Kind kind = Kind::Assign;
  std::optional<ir::Operand> constant;  // Assign with a statically known value
  std::string symbolic;                 // Assign otherwise
  std::string method;                   // Template: update method name
  std::string row_class;                // Template: matched row

  std::string str() const {
    if (kind == Kind::Template) return "template(" + method + ")";
    return constant ? "assign(" + ir::to_string(*constant) + ")" : "assign(" + symbolic + ")";
  }
  bool operator==(const Effect&) const = default;
};

struct UpdateNode {
  int node = 0;  // global ICFG node
  int instance = 0;
  int stmt = 0;
  sym::AbstractVariable target;
  Effect effect;

  bool operator<(const UpdateNode& o) const {
    return std::tie(node, target) < std::tie(o.node, o.target) ||
           (std::tie(node, target) == std::tie(o.node, o.target) && effect.str() < o.effect.str());
  }
  bool operator==(const UpdateNode& o) const {
    return node == o.node && target == o.target && effect == o.effect;
  }
};

template <typename Range>
AbstractVariablePool collect_pool(const Range& variable_lists) {
  AbstractVariablePool pool;
  for (const auto& list : variable_lists)
    for (const auto& v : list) pool.insert(v);
  return pool;
}

// True when some pool variable's access path ends with `suffix`: the chain
// accumulated so far while walking backwards from a store's destination.
inline bool suffix_matches_pool(const AbstractVariablePool& pool, const sym::AccessChain& suffix) {
  for (const auto& v : pool)
    if (v.path.size() >= suffix.size() && std::equal(suffix.rbegin(), suffix.rend(), v.path.rbegin())) return true;
  return false;
}

// Stores whose destination resolves to a pool variable.
inline std::vector<UpdateNode> find_update_assignments(const graphs::Icfg& g, const AbstractVariablePool& pool,
                                                       bool early_termination = true) {
  std::set<UpdateNode> out;
  if (pool.empty()) return {};
  for (int i = 0; i < static_cast<int>(g.instances.size()); ++i) {
    const auto& inst = g.instances[i];
    for (const auto& s : inst.method->body) {
      if (s.kind != ir::StmtKind::FieldStore && s.kind != ir::StmtKind::StaticStore) continue;
      Effect eff;
      if (s.lhs.is_constant()) eff.constant = s.lhs;
      else eff.symbolic = s.lhs.name;
      std::vector<sym::AbstractVariable> targets;
      if (s.kind == ir::StmtKind::StaticStore) {
        targets.push_back({sym::Scope::Static, -1, s.class_name, {{s.member, false}}});
      } else {
        sym::BackwardOptions opt;
        opt.mode = sym::Mode::Symbolic;
        if (early_termination) opt.keep_path = [&pool](const sym::AccessChain& c) { return suffix_matches_pool(pool, c); };
        sym::AccessChain start{{s.member, false}};
        if (early_termination && !suffix_matches_pool(pool, start)) continue;
        auto r = sym::propagate_backward(sym::context_of_instance(g, i), s.id, {sym::Value::of_local(s.base, start)}, opt);
        for (const auto& p : r.paths)
          if (p.resolved && p.values[0].kind == sym::Value::Kind::Var) targets.push_back(p.values[0].var);
      }
      for (const auto& t : targets)
        if (pool.count(t)) out.insert({g.global(i, s.id), i, s.id, t, eff});
    }
  }
  return {out.begin(), out.end()};
}

// Collection calls whose receiver resolves to the base of a pool variable
// ending in a predicate-method call token of the same template row.
inline std::vector<UpdateNode> match_update_templates(const ir::Program& p, const graphs::Icfg& g,
                                                      const AbstractVariablePool& pool, const TemplateTable& table) {
  std::set<UpdateNode> out;
  for (int i = 0; i < static_cast<int>(g.instances.size()); ++i) {
    const auto& inst = g.instances[i];
    for (const auto& s : inst.method->body) {
      if (s.kind != ir::StmtKind::VirtualCall) continue;
      std::string type = inst.method->type_of(s.base);
      std::vector<const TemplateRow*> rows;
      for (const auto* row : rows_for_type(p, table, type))
        if (any_matches(row->update_methods, s.member)) rows.push_back(row);
      if (rows.empty()) continue;
      auto r = sym::propagate_backward(sym::context_of_instance(g, i), s.id, {sym::Value::of_local(s.base)});
      for (const auto& path : r.paths) {
        if (!path.resolved || path.values[0].kind != sym::Value::Kind::Var) continue;
        const sym::AbstractVariable& recv = path.values[0].var;
        for (const auto& v : pool) {
          if (v.path.size() != recv.path.size() + 1 || !v.has_prefix(recv) || !v.path.back().call) continue;
          for (const auto* row : rows) {
            if (!any_matches(row->predicate_methods, v.path.back().name)) continue;
            Effect eff;
            eff.kind = Effect::Kind::Template;
            eff.method = s.member;
            eff.row_class = row->class_name;
            out.insert({g.global(i, s.id), i, s.id, v, eff});
          }
        }
      }
    }
  }
  return {out.begin(), out.end()};
}

}  // namespace pcs::updates
