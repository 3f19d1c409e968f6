#pragma once

// Small frameworks exercising one template row: `check` guards a callback
// on a collection query, `update` mutates either the same collection
// (through a copy) or a different one.

#include <string>
#include <vector>

#include "pcs/updates.hpp"

namespace template_rows {

struct Pairing {
  std::string row;
  std::string type;
  std::string query;
  std::string update;
};

// A concrete method name matched by a template pattern.
inline std::string concrete(const std::string& pattern) {
  return pattern.back() == '*' ? pattern.substr(0, pattern.size() - 1) : pattern;
}

inline std::string args_for(const std::string& method) {
  if (method.rfind("put", 0) == 0 || method == "setValueAt" || method == "set") return "(0, v)";
  if (method == "isEmpty" || method == "size") return "()";
  return "(0)";
}

inline std::string program(const std::string& type, const std::string& query, const std::string& update, bool alias) {
  return "framework class Holder {\n  " + type + " items;\n  " + type +
         " other;\n  public void onHit() { return; }\n"
         "  api void check() {\n    " + type + " l;\n    Object r;\n    l = this.items;\n    r = virtual l." + query +
         args_for(query) +
         ";\n    if r == null goto Lskip;\n    virtual this.onHit();\n  Lskip:\n    return;\n  }\n"
         "  api void update(Object v) {\n    " + type + " a, b;\n    a = this." + (alias ? "items" : "other") +
         ";\n    b = a;\n    virtual b." + update + args_for(update) + ";\n    return;\n  }\n}\n";
}

inline std::vector<Pairing> all_pairings() {
  std::vector<Pairing> out;
  for (const auto& row : pcs::updates::default_template_table())
    for (const auto& q : row.predicate_methods)
      for (const auto& u : row.update_methods)
        out.push_back({row.class_name, pcs::updates::simple_name(row.class_name), concrete(q), concrete(u)});
  return out;
}

}  // namespace template_rows
