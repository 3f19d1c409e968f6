#pragma once

// Summary store and its canonical JSON encoding.

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "pcs/summary.hpp"

namespace pcs::store {

using nlohmann::json;
using summary::Pcs;

inline constexpr int kVersion = 1;
inline constexpr const char* kToolVersion = "pcs 1.0.0";

struct Metadata {
  int max_chain = 16;
  int max_callers = 5;
  std::uint64_t seed = 0;
  std::string tool_version = kToolVersion;
  bool operator==(const Metadata&) const = default;
};

struct SummaryStore {
  std::map<std::string, Pcs> summaries;
  Metadata metadata;
  bool operator==(const SummaryStore&) const = default;
};

struct StoreError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// encoding

inline json to_json(const ir::Operand& o) {
  switch (o.kind) {
    case ir::Operand::Kind::Int: return {{"type", "int"}, {"value", o.int_value}};
    case ir::Operand::Kind::Bool: return {{"type", "bool"}, {"value", o.bool_value}};
    case ir::Operand::Kind::Null: return {{"type", "null"}};
    case ir::Operand::Kind::Str: return {{"type", "str"}, {"value", o.name}};
    case ir::Operand::Kind::Local: return {{"type", "local"}, {"value", o.name}};
  }
  return {};
}

inline json to_json(const sym::AccessChain& c) {
  json out = json::array();
  for (const auto& t : c) out.push_back(t.str());
  return out;
}

inline json to_json(const sym::AbstractVariable& v) {
  json out{{"scope", v.scope_text()}, {"class", v.class_name}, {"path", to_json(v.path)}};
  return out;
}

inline json to_json(const sym::Value& v) {
  switch (v.kind) {
    case sym::Value::Kind::Const: return {{"const", to_json(v.constant)}};
    case sym::Value::Kind::Var: return {{"var", to_json(v.var)}};
    case sym::Value::Kind::Arith:
      return {{"op", std::string(ir::to_string(v.op))}, {"lhs", to_json(v.operands[0])}, {"rhs", to_json(v.operands[1])}};
    default: return {{"unresolved", true}};
  }
}

inline json to_json(const receivers::Receiver& r) {
  static const char* kinds[] = {"this", "param", "unknown"};
  return {{"kind", kinds[static_cast<int>(r.kind)]}, {"index", r.index}, {"path", to_json(r.path)}};
}

inline json to_json(const summary::PcsNode& n) {
  json out{{"id", n.id}, {"kind", std::string(summary::to_string(n.kind))}};
  if (n.kind == summary::NodeKind::Entry || n.kind == summary::NodeKind::Exit) return out;
  out["method"] = n.method;
  out["stmt"] = n.stmt;
  out["text"] = n.text;
  switch (n.kind) {
    case summary::NodeKind::Callback: {
      json recv = json::array();
      for (const auto& r : n.callback.receivers) recv.push_back(to_json(r));
      out["callback"] = {{"owner", n.callback.signature.owner},
                         {"name", n.callback.signature.sig.name},
                         {"arity", n.callback.signature.sig.arity},
                         {"interface", n.callback.signature.from_interface},
                         {"async", n.callback.async},
                         {"receivers", recv}};
      break;
    }
    case summary::NodeKind::Predicate: {
      json terms = json::array();
      for (const auto& t : n.predicate.terms)
        terms.push_back({{"lhs", to_json(t.lhs)}, {"op", std::string(ir::to_string(t.op))}, {"rhs", to_json(t.rhs)}});
      out["predicate"] = {{"terms", terms}, {"unresolved", n.predicate.unresolved}};
      break;
    }
    case summary::NodeKind::Update: {
      json ups = json::array();
      for (const auto& u : n.updates) {
        json eff{{"kind", u.effect.kind == updates::Effect::Kind::Template ? "template" : "assign"}};
        if (u.effect.kind == updates::Effect::Kind::Template) {
          eff["method"] = u.effect.method;
          eff["row"] = u.effect.row_class;
        } else if (u.effect.constant) {
          eff["value"] = to_json(*u.effect.constant);
        } else {
          eff["symbolic"] = u.effect.symbolic;
        }
        ups.push_back({{"target", to_json(u.target)}, {"effect", eff}});
      }
      out["updates"] = ups;
      break;
    }
    default: break;
  }
  return out;
}

inline json to_json(const Pcs& p) {
  json nodes = json::array(), edges = json::array();
  for (const auto& n : p.nodes) nodes.push_back(to_json(n));
  for (const auto& e : p.edges) {
    json je{{"from", e.from}, {"to", e.to}};
    if (e.label != graphs::EdgeLabel::None) je["label"] = std::string(graphs::to_string(e.label));
    edges.push_back(je);
  }
  return {{"api", p.api}, {"nodes", nodes}, {"edges", edges}};
}

inline json to_json(const SummaryStore& s) {
  json sums = json::object();
  for (const auto& [id, p] : s.summaries) sums[id] = to_json(p);
  return {{"version", kVersion},
          {"metadata",
           {{"max_chain", s.metadata.max_chain},
            {"max_callers", s.metadata.max_callers},
            {"seed", s.metadata.seed},
            {"tool_version", s.metadata.tool_version}}},
          {"summaries", sums}};
}

inline std::string dump(const SummaryStore& s) { return to_json(s).dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// decoding

namespace detail {

inline const json& field(const json& j, const char* name, const std::string& where) {
  if (!j.is_object() || !j.contains(name)) throw StoreError("missing field " + std::string(name) + " in " + where);
  return j.at(name);
}

template <typename T>
T get(const json& j, const char* name, const std::string& where) {
  const json& f = field(j, name, where);
  try {
    return f.get<T>();
  } catch (const json::exception&) {
    throw StoreError("bad field " + std::string(name) + " in " + where);
  }
}

inline ir::Operand operand(const json& j, const std::string& where) {
  auto type = get<std::string>(j, "type", where);
  if (type == "int") return ir::Operand::integer(get<std::int64_t>(j, "value", where));
  if (type == "bool") return ir::Operand::boolean(get<bool>(j, "value", where));
  if (type == "null") return ir::Operand::null();
  if (type == "str") return ir::Operand::string(get<std::string>(j, "value", where));
  if (type == "local") return ir::Operand::local(get<std::string>(j, "value", where));
  throw StoreError("bad field type in " + where);
}

inline sym::AccessChain chain(const json& j, const std::string& where) {
  if (!j.is_array()) throw StoreError("bad field path in " + where);
  sym::AccessChain out;
  for (const auto& t : j) {
    if (!t.is_string()) throw StoreError("bad field path in " + where);
    std::string s = t.get<std::string>();
    bool call = s.size() > 2 && s.compare(s.size() - 2, 2, "()") == 0;
    if (call) s.resize(s.size() - 2);
    out.push_back({s, call});
  }
  return out;
}

inline sym::AbstractVariable variable(const json& j, const std::string& where) {
  sym::AbstractVariable v;
  auto scope = get<std::string>(j, "scope", where);
  if (scope == "static") v.scope = sym::Scope::Static;
  else if (scope == "calling-object") v.scope = sym::Scope::CallingObject;
  else if (scope.rfind("param", 0) == 0 && scope.size() > 5) {
    v.scope = sym::Scope::Param;
    try {
      v.param = std::stoi(scope.substr(5));
    } catch (const std::exception&) {
      throw StoreError("bad field scope in " + where);
    }
  } else {
    throw StoreError("bad field scope in " + where);
  }
  v.class_name = get<std::string>(j, "class", where);
  v.path = chain(field(j, "path", where), where);
  return v;
}

inline ir::BinOp binop(const std::string& s, const std::string& where) {
  for (auto op : {ir::BinOp::Add, ir::BinOp::Sub, ir::BinOp::Mul, ir::BinOp::Div, ir::BinOp::Rem})
    if (ir::to_string(op) == s) return op;
  throw StoreError("bad field op in " + where);
}

inline ir::RelOp relop(const std::string& s, const std::string& where) {
  for (auto op : {ir::RelOp::Lt, ir::RelOp::Gt, ir::RelOp::Le, ir::RelOp::Ge, ir::RelOp::Eq, ir::RelOp::Ne})
    if (ir::to_string(op) == s) return op;
  throw StoreError("bad field op in " + where);
}

inline sym::Value value(const json& j, const std::string& where) {
  if (j.contains("const")) return sym::Value::of_const(operand(j.at("const"), where));
  if (j.contains("var")) return sym::Value::of_var(variable(j.at("var"), where));
  if (j.contains("op"))
    return sym::Value::arith(binop(get<std::string>(j, "op", where), where), value(field(j, "lhs", where), where),
                             value(field(j, "rhs", where), where));
  if (j.contains("unresolved")) return sym::Value::unresolved();
  throw StoreError("bad value in " + where);
}

inline receivers::Receiver receiver(const json& j, const std::string& where) {
  receivers::Receiver r;
  auto kind = get<std::string>(j, "kind", where);
  if (kind == "this") r.kind = receivers::Receiver::Kind::This;
  else if (kind == "param") r.kind = receivers::Receiver::Kind::Param;
  else if (kind == "unknown") r.kind = receivers::Receiver::Kind::Unknown;
  else throw StoreError("bad field kind in " + where);
  r.index = get<int>(j, "index", where);
  r.path = chain(field(j, "path", where), where);
  return r;
}

inline summary::PcsNode node(const json& j, const std::string& where) {
  summary::PcsNode n;
  n.id = get<int>(j, "id", where);
  auto kind = get<std::string>(j, "kind", where);
  using summary::NodeKind;
  bool known = false;
  for (auto k : {NodeKind::Entry, NodeKind::Exit, NodeKind::Callback, NodeKind::Predicate, NodeKind::Update})
    if (summary::to_string(k) == kind) {
      n.kind = k;
      known = true;
    }
  if (!known) throw StoreError("bad field kind in " + where);
  if (n.kind == NodeKind::Entry || n.kind == NodeKind::Exit) return n;
  n.method = get<std::string>(j, "method", where);
  n.stmt = get<int>(j, "stmt", where);
  n.text = get<std::string>(j, "text", where);
  if (n.kind == NodeKind::Callback) {
    const json& c = field(j, "callback", where);
    n.callback.signature.owner = get<std::string>(c, "owner", where);
    n.callback.signature.sig.name = get<std::string>(c, "name", where);
    n.callback.signature.sig.arity = get<int>(c, "arity", where);
    n.callback.signature.from_interface = get<bool>(c, "interface", where);
    n.callback.async = get<bool>(c, "async", where);
    for (const auto& r : field(c, "receivers", where)) n.callback.receivers.push_back(receiver(r, where));
  } else if (n.kind == NodeKind::Predicate) {
    const json& pj = field(j, "predicate", where);
    for (const auto& t : field(pj, "terms", where))
      n.predicate.terms.push_back({value(field(t, "lhs", where), where), relop(get<std::string>(t, "op", where), where),
                                   value(field(t, "rhs", where), where)});
    n.predicate.unresolved = get<bool>(pj, "unresolved", where);
  } else {
    for (const auto& u : field(j, "updates", where)) {
      summary::UpdatePayload up;
      up.target = variable(field(u, "target", where), where);
      const json& e = field(u, "effect", where);
      auto ek = get<std::string>(e, "kind", where);
      if (ek == "template") {
        up.effect.kind = updates::Effect::Kind::Template;
        up.effect.method = get<std::string>(e, "method", where);
        up.effect.row_class = get<std::string>(e, "row", where);
      } else if (ek == "assign") {
        if (e.contains("value")) up.effect.constant = operand(e.at("value"), where);
        else up.effect.symbolic = get<std::string>(e, "symbolic", where);
      } else {
        throw StoreError("bad field kind in " + where);
      }
      n.updates.push_back(std::move(up));
    }
  }
  return n;
}

}  // namespace detail

inline Pcs pcs_from_json(const json& j, const std::string& id) {
  const std::string where = "summary " + id;
  Pcs p;
  p.api = detail::get<std::string>(j, "api", where);
  const json& nodes = detail::field(j, "nodes", where);
  const json& edges = detail::field(j, "edges", where);
  if (!nodes.is_array() || !edges.is_array()) throw StoreError("bad field nodes in " + where);
  for (const auto& n : nodes) p.nodes.push_back(detail::node(n, where));
  for (std::size_t i = 0; i < p.nodes.size(); ++i)
    if (p.nodes[i].id != static_cast<int>(i)) throw StoreError("bad field id in " + where);
  if (p.nodes.size() < 2 || p.nodes.front().kind != summary::NodeKind::Entry ||
      p.nodes.back().kind != summary::NodeKind::Exit)
    throw StoreError("bad field nodes in " + where + ": entry/exit missing");
  for (const auto& e : edges) {
    summary::PcsEdge pe{detail::get<int>(e, "from", where), detail::get<int>(e, "to", where), graphs::EdgeLabel::None};
    if (e.contains("label")) {
      auto l = detail::get<std::string>(e, "label", where);
      if (l == "true") pe.label = graphs::EdgeLabel::True;
      else if (l == "false") pe.label = graphs::EdgeLabel::False;
      else throw StoreError("bad field label in " + where);
    }
    if (pe.from < 0 || pe.to < 0 || pe.from > p.exit() || pe.to > p.exit())
      throw StoreError("bad field edges in " + where + ": node out of range");
    p.edges.push_back(pe);
  }
  return p;
}

inline SummaryStore from_json(const json& j) {
  if (!j.is_object()) throw StoreError("store is not a JSON object");
  int version = detail::get<int>(j, "version", "store");
  if (version != kVersion)
    throw StoreError("unsupported field version " + std::to_string(version) + " (expected " +
                     std::to_string(kVersion) + ")");
  SummaryStore s;
  const json& m = detail::field(j, "metadata", "store");
  s.metadata.max_chain = detail::get<int>(m, "max_chain", "metadata");
  s.metadata.max_callers = detail::get<int>(m, "max_callers", "metadata");
  s.metadata.seed = detail::get<std::uint64_t>(m, "seed", "metadata");
  s.metadata.tool_version = detail::get<std::string>(m, "tool_version", "metadata");
  const json& sums = detail::field(j, "summaries", "store");
  if (!sums.is_object()) throw StoreError("bad field summaries in store");
  for (const auto& [id, pj] : sums.items()) s.summaries.emplace(id, pcs_from_json(pj, id));
  return s;
}

inline SummaryStore parse(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw StoreError(std::string("malformed JSON: ") + e.what());
  }
  return from_json(j);
}

inline void save_store(const SummaryStore& s, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StoreError("cannot write " + path);
  out << dump(s);
  if (!out) throw StoreError("cannot write " + path);
}

inline SummaryStore load_store(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StoreError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

}  // namespace pcs::store
