#pragma once

// MiniFW IR: a small object-oriented three-address language modelling the
// framework/app split. This header holds the data model, dispatch lookup and
// the pretty printer; the parser lives in ir_parser.hpp.

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace pcs::ir {

// Source positions never take part in structural equality.
struct SourcePos {
  int line = 0;
  int column = 0;
  friend bool operator==(const SourcePos&, const SourcePos&) { return true; }
};

enum class Origin { Framework, App };
enum class Visibility { Public, Protected, Private };

enum class RelOp { Lt, Gt, Le, Ge, Eq, Ne };
enum class BinOp { Add, Sub, Mul, Div, Rem };

inline std::string_view to_string(RelOp op) {
  switch (op) {
    case RelOp::Lt: return "<";
    case RelOp::Gt: return ">";
    case RelOp::Le: return "<=";
    case RelOp::Ge: return ">=";
    case RelOp::Eq: return "==";
    case RelOp::Ne: return "!=";
  }
  return "?";
}

inline RelOp negate(RelOp op) {
  switch (op) {
    case RelOp::Lt: return RelOp::Ge;
    case RelOp::Gt: return RelOp::Le;
    case RelOp::Le: return RelOp::Gt;
    case RelOp::Ge: return RelOp::Lt;
    case RelOp::Eq: return RelOp::Ne;
    case RelOp::Ne: return RelOp::Eq;
  }
  return op;
}

inline std::string_view to_string(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Rem: return "%";
  }
  return "?";
}

inline std::string_view to_string(Visibility v) {
  switch (v) {
    case Visibility::Public: return "public";
    case Visibility::Protected: return "protected";
    case Visibility::Private: return "private";
  }
  return "?";
}

struct Operand {
  enum class Kind { Local, Int, Bool, Null, Str };
  Kind kind = Kind::Null;
  std::string name;  // local name or string payload
  std::int64_t int_value = 0;
  bool bool_value = false;

  static Operand local(std::string n) { return {Kind::Local, std::move(n), 0, false}; }
  static Operand integer(std::int64_t v) { return {Kind::Int, {}, v, false}; }
  static Operand boolean(bool v) { return {Kind::Bool, {}, 0, v}; }
  static Operand null() { return {Kind::Null, {}, 0, false}; }
  static Operand string(std::string s) { return {Kind::Str, std::move(s), 0, false}; }

  bool is_local() const { return kind == Kind::Local; }
  bool is_constant() const { return kind != Kind::Local; }
  bool operator==(const Operand&) const = default;
};

inline std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string to_string(const Operand& o) {
  switch (o.kind) {
    case Operand::Kind::Local: return o.name;
    case Operand::Kind::Int: return std::to_string(o.int_value);
    case Operand::Kind::Bool: return o.bool_value ? "true" : "false";
    case Operand::Kind::Null: return "null";
    case Operand::Kind::Str: return quote(o.name);
  }
  return "?";
}

enum class StmtKind {
  AssignLocal,   // x = operand
  FieldStore,    // x.f = operand
  StaticStore,   // C.f = operand
  FieldLoad,     // x = y.f
  StaticLoad,    // x = C.f
  New,           // x = new C
  BinaryOp,      // x = a op b
  VirtualCall,   // [x =] virtual|special y.m(args)
  StaticCall,    // [x =] static C.m(args)
  IfGoto,        // if a relop b goto L
  Goto,          // goto L
  Return,        // return [operand]
};

struct Stmt {
  int id = 0;
  StmtKind kind = StmtKind::Return;
  std::vector<std::string> labels;
  std::string dst;         // defined local, empty when none
  std::string base;        // receiver / field base local
  std::string class_name;  // static access, new, static call
  std::string member;      // field or method name
  Operand lhs;             // source operand, left operand, return value
  Operand rhs;
  bool has_value = false;  // return carries a value
  bool special = false;    // non-dispatching instance call
  RelOp rel = RelOp::Eq;
  BinOp bin = BinOp::Add;
  std::vector<Operand> args;
  std::string target_label;
  int target = -1;  // resolved statement id of the goto target
  SourcePos pos;

  bool is_call() const { return kind == StmtKind::VirtualCall || kind == StmtKind::StaticCall; }
  bool is_branch() const { return kind == StmtKind::IfGoto; }
  bool operator==(const Stmt&) const = default;
};

struct Param {
  std::string type;
  std::string name;
  bool operator==(const Param&) const = default;
};

struct LocalDecl {
  std::string type;
  std::string name;
  bool operator==(const LocalDecl&) const = default;
};

struct Signature {
  std::string name;
  int arity = 0;
  auto operator<=>(const Signature&) const = default;
  std::string str() const { return name + "/" + std::to_string(arity); }
};

struct MethodDef {
  std::string owner;  // declaring class or interface
  std::string name;
  std::string return_type = "void";
  std::vector<Param> params;
  Visibility visibility = Visibility::Public;
  bool is_static = false;
  bool is_final = false;
  bool is_api = false;
  bool has_body = true;
  std::vector<LocalDecl> locals;
  std::vector<Stmt> body;
  SourcePos pos;

  Signature signature() const { return {name, static_cast<int>(params.size())}; }
  std::string qualified_name() const { return owner + "." + name; }

  // Declared type of a local, parameter or `this`; empty when unknown.
  std::string type_of(std::string_view local) const {
    if (local == "this") return is_static ? std::string{} : owner;
    for (const auto& p : params)
      if (p.name == local) return p.type;
    for (const auto& l : locals)
      if (l.name == local) return l.type;
    return {};
  }
  // Index of a parameter, or -1.
  int param_index(std::string_view local) const {
    for (std::size_t i = 0; i < params.size(); ++i)
      if (params[i].name == local) return static_cast<int>(i);
    return -1;
  }
  bool operator==(const MethodDef&) const = default;
};

struct FieldDef {
  std::string name;
  std::string type;
  Visibility visibility = Visibility::Public;
  bool is_static = false;
  bool is_final = false;
  SourcePos pos;
  bool operator==(const FieldDef&) const = default;
};

struct ClassDef {
  std::string name;
  std::string super_name = "Object";
  std::vector<std::string> interfaces;
  Origin origin = Origin::App;
  bool is_final = false;
  bool builtin = false;
  std::vector<FieldDef> fields;
  std::vector<MethodDef> methods;
  SourcePos pos;

  const MethodDef* find_method(const Signature& sig) const {
    for (const auto& m : methods)
      if (m.signature() == sig) return &m;
    return nullptr;
  }
  const FieldDef* find_field(std::string_view n) const {
    for (const auto& f : fields)
      if (f.name == n) return &f;
    return nullptr;
  }
  bool operator==(const ClassDef&) const = default;
};

struct InterfaceDef {
  std::string name;
  std::vector<std::string> extends;
  Origin origin = Origin::App;
  bool is_public = true;
  std::vector<MethodDef> methods;
  SourcePos pos;
  bool operator==(const InterfaceDef&) const = default;
};

inline const std::vector<std::string>& builtin_class_names() {
  static const std::vector<std::string> names = {"Object", "List", "Set", "Map",
                                                 "ArrayMap", "SparseArray", "Handler"};
  return names;
}

inline bool is_primitive_type(std::string_view t) {
  return t == "void" || t == "int" || t == "bool" || t == "String";
}

// Validated, immutable program. Element addresses stay stable for the
// lifetime of the object, so analyses keep `const MethodDef*` handles.
class Program {
 public:
  Program() = default;
  Program(std::vector<ClassDef> classes, std::vector<InterfaceDef> interfaces)
      : classes_(std::move(classes)), interfaces_(std::move(interfaces)) {
    index();
  }
  Program(const Program&) = delete;
  Program& operator=(const Program&) = delete;
  Program(Program&& other) noexcept { *this = std::move(other); }
  Program& operator=(Program&& other) noexcept {
    classes_ = std::move(other.classes_);
    interfaces_ = std::move(other.interfaces_);
    index();
    return *this;
  }

  const std::vector<ClassDef>& classes() const { return classes_; }
  const std::vector<InterfaceDef>& interfaces() const { return interfaces_; }

  const ClassDef* find_class(std::string_view name) const {
    auto it = class_index_.find(std::string(name));
    return it == class_index_.end() ? nullptr : &classes_[it->second];
  }
  const InterfaceDef* find_interface(std::string_view name) const {
    auto it = iface_index_.find(std::string(name));
    return it == iface_index_.end() ? nullptr : &interfaces_[it->second];
  }
  std::optional<Origin> origin(std::string_view name) const {
    if (auto* c = find_class(name)) return c->origin;
    if (auto* i = find_interface(name)) return i->origin;
    return std::nullopt;
  }

  // Reflexive-transitive subtype test over classes and interfaces.
  bool is_subtype(std::string_view sub, std::string_view super) const {
    if (sub == super) return true;
    if (auto* c = find_class(sub)) {
      if (c->name != "Object" && is_subtype(c->super_name, super)) return true;
      for (const auto& i : c->interfaces)
        if (is_subtype(i, super)) return true;
      return false;
    }
    if (auto* i = find_interface(sub)) {
      for (const auto& e : i->extends)
        if (is_subtype(e, super)) return true;
      return super == "Object";
    }
    return false;
  }

  // All non-builtin classes that are subtypes of `type` (its CHA cone), in
  // declaration order.
  std::vector<const ClassDef*> subtype_cone(std::string_view type) const {
    std::vector<const ClassDef*> out;
    for (const auto& c : classes_)
      if (is_subtype(c.name, type)) out.push_back(&c);
    return out;
  }

  // Walks receiver class then its superclass chain.
  const MethodDef* resolve_dispatch(std::string_view receiver_class, const Signature& sig) const {
    const ClassDef* c = find_class(receiver_class);
    while (c) {
      if (auto* m = c->find_method(sig)) return m;
      if (c->name == "Object") break;
      c = find_class(c->super_name);
    }
    return nullptr;
  }

  // Interface method declaration reachable from `type` (for interface types).
  const MethodDef* find_interface_method(std::string_view type, const Signature& sig) const {
    const InterfaceDef* i = find_interface(type);
    if (!i) return nullptr;
    for (const auto& m : i->methods)
      if (m.signature() == sig) return &m;
    for (const auto& e : i->extends)
      if (auto* m = find_interface_method(e, sig)) return m;
    return nullptr;
  }

  const FieldDef* resolve_field(std::string_view cls, std::string_view field) const {
    const ClassDef* c = find_class(cls);
    while (c) {
      if (auto* f = c->find_field(field)) return f;
      if (c->name == "Object") break;
      c = find_class(c->super_name);
    }
    return nullptr;
  }

  const MethodDef* find_method(std::string_view cls, std::string_view name) const {
    if (auto* c = find_class(cls))
      for (const auto& m : c->methods)
        if (m.name == name) return &m;
    return nullptr;
  }

  std::vector<const MethodDef*> api_methods() const {
    std::vector<const MethodDef*> out;
    for (const auto& c : classes_)
      for (const auto& m : c.methods)
        if (m.is_api) out.push_back(&m);
    return out;
  }

  bool operator==(const Program& o) const {
    return classes_ == o.classes_ && interfaces_ == o.interfaces_;
  }

 private:
  void index() {
    class_index_.clear();
    iface_index_.clear();
    for (std::size_t i = 0; i < classes_.size(); ++i) class_index_[classes_[i].name] = i;
    for (std::size_t i = 0; i < interfaces_.size(); ++i) iface_index_[interfaces_[i].name] = i;
  }

  std::vector<ClassDef> classes_;
  std::vector<InterfaceDef> interfaces_;
  std::map<std::string, std::size_t> class_index_;
  std::map<std::string, std::size_t> iface_index_;
};

// ---------------------------------------------------------------------------
// Pretty printing

inline std::string args_text(const std::vector<Operand>& args) {
  std::string out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ", ";
    out += to_string(args[i]);
  }
  return out;
}

// Statement text without labels or the trailing `;`.
inline std::string stmt_text(const Stmt& s) {
  std::string prefix = s.dst.empty() ? "" : s.dst + " = ";
  switch (s.kind) {
    case StmtKind::AssignLocal: return s.dst + " = " + to_string(s.lhs);
    case StmtKind::FieldStore: return s.base + "." + s.member + " = " + to_string(s.lhs);
    case StmtKind::StaticStore: return s.class_name + "." + s.member + " = " + to_string(s.lhs);
    case StmtKind::FieldLoad: return s.dst + " = " + s.base + "." + s.member;
    case StmtKind::StaticLoad: return s.dst + " = " + s.class_name + "." + s.member;
    case StmtKind::New: return s.dst + " = new " + s.class_name;
    case StmtKind::BinaryOp:
      return s.dst + " = " + to_string(s.lhs) + " " + std::string(to_string(s.bin)) + " " +
             to_string(s.rhs);
    case StmtKind::VirtualCall:
      return prefix + (s.special ? "special " : "virtual ") + s.base + "." + s.member + "(" +
             args_text(s.args) + ")";
    case StmtKind::StaticCall:
      return prefix + "static " + s.class_name + "." + s.member + "(" + args_text(s.args) + ")";
    case StmtKind::IfGoto:
      return "if " + to_string(s.lhs) + " " + std::string(to_string(s.rel)) + " " +
             to_string(s.rhs) + " goto " + s.target_label;
    case StmtKind::Goto: return "goto " + s.target_label;
    case StmtKind::Return: return s.has_value ? "return " + to_string(s.lhs) : "return";
  }
  return "?";
}

inline void print_method(std::ostream& os, const MethodDef& m, const std::string& indent) {
  os << indent << to_string(m.visibility);
  if (m.is_static) os << " static";
  if (m.is_final) os << " final";
  if (m.is_api) os << " api";
  os << " " << m.return_type << " " << m.name << "(";
  for (std::size_t i = 0; i < m.params.size(); ++i) {
    if (i) os << ", ";
    os << m.params[i].type << " " << m.params[i].name;
  }
  os << ")";
  if (!m.has_body) {
    os << ";\n";
    return;
  }
  os << " {\n";
  for (const auto& l : m.locals) os << indent << "  " << l.type << " " << l.name << ";\n";
  for (const auto& s : m.body) {
    os << indent << "  ";
    for (const auto& l : s.labels) os << l << ": ";
    os << stmt_text(s) << ";\n";
  }
  os << indent << "}\n";
}

inline std::string origin_keyword(Origin o) { return o == Origin::Framework ? "framework" : "app"; }

inline std::string pretty_print(const Program& p) {
  std::ostringstream os;
  for (const auto& i : p.interfaces()) {
    os << origin_keyword(i.origin) << (i.is_public ? " public" : "") << " interface " << i.name;
    for (std::size_t k = 0; k < i.extends.size(); ++k) os << (k ? ", " : " extends ") << i.extends[k];
    os << " {\n";
    for (const auto& m : i.methods) print_method(os, m, "  ");
    os << "}\n\n";
  }
  for (const auto& c : p.classes()) {
    if (c.builtin) continue;
    os << origin_keyword(c.origin) << (c.is_final ? " final" : "") << " class " << c.name;
    if (c.super_name != "Object") os << " extends " << c.super_name;
    for (std::size_t k = 0; k < c.interfaces.size(); ++k)
      os << (k ? ", " : " implements ") << c.interfaces[k];
    os << " {\n";
    for (const auto& f : c.fields) {
      os << "  " << to_string(f.visibility) << (f.is_static ? " static" : "")
         << (f.is_final ? " final" : "") << " " << f.type << " " << f.name << ";\n";
    }
    for (const auto& m : c.methods) print_method(os, m, "  ");
    os << "}\n\n";
  }
  return os.str();
}

}  // namespace pcs::ir
