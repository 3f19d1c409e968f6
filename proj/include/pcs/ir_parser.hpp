#pragma once

// Parser and validator for MiniFW IR text. The grammar is documented in
// docs/ir-grammar.md.

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pcs/ir.hpp"

namespace pcs::ir {

struct Diagnostic {
  std::string file;
  int line = 0;
  int column = 0;
  std::string message;

  std::string str() const {
    std::string loc = file.empty() ? "" : file + ":";
    return loc + std::to_string(line) + ":" + std::to_string(column) + ": " + message;
  }
};

struct ParseResult {
  std::optional<Program> program;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return program.has_value(); }
};

struct SourceFile {
  std::string name;
  std::string text;
};

namespace detail {

enum class Tok { Ident, Int, Str, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourcePos pos;
};

class Lexer {
 public:
  Lexer(const std::string& text, std::vector<Diagnostic>& diags, std::string file)
      : text_(text), diags_(diags), file_(std::move(file)) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      SourcePos pos{line_, col_};
      if (i_ >= text_.size()) {
        out.push_back({Tok::End, "", pos});
        return out;
      }
      char c = text_[i_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::string s;
        while (i_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[i_])) || text_[i_] == '_'))
          s += advance();
        out.push_back({Tok::Ident, s, pos});
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        std::string s;
        while (i_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i_]))) s += advance();
        out.push_back({Tok::Int, s, pos});
      } else if (c == '"') {
        advance();
        std::string s;
        bool closed = false;
        while (i_ < text_.size()) {
          char d = advance();
          if (d == '"') {
            closed = true;
            break;
          }
          if (d == '\\' && i_ < text_.size()) d = advance();
          if (d == '\n') break;
          s += d;
        }
        if (!closed) diags_.push_back({file_, pos.line, pos.column, "unterminated string literal"});
        out.push_back({Tok::Str, s, pos});
      } else {
        static const char* two[] = {"<=", ">=", "==", "!="};
        std::string p(1, c);
        for (const char* t : two)
          if (text_.compare(i_, 2, t) == 0) p = t;
        if (p.size() == 1 && std::string("{}();,.=:+-*/%<>").find(c) == std::string::npos) {
          diags_.push_back({file_, pos.line, pos.column, std::string("unexpected character '") + c + "'"});
          advance();
          continue;
        }
        for (std::size_t k = 0; k < p.size(); ++k) advance();
        out.push_back({Tok::Punct, p, pos});
      }
    }
  }

 private:
  char advance() {
    char c = text_[i_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }
  void skip_space() {
    while (i_ < text_.size()) {
      char c = text_[i_];
      if (c == '#') {
        while (i_ < text_.size() && text_[i_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  const std::string& text_;
  std::vector<Diagnostic>& diags_;
  std::string file_;
  std::size_t i_ = 0;
  int line_ = 1;
  int col_ = 1;
};

struct SyntaxError {};

class Parser {
 public:
  Parser(std::vector<Token> toks, std::vector<Diagnostic>& diags, std::string file)
      : toks_(std::move(toks)), diags_(diags), file_(std::move(file)) {}

  void run(std::vector<ClassDef>& classes, std::vector<InterfaceDef>& ifaces) {
    while (peek().kind != Tok::End) {
      try {
        type_decl(classes, ifaces);
      } catch (const SyntaxError&) {
        recover_top();
      }
    }
  }

 private:
  const Token& peek(int k = 0) const {
    std::size_t j = std::min(pos_ + k, toks_.size() - 1);
    return toks_[j];
  }
  Token next() {
    Token t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  bool is(const char* text, int k = 0) const {
    const Token& t = peek(k);
    return (t.kind == Tok::Punct || t.kind == Tok::Ident) && t.text == text;
  }
  bool accept(const char* text) {
    if (is(text)) {
      next();
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const Token& t, const std::string& msg) {
    diags_.push_back({file_, t.pos.line, t.pos.column, msg});
    throw SyntaxError{};
  }
  void expect(const char* text) {
    if (!accept(text)) fail(peek(), std::string("expected '") + text + "' but found '" + describe(peek()) + "'");
  }
  static std::string describe(const Token& t) { return t.kind == Tok::End ? "end of input" : t.text; }

  static bool reserved(const std::string& s) {
    static const std::set<std::string> kw = {
        "framework", "app",     "class",   "interface", "extends",  "implements", "final",
        "static",    "api",     "public",  "protected", "private",  "if",         "goto",
        "return",    "new",     "virtual", "special",   "true",     "false",      "null"};
    return kw.count(s) > 0;
  }
  std::string ident(const char* what) {
    const Token& t = peek();
    if (t.kind != Tok::Ident || reserved(t.text)) fail(t, std::string("expected ") + what + " but found '" + describe(t) + "'");
    return next().text;
  }

  void recover_top() {
    // Skip to the end of the current braced declaration.
    int depth = 0;
    while (peek().kind != Tok::End) {
      Token t = next();
      if (t.text == "{") ++depth;
      if (t.text == "}" && --depth <= 0) return;
    }
  }
  void recover_stmt() {
    while (peek().kind != Tok::End && !is(";") && !is("}")) next();
    accept(";");
  }

  void type_decl(std::vector<ClassDef>& classes, std::vector<InterfaceDef>& ifaces) {
    Origin origin = Origin::App;
    if (accept("framework")) origin = Origin::Framework;
    else if (accept("app")) origin = Origin::App;
    bool is_final = false, is_public = false;
    while (true) {
      if (accept("final")) is_final = true;
      else if (accept("public")) is_public = true;
      else break;
    }
    SourcePos pos = peek().pos;
    if (accept("interface")) {
      InterfaceDef i;
      i.origin = origin;
      i.is_public = is_public;
      i.pos = pos;
      i.name = ident("interface name");
      if (accept("extends")) {
        do i.extends.push_back(ident("interface name"));
        while (accept(","));
      }
      expect("{");
      while (!is("}") && peek().kind != Tok::End) {
        try {
          MethodDef m;
          if (!member(m, nullptr, i.name, origin)) fail(peek(), "interfaces cannot declare fields");
          if (m.has_body) diags_.push_back({file_, m.pos.line, m.pos.column, "interface method " + m.name + " cannot have a body"});
          i.methods.push_back(std::move(m));
        } catch (const SyntaxError&) {
          recover_stmt();
        }
      }
      expect("}");
      ifaces.push_back(std::move(i));
      return;
    }
    if (!accept("class")) fail(peek(), "expected 'class' or 'interface' but found '" + describe(peek()) + "'");
    ClassDef c;
    c.origin = origin;
    c.is_final = is_final;
    c.pos = pos;
    c.name = ident("class name");
    if (accept("extends")) c.super_name = ident("superclass name");
    if (accept("implements")) {
      do c.interfaces.push_back(ident("interface name"));
      while (accept(","));
    }
    expect("{");
    while (!is("}") && peek().kind != Tok::End) {
      try {
        MethodDef m;
        FieldDef f;
        if (member(m, &f, c.name, origin)) c.methods.push_back(std::move(m));
        else c.fields.push_back(std::move(f));
      } catch (const SyntaxError&) {
        recover_member();
      }
    }
    expect("}");
    classes.push_back(std::move(c));
  }

  void recover_member() {
    int depth = 0;
    while (peek().kind != Tok::End) {
      if (depth == 0 && is("}")) return;
      Token t = next();
      if (t.text == "{") ++depth;
      if (t.text == "}" && --depth == 0) return;
      if (t.text == ";" && depth == 0) return;
    }
  }

  // Returns true for a method, false for a field.
  bool member(MethodDef& m, FieldDef* f, const std::string& owner, Origin /*origin*/) {
    Visibility vis = Visibility::Public;
    bool is_static = false, is_final = false, is_api = false;
    SourcePos pos = peek().pos;
    while (true) {
      if (accept("public")) vis = Visibility::Public;
      else if (accept("protected")) vis = Visibility::Protected;
      else if (accept("private")) vis = Visibility::Private;
      else if (accept("static")) is_static = true;
      else if (accept("final")) is_final = true;
      else if (accept("api")) is_api = true;
      else break;
    }
    std::string type = ident("type");
    std::string name = ident("member name");
    if (accept(";")) {
      if (!f) fail(peek(), "interfaces cannot declare fields");
      if (is_api) diags_.push_back({file_, pos.line, pos.column, "'api' is only legal on methods"});
      *f = FieldDef{name, type, vis, is_static, is_final, pos};
      return false;
    }
    m.owner = owner;
    m.name = name;
    m.return_type = type;
    m.visibility = vis;
    m.is_static = is_static;
    m.is_final = is_final;
    m.is_api = is_api;
    m.pos = pos;
    expect("(");
    if (!is(")")) {
      do {
        Param p;
        p.type = ident("parameter type");
        p.name = ident("parameter name");
        m.params.push_back(std::move(p));
      } while (accept(","));
    }
    expect(")");
    if (accept(";")) {
      m.has_body = false;
      return true;
    }
    expect("{");
    std::vector<std::string> pending_labels;
    while (!is("}") && peek().kind != Tok::End) {
      try {
        statement(m, pending_labels);
      } catch (const SyntaxError&) {
        recover_stmt();
      }
    }
    if (!pending_labels.empty())
      diags_.push_back({file_, peek().pos.line, peek().pos.column, "label " + pending_labels.front() + " does not precede a statement"});
    expect("}");
    return true;
  }

  Operand operand() {
    const Token& t = peek();
    if (t.kind == Tok::Int) return Operand::integer(std::stoll(next().text));
    if (t.kind == Tok::Str) return Operand::string(next().text);
    if (is("-") && peek(1).kind == Tok::Int) {
      next();
      return Operand::integer(-std::stoll(next().text));
    }
    if (accept("true")) return Operand::boolean(true);
    if (accept("false")) return Operand::boolean(false);
    if (accept("null")) return Operand::null();
    return Operand::local(ident("operand"));
  }

  std::optional<RelOp> relop() {
    static const std::pair<const char*, RelOp> ops[] = {{"<=", RelOp::Le}, {">=", RelOp::Ge}, {"==", RelOp::Eq},
                                                        {"!=", RelOp::Ne}, {"<", RelOp::Lt},  {">", RelOp::Gt}};
    for (auto& [t, op] : ops)
      if (accept(t)) return op;
    return std::nullopt;
  }
  std::optional<BinOp> binop() {
    static const std::pair<const char*, BinOp> ops[] = {
        {"+", BinOp::Add}, {"-", BinOp::Sub}, {"*", BinOp::Mul}, {"/", BinOp::Div}, {"%", BinOp::Rem}};
    for (auto& [t, op] : ops)
      if (accept(t)) return op;
    return std::nullopt;
  }

  void call_tail(Stmt& s) {
    expect("(");
    if (!is(")")) {
      do s.args.push_back(operand());
      while (accept(","));
    }
    expect(")");
  }

  bool parse_call(Stmt& s) {
    if (is("virtual") || is("special")) {
      s.special = next().text == "special";
      s.kind = StmtKind::VirtualCall;
      s.base = ident("receiver");
      expect(".");
      s.member = ident("method name");
      call_tail(s);
      return true;
    }
    if (is("static")) {
      next();
      s.kind = StmtKind::StaticCall;
      s.class_name = ident("class name");
      expect(".");
      s.member = ident("method name");
      call_tail(s);
      return true;
    }
    return false;
  }

  void statement(MethodDef& m, std::vector<std::string>& labels) {
    while (peek().kind == Tok::Ident && peek(1).kind == Tok::Punct && peek(1).text == ":" && !reserved(peek().text)) {
      labels.push_back(next().text);
      next();
    }
    Stmt s;
    s.pos = peek().pos;
    if (accept("if")) {
      s.kind = StmtKind::IfGoto;
      s.lhs = operand();
      auto op = relop();
      if (!op) fail(peek(), "expected relational operator but found '" + describe(peek()) + "'");
      s.rel = *op;
      s.rhs = operand();
      expect("goto");
      s.target_label = ident("label");
    } else if (accept("goto")) {
      s.kind = StmtKind::Goto;
      s.target_label = ident("label");
    } else if (accept("return")) {
      s.kind = StmtKind::Return;
      if (!is(";")) {
        s.has_value = true;
        s.lhs = operand();
      }
    } else if (parse_call(s)) {
    } else {
      std::string first = ident("statement");
      if (peek().kind == Tok::Ident && !reserved(peek().text)) {
        if (!labels.empty()) fail(peek(), "labels cannot precede declarations");
        do m.locals.push_back({first, ident("local name")});
        while (accept(","));
        expect(";");
        return;
      }
      if (accept(".")) {
        // a.b = operand : field or static store, classified later
        s.base = first;
        s.member = ident("field name");
        expect("=");
        s.kind = StmtKind::FieldStore;
        s.lhs = operand();
      } else {
        expect("=");
        s.dst = first;
        if (accept("new")) {
          s.kind = StmtKind::New;
          s.class_name = ident("class name");
          if (accept("(")) expect(")");
        } else if (parse_call(s)) {
        } else if (peek().kind == Tok::Ident && !reserved(peek().text) && peek(1).text == ".") {
          s.kind = StmtKind::FieldLoad;
          s.base = next().text;
          next();
          s.member = ident("field name");
        } else {
          s.lhs = operand();
          if (auto op = binop()) {
            s.kind = StmtKind::BinaryOp;
            s.bin = *op;
            s.rhs = operand();
          } else {
            s.kind = StmtKind::AssignLocal;
          }
        }
      }
    }
    expect(";");
    s.labels = std::move(labels);
    labels.clear();
    s.id = static_cast<int>(m.body.size());
    m.body.push_back(std::move(s));
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<Diagnostic>& diags_;
  std::string file_;
};

// Second pass: class-level checks and statement resolution.
class Validator {
 public:
  Validator(std::vector<ClassDef>& classes, std::vector<InterfaceDef>& ifaces, std::vector<Diagnostic>& diags,
            std::map<std::string, std::string> files)
      : classes_(classes), ifaces_(ifaces), diags_(diags), files_(std::move(files)) {}

  void run() {
    for (const auto& c : classes_) {
      if (class_names_.count(c.name) || iface_names_.count(c.name))
        error(c.name, c.pos, "duplicate class " + c.name);
      class_names_.insert(c.name);
    }
    for (const auto& i : ifaces_) {
      if (class_names_.count(i.name) || iface_names_.count(i.name))
        error(i.name, i.pos, "duplicate interface " + i.name);
      iface_names_.insert(i.name);
    }
    for (const auto& c : classes_) {
      if (c.builtin) continue;
      if (!class_names_.count(c.super_name)) {
        if (iface_names_.count(c.super_name)) error(c.name, c.pos, "class " + c.name + " cannot extend interface " + c.super_name);
        else error(c.name, c.pos, "unresolved superclass " + c.super_name);
      }
      for (const auto& i : c.interfaces)
        if (!iface_names_.count(i)) error(c.name, c.pos, "unresolved interface " + i);
    }
    for (const auto& i : ifaces_)
      for (const auto& e : i.extends)
        if (!iface_names_.count(e)) error(i.name, i.pos, "unresolved interface " + e);
    check_cycles();
    for (auto& c : classes_) {
      if (c.builtin) continue;
      std::set<std::string> fields;
      for (const auto& f : c.fields) {
        if (!fields.insert(f.name).second) error(c.name, f.pos, "duplicate field " + c.name + "." + f.name);
        check_type(c.name, f.type, f.pos, false);
      }
      std::set<Signature> sigs;
      for (auto& m : c.methods) {
        if (!sigs.insert(m.signature()).second)
          error(c.name, m.pos, "duplicate method " + c.name + "." + m.signature().str());
        if (m.is_api && c.origin == Origin::App)
          error(c.name, m.pos, "'api' on app class method " + m.qualified_name());
        check_method(c, m);
      }
    }
    for (auto& i : ifaces_) {
      std::set<Signature> sigs;
      for (auto& m : i.methods) {
        if (!sigs.insert(m.signature()).second)
          error(i.name, m.pos, "duplicate method " + i.name + "." + m.signature().str());
        if (m.is_api) error(i.name, m.pos, "'api' is not legal on interface methods");
        check_type(i.name, m.return_type, m.pos, true);
        for (const auto& p : m.params) check_type(i.name, p.type, m.pos, false);
      }
    }
  }

 private:
  const ClassDef* find_class(const std::string& n) const {
    for (const auto& c : classes_)
      if (c.name == n) return &c;
    return nullptr;
  }
  const InterfaceDef* find_iface(const std::string& n) const {
    for (const auto& i : ifaces_)
      if (i.name == n) return &i;
    return nullptr;
  }

  void error(const std::string& owner, SourcePos pos, std::string msg) {
    auto it = files_.find(owner);
    diags_.push_back({it == files_.end() ? "" : it->second, pos.line, pos.column, std::move(msg)});
  }

  void check_cycles() {
    std::map<std::string, int> state;  // 0 new, 1 active, 2 done
    std::function<bool(const std::string&)> visit = [&](const std::string& n) -> bool {
      int& st = state[n];
      if (st == 1) return true;
      if (st == 2) return false;
      st = 1;
      std::vector<std::string> ups;
      if (auto* c = find_class(n)) {
        if (c->name != "Object") ups.push_back(c->super_name);
        ups.insert(ups.end(), c->interfaces.begin(), c->interfaces.end());
      } else if (auto* i = find_iface(n)) {
        ups = i->extends;
      }
      for (const auto& u : ups)
        if ((find_class(u) || find_iface(u)) && visit(u)) return true;
      state[n] = 2;
      return false;
    };
    for (const auto& c : classes_) {
      std::map<std::string, int> fresh;
      state.swap(fresh);
      if (visit(c.name)) {
        error(c.name, c.pos, "cyclic inheritance involving " + c.name);
        cyclic_ = true;
        return;
      }
    }
    for (const auto& i : ifaces_) {
      std::map<std::string, int> fresh;
      state.swap(fresh);
      if (visit(i.name)) {
        error(i.name, i.pos, "cyclic inheritance involving " + i.name);
        cyclic_ = true;
        return;
      }
    }
  }

  bool known_type(const std::string& t) const {
    return is_primitive_type(t) || class_names_.count(t) || iface_names_.count(t);
  }
  void check_type(const std::string& owner, const std::string& t, SourcePos pos, bool allow_void) {
    if (t == "void" && !allow_void) error(owner, pos, "void is only legal as a return type");
    else if (!known_type(t)) error(owner, pos, "unresolved type " + t);
  }

  bool subtype(const std::string& sub, const std::string& sup) const {
    if (cyclic_) return sub == sup;
    if (sub == sup) return true;
    if (auto* c = find_class(sub)) {
      if (c->name != "Object" && subtype(c->super_name, sup)) return true;
      for (const auto& i : c->interfaces)
        if (subtype(i, sup)) return true;
    } else if (auto* i = find_iface(sub)) {
      for (const auto& e : i->extends)
        if (subtype(e, sup)) return true;
    }
    return false;
  }

  const FieldDef* lookup_field(const std::string& cls, const std::string& f) const {
    const ClassDef* c = find_class(cls);
    int guard = 0;
    while (c && guard++ < 1000) {
      if (auto* fd = c->find_field(f)) return fd;
      if (c->name == "Object") break;
      c = find_class(c->super_name);
    }
    return nullptr;
  }

  bool has_method(const std::string& type, const Signature& sig, bool want_static) const {
    if (const ClassDef* c = find_class(type)) {
      int guard = 0;
      while (c && guard++ < 1000) {
        // opaque builtin: any instance method, unless reached by walking up from a user class
        if (c->builtin && (c->name != "Object" || c->name == type)) return !want_static;
        if (auto* m = c->find_method(sig)) return m->is_static == want_static;
        if (c->name == "Object") break;
        c = find_class(c->super_name);
      }
      if (!want_static) {
        // abstract class implementing an interface declaring the method
        for (const auto* k = find_class(type); k; k = k->name == "Object" ? nullptr : find_class(k->super_name))
          for (const auto& i : k->interfaces)
            if (has_method(i, sig, false)) return true;
      }
      return false;
    }
    if (const InterfaceDef* i = find_iface(type)) {
      if (want_static) return false;
      for (const auto& m : i->methods)
        if (m.signature() == sig) return true;
      for (const auto& e : i->extends)
        if (has_method(e, sig, false)) return true;
    }
    return false;
  }

  void check_method(const ClassDef& c, MethodDef& m) {
    check_type(c.name, m.return_type, m.pos, true);
    std::set<std::string> names;
    if (!m.is_static) names.insert("this");
    for (const auto& p : m.params) {
      check_type(c.name, p.type, m.pos, false);
      if (!names.insert(p.name).second) error(c.name, m.pos, "duplicate parameter " + p.name + " in " + m.qualified_name());
    }
    for (const auto& l : m.locals) {
      check_type(c.name, l.type, m.pos, false);
      if (!names.insert(l.name).second) error(c.name, m.pos, "duplicate local " + l.name + " in " + m.qualified_name());
    }
    if (!m.has_body) return;
    std::map<std::string, int> labels;
    for (const auto& s : m.body)
      for (const auto& l : s.labels)
        if (!labels.emplace(l, s.id).second) error(c.name, s.pos, "duplicate label " + l);

    auto need_local = [&](const std::string& n, SourcePos pos) {
      if (!names.count(n)) error(c.name, pos, "unresolved local " + n + " in " + m.qualified_name());
    };
    auto need_operand = [&](const Operand& o, SourcePos pos) {
      if (o.is_local()) need_local(o.name, pos);
    };
    for (auto& s : m.body) {
      switch (s.kind) {
        case StmtKind::FieldStore:
        case StmtKind::FieldLoad: {
          // `a.b`: a local base is a field access, otherwise a static one.
          bool is_local = names.count(s.base) > 0;
          if (!is_local && class_names_.count(s.base)) {
            s.class_name = s.base;
            s.base.clear();
            s.kind = s.kind == StmtKind::FieldStore ? StmtKind::StaticStore : StmtKind::StaticLoad;
            const FieldDef* f = lookup_field(s.class_name, s.member);
            if (!f) error(c.name, s.pos, "unresolved field " + s.class_name + "." + s.member);
            else if (!f->is_static) error(c.name, s.pos, "field " + s.class_name + "." + s.member + " is not static");
          } else if (!is_local) {
            error(c.name, s.pos, "unresolved local or class " + s.base + " in " + m.qualified_name());
          } else {
            std::string t = m.type_of(s.base);
            if (t != "String") {
              const FieldDef* f = lookup_field(t, s.member);
              if (!f) error(c.name, s.pos, "unresolved field " + t + "." + s.member);
              else if (f->is_static) error(c.name, s.pos, "field " + t + "." + s.member + " is static");
            }
          }
          break;
        }
        case StmtKind::New:
          if (!class_names_.count(s.class_name)) error(c.name, s.pos, "unresolved class " + s.class_name);
          break;
        case StmtKind::VirtualCall: {
          need_local(s.base, s.pos);
          std::string t = m.type_of(s.base);
          if (!t.empty() && !is_primitive_type(t) && !has_method(t, {s.member, static_cast<int>(s.args.size())}, false))
            error(c.name, s.pos, "unresolved method " + t + "." + s.member + "/" + std::to_string(s.args.size()));
          break;
        }
        case StmtKind::StaticCall:
          if (!class_names_.count(s.class_name)) error(c.name, s.pos, "unresolved class " + s.class_name);
          else if (!has_method(s.class_name, {s.member, static_cast<int>(s.args.size())}, true))
            error(c.name, s.pos, "unresolved static method " + s.class_name + "." + s.member + "/" + std::to_string(s.args.size()));
          break;
        case StmtKind::IfGoto:
        case StmtKind::Goto: {
          auto it = labels.find(s.target_label);
          if (it == labels.end()) error(c.name, s.pos, "unresolved label " + s.target_label);
          else s.target = it->second;
          break;
        }
        default: break;
      }
      if (!s.dst.empty()) need_local(s.dst, s.pos);
      if (s.dst == "this") error(c.name, s.pos, "cannot assign to this");
      if (s.kind == StmtKind::FieldStore) need_local(s.base, s.pos);
      bool uses_lhs = s.kind == StmtKind::AssignLocal || s.kind == StmtKind::FieldStore ||
                      s.kind == StmtKind::StaticStore || s.kind == StmtKind::BinaryOp ||
                      s.kind == StmtKind::IfGoto || (s.kind == StmtKind::Return && s.has_value);
      if (uses_lhs) need_operand(s.lhs, s.pos);
      if (s.kind == StmtKind::BinaryOp || s.kind == StmtKind::IfGoto) need_operand(s.rhs, s.pos);
      for (const auto& a : s.args) need_operand(a, s.pos);
    }
  }

  std::vector<ClassDef>& classes_;
  std::vector<InterfaceDef>& ifaces_;
  std::vector<Diagnostic>& diags_;
  std::map<std::string, std::string> files_;
  std::set<std::string> class_names_;
  std::set<std::string> iface_names_;
  bool cyclic_ = false;
};

inline std::vector<ClassDef> builtin_classes() {
  std::vector<ClassDef> out;
  for (const auto& n : builtin_class_names()) {
    ClassDef c;
    c.name = n;
    c.super_name = "Object";
    c.origin = Origin::Framework;
    c.builtin = true;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace detail

// Parses and validates one or more source files as a single program.
// Diagnostics from every file are collected; a program is returned only
// when there are none.
inline ParseResult parse_sources(const std::vector<SourceFile>& files) {
  ParseResult result;
  std::vector<ClassDef> classes = detail::builtin_classes();
  std::vector<InterfaceDef> ifaces;
  std::map<std::string, std::string> owner_file;
  for (const auto& f : files) {
    detail::Lexer lexer(f.text, result.diagnostics, f.name);
    detail::Parser parser(lexer.run(), result.diagnostics, f.name);
    std::size_t before_c = classes.size(), before_i = ifaces.size();
    parser.run(classes, ifaces);
    for (std::size_t k = before_c; k < classes.size(); ++k) owner_file.emplace(classes[k].name, f.name);
    for (std::size_t k = before_i; k < ifaces.size(); ++k) owner_file.emplace(ifaces[k].name, f.name);
  }
  detail::Validator(classes, ifaces, result.diagnostics, owner_file).run();
  std::stable_sort(result.diagnostics.begin(), result.diagnostics.end(), [](const Diagnostic& a, const Diagnostic& b) {
    return std::tie(a.file, a.line, a.column) < std::tie(b.file, b.line, b.column);
  });
  if (result.diagnostics.empty()) result.program.emplace(std::move(classes), std::move(ifaces));
  return result;
}

inline ParseResult parse_program(const std::string& text) { return parse_sources({{"", text}}); }

}  // namespace pcs::ir
