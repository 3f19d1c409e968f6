#pragma once

// Abstract variables, symbolic values, and the demand-driven backward
// propagation engine shared by receiver resolution, predicate abstraction
// and update detection.

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "pcs/graphs.hpp"
#include "pcs/ir.hpp"

namespace pcs::sym {

// One access-path step: a field name, or a call token rendered `name()`.
struct PathToken {
  std::string name;
  bool call = false;
  auto operator<=>(const PathToken&) const = default;
  std::string str() const { return call ? name + "()" : name; }
};

using AccessChain = std::vector<PathToken>;

inline std::string chain_text(const AccessChain& c) {
  std::string out;
  for (std::size_t i = 0; i < c.size(); ++i) out += (i ? "." : "") + c[i].str();
  return out;
}

enum class Scope { Static, CallingObject, Param };

// (scope, class-type, access path) visible to API clients.
struct AbstractVariable {
  Scope scope = Scope::Static;
  int param = -1;
  std::string class_name;
  AccessChain path;

  auto operator<=>(const AbstractVariable&) const = default;

  std::string scope_text() const {
    switch (scope) {
      case Scope::Static: return "static";
      case Scope::CallingObject: return "calling-object";
      case Scope::Param: return "param" + std::to_string(param);
    }
    return "?";
  }
  std::string str() const { return "(" + scope_text() + ", " + class_name + ", " + chain_text(path) + ")"; }
  bool has_prefix(const AbstractVariable& base) const {
    return scope == base.scope && param == base.param && class_name == base.class_name &&
           path.size() >= base.path.size() && std::equal(base.path.begin(), base.path.end(), path.begin());
  }
};

// Symbolic value: constant, abstract variable, +/- arithmetic, or a
// framework local still under tracking.
struct Value {
  enum class Kind { Const, Var, Arith, Local, Unresolved };
  Kind kind = Kind::Unresolved;
  ir::Operand constant;
  AbstractVariable var;
  ir::BinOp op = ir::BinOp::Add;
  std::vector<Value> operands;  // Arith: exactly two
  std::string local;
  AccessChain local_path;

  static Value of_const(ir::Operand c) {
    Value v;
    v.kind = Kind::Const;
    v.constant = std::move(c);
    return v;
  }
  static Value of_var(AbstractVariable a) {
    Value v;
    v.kind = Kind::Var;
    v.var = std::move(a);
    return v;
  }
  static Value of_local(std::string name, AccessChain path = {}) {
    Value v;
    v.kind = Kind::Local;
    v.local = std::move(name);
    v.local_path = std::move(path);
    return v;
  }
  static Value arith(ir::BinOp op, Value a, Value b) {
    Value v;
    v.kind = Kind::Arith;
    v.op = op;
    v.operands = {std::move(a), std::move(b)};
    return v;
  }
  static Value unresolved() { return {}; }
  static Value of_operand(const ir::Operand& o) { return o.is_local() ? of_local(o.name) : of_const(o); }

  bool operator==(const Value& o) const { return str() == o.str(); }
  bool operator<(const Value& o) const { return str() < o.str(); }

  bool resolved() const {
    switch (kind) {
      case Kind::Const:
      case Kind::Var: return true;
      case Kind::Arith: return operands[0].resolved() && operands[1].resolved();
      default: return false;
    }
  }
  bool has_unresolved() const {
    if (kind == Kind::Unresolved) return true;
    if (kind == Kind::Arith) return operands[0].has_unresolved() || operands[1].has_unresolved();
    return false;
  }
  void collect_vars(std::vector<AbstractVariable>& out) const {
    if (kind == Kind::Var) out.push_back(var);
    for (const auto& o : operands) o.collect_vars(out);
  }
  std::string str() const {
    switch (kind) {
      case Kind::Const: return ir::to_string(constant);
      case Kind::Var: return var.str();
      case Kind::Arith:
        return "(" + operands[0].str() + " " + std::string(ir::to_string(op)) + " " + operands[1].str() + ")";
      case Kind::Local: return "local:" + local + (local_path.empty() ? "" : "." + chain_text(local_path));
      case Kind::Unresolved: return "<unresolved>";
    }
    return "?";
  }
};

enum class Mode {
  Symbolic,  // call results become call tokens, +/- arithmetic substituted
  Alias,     // only copies and field loads propagate; anything else kills
};

struct BackwardOptions {
  Mode mode = Mode::Symbolic;
  int k_limit = 5;             // max access-path length
  std::size_t max_results = 64;
  long max_steps = 200000;
  // Early termination: return false to abandon a path given a local's
  // current (suffix) access chain.
  std::function<bool(const AccessChain&)> keep_path;
};

// Position of the analysis along a call chain m0..mi.
struct ChainContext {
  std::vector<const ir::MethodDef*> methods;
  std::vector<int> hops;  // hops[k]: call stmt in methods[k] reaching methods[k+1]
};

struct PathResult {
  std::vector<Value> values;
  bool resolved = false;   // every value is constants/abstract variables
  bool truncated = false;  // k-limit exceeded
  bool operator<(const PathResult& o) const {
    return std::tie(values, resolved, truncated) < std::tie(o.values, o.resolved, o.truncated);
  }
};

struct BackwardResult {
  std::vector<PathResult> paths;  // sorted, unique
  bool budget_exhausted = false;
  bool result_cap_hit = false;
};

namespace detail {

class Engine {
 public:
  Engine(const ChainContext& ctx, const BackwardOptions& opt) : ctx_(ctx), opt_(opt) {
    for (const auto* m : ctx.methods) cfgs_.emplace_back(*m);
  }

  BackwardResult run(int start_stmt, std::vector<Value> values) {
    int level = static_cast<int>(ctx_.methods.size()) - 1;
    std::map<int, int> visits;
    if (settle(values, level, visits)) {
      // nothing to do
    } else {
      walk_preds(level, start_stmt, std::move(values), visits);
    }
    BackwardResult r;
    r.paths.assign(results_.begin(), results_.end());
    r.budget_exhausted = exhausted_;
    r.result_cap_hit = capped_;
    return r;
  }

 private:
  bool stop() const { return exhausted_ || capped_; }

  void emit(PathResult pr) {
    if (results_.size() >= opt_.max_results && !results_.count(pr)) {
      capped_ = true;
      return;
    }
    results_.insert(std::move(pr));
  }

  // Emits and returns true when the values need no further propagation.
  bool settle(const std::vector<Value>& values, int /*level*/, const std::map<int, int>&) {
    bool all_resolved = true, any_unresolved = false;
    for (const auto& v : values) {
      if (v.has_unresolved()) any_unresolved = true;
      else if (!v.resolved()) all_resolved = false;
    }
    if (any_unresolved) {
      emit({values, false, truncated_now_});
      return true;
    }
    if (all_resolved) {
      emit({values, true, false});
      return true;
    }
    return false;
  }

  void walk_preds(int level, int node, std::vector<Value> values, std::map<int, int>& visits) {
    const graphs::Cfg& cfg = cfgs_[level];
    for (const auto& e : cfg.pred(node)) {
      if (stop()) return;
      int& count = visits[e.from];
      if (count >= 2) continue;  // loops unrolled once
      ++count;
      visit(level, e.from, values, visits);
      --count;
    }
  }

  void visit(int level, int node, std::vector<Value> values, std::map<int, int>& visits) {
    if (++steps_ > opt_.max_steps) {
      exhausted_ = true;
      return;
    }
    const graphs::Cfg& cfg = cfgs_[level];
    truncated_now_ = false;
    if (node == cfg.entry()) {
      at_entry(level, std::move(values));
      return;
    }
    if (!cfg.is_statement(node)) return;
    const ir::Stmt& s = cfg.stmt(node);
    if (!s.dst.empty()) {
      bool abandoned = false;
      for (auto& v : values) substitute(v, s, level, abandoned);
      if (abandoned) return;
    }
    if (settle(values, level, visits)) return;
    walk_preds(level, node, std::move(values), visits);
  }

  void at_entry(int level, std::vector<Value> values) {
    const ir::MethodDef& m = *ctx_.methods[level];
    if (level == 0) {
      for (auto& v : values) map_root(v, m);
      bool any_unres = false;
      for (const auto& v : values) any_unres |= !v.resolved();
      emit({values, !any_unres, false});
      return;
    }
    const ir::MethodDef& caller = *ctx_.methods[level - 1];
    const ir::Stmt& call = caller.body.at(ctx_.hops[level - 1]);
    for (auto& v : values) rebase(v, m, call);
    std::map<int, int> visits;
    if (settle(values, level - 1, visits)) return;
    walk_preds(level - 1, call.id, std::move(values), visits);
  }

  void map_root(Value& v, const ir::MethodDef& m) {
    if (v.kind == Value::Kind::Arith) {
      for (auto& o : v.operands) map_root(o, m);
      return;
    }
    if (v.kind != Value::Kind::Local) return;
    if (v.local == "this" && !m.is_static) {
      v = Value::of_var({Scope::CallingObject, -1, m.owner, v.local_path});
    } else if (int idx = m.param_index(v.local); idx >= 0) {
      v = Value::of_var({Scope::Param, idx, m.params[idx].type, v.local_path});
    } else {
      v = Value::unresolved();
    }
  }

  void rebase(Value& v, const ir::MethodDef& callee, const ir::Stmt& call) {
    if (v.kind == Value::Kind::Arith) {
      for (auto& o : v.operands) rebase(o, callee, call);
      return;
    }
    if (v.kind != Value::Kind::Local) return;
    if (v.local == "this" && !callee.is_static && call.kind == ir::StmtKind::VirtualCall) {
      v = Value::of_local(call.base, v.local_path);
    } else if (int idx = callee.param_index(v.local); idx >= 0 && idx < static_cast<int>(call.args.size())) {
      const ir::Operand& a = call.args[idx];
      if (a.is_local()) v = Value::of_local(a.name, v.local_path);
      else v = v.local_path.empty() ? Value::of_const(a) : Value::unresolved();
    } else {
      v = Value::unresolved();
    }
  }

  bool keep(const AccessChain& path) {
    if (static_cast<int>(path.size()) > opt_.k_limit) {
      truncated_now_ = true;
      return false;
    }
    return !opt_.keep_path || opt_.keep_path(path);
  }

  static AccessChain prepend(PathToken t, const AccessChain& rest) {
    AccessChain out{std::move(t)};
    out.insert(out.end(), rest.begin(), rest.end());
    return out;
  }

  void substitute(Value& v, const ir::Stmt& s, int level, bool& abandoned) {
    if (v.kind == Value::Kind::Arith) {
      for (auto& o : v.operands) substitute(o, s, level, abandoned);
      return;
    }
    if (v.kind != Value::Kind::Local || v.local != s.dst) return;
    const AccessChain& path = v.local_path;
    const bool symbolic = opt_.mode == Mode::Symbolic;
    switch (s.kind) {
      case ir::StmtKind::AssignLocal:
        if (s.lhs.is_local()) v = Value::of_local(s.lhs.name, path);
        else v = path.empty() ? Value::of_const(s.lhs) : Value::unresolved();
        break;
      case ir::StmtKind::FieldLoad: {
        AccessChain p = prepend({s.member, false}, path);
        if (!keep(p)) {
          abandoned = !truncated_now_;
          v = Value::unresolved();
          return;
        }
        v = Value::of_local(s.base, std::move(p));
        break;
      }
      case ir::StmtKind::StaticLoad: {
        AccessChain p = prepend({s.member, false}, path);
        if (static_cast<int>(p.size()) > opt_.k_limit) {
          truncated_now_ = true;
          v = Value::unresolved();
          return;
        }
        v = Value::of_var({Scope::Static, -1, s.class_name, std::move(p)});
        break;
      }
      case ir::StmtKind::BinaryOp:
        if (symbolic && path.empty() && (s.bin == ir::BinOp::Add || s.bin == ir::BinOp::Sub))
          v = Value::arith(s.bin, Value::of_operand(s.lhs), Value::of_operand(s.rhs));
        else
          v = Value::unresolved();
        break;
      case ir::StmtKind::VirtualCall:
      case ir::StmtKind::StaticCall: {
        if (!symbolic) {
          v = Value::unresolved();
          break;
        }
        AccessChain p = prepend({s.member, true}, path);
        if (!keep(p)) {
          abandoned = !truncated_now_;
          v = Value::unresolved();
          return;
        }
        if (s.kind == ir::StmtKind::VirtualCall) v = Value::of_local(s.base, std::move(p));
        else v = Value::of_var({Scope::Static, -1, s.class_name, std::move(p)});
        break;
      }
      case ir::StmtKind::New:
      default: v = Value::unresolved(); break;
    }
    (void)level;
  }

  const ChainContext& ctx_;
  const BackwardOptions& opt_;
  std::vector<graphs::Cfg> cfgs_;
  std::set<PathResult> results_;
  long steps_ = 0;
  bool exhausted_ = false;
  bool capped_ = false;
  bool truncated_now_ = false;
};

}  // namespace detail

// Propagates `values` (expressions over locals of the last chain method,
// read at `start_stmt`) backwards along every path to the entry of the
// chain head, rebasing parameters through each hop.
inline BackwardResult propagate_backward(const ChainContext& ctx, int start_stmt, std::vector<Value> values,
                                         const BackwardOptions& opt = {}) {
  detail::Engine engine(ctx, opt);
  return engine.run(start_stmt, std::move(values));
}

// Chain context that reaches an ICFG instance through its discovery parents.
inline ChainContext context_of_instance(const graphs::Icfg& g, int instance) {
  std::vector<const ir::MethodDef*> methods;
  std::vector<int> hops;
  for (int i = instance; i != -1; i = g.instances[i].parent) {
    methods.push_back(g.instances[i].method);
    if (g.instances[i].parent != -1) hops.push_back(g.instances[i].parent_call);
  }
  std::reverse(methods.begin(), methods.end());
  std::reverse(hops.begin(), hops.end());
  return {methods, hops};
}

}  // namespace pcs::sym
