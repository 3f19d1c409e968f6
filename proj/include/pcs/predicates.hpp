#pragma once

// Predicate nodes: conditional branches a callback site (or the next call of
// its chain) is transitively control dependent on, abstracted to disjunctions
// of comparisons over abstract variables.

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcs/graphs.hpp"
#include "pcs/symbolic.hpp"

namespace pcs::predicates {

struct Term {
  sym::Value lhs;
  ir::RelOp op = ir::RelOp::Eq;
  sym::Value rhs;

  std::string str() const { return lhs.str() + " " + std::string(ir::to_string(op)) + " " + rhs.str(); }
  bool operator==(const Term& o) const { return str() == o.str(); }
  bool operator<(const Term& o) const { return str() < o.str(); }
};

// Disjunction of terms, one per distinct backward path.
struct AbstractExpr {
  std::vector<Term> terms;  // canonical: sorted by text, unique
  bool unresolved = false;

  std::string str() const {
    std::string out;
    for (std::size_t i = 0; i < terms.size(); ++i) out += (i ? " || " : "") + terms[i].str();
    if (unresolved) out += terms.empty() ? "<unresolved>" : " || <unresolved>";
    return out;
  }
  std::vector<sym::AbstractVariable> variables() const {
    std::vector<sym::AbstractVariable> out;
    for (const auto& t : terms) {
      t.lhs.collect_vars(out);
      t.rhs.collect_vars(out);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
  bool operator==(const AbstractExpr& o) const { return terms == o.terms && unresolved == o.unresolved; }
};

inline constexpr std::size_t kMaxTerms = 64;

// B = { b | p in influence(b) }.
inline std::vector<int> identify_predicate_nodes(const graphs::Cfg& cfg, int point) {
  if (!cfg.is_statement(point))
    throw std::invalid_argument("identify_predicate_nodes: " + std::to_string(point) + " is not a statement of " +
                                cfg.method().qualified_name());
  std::vector<int> out;
  for (int b = 0; b < cfg.statement_count(); ++b) {
    if (!cfg.stmt(b).is_branch()) continue;
    if (graphs::influence(cfg, b).count(point)) out.push_back(b);
  }
  return out;
}

// Abstracts the condition of `branch` (a statement of ctx.methods.back())
// into terms over abstract variables of the chain head.
inline AbstractExpr back_substitute(const sym::ChainContext& ctx, int branch) {
  const ir::Stmt& s = ctx.methods.back()->body.at(branch);
  if (!s.is_branch()) throw std::invalid_argument("back_substitute: statement is not a branch");
  sym::BackwardOptions opt;
  opt.mode = sym::Mode::Symbolic;
  opt.max_results = kMaxTerms;
  auto r = sym::propagate_backward(ctx, branch, {sym::Value::of_operand(s.lhs), sym::Value::of_operand(s.rhs)}, opt);
  AbstractExpr e;
  std::set<Term> terms;
  for (const auto& p : r.paths) {
    if (!p.resolved) {
      e.unresolved = true;
      continue;
    }
    terms.insert({p.values[0], s.rel, p.values[1]});
  }
  if (r.budget_exhausted || r.result_cap_hit || terms.size() > kMaxTerms) e.unresolved = true;
  if (terms.size() <= kMaxTerms) e.terms.assign(terms.begin(), terms.end());
  return e;
}

}  // namespace pcs::predicates
