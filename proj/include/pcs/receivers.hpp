#pragma once

// Object receivers of callback call sites: `this`, a parameter (optionally a
// field path below it), or unknown.

#include <set>
#include <string>
#include <vector>

#include "pcs/callbacks.hpp"
#include "pcs/symbolic.hpp"

namespace pcs::receivers {

struct Receiver {
  enum class Kind { This, Param, Unknown };
  Kind kind = Kind::Unknown;
  int index = -1;
  sym::AccessChain path;

  static Receiver self() { return {Kind::This, -1, {}}; }
  static Receiver param(int i, sym::AccessChain p = {}) { return {Kind::Param, i, std::move(p)}; }
  static Receiver unknown() { return {}; }

  auto operator<=>(const Receiver&) const = default;
  std::string str() const {
    switch (kind) {
      case Kind::This: return "this";
      case Kind::Param: return "param(" + std::to_string(index) + ")" + (path.empty() ? "" : "." + sym::chain_text(path));
      case Kind::Unknown: return "unknown";
    }
    return "?";
  }
};

struct AliasResult {
  std::set<sym::AbstractVariable> aliases;
  bool truncated = false;
};

inline sym::ChainContext chain_context(const callbacks::CallChain& chain) {
  return {chain.methods, chain.hops};
}

// May-aliases of `base` (a local of the chain tail, read at the callback
// site) rooted at the calling object, parameters of the head, or statics.
inline AliasResult backward_alias(const std::string& base, const callbacks::CallChain& chain, int k_limit = 5) {
  sym::BackwardOptions opt;
  opt.mode = sym::Mode::Alias;
  opt.k_limit = k_limit;
  auto r = sym::propagate_backward(chain_context(chain), chain.site_stmt, {sym::Value::of_local(base)}, opt);
  AliasResult out;
  for (const auto& p : r.paths) {
    if (p.truncated) out.truncated = true;
    if (p.resolved && p.values[0].kind == sym::Value::Kind::Var) out.aliases.insert(p.values[0].var);
  }
  return out;
}

struct ReceiverResolution {
  callbacks::CallbackSite site;
  callbacks::CallChain chain;
  std::vector<Receiver> receivers;  // sorted; `unknown` only alone
};

inline std::vector<Receiver> receivers_from_aliases(const AliasResult& a) {
  std::set<Receiver> out;
  for (const auto& v : a.aliases) {
    if (v.scope == sym::Scope::CallingObject && v.path.empty()) out.insert(Receiver::self());
    else if (v.scope == sym::Scope::Param) out.insert(Receiver::param(v.param, v.path));
  }
  if (out.empty()) return {Receiver::unknown()};
  return {out.begin(), out.end()};
}

inline std::vector<ReceiverResolution> resolve_receivers(const callbacks::CallSiteSet& cs, int k_limit = 5) {
  std::vector<ReceiverResolution> out;
  for (std::size_t i = 0; i < cs.sites.size(); ++i) {
    const auto& site = cs.sites[i];
    const std::string& base = site.method->body.at(site.stmt).base;
    for (const auto& chain : cs.chains[i])
      out.push_back({site, chain, receivers_from_aliases(backward_alias(base, chain, k_limit))});
  }
  return out;
}

}  // namespace pcs::receivers
