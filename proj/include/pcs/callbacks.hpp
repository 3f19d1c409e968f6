#pragma once

// Potential callback signatures, callback call sites, bounded call chains and
// Handler message-passing links.

#include <algorithm>
#include <climits>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcs/graphs.hpp"
#include "pcs/ir.hpp"

namespace pcs::callbacks {

struct CallbackSignature {
  std::string owner;  // class or interface declaring the method
  ir::Signature sig;
  bool from_interface = false;
  auto operator<=>(const CallbackSignature&) const = default;
  std::string str() const { return owner + "." + sig.name + "()"; }
};

using SignatureSet = std::set<CallbackSignature>;

// Non-static, non-final public/protected methods of non-final framework
// classes, plus every method of a public framework interface.
inline SignatureSet callback_signatures(const ir::Program& p) {
  SignatureSet out;
  for (const auto& c : p.classes()) {
    if (c.builtin || c.is_final || c.origin != ir::Origin::Framework) continue;
    for (const auto& m : c.methods) {
      if (m.is_static || m.is_final || m.visibility == ir::Visibility::Private) continue;
      out.insert({c.name, m.signature(), false});
    }
  }
  for (const auto& i : p.interfaces()) {
    if (!i.is_public || i.origin != ir::Origin::Framework) continue;
    for (const auto& m : i.methods) out.insert({i.name, m.signature(), true});
  }
  return out;
}

// The signature a virtual call statement binds to, if it is a callback.
inline std::optional<CallbackSignature> match_callback(const ir::Program& p, const SignatureSet& sigs,
                                                       const ir::MethodDef& in, const ir::Stmt& s) {
  if (s.kind != ir::StmtKind::VirtualCall || s.special) return std::nullopt;
  std::string type = in.type_of(s.base);
  if (type.empty()) return std::nullopt;
  ir::Signature sig{s.member, static_cast<int>(s.args.size())};
  const ir::MethodDef* decl = p.find_class(type) ? p.resolve_dispatch(type, sig) : p.find_interface_method(type, sig);
  if (!decl) return std::nullopt;
  CallbackSignature key{decl->owner, sig, p.find_interface(decl->owner) != nullptr};
  if (!sigs.count(key)) return std::nullopt;
  return key;
}

struct CallbackSite {
  const ir::MethodDef* method = nullptr;
  int stmt = 0;
  CallbackSignature signature;
};

// m0..mn with hops[i] the call statement in methods[i] reaching methods[i+1].
struct CallChain {
  std::vector<const ir::MethodDef*> methods;
  std::vector<int> hops;
  std::vector<bool> async_hops;
  int site_stmt = 0;  // callback call site inside methods.back()

  const ir::MethodDef* head() const { return methods.front(); }
  const ir::MethodDef* tail() const { return methods.back(); }
  bool async() const { return std::find(async_hops.begin(), async_hops.end(), true) != async_hops.end(); }
  std::string str() const {
    std::string out = "<";
    for (std::size_t i = 0; i < methods.size(); ++i) out += (i ? ", " : "") + methods[i]->qualified_name();
    return out + ">";
  }
  bool operator==(const CallChain&) const = default;
};

struct CallSiteSet {
  std::vector<CallbackSite> sites;
  std::vector<std::vector<CallChain>> chains;  // parallel to sites
};

struct ChainBounds {
  int max_len = 16;     // methods per chain
  int max_callers = 5;  // callers explored per backward step
  std::uint64_t seed = 0;
};

inline std::vector<CallbackSite> callback_sites(const ir::Program& p, const SignatureSet& sigs) {
  std::vector<CallbackSite> out;
  for (const auto& c : p.classes()) {
    if (c.origin != ir::Origin::Framework) continue;
    for (const auto& m : c.methods)
      for (const auto& s : m.body)
        if (auto sig = match_callback(p, sigs, m, s)) out.push_back({&m, s.id, *sig});
  }
  return out;
}

namespace detail {

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 1469598103934665603ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace detail

// Backward traversal over the call graph from every callback call site.
// Caller sampling is keyed by (seed, callee, chain length) so a site's chains
// do not depend on which other sites exist.
inline CallSiteSet find_call_chains(const ir::Program& p, const graphs::CallGraph& cg, const SignatureSet& sigs,
                                    const ChainBounds& bounds = {}) {
  if (bounds.max_len < 1 || bounds.max_callers < 1)
    throw std::invalid_argument("find_call_chains: bounds must be >= 1");
  CallSiteSet out;
  out.sites = callback_sites(p, sigs);
  for (const auto& site : out.sites) {
    std::vector<CallChain> chains;
    // Reversed chain under construction: rev_methods[0] = site method.
    std::vector<const ir::MethodDef*> rev_methods{site.method};
    std::vector<int> rev_hops;
    std::vector<bool> rev_async;
    std::function<void()> extend = [&]() {
      const ir::MethodDef* head = rev_methods.back();
      if (head->is_api) {
        CallChain ch;
        ch.methods.assign(rev_methods.rbegin(), rev_methods.rend());
        ch.hops.assign(rev_hops.rbegin(), rev_hops.rend());
        ch.async_hops.assign(rev_async.rbegin(), rev_async.rend());
        ch.site_stmt = site.stmt;
        chains.push_back(std::move(ch));
      }
      if (static_cast<int>(rev_methods.size()) >= bounds.max_len) return;
      std::vector<const ir::MethodDef*> callers;
      for (const auto& e : cg.callers(head)) {
        if (std::find(rev_methods.begin(), rev_methods.end(), e.caller) != rev_methods.end()) continue;
        if (p.origin(e.caller->owner) != ir::Origin::Framework) continue;
        if (std::find(callers.begin(), callers.end(), e.caller) == callers.end()) callers.push_back(e.caller);
      }
      auto by_name = [](const ir::MethodDef* a, const ir::MethodDef* b) {
        return a->qualified_name() + "/" + a->signature().str() < b->qualified_name() + "/" + b->signature().str();
      };
      std::sort(callers.begin(), callers.end(), by_name);
      if (static_cast<int>(callers.size()) > bounds.max_callers) {
        std::uint64_t key = detail::fnv1a(head->qualified_name() + "/" + head->signature().str(),
                                          bounds.seed * 0x9e3779b97f4a7c15ull + rev_methods.size());
        std::mt19937_64 rng(key);
        std::shuffle(callers.begin(), callers.end(), rng);
        callers.resize(bounds.max_callers);
        std::sort(callers.begin(), callers.end(), by_name);
      }
      for (const auto* caller : callers) {
        std::vector<graphs::CallEdge> hops;
        for (const auto& e : cg.callers(head))
          if (e.caller == caller) hops.push_back(e);
        std::sort(hops.begin(), hops.end(), [](const auto& a, const auto& b) { return a.stmt < b.stmt; });
        int last_stmt = -1;
        for (const auto& e : hops) {
          if (e.stmt == last_stmt) continue;
          last_stmt = e.stmt;
          rev_methods.push_back(caller);
          rev_hops.push_back(e.stmt);
          rev_async.push_back(e.kind == graphs::CallKind::Async);
          extend();
          rev_methods.pop_back();
          rev_hops.pop_back();
          rev_async.pop_back();
        }
      }
    };
    extend();
    out.chains.push_back(std::move(chains));
  }
  return out;
}

inline CallSiteSet find_call_chains(const ir::Program& p, const graphs::CallGraph& cg, const SignatureSet& sigs,
                                    int max_len, int max_callers, std::uint64_t seed) {
  return find_call_chains(p, cg, sigs, ChainBounds{max_len, max_callers, seed});
}

inline bool is_handler_type(const ir::Program& p, std::string_view type) {
  return !type.empty() && p.find_class(type) && p.is_subtype(type, "Handler");
}

// First handleMessage found walking up from `cls`.
inline const ir::MethodDef* find_handle_message(const ir::Program& p, std::string_view cls) {
  for (const ir::ClassDef* c = p.find_class(cls); c; c = c->name == "Object" ? nullptr : p.find_class(c->super_name))
    for (const auto& m : c->methods)
      if (m.name == "handleMessage" && !m.is_static && m.has_body) return &m;
  return nullptr;
}

struct AsyncDiagnostic {
  const ir::MethodDef* method = nullptr;
  int stmt = 0;
  std::string message;
};

// Adds an Async edge from every `h.sendMessage(...)` site to the handleMessage
// of h's declared class. Returns warnings for receivers without a handler.
inline std::vector<AsyncDiagnostic> link_async_handlers(const ir::Program& p, graphs::CallGraph& cg) {
  std::vector<AsyncDiagnostic> warnings;
  for (const auto& c : p.classes())
    for (const auto& m : c.methods)
      for (const auto& s : m.body) {
        if (s.kind != ir::StmtKind::VirtualCall || s.member != "sendMessage") continue;
        std::string type = m.type_of(s.base);
        if (!is_handler_type(p, type)) continue;
        if (const auto* h = find_handle_message(p, type)) {
          cg.add({&m, s.id, h, graphs::CallKind::Async});
        } else {
          warnings.push_back({&m, s.id, "no handleMessage for receiver type " + type + " at " + m.qualified_name() +
                                            "#" + std::to_string(s.id)});
        }
      }
  return warnings;
}

}  // namespace pcs::callbacks
