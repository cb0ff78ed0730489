// Copyright 2026 the graphguard authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Declarative access-control policies over the computational graph:
// generation from observed traffic, wildcard matching, merging, shared
// sub-profile factoring, denial-driven refinement and auditing.
//
// Wildcard semantics are fnmatch's: '*' crosses namespace separators.
// That is deliberate (multi-robot namespaces) and security-relevant; a
// pattern like "robot*" grants every robot's subtree.

#ifndef GRAPHGUARD_POLICY_HPP_
#define GRAPHGUARD_POLICY_HPP_

#include <algorithm>
#include <compare>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "graphguard/bytes.hpp"
#include "graphguard/graph.hpp"

namespace graphguard::policy {

class UnassignedNode : public Error {
 public:
  explicit UnassignedNode(const std::string& what) : Error(what) {}
};

class VersionMismatch : public Error {
 public:
  explicit VersionMismatch(const std::string& what) : Error(what) {}
};

class BadRule : public Error {
 public:
  explicit BadRule(const std::string& what) : Error(what) {}
};

// ---------------------------------------------------------------------------
// Glob matching
// ---------------------------------------------------------------------------

namespace detail {

enum class SingleMatch { matched, unmatched, invalid };

/// Matches one pattern element at pat[pi] against c, advancing pi.
/// Mirrors fnmatch(3) without flags: '\' quotes, brackets support '!'/'^'
/// negation and ranges, an unterminated class poisons the whole match.
inline SingleMatch match_single(std::string_view pat, size_t& pi, char c) {
  char pc = pat[pi];
  if (pc == '?') {
    ++pi;
    return SingleMatch::matched;
  }
  if (pc == '\\') {
    if (pi + 1 >= pat.size()) return SingleMatch::invalid;
    pc = pat[pi + 1];
    pi += 2;
    return pc == c ? SingleMatch::matched : SingleMatch::unmatched;
  }
  if (pc == '[') {
    size_t j = pi + 1;
    bool negate = false;
    if (j < pat.size() && (pat[j] == '!' || pat[j] == '^')) {
      negate = true;
      ++j;
    }
    bool found = false;
    bool first = true;
    bool closed = false;
    while (j < pat.size()) {
      char cc = pat[j];
      if (cc == ']' && !first) {
        closed = true;
        ++j;
        break;
      }
      first = false;
      if (cc == '\\') {
        if (j + 1 >= pat.size()) return SingleMatch::invalid;
        cc = pat[++j];
      }
      if (j + 2 < pat.size() && pat[j + 1] == '-' && pat[j + 2] != ']') {
        char hi = pat[j + 2];
        size_t next = j + 3;
        if (hi == '\\') {
          if (j + 3 >= pat.size()) return SingleMatch::invalid;
          hi = pat[j + 3];
          next = j + 4;
        }
        if (c >= cc && c <= hi) found = true;
        j = next;
        continue;
      }
      if (cc == c) found = true;
      ++j;
    }
    if (!closed) return SingleMatch::invalid;
    pi = j;
    return found != negate ? SingleMatch::matched : SingleMatch::unmatched;
  }
  ++pi;
  return pc == c ? SingleMatch::matched : SingleMatch::unmatched;
}

}  // namespace detail

/// fnmatch-equivalent glob: '*' matches any run including '/', '?' one
/// character, '[...]' classes with '!' negation.
inline bool glob_match(std::string_view pattern, std::string_view text) {
  size_t pi = 0, ti = 0;
  size_t star_pi = std::string_view::npos, star_ti = 0;
  while (ti < text.size()) {
    if (pi < pattern.size()) {
      if (pattern[pi] == '*') {
        star_pi = ++pi;
        star_ti = ti;
        continue;
      }
      size_t next_pi = pi;
      detail::SingleMatch m = detail::match_single(pattern, next_pi, text[ti]);
      if (m == detail::SingleMatch::invalid) return false;
      if (m == detail::SingleMatch::matched) {
        pi = next_pi;
        ++ti;
        continue;
      }
    }
    if (star_pi == std::string_view::npos) return false;
    pi = star_pi;
    ti = ++star_ti;
  }
  while (pi < pattern.size() && pattern[pi] == '*') ++pi;
  return pi == pattern.size();
}

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

enum class ResourceKind { topic, service, action };
enum class Action { publish, subscribe, reply, request, call, execute };
enum class Qualifier { deny, allow };
enum class Decision { allow, deny, not_covered };

inline std::string resource_kind_str(ResourceKind k) {
  switch (k) {
    case ResourceKind::topic: return "topic";
    case ResourceKind::service: return "service";
    case ResourceKind::action: return "action";
  }
  return "?";
}

inline std::string action_str(Action a) {
  switch (a) {
    case Action::publish: return "publish";
    case Action::subscribe: return "subscribe";
    case Action::reply: return "reply";
    case Action::request: return "request";
    case Action::call: return "call";
    case Action::execute: return "execute";
  }
  return "?";
}

inline std::string qualifier_str(Qualifier q) {
  return q == Qualifier::allow ? "ALLOW" : "DENY";
}

/// Actions that make sense for a resource kind.
inline const std::set<Action>& legal_actions(ResourceKind kind) {
  static const std::set<Action> topics = {Action::publish, Action::subscribe};
  static const std::set<Action> services = {Action::reply, Action::request};
  static const std::set<Action> actions = {Action::call, Action::execute};
  switch (kind) {
    case ResourceKind::topic: return topics;
    case ResourceKind::service: return services;
    case ResourceKind::action: return actions;
  }
  return topics;
}

/// The "<kind>-<action>" token used in denial logs and audit output.
inline std::string kind_action_token(ResourceKind kind, Action action) {
  return resource_kind_str(kind) + "-" + action_str(action);
}

inline std::optional<std::pair<ResourceKind, Action>> parse_kind_action(
    const std::string& token) {
  static const std::map<std::string, std::pair<ResourceKind, Action>> kTokens =
      {{"topic-publish", {ResourceKind::topic, Action::publish}},
       {"topic-subscribe", {ResourceKind::topic, Action::subscribe}},
       {"service-reply", {ResourceKind::service, Action::reply}},
       {"service-request", {ResourceKind::service, Action::request}},
       {"action-call", {ResourceKind::action, Action::call}},
       {"action-execute", {ResourceKind::action, Action::execute}}};
  auto it = kTokens.find(token);
  if (it == kTokens.end()) return std::nullopt;
  return it->second;
}

struct Rule {
  ResourceKind kind = ResourceKind::topic;
  Qualifier qualifier = Qualifier::allow;
  std::set<Action> actions;
  std::string pattern;

  auto operator<=>(const Rule&) const = default;

  /// Throws BadRule when the action set is empty or illegal for the kind.
  void validate() const {
    if (actions.empty()) {
      throw BadRule("rule '" + pattern + "' has no actions");
    }
    const auto& legal = legal_actions(kind);
    for (Action a : actions) {
      if (!legal.count(a)) {
        throw BadRule("action '" + action_str(a) + "' is illegal for " +
                      resource_kind_str(kind) + " '" + pattern + "'");
      }
    }
  }
};

struct Profile {
  std::string node_namespace = "/";
  std::string node;
  std::vector<std::string> includes;
  std::vector<Rule> rules;

  auto operator<=>(const Profile&) const = default;

  std::string fqn() const {
    if (node_namespace.empty() || node_namespace == "/") return "/" + node;
    if (node_namespace.back() == '/') return node_namespace + node;
    return node_namespace + "/" + node;
  }
};

struct Enclave {
  std::string path = "/";
  std::vector<Profile> profiles;

  auto operator<=>(const Enclave&) const = default;
};

/// A policy document: named shared rule blocks plus per-enclave profiles.
struct SecurityPolicy {
  std::string version = "0.2.0";
  std::vector<std::pair<std::string, std::vector<Rule>>> commons;
  std::vector<Enclave> enclaves;

  auto operator<=>(const SecurityPolicy&) const = default;

  const std::vector<Rule>* find_common(const std::string& name) const {
    for (const auto& [n, rules] : commons) {
      if (n == name) return &rules;
    }
    return nullptr;
  }
};

// ---------------------------------------------------------------------------
// Name resolution
// ---------------------------------------------------------------------------

/// Resolves a possibly relative name against a namespace. Absolute names
/// pass through; policies store relative names so documents stay portable
/// across namespaces.
inline std::string resolve_name(const std::string& ns, const std::string& name) {
  if (!name.empty() && name[0] == '/') return name;
  if (ns.empty() || ns == "/") return "/" + name;
  if (ns.back() == '/') return ns + name;
  return ns + "/" + name;
}

/// Inverse of resolve_name for generation: strips the namespace prefix
/// when it applies, else keeps the name absolute.
inline std::string relative_name(const std::string& ns,
                                 const std::string& name) {
  std::string prefix = ns.empty() || ns == "/" ? "/" : ns;
  if (prefix.back() != '/') prefix += "/";
  if (name.rfind(prefix, 0) == 0 && name.size() > prefix.size()) {
    return name.substr(prefix.size());
  }
  return name;
}

// ---------------------------------------------------------------------------
// Matching
// ---------------------------------------------------------------------------

namespace detail {

/// Whether one rule covers a query, resolving both sides against the
/// profile namespace. Action rules also cover their expanded service and
/// topic resources (client side for call, server side for execute).
inline bool rule_covers(const Rule& rule, const std::string& ns,
                        ResourceKind kind, const std::string& name,
                        Action action) {
  std::string abs_name = resolve_name(ns, name);
  if (rule.kind == kind && rule.actions.count(action)) {
    if (glob_match(resolve_name(ns, rule.pattern), abs_name)) return true;
  }
  if (rule.kind == ResourceKind::action && kind != ResourceKind::action) {
    bool client = rule.actions.count(Action::call) > 0;
    bool server = rule.actions.count(Action::execute) > 0;
    std::string base = resolve_name(ns, rule.pattern) + "/_action/";
    if (kind == ResourceKind::service) {
      bool side_ok = (client && action == Action::request) ||
                     (server && action == Action::reply);
      if (side_ok) {
        for (const char* leaf : {"send_goal", "cancel_goal", "get_result"}) {
          if (glob_match(base + leaf, abs_name)) return true;
        }
      }
    } else if (kind == ResourceKind::topic) {
      bool side_ok = (client && action == Action::subscribe) ||
                     (server && action == Action::publish);
      if (side_ok) {
        for (const char* leaf : {"feedback", "status"}) {
          if (glob_match(base + leaf, abs_name)) return true;
        }
      }
    }
  }
  return false;
}

}  // namespace detail

/// First matching rule wins; profile rules are consulted before included
/// common blocks. No matching rule means NOT_COVERED, never an implicit
/// DENY; callers that want default-deny treat the two alike.
inline Decision match_profile(const SecurityPolicy& policy,
                              const Profile& profile, ResourceKind kind,
                              const std::string& name, Action action) {
  for (const Rule& rule : profile.rules) {
    if (detail::rule_covers(rule, profile.node_namespace, kind, name, action)) {
      return rule.qualifier == Qualifier::allow ? Decision::allow
                                                : Decision::deny;
    }
  }
  for (const std::string& inc : profile.includes) {
    const std::vector<Rule>* rules = policy.find_common(inc);
    if (!rules) continue;
    for (const Rule& rule : *rules) {
      if (detail::rule_covers(rule, profile.node_namespace, kind, name,
                              action)) {
        return rule.qualifier == Qualifier::allow ? Decision::allow
                                                  : Decision::deny;
      }
    }
  }
  return Decision::not_covered;
}

inline const Enclave* find_enclave(const SecurityPolicy& policy,
                                   const std::string& path) {
  for (const auto& e : policy.enclaves) {
    if (e.path == path) return &e;
  }
  return nullptr;
}

/// Finds a profile by fully qualified node name ("/ns/node") or bare node
/// name, searching one enclave.
inline const Profile* find_profile(const Enclave& enclave,
                                   const std::string& node) {
  for (const auto& p : enclave.profiles) {
    if (p.fqn() == node || p.node == node) return &p;
  }
  return nullptr;
}

/// Searches every enclave; returns the owning enclave too.
inline std::optional<std::pair<const Enclave*, const Profile*>>
find_profile_anywhere(const SecurityPolicy& policy, const std::string& node) {
  for (const auto& e : policy.enclaves) {
    if (const Profile* p = find_profile(e, node)) return {{&e, p}};
  }
  return std::nullopt;
}

inline Decision match(const SecurityPolicy& policy, const std::string& enclave,
                      const std::string& node, ResourceKind kind,
                      const std::string& name, Action action) {
  const Enclave* e = find_enclave(policy, enclave);
  if (!e) return Decision::not_covered;
  const Profile* p = find_profile(*e, node);
  if (!p) return Decision::not_covered;
  return match_profile(policy, *p, kind, name, action);
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

/// (kind, action) pair equivalent to an observed capability.
inline std::pair<ResourceKind, Action> capability_pair(graph::Capability c) {
  switch (c) {
    case graph::Capability::topic_publish:
      return {ResourceKind::topic, Action::publish};
    case graph::Capability::topic_subscribe:
      return {ResourceKind::topic, Action::subscribe};
    case graph::Capability::service_reply:
      return {ResourceKind::service, Action::reply};
    case graph::Capability::service_request:
      return {ResourceKind::service, Action::request};
  }
  return {ResourceKind::topic, Action::publish};
}

/// Least-privilege policy for a snapshot: exactly the observed accesses
/// become ALLOW rules, nothing else. Nodes map to enclaves through the
/// assignment; an empty assignment sends every node to "/". A non-empty
/// assignment must cover every node.
inline SecurityPolicy generate_policy(
    const graph::GraphSnapshot& snapshot,
    const std::map<std::string, std::string>& assignment = {}) {
  SecurityPolicy policy;
  std::map<std::string, Enclave> enclaves;
  for (const graph::Node& node : snapshot.nodes()) {
    std::string fqn = node.id.full();
    std::string enclave_path = "/";
    if (!assignment.empty()) {
      auto it = assignment.find(fqn);
      if (it == assignment.end()) it = assignment.find(node.id.name);
      if (it == assignment.end()) {
        throw UnassignedNode("node " + fqn + " missing from the assignment");
      }
      enclave_path = it->second;
    }

    Profile profile;
    profile.node_namespace = node.id.node_namespace;
    profile.node = node.id.name;
    // One rule per (kind, pattern, qualifier); actions merge into a set.
    std::map<std::pair<ResourceKind, std::string>, std::set<Action>> merged;
    for (const graph::ObservedAccess& access : node.accesses) {
      auto [kind, action] = capability_pair(access.capability);
      std::string pattern = relative_name(profile.node_namespace, access.name);
      merged[{kind, pattern}].insert(action);
    }
    for (const auto& [key, actions] : merged) {
      Rule rule;
      rule.kind = key.first;
      rule.pattern = key.second;
      rule.actions = actions;
      rule.qualifier = Qualifier::allow;
      profile.rules.push_back(rule);
    }
    std::sort(profile.rules.begin(), profile.rules.end());

    Enclave& enclave = enclaves[enclave_path];
    enclave.path = enclave_path;
    enclave.profiles.push_back(std::move(profile));
  }
  for (auto& [path, enclave] : enclaves) {
    std::sort(enclave.profiles.begin(), enclave.profiles.end(),
              [](const Profile& a, const Profile& b) {
                return std::tie(a.node_namespace, a.node) <
                       std::tie(b.node_namespace, b.node);
              });
    policy.enclaves.push_back(std::move(enclave));
  }
  return policy;
}

// ---------------------------------------------------------------------------
// Merge
// ---------------------------------------------------------------------------

/// Union of two policies. Profile collisions union their rule lists with
/// later duplicates dropped; rule order within a profile is preserved, so
/// merge(p, empty) == p and merge(p, p) == p hold exactly.
inline SecurityPolicy merge(const SecurityPolicy& a, const SecurityPolicy& b) {
  if (a.version != b.version) {
    throw VersionMismatch("cannot merge policy versions " + a.version +
                          " and " + b.version);
  }
  SecurityPolicy out = a;
  for (const auto& [name, rules] : b.commons) {
    bool found = false;
    for (auto& [have_name, have_rules] : out.commons) {
      if (have_name != name) continue;
      found = true;
      for (const Rule& r : rules) {
        if (std::find(have_rules.begin(), have_rules.end(), r) ==
            have_rules.end()) {
          have_rules.push_back(r);
        }
      }
    }
    if (!found) out.commons.emplace_back(name, rules);
  }
  for (const Enclave& be : b.enclaves) {
    Enclave* target = nullptr;
    for (auto& oe : out.enclaves) {
      if (oe.path == be.path) target = &oe;
    }
    if (!target) {
      out.enclaves.push_back(be);
      continue;
    }
    for (const Profile& bp : be.profiles) {
      Profile* existing = nullptr;
      for (auto& op : target->profiles) {
        if (op.node_namespace == bp.node_namespace && op.node == bp.node) {
          existing = &op;
        }
      }
      if (!existing) {
        target->profiles.push_back(bp);
        continue;
      }
      for (const Rule& r : bp.rules) {
        if (std::find(existing->rules.begin(), existing->rules.end(), r) ==
            existing->rules.end()) {
          existing->rules.push_back(r);
        }
      }
      for (const std::string& inc : bp.includes) {
        if (std::find(existing->includes.begin(), existing->includes.end(),
                      inc) == existing->includes.end()) {
          existing->includes.push_back(inc);
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Refinement
// ---------------------------------------------------------------------------

struct Denial {
  std::string node;
  ResourceKind kind = ResourceKind::topic;
  Action action = Action::publish;
  std::string name;

  auto operator<=>(const Denial&) const = default;
};

class BadDenialLog : public Error {
 public:
  explicit BadDenialLog(const std::string& what) : Error(what) {}
};

/// Parses "DENY <node> <kind>-<action> <absolute-name>" lines. '#' starts
/// a comment; blank lines are fine.
inline std::vector<Denial> parse_denials(std::istream& in) {
  std::vector<Denial> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (size_t hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    std::istringstream ls(line);
    std::string tag, node, token, name;
    if (!(ls >> tag)) continue;
    if (tag != "DENY" || !(ls >> node >> token >> name)) {
      throw BadDenialLog("line " + std::to_string(line_no) +
                         ": expected 'DENY <node> <kind> <name>'");
    }
    auto ka = parse_kind_action(token);
    if (!ka) {
      throw BadDenialLog("line " + std::to_string(line_no) +
                         ": unknown kind '" + token + "'");
    }
    out.push_back(Denial{node, ka->first, ka->second, name});
  }
  return out;
}

inline std::vector<Denial> parse_denials(const std::string& text) {
  std::istringstream in(text);
  return parse_denials(in);
}

namespace detail {

inline std::pair<std::string, std::string> split_fqn(const std::string& node) {
  if (node.empty() || node[0] != '/') return {"/", node};
  size_t slash = node.rfind('/');
  if (slash == 0) return {"/", node.substr(1)};
  return {node.substr(0, slash), node.substr(slash + 1)};
}

}  // namespace detail

/// Turns denials into grants. A duplicate denial adds nothing; a denial
/// already allowed adds nothing; a denial hitting an explicit DENY rule
/// gets its ALLOW inserted before that rule so the grant takes effect.
/// Unknown nodes get fresh profiles: in the only enclave when there is
/// exactly one, else in "/".
inline SecurityPolicy refine(const SecurityPolicy& policy,
                             const std::vector<Denial>& denied) {
  SecurityPolicy out = policy;
  std::set<Denial> unique(denied.begin(), denied.end());
  for (const Denial& d : unique) {
    Profile* profile = nullptr;
    for (auto& e : out.enclaves) {
      for (auto& p : e.profiles) {
        if (p.fqn() == d.node || p.node == d.node) profile = &p;
      }
    }
    if (!profile) {
      auto [ns, name] = detail::split_fqn(d.node);
      Enclave* target = nullptr;
      if (out.enclaves.size() == 1) {
        target = &out.enclaves.front();
      } else {
        for (auto& e : out.enclaves) {
          if (e.path == "/") target = &e;
        }
        if (!target) {
          out.enclaves.push_back(Enclave{"/", {}});
          target = &out.enclaves.back();
        }
      }
      Profile fresh;
      fresh.node_namespace = ns;
      fresh.node = name;
      target->profiles.push_back(fresh);
      profile = &target->profiles.back();
    }

    Rule rule;
    rule.kind = d.kind;
    rule.qualifier = Qualifier::allow;
    rule.actions = {d.action};
    rule.pattern = relative_name(profile->node_namespace, d.name);

    Decision now = match_profile(out, *profile, d.kind, d.name, d.action);
    if (now == Decision::allow) continue;
    if (now == Decision::not_covered) {
      profile->rules.push_back(rule);
      continue;
    }
    // Explicit DENY: the grant must precede the first denying rule.
    auto at = profile->rules.begin();
    for (; at != profile->rules.end(); ++at) {
      if (at->qualifier == Qualifier::deny &&
          detail::rule_covers(*at, profile->node_namespace, d.kind, d.name,
                              d.action)) {
        break;
      }
    }
    profile->rules.insert(at, rule);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Factoring
// ---------------------------------------------------------------------------

/// Lifts maximal rule sets shared by two or more profiles into named
/// common blocks referenced by inclusion. Restricted to profiles whose
/// rules are all ALLOW: moving a rule out of a profile that mixes DENY
/// and ALLOW could reorder it across a DENY and change match results.
/// Existing includes are inlined first, so the op is idempotent.
inline SecurityPolicy factor_profiles(const SecurityPolicy& policy) {
  SecurityPolicy out = policy;
  // Inline current commons; factoring rebuilds them from scratch.
  for (auto& e : out.enclaves) {
    for (auto& p : e.profiles) {
      for (const std::string& inc : p.includes) {
        if (const std::vector<Rule>* rules = out.find_common(inc)) {
          p.rules.insert(p.rules.end(), rules->begin(), rules->end());
        }
      }
      p.includes.clear();
    }
  }
  out.commons.clear();

  struct ProfileRef {
    size_t enclave;
    size_t profile;
    auto operator<=>(const ProfileRef&) const = default;
  };
  auto eligible = [](const Profile& p) {
    return std::all_of(p.rules.begin(), p.rules.end(), [](const Rule& r) {
      return r.qualifier == Qualifier::allow;
    });
  };

  // Rule -> set of eligible profiles carrying it.
  std::map<Rule, std::set<ProfileRef>> where;
  for (size_t ei = 0; ei < out.enclaves.size(); ++ei) {
    for (size_t pi = 0; pi < out.enclaves[ei].profiles.size(); ++pi) {
      const Profile& p = out.enclaves[ei].profiles[pi];
      if (!eligible(p)) continue;
      for (const Rule& r : p.rules) where[r].insert({ei, pi});
    }
  }

  // Group rules by their sharing signature; each signature of size >= 2
  // becomes one common block.
  std::map<std::set<ProfileRef>, std::vector<Rule>> groups;
  for (const auto& [rule, refs] : where) {
    if (refs.size() >= 2) groups[refs].push_back(rule);
  }

  size_t counter = 0;
  for (auto& [refs, rules] : groups) {
    std::sort(rules.begin(), rules.end());
    std::string name = "common_" + std::to_string(++counter);
    out.commons.emplace_back(name, rules);
    for (const ProfileRef& ref : refs) {
      Profile& p = out.enclaves[ref.enclave].profiles[ref.profile];
      std::erase_if(p.rules, [&](const Rule& r) {
        return std::find(rules.begin(), rules.end(), r) != rules.end();
      });
      p.includes.push_back(name);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Audit
// ---------------------------------------------------------------------------

struct UncoveredAccess {
  std::string node;
  ResourceKind kind = ResourceKind::topic;
  Action action = Action::publish;
  std::string name;
  bool explicitly_denied = false;

  auto operator<=>(const UncoveredAccess&) const = default;
};

struct UnobservedGrant {
  std::string node;
  Rule rule;
  std::string via_common;

  auto operator<=>(const UnobservedGrant&) const = default;
};

struct WildcardUse {
  std::string node;
  Rule rule;
  size_t observed_matches = 0;

  auto operator<=>(const WildcardUse&) const = default;
};

struct AuditReport {
  std::vector<UncoveredAccess> uncovered;
  std::vector<UnobservedGrant> unobserved;
  std::vector<WildcardUse> wildcards;
  std::vector<std::string> notes;

  bool clean() const { return uncovered.empty() && unobserved.empty(); }

  /// Deterministic plain-text rendering, one finding per line.
  std::string render() const {
    std::ostringstream os;
    for (const auto& u : uncovered) {
      os << "uncovered " << u.node << " "
         << kind_action_token(u.kind, u.action) << " " << u.name
         << (u.explicitly_denied ? " (explicit DENY)" : "") << "\n";
    }
    for (const auto& g : unobserved) {
      os << "unobserved " << g.node << " " << resource_kind_str(g.rule.kind);
      for (Action a : g.rule.actions) os << "-" << action_str(a);
      os << " " << g.rule.pattern;
      if (!g.via_common.empty()) os << " (via " << g.via_common << ")";
      os << "\n";
    }
    for (const auto& w : wildcards) {
      os << "wildcard " << w.node << " " << resource_kind_str(w.rule.kind)
         << " " << w.rule.pattern << " matches " << w.observed_matches
         << "\n";
    }
    for (const auto& n : notes) os << "note " << n << "\n";
    return os.str();
  }
};

namespace detail {

inline bool has_wildcard(const std::string& pattern) {
  return pattern.find_first_of("*?[") != std::string::npos;
}

/// Does this ALLOW rule cover at least one access of the node; and how
/// many? Counts drive both over-privilege and wildcard findings.
inline size_t count_rule_matches(const Rule& rule, const std::string& ns,
                                 const std::set<graph::ObservedAccess>& obs) {
  size_t n = 0;
  for (const auto& access : obs) {
    auto [kind, action] = capability_pair(access.capability);
    if (rule_covers(rule, ns, kind, access.name, action)) ++n;
  }
  return n;
}

}  // namespace detail

/// Compares a policy against observed behavior. Findings: accesses the
/// policy does not allow, grants nothing exercised, and wildcard rules
/// with their observed match counts.
inline AuditReport audit(const SecurityPolicy& policy,
                         const graph::GraphSnapshot& snapshot) {
  AuditReport report;
  std::map<std::string, std::set<graph::ObservedAccess>> by_node;
  for (const auto& access : snapshot.accesses()) {
    by_node[access.node.full()].insert(access);
  }

  for (const auto& [fqn, accesses] : by_node) {
    auto found = find_profile_anywhere(policy, fqn);
    for (const auto& access : accesses) {
      auto [kind, action] = capability_pair(access.capability);
      Decision d = found ? match_profile(policy, *found->second, kind,
                                         access.name, action)
                         : Decision::not_covered;
      if (d != Decision::allow) {
        report.uncovered.push_back(UncoveredAccess{
            fqn, kind, action, access.name, d == Decision::deny});
      }
      if (kind == ResourceKind::service && d == Decision::allow) {
        report.notes.push_back(
            fqn + " " + kind_action_token(kind, action) + " " + access.name +
            " grants both wire directions of the exchange");
      }
    }
  }

  for (const auto& enclave : policy.enclaves) {
    for (const auto& profile : enclave.profiles) {
      std::string fqn = profile.fqn();
      const std::set<graph::ObservedAccess>& obs = by_node[fqn];
      auto inspect = [&](const Rule& rule, const std::string& via) {
        if (rule.qualifier != Qualifier::allow) return;
        size_t matches = detail::count_rule_matches(
            rule, profile.node_namespace, obs);
        if (matches == 0) {
          report.unobserved.push_back(UnobservedGrant{fqn, rule, via});
        }
        if (detail::has_wildcard(rule.pattern)) {
          report.wildcards.push_back(WildcardUse{fqn, rule, matches});
        }
      };
      for (const Rule& rule : profile.rules) inspect(rule, "");
      for (const std::string& inc : profile.includes) {
        if (const std::vector<Rule>* rules = policy.find_common(inc)) {
          for (const Rule& rule : *rules) inspect(rule, inc);
        }
      }
    }
  }

  std::sort(report.uncovered.begin(), report.uncovered.end());
  std::sort(report.unobserved.begin(), report.unobserved.end());
  std::sort(report.wildcards.begin(), report.wildcards.end());
  std::sort(report.notes.begin(), report.notes.end());
  return report;
}

}  // namespace graphguard::policy

#endif  // GRAPHGUARD_POLICY_HPP_
