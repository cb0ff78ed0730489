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

// XML form of security policies:
//
//   <policy version="0.2.0">
//     <common name="common_1">...rule groups...</common>
//     <enclaves>
//       <enclave path="/talker_listener">
//         <profiles>
//           <profile ns="/" node="talker">
//             <include name="common_1"/>
//             <topics publish="ALLOW"><topic>chatter</topic></topics>
//             <services reply="ALLOW"><service>list_nodes</service></services>
//             <actions execute="ALLOW"><action>navigate</action></actions>
//           </profile>
//         </profiles>
//       </enclave>
//     </enclaves>
//   </policy>
//
// A rule-group element may carry several action attributes; attributes
// sharing a qualifier collapse into one rule per name child. save_policy
// emits one element per rule, and load(save(p)) == p.

#ifndef GRAPHGUARD_POLICY_XML_HPP_
#define GRAPHGUARD_POLICY_XML_HPP_

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "graphguard/policy.hpp"
#include "graphguard/xml.hpp"

namespace graphguard::policy {

class SchemaViolation : public Error {
 public:
  SchemaViolation(int line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

namespace xml_detail {

struct KindNames {
  ResourceKind kind;
  const char* group;
  const char* item;
};

inline constexpr KindNames kKindNames[] = {
    {ResourceKind::topic, "topics", "topic"},
    {ResourceKind::service, "services", "service"},
    {ResourceKind::action, "actions", "action"},
};

inline const KindNames* kind_for_group(const std::string& element) {
  for (const auto& k : kKindNames) {
    if (element == k.group) return &k;
  }
  return nullptr;
}

inline const KindNames* names_for_kind(ResourceKind kind) {
  for (const auto& k : kKindNames) {
    if (kind == k.kind) return &k;
  }
  return nullptr;
}

inline Action parse_action(const xml::Element& el, const std::string& name) {
  for (Action a : {Action::publish, Action::subscribe, Action::reply,
                   Action::request, Action::call, Action::execute}) {
    if (action_str(a) == name) return a;
  }
  throw SchemaViolation(el.line, "unknown action attribute '" + name +
                                     "' on <" + el.name + ">");
}

inline Qualifier parse_qualifier(const xml::Element& el,
                                 const std::string& value) {
  if (value == "ALLOW") return Qualifier::allow;
  if (value == "DENY") return Qualifier::deny;
  throw SchemaViolation(el.line, "qualifier must be ALLOW or DENY, got '" +
                                     value + "'");
}

/// Expands one <topics>/<services>/<actions> element into rules.
inline void load_rule_group(const xml::Element& el, std::vector<Rule>* out) {
  const KindNames* names = kind_for_group(el.name);
  if (!names) {
    throw SchemaViolation(el.line, "unexpected element <" + el.name + ">");
  }
  // Attribute order decides rule order; same-qualifier attributes merge.
  std::vector<std::pair<Qualifier, std::set<Action>>> groups;
  for (const auto& [attr_name, attr_value] : el.attributes) {
    Action action = parse_action(el, attr_name);
    if (!legal_actions(names->kind).count(action)) {
      throw SchemaViolation(el.line, "action '" + attr_name +
                                         "' is illegal for <" + el.name + ">");
    }
    Qualifier q = parse_qualifier(el, attr_value);
    bool merged = false;
    for (auto& [have_q, have_actions] : groups) {
      if (have_q == q) {
        have_actions.insert(action);
        merged = true;
      }
    }
    if (!merged) groups.push_back({q, {action}});
  }
  if (groups.empty()) {
    throw SchemaViolation(el.line, "<" + el.name +
                                       "> carries no action attributes");
  }
  std::vector<std::string> patterns;
  for (const auto& child : el.children) {
    if (child.name != names->item) {
      throw SchemaViolation(child.line, "expected <" +
                                            std::string(names->item) +
                                            ">, found <" + child.name + ">");
    }
    if (child.text.empty()) {
      throw SchemaViolation(child.line, "<" + child.name + "> names nothing");
    }
    patterns.push_back(child.text);
  }
  if (patterns.empty()) {
    throw SchemaViolation(el.line, "<" + el.name + "> contains no names");
  }
  for (const auto& [qualifier, actions] : groups) {
    for (const auto& pattern : patterns) {
      Rule rule;
      rule.kind = names->kind;
      rule.qualifier = qualifier;
      rule.actions = actions;
      rule.pattern = pattern;
      try {
        rule.validate();
      } catch (const BadRule& err) {
        throw SchemaViolation(el.line, err.what());
      }
      out->push_back(std::move(rule));
    }
  }
}

inline std::string require_attr(const xml::Element& el, const char* name) {
  const std::string* value = el.attr(name);
  if (!value) {
    throw SchemaViolation(el.line, "<" + el.name + "> needs a '" + name +
                                       "' attribute");
  }
  return *value;
}

inline Profile load_profile(const xml::Element& el) {
  Profile profile;
  profile.node_namespace = require_attr(el, "ns");
  profile.node = require_attr(el, "node");
  if (profile.node.empty()) {
    throw SchemaViolation(el.line, "profile node name is empty");
  }
  for (const auto& child : el.children) {
    if (child.name == "include") {
      profile.includes.push_back(require_attr(child, "name"));
    } else {
      load_rule_group(child, &profile.rules);
    }
  }
  return profile;
}

inline xml::Element save_rule(const Rule& rule) {
  const KindNames* names = names_for_kind(rule.kind);
  xml::Element el;
  el.name = names->group;
  for (Action a : rule.actions) {
    el.attributes.emplace_back(action_str(a), qualifier_str(rule.qualifier));
  }
  xml::Element item;
  item.name = names->item;
  item.text = rule.pattern;
  el.children.push_back(std::move(item));
  return el;
}

}  // namespace xml_detail

/// Parses and validates a policy document. Violations carry the source
/// line of the offending element.
inline SecurityPolicy load_policy(const std::string& text) {
  xml::Element root;
  try {
    root = xml::parse(text);
  } catch (const xml::ParseError& err) {
    throw SchemaViolation(err.line(), err.what());
  }
  if (root.name != "policy") {
    throw SchemaViolation(root.line, "root element must be <policy>, found <" +
                                         root.name + ">");
  }
  SecurityPolicy policy;
  policy.version = xml_detail::require_attr(root, "version");

  const xml::Element* enclaves = nullptr;
  for (const auto& child : root.children) {
    if (child.name == "common") {
      std::string name = xml_detail::require_attr(child, "name");
      if (policy.find_common(name)) {
        throw SchemaViolation(child.line, "duplicate common '" + name + "'");
      }
      std::vector<Rule> rules;
      for (const auto& group : child.children) {
        xml_detail::load_rule_group(group, &rules);
      }
      policy.commons.emplace_back(name, std::move(rules));
    } else if (child.name == "enclaves") {
      if (enclaves) {
        throw SchemaViolation(child.line, "more than one <enclaves> element");
      }
      enclaves = &child;
    } else {
      throw SchemaViolation(child.line, "unexpected element <" + child.name +
                                            "> under <policy>");
    }
  }
  if (!enclaves) {
    throw SchemaViolation(root.line, "<policy> needs an <enclaves> element");
  }

  for (const auto& enclave_el : enclaves->children) {
    if (enclave_el.name != "enclave") {
      throw SchemaViolation(enclave_el.line, "expected <enclave>, found <" +
                                                 enclave_el.name + ">");
    }
    Enclave enclave;
    enclave.path = xml_detail::require_attr(enclave_el, "path");
    if (enclave.path.empty() || enclave.path[0] != '/') {
      throw SchemaViolation(enclave_el.line, "enclave path '" + enclave.path +
                                                 "' is not absolute");
    }
    if (find_enclave(policy, enclave.path)) {
      throw SchemaViolation(enclave_el.line, "duplicate enclave path '" +
                                                 enclave.path + "'");
    }
    for (const auto& profiles_el : enclave_el.children) {
      if (profiles_el.name != "profiles") {
        throw SchemaViolation(profiles_el.line, "expected <profiles>, found <" +
                                                    profiles_el.name + ">");
      }
      for (const auto& profile_el : profiles_el.children) {
        if (profile_el.name != "profile") {
          throw SchemaViolation(profile_el.line, "expected <profile>, found <" +
                                                     profile_el.name + ">");
        }
        Profile profile = xml_detail::load_profile(profile_el);
        for (const auto& have : enclave.profiles) {
          if (have.node_namespace == profile.node_namespace &&
              have.node == profile.node) {
            throw SchemaViolation(profile_el.line, "duplicate profile " +
                                                       profile.fqn());
          }
        }
        enclave.profiles.push_back(std::move(profile));
      }
    }
    policy.enclaves.push_back(std::move(enclave));
  }

  // Includes must resolve; dangling names are almost always typos.
  for (const auto& enclave : policy.enclaves) {
    for (const auto& profile : enclave.profiles) {
      for (const auto& inc : profile.includes) {
        if (!policy.find_common(inc)) {
          throw SchemaViolation(root.line, "profile " + profile.fqn() +
                                               " includes unknown common '" +
                                               inc + "'");
        }
      }
    }
  }
  return policy;
}

/// Emits the document form; inverse of load_policy.
inline std::string save_policy(const SecurityPolicy& policy) {
  xml::Element root;
  root.name = "policy";
  root.attributes.emplace_back("version", policy.version);
  for (const auto& [name, rules] : policy.commons) {
    xml::Element common;
    common.name = "common";
    common.attributes.emplace_back("name", name);
    for (const Rule& rule : rules) {
      common.children.push_back(xml_detail::save_rule(rule));
    }
    root.children.push_back(std::move(common));
  }
  xml::Element enclaves;
  enclaves.name = "enclaves";
  for (const Enclave& enclave : policy.enclaves) {
    xml::Element enclave_el;
    enclave_el.name = "enclave";
    enclave_el.attributes.emplace_back("path", enclave.path);
    xml::Element profiles;
    profiles.name = "profiles";
    for (const Profile& profile : enclave.profiles) {
      xml::Element profile_el;
      profile_el.name = "profile";
      profile_el.attributes.emplace_back("ns", profile.node_namespace);
      profile_el.attributes.emplace_back("node", profile.node);
      for (const std::string& inc : profile.includes) {
        xml::Element include_el;
        include_el.name = "include";
        include_el.attributes.emplace_back("name", inc);
        profile_el.children.push_back(std::move(include_el));
      }
      for (const Rule& rule : profile.rules) {
        profile_el.children.push_back(xml_detail::save_rule(rule));
      }
      profiles.children.push_back(std::move(profile_el));
    }
    enclave_el.children.push_back(std::move(profiles));
    enclaves.children.push_back(std::move(enclave_el));
  }
  root.children.push_back(std::move(enclaves));
  return xml::serialize(root);
}

inline SecurityPolicy load_policy_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open policy file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_policy(buffer.str());
}

inline void save_policy_file(const SecurityPolicy& policy,
                             const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write policy file " + path);
  out << save_policy(policy);
}

}  // namespace graphguard::policy

#endif  // GRAPHGUARD_POLICY_XML_HPP_
