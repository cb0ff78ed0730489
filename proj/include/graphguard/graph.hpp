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

// Computational-graph model: maps decoded discovery announcements onto
// nodes and the resources they touch. Node-level names use the ROS naming
// scheme; the mangling helpers here translate between those and the DDS
// topic names that appear on the wire.

#ifndef GRAPHGUARD_GRAPH_HPP_
#define GRAPHGUARD_GRAPH_HPP_

#include <compare>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "graphguard/bytes.hpp"
#include "graphguard/discovery.hpp"
#include "graphguard/pcap.hpp"
#include "graphguard/wire.hpp"

namespace graphguard::graph {

class InvalidName : public Error {
 public:
  explicit InvalidName(const std::string& what) : Error(what) {}
};

// ---------------------------------------------------------------------------
// Name mangling
// ---------------------------------------------------------------------------

/// How a node-level name maps onto DDS topics.
enum class MangleKind { topic, service_request, service_reply };

/// Node-level capabilities observable from endpoint announcements.
/// service_reply is the server side (reads requests, writes replies);
/// service_request is the client side.
enum class Capability { topic_publish, topic_subscribe, service_reply,
                        service_request };

inline std::string capability_str(Capability c) {
  switch (c) {
    case Capability::topic_publish: return "publish";
    case Capability::topic_subscribe: return "subscribe";
    case Capability::service_reply: return "reply";
    case Capability::service_request: return "request";
  }
  return "?";
}

/// Translates an absolute node-level name to its DDS topic name.
/// Topics gain the rt/ prefix; services split into rq/...Request and
/// rr/...Reply pairs. Action names must be expanded first.
inline std::string mangle(MangleKind kind, const std::string& name) {
  if (name.empty() || name[0] != '/') {
    throw InvalidName("'" + name + "' is not an absolute name");
  }
  std::string body = name.substr(1);
  if (body.empty()) throw InvalidName("'/' names no resource");
  switch (kind) {
    case MangleKind::topic: return "rt/" + body;
    case MangleKind::service_request: return "rq/" + body + "Request";
    case MangleKind::service_reply: return "rr/" + body + "Reply";
  }
  throw InvalidName("unknown mangle kind");
}

struct DemangledName {
  MangleKind kind = MangleKind::topic;
  std::string name;

  auto operator<=>(const DemangledName&) const = default;
};

/// Inverse of mangle. DDS topics outside the rt/rq/rr scheme (builtin
/// exchanges, plain DDS applications) demangle to nothing.
inline std::optional<DemangledName> demangle(const std::string& dds_topic) {
  auto strip_suffix = [](const std::string& s, const std::string& suffix)
      -> std::optional<std::string> {
    if (s.size() <= suffix.size() ||
        s.compare(s.size() - suffix.size(), suffix.size(), suffix) != 0) {
      return std::nullopt;
    }
    return s.substr(0, s.size() - suffix.size());
  };
  if (dds_topic.rfind("rt/", 0) == 0 && dds_topic.size() > 3) {
    return DemangledName{MangleKind::topic, "/" + dds_topic.substr(3)};
  }
  if (dds_topic.rfind("rq/", 0) == 0) {
    if (auto base = strip_suffix(dds_topic.substr(3), "Request")) {
      if (!base->empty()) {
        return DemangledName{MangleKind::service_request, "/" + *base};
      }
    }
  }
  if (dds_topic.rfind("rr/", 0) == 0) {
    if (auto base = strip_suffix(dds_topic.substr(3), "Reply")) {
      if (!base->empty()) {
        return DemangledName{MangleKind::service_reply, "/" + *base};
      }
    }
  }
  return std::nullopt;
}

/// Node-level resources behind one action name. Actions are a composite:
/// three services and two topics under <action>/_action/.
struct ActionResources {
  std::vector<std::string> services;
  std::vector<std::string> topics;
};

inline ActionResources expand_action(const std::string& action_name) {
  if (action_name.empty() || action_name[0] != '/') {
    throw InvalidName("'" + action_name + "' is not an absolute name");
  }
  std::string base = action_name + "/_action/";
  ActionResources out;
  out.services = {base + "send_goal", base + "cancel_goal",
                  base + "get_result"};
  out.topics = {base + "feedback", base + "status"};
  return out;
}

// ---------------------------------------------------------------------------
// Nodes and observed accesses
// ---------------------------------------------------------------------------

struct NodeId {
  std::string node_namespace = "/";
  std::string name;

  auto operator<=>(const NodeId&) const = default;

  /// Fully qualified form, e.g. "/demo/talker".
  std::string full() const {
    if (node_namespace.empty() || node_namespace == "/") return "/" + name;
    if (node_namespace.back() == '/') return node_namespace + name;
    return node_namespace + "/" + name;
  }
};

struct ObservedAccess {
  NodeId node;
  Capability capability = Capability::topic_publish;
  std::string name;

  auto operator<=>(const ObservedAccess&) const = default;
};

enum class ResourceKind { topic, service };

struct Resource {
  ResourceKind kind = ResourceKind::topic;
  std::string name;

  auto operator<=>(const Resource&) const = default;
};

struct Node {
  NodeId id;
  std::vector<wire::GuidPrefix> participants;
  std::set<ObservedAccess> accesses;
};

namespace detail {

/// Parses the "key=value;" convention carried in participant user data.
inline std::map<std::string, std::string> parse_user_data(BytesView data) {
  std::map<std::string, std::string> out;
  std::string text(data.begin(), data.end());
  size_t at = 0;
  while (at < text.size()) {
    size_t semi = text.find(';', at);
    if (semi == std::string::npos) semi = text.size();
    std::string item = text.substr(at, semi - at);
    if (size_t eq = item.find('='); eq != std::string::npos) {
      out[item.substr(0, eq)] = item.substr(eq + 1);
    }
    at = semi + 1;
  }
  return out;
}

inline std::string hex8(uint32_t v) {
  char buf[9];
  std::snprintf(buf, sizeof(buf), "%08x", v);
  return buf;
}

}  // namespace detail

/// Node identity for a participant: the name/namespace pair advertised in
/// user data, else a synthetic name derived from the GUID prefix.
inline NodeId node_id_for(const discovery::ParticipantAnnouncement& p) {
  if (p.user_data) {
    auto kv = detail::parse_user_data(*p.user_data);
    if (auto it = kv.find("name"); it != kv.end() && !it->second.empty()) {
      NodeId id;
      id.name = it->second;
      if (auto ns = kv.find("namespace"); ns != kv.end() && !ns->second.empty()) {
        id.node_namespace = ns->second;
      }
      return id;
    }
  }
  NodeId id;
  id.name = "participant_" + detail::hex8(p.guid_prefix.host_id()) + "_" +
            detail::hex8(p.guid_prefix.app_id()) + "_" +
            detail::hex8(p.guid_prefix.instance_id());
  return id;
}

/// Capability implied by one side of a DDS exchange: writers of request
/// topics are clients, readers of request topics are servers, and so on.
inline Capability capability_for(discovery::EndpointKind kind,
                                 MangleKind category) {
  bool writer = kind == discovery::EndpointKind::writer;
  switch (category) {
    case MangleKind::topic:
      return writer ? Capability::topic_publish : Capability::topic_subscribe;
    case MangleKind::service_request:
      return writer ? Capability::service_request : Capability::service_reply;
    case MangleKind::service_reply:
      return writer ? Capability::service_reply : Capability::service_request;
  }
  throw Error("unreachable");
}

/// Accumulated discovery state. Announcements live in sets, so observation
/// is idempotent and order-insensitive; everything else is derived on
/// demand.
class GraphSnapshot {
 public:
  void observe(const discovery::ParticipantAnnouncement& p) {
    participants_.insert(p);
  }

  void observe(const discovery::EndpointAnnouncement& e) {
    endpoints_.insert(e);
  }

  /// Decodes and folds in any discovery payloads the message carries.
  /// Returns decode-error notes; an empty vector means clean.
  std::vector<std::string> observe_message(const wire::RtpsMessage& msg) {
    std::vector<std::string> errors;
    discovery::ParticipantResult pr = discovery::decode_participant(msg);
    if (pr.announcement) observe(*pr.announcement);
    errors.insert(errors.end(), pr.errors.begin(), pr.errors.end());
    discovery::EndpointResult er = discovery::decode_endpoint(msg);
    for (const auto& ann : er.announcements) observe(ann);
    errors.insert(errors.end(), er.errors.begin(), er.errors.end());
    return errors;
  }

  const std::set<discovery::ParticipantAnnouncement>& participants() const {
    return participants_;
  }
  const std::set<discovery::EndpointAnnouncement>& endpoints() const {
    return endpoints_;
  }

  bool operator==(const GraphSnapshot&) const = default;

  /// Observed node-level accesses across all nodes.
  std::set<ObservedAccess> accesses() const {
    std::set<ObservedAccess> out;
    for (const auto& ep : endpoints_) {
      auto dm = demangle(ep.topic_name);
      if (!dm) continue;
      ObservedAccess access;
      access.node = node_for_prefix(ep.guid_prefix);
      access.capability = capability_for(ep.kind, dm->kind);
      access.name = dm->name;
      out.insert(access);
    }
    return out;
  }

  /// Distinct node-level resources in the graph.
  std::set<Resource> resources() const {
    std::set<Resource> out;
    for (const auto& a : accesses()) {
      bool topic = a.capability == Capability::topic_publish ||
                   a.capability == Capability::topic_subscribe;
      out.insert(Resource{topic ? ResourceKind::topic : ResourceKind::service,
                          a.name});
    }
    return out;
  }

  /// Nodes with their accesses, sorted by id. Participants that announced
  /// no mappable endpoint still appear, with an empty access set.
  std::vector<Node> nodes() const {
    std::map<NodeId, Node> by_id;
    for (const auto& p : participants_) {
      NodeId id = node_id_for(p);
      Node& node = by_id[id];
      node.id = id;
      node.participants.push_back(p.guid_prefix);
    }
    for (const auto& a : accesses()) {
      Node& node = by_id[a.node];
      node.id = a.node;
      node.accesses.insert(a);
    }
    std::vector<Node> out;
    for (auto& [id, node] : by_id) out.push_back(std::move(node));
    return out;
  }

  /// DDS topics that carry no node-level meaning (builtin exchanges,
  /// foreign applications). Reported, never mapped.
  std::set<std::string> unmapped_topics() const {
    std::set<std::string> out;
    for (const auto& ep : endpoints_) {
      if (!demangle(ep.topic_name)) out.insert(ep.topic_name);
    }
    return out;
  }

 private:
  NodeId node_for_prefix(const wire::GuidPrefix& prefix) const {
    for (const auto& p : participants_) {
      if (p.guid_prefix == prefix) return node_id_for(p);
    }
    NodeId id;
    id.name = "participant_" + detail::hex8(prefix.host_id()) + "_" +
              detail::hex8(prefix.app_id()) + "_" +
              detail::hex8(prefix.instance_id());
    return id;
  }

  std::set<discovery::ParticipantAnnouncement> participants_;
  std::set<discovery::EndpointAnnouncement> endpoints_;
};

/// Sorted plain-text rendering of a snapshot, stable across observation
/// order, suitable for diffing two captures.
inline std::string render(const GraphSnapshot& snapshot) {
  std::ostringstream os;
  for (const Node& node : snapshot.nodes()) {
    os << "node " << node.id.full() << "\n";
    for (const ObservedAccess& a : node.accesses) {
      bool topic = a.capability == Capability::topic_publish ||
                   a.capability == Capability::topic_subscribe;
      os << "  " << (topic ? "topic" : "service") << "-"
         << capability_str(a.capability) << " " << a.name << "\n";
    }
  }
  for (const auto& p : snapshot.participants()) {
    os << "participant " << p.guid_prefix.str() << " vendor "
       << wire::vendor_name(p.vendor_id);
    if (p.product_version) os << " version " << p.product_version->str();
    os << " node " << node_id_for(p).full() << "\n";
  }
  for (const auto& topic : snapshot.unmapped_topics()) {
    os << "unmapped " << topic << "\n";
  }
  return os.str();
}

/// Totals from folding a capture into a snapshot.
struct AccumulateResult {
  GraphSnapshot snapshot;
  size_t rtps_messages = 0;
  size_t non_rtps_datagrams = 0;
  std::vector<std::string> decode_errors;
};

/// Reads every UDP datagram from a capture; RTPS messages feed the
/// snapshot, everything else is counted and skipped.
inline AccumulateResult accumulate_capture(pcap::PcapReader& reader) {
  AccumulateResult result;
  for (const auto& dgram : reader.read_all()) {
    wire::RtpsMessage msg;
    try {
      msg = wire::parse_message(dgram.payload);
    } catch (const wire::BadMagic&) {
      ++result.non_rtps_datagrams;
      continue;
    } catch (const Error& err) {
      result.decode_errors.push_back(dgram.src + ": " + err.what());
      continue;
    }
    ++result.rtps_messages;
    auto errors = result.snapshot.observe_message(msg);
    result.decode_errors.insert(result.decode_errors.end(), errors.begin(),
                                errors.end());
  }
  return result;
}

inline AccumulateResult accumulate_file(const std::string& path) {
  pcap::PcapReader reader(path);
  return accumulate_capture(reader);
}

}  // namespace graphguard::graph

#endif  // GRAPHGUARD_GRAPH_HPP_
