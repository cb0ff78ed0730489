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

// Deterministic synthesizer for DDS discovery traffic. A SimSpec describes
// participants and their endpoints; synthesize() turns it into a pcap of
// SPDP/SEDP announcements (plus optional non-RTPS noise) whose decode
// reproduces the spec. The same generators double as random-input sources
// for round-trip and fuzz tests.

#ifndef GRAPHGUARD_SIMNET_HPP_
#define GRAPHGUARD_SIMNET_HPP_

#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "graphguard/bytes.hpp"
#include "graphguard/discovery.hpp"
#include "graphguard/pcap.hpp"
#include "graphguard/wire.hpp"

namespace graphguard::simnet {

class BadSpec : public Error {
 public:
  explicit BadSpec(const std::string& what) : Error(what) {}
};

struct SimEndpoint {
  discovery::EndpointKind kind = discovery::EndpointKind::writer;
  std::string topic;
  std::string type;

  auto operator<=>(const SimEndpoint&) const = default;
};

struct SimParticipant {
  uint32_t host_id = 0;
  uint32_t app_id = 0;
  uint32_t instance_id = 0;
  uint16_t vendor = 0x010f;
  std::optional<discovery::ProductVersion> product_version;
  std::optional<std::string> node_name;
  std::optional<std::string> node_namespace;
  std::vector<SimEndpoint> endpoints;

  auto operator<=>(const SimParticipant&) const = default;

  wire::GuidPrefix prefix() const {
    return wire::GuidPrefix::from_ids(host_id, app_id, instance_id);
  }
};

struct SimSpec {
  uint64_t seed = 1;
  double noise_ratio = 0.0;
  uint32_t domain_id = 0;
  std::vector<SimParticipant> participants;

  auto operator<=>(const SimSpec&) const = default;
};

// Synthetic captures start at 2022-01-01T00:00:00Z and tick once per
// millisecond; determinism matters more than realism here.
inline constexpr uint64_t kBaseTimestampUs = 1640995200ull * 1000000ull;
inline constexpr const char* kMulticastAddr = "239.255.0.1";
inline constexpr uint16_t kDiscoveryPort = 7400;

namespace detail {

inline std::string user_data_text(const SimParticipant& p) {
  std::string text;
  if (p.node_name) {
    text += "name=" + *p.node_name + ";";
    text += "namespace=" + (p.node_namespace ? *p.node_namespace : "/") + ";";
  }
  if (p.product_version && p.vendor != 0x0101 && p.vendor != 0x010a) {
    text += "product_version=" + p.product_version->str() + ";";
  }
  return text;
}

inline Bytes guid_value(const wire::GuidPrefix& prefix, uint32_t entity) {
  ByteWriter w;
  w.bytes(BytesView(prefix.bytes.data(), prefix.bytes.size()));
  w.u32(entity, Endian::big);
  return w.take();
}

}  // namespace detail

/// Builds the SPDP announcement message for one participant.
inline wire::RtpsMessage spdp_message(const SimSpec& spec,
                                      const SimParticipant& p) {
  constexpr Endian e = Endian::little;
  discovery::ParameterList list;
  list.endianness = e;

  ByteWriter pv;
  pv.u8(2);
  pv.u8(2);
  pv.pad_to(4);
  list.parameters.push_back({discovery::pid::kProtocolVersion, pv.take()});

  ByteWriter vid;
  vid.u16(p.vendor, Endian::big);
  vid.pad_to(4);
  list.parameters.push_back({discovery::pid::kVendorId, vid.take()});

  ByteWriter dom;
  dom.u32(spec.domain_id, e);
  list.parameters.push_back({discovery::pid::kDomainId, dom.take()});

  list.parameters.push_back(
      {discovery::pid::kParticipantGuid,
       detail::guid_value(p.prefix(), discovery::entity_id::kParticipant)});

  if (p.product_version && (p.vendor == 0x0101 || p.vendor == 0x010a)) {
    list.parameters.push_back(
        {discovery::pid::kRtiProductVersion,
         Bytes{static_cast<uint8_t>(p.product_version->major),
               static_cast<uint8_t>(p.product_version->minor),
               static_cast<uint8_t>(p.product_version->release),
               static_cast<uint8_t>(p.product_version->revision)}});
  }

  if (std::string text = detail::user_data_text(p); !text.empty()) {
    ByteWriter ud;
    ud.u32(static_cast<uint32_t>(text.size()), e);
    ud.bytes(BytesView(reinterpret_cast<const uint8_t*>(text.data()),
                       text.size()));
    ud.pad_to(4);
    list.parameters.push_back({discovery::pid::kUserData, ud.take()});
  }

  wire::RtpsMessage msg;
  msg.version = wire::ProtocolVersion{2, 2};
  msg.vendor_id = wire::VendorId{p.vendor};
  msg.guid_prefix = p.prefix();
  msg.submessages.push_back(wire::make_data_submessage(
      discovery::entity_id::kSpdpReader, discovery::entity_id::kSpdpWriter, 1,
      discovery::serialize_parameter_list(list), e));
  return msg;
}

/// Builds the SEDP announcement message for one endpoint. User endpoint
/// entity ids are allocated as (ordinal << 8) | kind-octet.
inline wire::RtpsMessage sedp_message(const SimParticipant& p,
                                      const SimEndpoint& ep,
                                      uint32_t ordinal) {
  constexpr Endian e = Endian::little;
  bool is_writer = ep.kind == discovery::EndpointKind::writer;
  uint32_t entity = (ordinal << 8) | (is_writer ? 0x02u : 0x07u);

  discovery::ParameterList list;
  list.endianness = e;
  list.parameters.push_back({discovery::pid::kTopicName,
                             discovery::cdr_string_bytes(ep.topic, e)});
  list.parameters.push_back(
      {discovery::pid::kTypeName, discovery::cdr_string_bytes(ep.type, e)});
  list.parameters.push_back({discovery::pid::kEndpointGuid,
                             detail::guid_value(p.prefix(), entity)});

  wire::RtpsMessage msg;
  msg.version = wire::ProtocolVersion{2, 2};
  msg.vendor_id = wire::VendorId{p.vendor};
  msg.guid_prefix = p.prefix();
  uint32_t writer = is_writer ? discovery::entity_id::kSedpPublicationsWriter
                              : discovery::entity_id::kSedpSubscriptionsWriter;
  uint32_t reader = is_writer ? discovery::entity_id::kSedpPublicationsReader
                              : discovery::entity_id::kSedpSubscriptionsReader;
  msg.submessages.push_back(wire::make_data_submessage(
      reader, writer, 1 + ordinal, discovery::serialize_parameter_list(list),
      e));
  return msg;
}

/// Renders a spec as a classic pcap. Discovery datagrams are interleaved
/// with noise_ratio/(1-noise_ratio) non-RTPS datagrams at random positions;
/// everything is derived from spec.seed.
inline Bytes synthesize(const SimSpec& spec) {
  if (spec.noise_ratio < 0.0 || spec.noise_ratio >= 1.0) {
    throw BadSpec("noise ratio must be in [0, 1)");
  }
  std::mt19937_64 rng(spec.seed);

  std::vector<Bytes> payloads;
  std::vector<std::string> sources;
  for (size_t i = 0; i < spec.participants.size(); ++i) {
    const SimParticipant& p = spec.participants[i];
    std::string src = "10.0.0." + std::to_string((i % 250) + 1);
    payloads.push_back(wire::serialize_message(spdp_message(spec, p)));
    sources.push_back(src);
    for (size_t j = 0; j < p.endpoints.size(); ++j) {
      payloads.push_back(wire::serialize_message(
          sedp_message(p, p.endpoints[j], static_cast<uint32_t>(j + 1))));
      sources.push_back(src);
    }
  }

  size_t noise_count = 0;
  if (spec.noise_ratio > 0.0) {
    noise_count = static_cast<size_t>(std::llround(
        static_cast<double>(payloads.size()) * spec.noise_ratio /
        (1.0 - spec.noise_ratio)));
  }
  for (size_t i = 0; i < noise_count; ++i) {
    // At least 4 octets, so noise always classifies as non-RTPS instead
    // of as a truncated message.
    std::uniform_int_distribution<size_t> len_dist(4, 64);
    std::uniform_int_distribution<int> byte_dist(0, 255);
    Bytes noise(len_dist(rng));
    for (auto& b : noise) b = static_cast<uint8_t>(byte_dist(rng));
    if (noise.size() >= 4 && noise[0] == 'R' && noise[1] == 'T' &&
        noise[2] == 'P' && noise[3] == 'S') {
      noise[0] = 'X';
    }
    std::uniform_int_distribution<size_t> pos_dist(0, payloads.size());
    size_t pos = pos_dist(rng);
    payloads.insert(payloads.begin() + static_cast<ptrdiff_t>(pos), noise);
    sources.insert(sources.begin() + static_cast<ptrdiff_t>(pos), "10.0.9.9");
  }

  pcap::PcapWriter w;
  uint64_t ts = kBaseTimestampUs;
  for (size_t i = 0; i < payloads.size(); ++i) {
    w.add(ts, sources[i], kDiscoveryPort, kMulticastAddr, kDiscoveryPort,
          payloads[i]);
    ts += 1000;
  }
  return w.data();
}

// ---------------------------------------------------------------------------
// Declarative spec files
// ---------------------------------------------------------------------------

/// Line-oriented spec grammar:
///   seed <u64>
///   noise <ratio>
///   domain <u32>
///   participant <host> <app> <instance> [vendor=<id>] [version=a.b.c.d]
///       [name=<node>] [namespace=<ns>]
///   writer <topic> <type>
///   reader <topic> <type>
/// writer/reader lines attach to the most recent participant. '#' starts a
/// comment; integers accept 0x prefixes.
inline SimSpec parse_spec(std::istream& in) {
  SimSpec spec;
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& what) {
    throw BadSpec("line " + std::to_string(line_no) + ": " + what);
  };
  auto to_u64 = [&](const std::string& tok) -> uint64_t {
    try {
      return std::stoull(tok, nullptr, 0);
    } catch (const std::exception&) {
      fail("bad integer '" + tok + "'");
      return 0;
    }
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (size_t hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;
    if (word == "seed") {
      std::string v;
      if (!(ls >> v)) fail("seed needs a value");
      spec.seed = to_u64(v);
    } else if (word == "noise") {
      if (!(ls >> spec.noise_ratio)) fail("noise needs a ratio");
    } else if (word == "domain") {
      std::string v;
      if (!(ls >> v)) fail("domain needs a value");
      spec.domain_id = static_cast<uint32_t>(to_u64(v));
    } else if (word == "participant") {
      std::string host, app, instance;
      if (!(ls >> host >> app >> instance)) {
        fail("participant needs host, app and instance ids");
      }
      SimParticipant p;
      p.host_id = static_cast<uint32_t>(to_u64(host));
      p.app_id = static_cast<uint32_t>(to_u64(app));
      p.instance_id = static_cast<uint32_t>(to_u64(instance));
      std::string opt;
      while (ls >> opt) {
        size_t eq = opt.find('=');
        if (eq == std::string::npos) fail("bad option '" + opt + "'");
        std::string key = opt.substr(0, eq);
        std::string val = opt.substr(eq + 1);
        if (key == "vendor") {
          p.vendor = static_cast<uint16_t>(to_u64(val));
        } else if (key == "version") {
          unsigned a, b, c, d;
          if (std::sscanf(val.c_str(), "%u.%u.%u.%u", &a, &b, &c, &d) != 4) {
            fail("bad version '" + val + "'");
          }
          p.product_version = discovery::ProductVersion{a, b, c, d};
        } else if (key == "name") {
          p.node_name = val;
        } else if (key == "namespace") {
          p.node_namespace = val;
        } else {
          fail("unknown option '" + key + "'");
        }
      }
      spec.participants.push_back(p);
    } else if (word == "writer" || word == "reader") {
      if (spec.participants.empty()) {
        fail(word + " before any participant");
      }
      SimEndpoint ep;
      ep.kind = word == "writer" ? discovery::EndpointKind::writer
                                 : discovery::EndpointKind::reader;
      if (!(ls >> ep.topic)) fail(word + " needs a topic");
      if (!(ls >> ep.type)) ep.type = "unspecified";
      spec.participants.back().endpoints.push_back(ep);
    } else {
      fail("unknown directive '" + word + "'");
    }
  }
  return spec;
}

inline SimSpec parse_spec(const std::string& text) {
  std::istringstream in(text);
  return parse_spec(in);
}

// ---------------------------------------------------------------------------
// Random generators for property tests
// ---------------------------------------------------------------------------

/// A random structurally valid message: arbitrary submessage ids, flags and
/// opaque bodies. Exercises the serializer/parser pair, not the decoders.
inline wire::RtpsMessage random_message(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<int> count(0, 5);
  std::uniform_int_distribution<int> body_len(0, 64);
  static constexpr uint8_t kIds[] = {
      wire::submessage_id::kPad,      wire::submessage_id::kAckNack,
      wire::submessage_id::kHeartbeat, wire::submessage_id::kGap,
      wire::submessage_id::kInfoTimestamp, wire::submessage_id::kInfoDestination,
      wire::submessage_id::kData,     wire::submessage_id::kDataFrag};

  wire::RtpsMessage msg;
  msg.version = wire::ProtocolVersion{2, static_cast<uint8_t>(byte(rng) % 5)};
  msg.vendor_id = wire::VendorId{static_cast<uint16_t>(byte(rng))};
  for (auto& b : msg.guid_prefix.bytes) b = static_cast<uint8_t>(byte(rng));

  int n = count(rng);
  for (int i = 0; i < n; ++i) {
    wire::Submessage sm;
    sm.header.submessage_id = kIds[static_cast<size_t>(byte(rng)) % 8];
    sm.header.flags = static_cast<uint8_t>(byte(rng));
    sm.extends_to_end = i == n - 1 && byte(rng) % 4 == 0;
    // A zero length field means "runs to the end of the message", so an
    // empty body is only representable in that final shorthand form.
    size_t len = static_cast<size_t>(body_len(rng));
    if (len == 0 && !sm.extends_to_end) len = 1;
    sm.header.octets_to_next_header =
        sm.extends_to_end ? 0 : static_cast<uint16_t>(len);
    sm.body.resize(len);
    for (auto& b : sm.body) b = static_cast<uint8_t>(byte(rng));
    msg.submessages.push_back(std::move(sm));
  }
  return msg;
}

/// A random well-formed spec drawing from small pools of topics and names.
inline SimSpec random_spec(std::mt19937_64& rng) {
  static const std::vector<std::pair<std::string, std::string>> kTopics = {
      {"rt/chatter", "std_msgs::msg::dds_::String_"},
      {"rt/scan", "sensor_msgs::msg::dds_::LaserScan_"},
      {"rt/cmd_vel", "geometry_msgs::msg::dds_::Twist_"},
      {"rt/rosout", "rcl_interfaces::msg::dds_::Log_"},
      {"rq/add_two_intsRequest", "example_interfaces::srv::dds_::AddTwoInts_Request_"},
      {"rr/add_two_intsReply", "example_interfaces::srv::dds_::AddTwoInts_Response_"},
  };
  static const std::vector<std::string> kNames = {"talker", "listener",
                                                  "teleop", "lidar_driver"};
  static const std::vector<uint16_t> kVendors = {0x0101, 0x0103, 0x0106,
                                                 0x010f, 0x0110, 0x0111};
  std::uniform_int_distribution<uint32_t> word(1, 0xfffffffe);
  std::uniform_int_distribution<int> small(0, 3);

  SimSpec spec;
  spec.seed = rng();
  spec.domain_id = static_cast<uint32_t>(small(rng));
  int participants = 1 + small(rng);
  for (int i = 0; i < participants; ++i) {
    SimParticipant p;
    p.host_id = word(rng);
    p.app_id = word(rng);
    p.instance_id = word(rng);
    p.vendor = kVendors[rng() % kVendors.size()];
    if (rng() % 2 == 0) {
      p.product_version = discovery::ProductVersion{
          static_cast<uint8_t>(rng() % 8), static_cast<uint8_t>(rng() % 10),
          static_cast<uint8_t>(rng() % 10), static_cast<uint8_t>(rng() % 100)};
    }
    p.node_name = kNames[rng() % kNames.size()] + "_" + std::to_string(i);
    p.node_namespace = rng() % 2 == 0 ? "/" : "/demo";
    int endpoints = small(rng);
    for (int j = 0; j < endpoints; ++j) {
      const auto& [topic, type] = kTopics[rng() % kTopics.size()];
      SimEndpoint ep;
      ep.kind = rng() % 2 == 0 ? discovery::EndpointKind::writer
                               : discovery::EndpointKind::reader;
      ep.topic = topic;
      ep.type = type;
      p.endpoints.push_back(ep);
    }
    spec.participants.push_back(p);
  }
  return spec;
}

}  // namespace graphguard::simnet

#endif  // GRAPHGUARD_SIMNET_HPP_
