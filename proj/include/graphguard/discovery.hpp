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

#ifndef GRAPHGUARD_DISCOVERY_HPP_
#define GRAPHGUARD_DISCOVERY_HPP_

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "graphguard/bytes.hpp"
#include "graphguard/wire.hpp"

namespace graphguard::discovery {

// Parameter ids from the RTPS / DDS-Security platform-specific model.
namespace pid {
inline constexpr uint16_t kPad = 0x0000;
inline constexpr uint16_t kSentinel = 0x0001;
inline constexpr uint16_t kTopicName = 0x0005;
inline constexpr uint16_t kTypeName = 0x0007;
inline constexpr uint16_t kDomainId = 0x000f;
inline constexpr uint16_t kProtocolVersion = 0x0015;
inline constexpr uint16_t kVendorId = 0x0016;
inline constexpr uint16_t kPartition = 0x0029;
inline constexpr uint16_t kUserData = 0x002c;
inline constexpr uint16_t kParticipantGuid = 0x0050;
inline constexpr uint16_t kEndpointGuid = 0x005a;
/// Vendor-specific range starts at 0x8000; RTI publishes its product
/// version as the first vendor pid.
inline constexpr uint16_t kRtiProductVersion = 0x8000;
}  // namespace pid

// Builtin discovery endpoint entity ids.
namespace entity_id {
inline constexpr uint32_t kParticipant = 0x000001c1;
inline constexpr uint32_t kSpdpWriter = 0x000100c2;
inline constexpr uint32_t kSpdpReader = 0x000100c7;
inline constexpr uint32_t kSedpPublicationsWriter = 0x000003c2;
inline constexpr uint32_t kSedpPublicationsReader = 0x000003c7;
inline constexpr uint32_t kSedpSubscriptionsWriter = 0x000004c2;
inline constexpr uint32_t kSedpSubscriptionsReader = 0x000004c7;
}  // namespace entity_id

class BadEncapsulation : public Error {
 public:
  explicit BadEncapsulation(const std::string& what) : Error(what) {}
};

class UnterminatedList : public Error {
 public:
  explicit UnterminatedList(const std::string& what) : Error(what) {}
};

class LengthOverrun : public Error {
 public:
  explicit LengthOverrun(const std::string& what) : Error(what) {}
};

/// One discovery parameter. The value keeps its wire padding (length is a
/// multiple of 4) so a parsed list re-encodes byte-identically.
struct Parameter {
  uint16_t pid = 0;
  Bytes value;

  auto operator<=>(const Parameter&) const = default;
};

/// A PL_CDR parameter list: encapsulation, option bytes and parameters in
/// wire order (sentinel excluded).
struct ParameterList {
  Endian endianness = Endian::little;
  std::array<uint8_t, 2> options{};
  std::vector<Parameter> parameters;

  auto operator<=>(const ParameterList&) const = default;

  const Parameter* find(uint16_t pid) const {
    for (const auto& p : parameters) {
      if (p.pid == pid) return &p;
    }
    return nullptr;
  }
};

/// Parses a PL_CDR-encapsulated parameter list. Trailing bytes after the
/// sentinel are ignored.
inline ParameterList parse_parameter_list(BytesView payload) {
  ByteReader r(payload);
  uint8_t e0, e1;
  try {
    e0 = r.u8();
    e1 = r.u8();
  } catch (const Truncated&) {
    throw BadEncapsulation("payload shorter than the encapsulation header");
  }
  ParameterList list;
  if (e0 != 0x00 || (e1 != 0x02 && e1 != 0x03)) {
    throw BadEncapsulation("not a PL_CDR encapsulation");
  }
  list.endianness = e1 == 0x03 ? Endian::little : Endian::big;
  try {
    list.options[0] = r.u8();
    list.options[1] = r.u8();
  } catch (const Truncated&) {
    throw BadEncapsulation("encapsulation option bytes missing");
  }
  for (;;) {
    if (r.remaining() < 4) {
      throw UnterminatedList("parameter list ended without a sentinel");
    }
    uint16_t pid = r.u16(list.endianness);
    uint16_t len = r.u16(list.endianness);
    if (pid == pid::kSentinel) return list;
    if (len > r.remaining()) {
      throw LengthOverrun("parameter 0x" + to_hex(Bytes{
                              static_cast<uint8_t>(pid >> 8),
                              static_cast<uint8_t>(pid)}) +
                          " length overruns payload");
    }
    list.parameters.push_back(Parameter{pid, r.bytes(len)});
  }
}

/// Re-encodes a parameter list; inverse of parse_parameter_list for lists
/// without trailing bytes.
inline Bytes serialize_parameter_list(const ParameterList& list) {
  ByteWriter w;
  w.u8(0x00);
  w.u8(list.endianness == Endian::little ? 0x03 : 0x02);
  w.u8(list.options[0]);
  w.u8(list.options[1]);
  for (const auto& p : list.parameters) {
    w.u16(p.pid, list.endianness);
    w.u16(static_cast<uint16_t>(p.value.size()), list.endianness);
    w.bytes(p.value);
  }
  w.u16(pid::kSentinel, list.endianness);
  w.u16(0, list.endianness);
  return w.take();
}

// ---------------------------------------------------------------------------
// CDR helpers (alignment is relative to the start of the parameter value,
// which always begins 4-aligned in the encapsulated stream)
// ---------------------------------------------------------------------------

/// Reads a CDR string: u32 length including the NUL, bytes, NUL.
inline std::string read_cdr_string(ByteReader& r, Endian e) {
  uint32_t len = r.u32(e);
  if (len == 0) return {};
  Bytes raw = r.bytes(len);
  if (!raw.empty() && raw.back() == 0) raw.pop_back();
  return std::string(raw.begin(), raw.end());
}

/// Encodes a CDR string padded to a 4-byte boundary.
inline void write_cdr_string(ByteWriter& w, const std::string& s, Endian e) {
  w.u32(static_cast<uint32_t>(s.size() + 1), e);
  w.bytes(BytesView(reinterpret_cast<const uint8_t*>(s.data()), s.size()));
  w.u8(0);
  w.pad_to(4);
}

inline std::vector<std::string> read_cdr_string_seq(BytesView value, Endian e) {
  ByteReader r(value);
  uint32_t count = r.u32(e);
  std::vector<std::string> out;
  for (uint32_t i = 0; i < count; ++i) {
    r.align(4);
    out.push_back(read_cdr_string(r, e));
  }
  return out;
}

inline Bytes cdr_string_bytes(const std::string& s, Endian e) {
  ByteWriter w;
  write_cdr_string(w, s, e);
  return w.take();
}

inline Bytes cdr_string_seq_bytes(const std::vector<std::string>& seq,
                                  Endian e) {
  ByteWriter w;
  w.u32(static_cast<uint32_t>(seq.size()), e);
  for (const auto& s : seq) {
    w.pad_to(4);
    write_cdr_string(w, s, e);
  }
  w.pad_to(4);
  return w.take();
}

// ---------------------------------------------------------------------------
// Announcements
// ---------------------------------------------------------------------------

/// Vendor product version as printed in monitor reports (e.g. "6.0.1.25");
/// distinct from the wire-level protocol version. Components are wider
/// than the wire's octets because some products count builds past 255.
struct ProductVersion {
  uint32_t major = 0;
  uint32_t minor = 0;
  uint32_t release = 0;
  uint32_t revision = 0;

  auto operator<=>(const ProductVersion&) const = default;

  std::string str() const {
    return std::to_string(major) + "." + std::to_string(minor) + "." +
           std::to_string(release) + "." + std::to_string(revision);
  }
};

struct ParticipantAnnouncement {
  wire::GuidPrefix guid_prefix;
  wire::ProtocolVersion protocol_version;
  wire::VendorId vendor_id;
  uint32_t domain_id = 0;
  std::optional<ProductVersion> product_version;
  std::optional<Bytes> user_data;

  auto operator<=>(const ParticipantAnnouncement&) const = default;
};

enum class EndpointKind { writer, reader };

struct EndpointAnnouncement {
  EndpointKind kind = EndpointKind::writer;
  wire::GuidPrefix guid_prefix;
  uint32_t entity_id = 0;
  std::string topic_name;
  std::string type_name;
  std::vector<std::string> partitions;

  auto operator<=>(const EndpointAnnouncement&) const = default;
};

struct ParticipantResult {
  std::optional<ParticipantAnnouncement> announcement;
  std::vector<std::string> errors;
};

struct EndpointResult {
  std::vector<EndpointAnnouncement> announcements;
  std::vector<std::string> errors;
};

namespace detail {

inline std::optional<ProductVersion> version_from_user_data(BytesView data) {
  std::string text(data.begin(), data.end());
  size_t at = text.find("product_version=");
  if (at == std::string::npos) return std::nullopt;
  unsigned a, b, c, d;
  if (std::sscanf(text.c_str() + at + 16, "%u.%u.%u.%u", &a, &b, &c, &d) != 4) {
    return std::nullopt;
  }
  return ProductVersion{a, b, c, d};
}

inline bool is_rti(wire::VendorId v) {
  return v.value == 0x0101 || v.value == 0x010a;
}

inline ParticipantAnnouncement participant_from_parameters(
    const wire::RtpsMessage& msg, const ParameterList& list) {
  ParticipantAnnouncement ann;
  ann.guid_prefix = msg.guid_prefix;
  ann.protocol_version = msg.version;
  ann.vendor_id = msg.vendor_id;
  Endian e = list.endianness;
  for (const auto& p : list.parameters) {
    ByteReader r(p.value);
    switch (p.pid) {
      case pid::kParticipantGuid: {
        Bytes prefix = r.bytes(12);
        std::copy(prefix.begin(), prefix.end(), ann.guid_prefix.bytes.begin());
        break;
      }
      case pid::kProtocolVersion:
        ann.protocol_version.major = r.u8();
        ann.protocol_version.minor = r.u8();
        break;
      case pid::kVendorId:
        ann.vendor_id.value = r.u16(Endian::big);
        break;
      case pid::kDomainId:
        ann.domain_id = r.u32(e);
        break;
      case pid::kUserData: {
        uint32_t len = r.u32(e);
        if (len > r.remaining()) throw LengthOverrun("user data length");
        ann.user_data = r.bytes(len);
        break;
      }
      default:
        break;
    }
  }
  // Product version: vendor parameter preferred, user-data fallback.
  if (const Parameter* p = list.find(pid::kRtiProductVersion);
      p && is_rti(ann.vendor_id) && p->value.size() >= 4) {
    ann.product_version = ProductVersion{p->value[0], p->value[1], p->value[2],
                                         p->value[3]};
  } else if (ann.user_data) {
    ann.product_version = version_from_user_data(*ann.user_data);
  }
  return ann;
}

inline EndpointAnnouncement endpoint_from_parameters(
    const wire::RtpsMessage& msg, EndpointKind kind,
    const ParameterList& list) {
  EndpointAnnouncement ann;
  ann.kind = kind;
  ann.guid_prefix = msg.guid_prefix;
  Endian e = list.endianness;
  for (const auto& p : list.parameters) {
    ByteReader r(p.value);
    switch (p.pid) {
      case pid::kTopicName:
        ann.topic_name = read_cdr_string(r, e);
        break;
      case pid::kTypeName:
        ann.type_name = read_cdr_string(r, e);
        break;
      case pid::kEndpointGuid: {
        Bytes prefix = r.bytes(12);
        std::copy(prefix.begin(), prefix.end(), ann.guid_prefix.bytes.begin());
        ann.entity_id = r.u32(Endian::big);
        break;
      }
      case pid::kPartition:
        ann.partitions = read_cdr_string_seq(p.value, e);
        break;
      default:
        break;
    }
  }
  if (ann.topic_name.empty()) {
    throw Error("endpoint announcement without a topic name");
  }
  return ann;
}

}  // namespace detail

/// Returns the participant announcement carried by the message's SPDP Data
/// submessage, if any. Malformed payloads are reported, not thrown.
inline ParticipantResult decode_participant(const wire::RtpsMessage& msg) {
  ParticipantResult result;
  for (const auto& sm : msg.submessages) {
    if (sm.header.submessage_id != wire::submessage_id::kData) continue;
    try {
      wire::DataPayload data = wire::decode_data(sm);
      if (data.writer_id != entity_id::kSpdpWriter) continue;
      if (data.payload.empty()) continue;
      ParameterList list = parse_parameter_list(data.payload);
      result.announcement = detail::participant_from_parameters(msg, list);
      return result;
    } catch (const Error& err) {
      result.errors.push_back(std::string("SPDP decode: ") + err.what());
    }
  }
  return result;
}

/// Returns one announcement per SEDP publication/subscription Data
/// submessage, in input order. Malformed entries are skipped and reported.
inline EndpointResult decode_endpoint(const wire::RtpsMessage& msg) {
  EndpointResult result;
  for (const auto& sm : msg.submessages) {
    if (sm.header.submessage_id != wire::submessage_id::kData) continue;
    try {
      wire::DataPayload data = wire::decode_data(sm);
      EndpointKind kind;
      if (data.writer_id == entity_id::kSedpPublicationsWriter) {
        kind = EndpointKind::writer;
      } else if (data.writer_id == entity_id::kSedpSubscriptionsWriter) {
        kind = EndpointKind::reader;
      } else {
        continue;
      }
      if (data.payload.empty()) continue;
      ParameterList list = parse_parameter_list(data.payload);
      result.announcements.push_back(
          detail::endpoint_from_parameters(msg, kind, list));
    } catch (const Error& err) {
      result.errors.push_back(std::string("SEDP decode: ") + err.what());
    }
  }
  return result;
}

}  // namespace graphguard::discovery

#endif  // GRAPHGUARD_DISCOVERY_HPP_
