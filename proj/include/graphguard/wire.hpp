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

#ifndef GRAPHGUARD_WIRE_HPP_
#define GRAPHGUARD_WIRE_HPP_

#include <array>
#include <compare>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "graphguard/bytes.hpp"

namespace graphguard::wire {

// RTPS v2.2 platform-specific model constants.
inline constexpr size_t kHeaderSize = 20;
inline constexpr size_t kSubmessageHeaderSize = 4;
inline constexpr uint8_t kFlagEndianness = 0x01;  // bit 0: body is little-endian

namespace submessage_id {
inline constexpr uint8_t kPad = 0x01;
inline constexpr uint8_t kAckNack = 0x06;
inline constexpr uint8_t kHeartbeat = 0x07;
inline constexpr uint8_t kGap = 0x08;
inline constexpr uint8_t kInfoTimestamp = 0x09;
inline constexpr uint8_t kInfoDestination = 0x0e;
inline constexpr uint8_t kData = 0x15;
inline constexpr uint8_t kDataFrag = 0x16;
}  // namespace submessage_id

class BadMagic : public Error {
 public:
  explicit BadMagic(const std::string& what) : Error(what) {}
};

class UnsupportedVersion : public Error {
 public:
  explicit UnsupportedVersion(const std::string& what) : Error(what) {}
};

class BodyTooLarge : public Error {
 public:
  explicit BodyTooLarge(const std::string& what) : Error(what) {}
};

struct ProtocolVersion {
  uint8_t major = 2;
  uint8_t minor = 2;

  auto operator<=>(const ProtocolVersion&) const = default;

  std::string str() const {
    return std::to_string(major) + "." + std::to_string(minor);
  }
};

/// 16-bit middleware vendor identifier from the RTPS header (two wire
/// bytes, big-endian).
struct VendorId {
  uint16_t value = 0;

  auto operator<=>(const VendorId&) const = default;
};

/// 12-octet participant identifier. hostId/appId/instanceId are pure views
/// over octets 0-3, 4-7 and 8-11 read big-endian; recombining them yields
/// the original bytes.
struct GuidPrefix {
  std::array<uint8_t, 12> bytes{};

  auto operator<=>(const GuidPrefix&) const = default;

  uint32_t host_id() const { return read_u32(0); }
  uint32_t app_id() const { return read_u32(4); }
  uint32_t instance_id() const { return read_u32(8); }

  static GuidPrefix from_ids(uint32_t host, uint32_t app, uint32_t instance) {
    GuidPrefix p;
    p.write_u32(0, host);
    p.write_u32(4, app);
    p.write_u32(8, instance);
    return p;
  }

  std::string str() const { return to_hex(BytesView(bytes)); }

 private:
  uint32_t read_u32(size_t off) const {
    return static_cast<uint32_t>(bytes[off]) << 24 |
           static_cast<uint32_t>(bytes[off + 1]) << 16 |
           static_cast<uint32_t>(bytes[off + 2]) << 8 |
           static_cast<uint32_t>(bytes[off + 3]);
  }
  void write_u32(size_t off, uint32_t v) {
    bytes[off] = static_cast<uint8_t>(v >> 24);
    bytes[off + 1] = static_cast<uint8_t>(v >> 16);
    bytes[off + 2] = static_cast<uint8_t>(v >> 8);
    bytes[off + 3] = static_cast<uint8_t>(v);
  }
};

struct SubmessageHeader {
  uint8_t submessage_id = 0;
  uint8_t flags = 0;
  /// 0 on the final submessage means "body extends to the end of the message".
  uint16_t octets_to_next_header = 0;

  auto operator<=>(const SubmessageHeader&) const = default;

  Endian body_endianness() const {
    return (flags & kFlagEndianness) ? Endian::little : Endian::big;
  }
};

/// One submessage, body kept opaque so unknown ids round-trip losslessly.
struct Submessage {
  SubmessageHeader header;
  Bytes body;
  /// Set when the header's length field was 0 (final submessage shorthand).
  bool extends_to_end = false;

  auto operator<=>(const Submessage&) const = default;
};

struct RtpsMessage {
  ProtocolVersion version;
  VendorId vendor_id;
  GuidPrefix guid_prefix;
  std::vector<Submessage> submessages;

  auto operator<=>(const RtpsMessage&) const = default;
};

/// Parses one RTPS message. Unknown submessage ids are retained opaquely.
/// Throws BadMagic, UnsupportedVersion or Truncated; never reads past the
/// input buffer.
inline RtpsMessage parse_message(BytesView input) {
  ByteReader r(input);
  // Magic is checked before length so short garbage classifies as
  // non-RTPS rather than as a truncated message.
  if (input.size() >= 4) {
    Bytes magic = r.bytes(4);
    if (magic != Bytes{'R', 'T', 'P', 'S'}) {
      throw BadMagic("first four bytes are not \"RTPS\"");
    }
  }
  if (input.size() < kHeaderSize) {
    throw Truncated("RTPS header needs 20 bytes, got " +
                    std::to_string(input.size()));
  }
  RtpsMessage msg;
  msg.version.major = r.u8();
  msg.version.minor = r.u8();
  if (msg.version.major == 0) {
    throw UnsupportedVersion("protocol major version 0");
  }
  msg.vendor_id.value = r.u16(Endian::big);
  Bytes prefix = r.bytes(12);
  std::copy(prefix.begin(), prefix.end(), msg.guid_prefix.bytes.begin());

  while (!r.at_end()) {
    Submessage sm;
    sm.header.submessage_id = r.u8();
    sm.header.flags = r.u8();
    sm.header.octets_to_next_header = r.u16(sm.header.body_endianness());
    if (sm.header.octets_to_next_header == 0) {
      sm.extends_to_end = true;
      BytesView tail = r.rest();
      sm.body = Bytes(tail.begin(), tail.end());
    } else {
      sm.body = r.bytes(sm.header.octets_to_next_header);
    }
    msg.submessages.push_back(std::move(sm));
  }
  return msg;
}

/// Byte-exact inverse of parse_message on the accepted domain.
inline Bytes serialize_message(const RtpsMessage& msg) {
  ByteWriter w;
  w.bytes(Bytes{'R', 'T', 'P', 'S'});
  w.u8(msg.version.major);
  w.u8(msg.version.minor);
  w.u16(msg.vendor_id.value, Endian::big);
  w.bytes(BytesView(msg.guid_prefix.bytes));
  for (size_t i = 0; i < msg.submessages.size(); ++i) {
    const Submessage& sm = msg.submessages[i];
    bool last = i + 1 == msg.submessages.size();
    w.u8(sm.header.submessage_id);
    w.u8(sm.header.flags);
    if (sm.extends_to_end && last) {
      w.u16(0, sm.header.body_endianness());
    } else {
      if (sm.body.size() > 0xffff) {
        throw BodyTooLarge("submessage body of " +
                           std::to_string(sm.body.size()) +
                           " octets does not fit a 16-bit length field");
      }
      w.u16(static_cast<uint16_t>(sm.body.size()), sm.header.body_endianness());
    }
    w.bytes(sm.body);
  }
  return w.take();
}

// ---------------------------------------------------------------------------
// DATA submessage body
// ---------------------------------------------------------------------------

namespace data_flag {
inline constexpr uint8_t kInlineQos = 0x02;
inline constexpr uint8_t kData = 0x04;
inline constexpr uint8_t kKey = 0x08;
}  // namespace data_flag

/// Decoded DATA submessage body. Entity ids are 4-octet arrays read
/// big-endian regardless of the endianness flag.
struct DataPayload {
  uint16_t extra_flags = 0;
  uint32_t reader_id = 0;
  uint32_t writer_id = 0;
  int64_t sequence_number = 0;
  Bytes inline_qos;  // raw parameter-list bytes, empty when Q flag clear
  Bytes payload;     // serialized payload, empty when D and K flags clear

  auto operator<=>(const DataPayload&) const = default;
};

/// Decodes a DATA submessage body. Multi-byte fields follow the submessage
/// endianness flag.
inline DataPayload decode_data(const Submessage& sm) {
  if (sm.header.submessage_id != submessage_id::kData) {
    throw Error("not a DATA submessage");
  }
  Endian e = sm.header.body_endianness();
  ByteReader r(sm.body);
  DataPayload d;
  d.extra_flags = r.u16(e);
  uint16_t octets_to_inline_qos = r.u16(e);
  size_t qos_base = r.position();
  d.reader_id = r.u32(Endian::big);
  d.writer_id = r.u32(Endian::big);
  int32_t sn_high = static_cast<int32_t>(r.u32(e));
  uint32_t sn_low = r.u32(e);
  d.sequence_number = (static_cast<int64_t>(sn_high) << 32) | sn_low;
  // octetsToInlineQos counts from just after its own field to the inline
  // qos (or to the payload when the Q flag is clear).
  if (octets_to_inline_qos < 16) {
    throw Error("octetsToInlineQos points inside the fixed DATA fields");
  }
  size_t target = qos_base + octets_to_inline_qos;
  if (target > sm.body.size()) {
    throw Truncated("octetsToInlineQos overruns DATA body");
  }
  r.skip(target - r.position());
  if (sm.header.flags & data_flag::kInlineQos) {
    // Inline qos runs to the sentinel; delimit by scanning parameter headers.
    size_t qos_start = r.position();
    for (;;) {
      uint16_t pid = r.u16(e);
      uint16_t len = r.u16(e);
      if (pid == 0x0001) break;  // sentinel
      r.skip(len);
    }
    size_t qos_len = r.position() - qos_start;
    d.inline_qos = Bytes(sm.body.begin() + qos_start,
                         sm.body.begin() + qos_start + qos_len);
  }
  if (sm.header.flags & (data_flag::kData | data_flag::kKey)) {
    auto rest = r.rest();
    d.payload = Bytes(rest.begin(), rest.end());
  }
  return d;
}

/// Builds a DATA submessage carrying a serialized payload (no inline qos).
inline Submessage make_data_submessage(uint32_t reader_id, uint32_t writer_id,
                                       int64_t sequence_number,
                                       BytesView payload,
                                       Endian e = Endian::little) {
  ByteWriter w;
  w.u16(0, e);   // extraFlags
  w.u16(16, e);  // octetsToInlineQos: readerId + writerId + sequence number
  w.u32(reader_id, Endian::big);
  w.u32(writer_id, Endian::big);
  w.u32(static_cast<uint32_t>(sequence_number >> 32), e);
  w.u32(static_cast<uint32_t>(sequence_number), e);
  w.bytes(payload);
  Submessage sm;
  sm.header.submessage_id = submessage_id::kData;
  sm.header.flags = data_flag::kData;
  if (e == Endian::little) sm.header.flags |= kFlagEndianness;
  sm.body = w.take();
  sm.header.octets_to_next_header = static_cast<uint16_t>(sm.body.size());
  return sm;
}

// ---------------------------------------------------------------------------
// Vendor registry
// ---------------------------------------------------------------------------

/// Vendor id table per the OMG DDS vendor registry. Ships as a text file
/// (one line: hex id, display name); the same content is embedded here so
/// the library works uninstalled.
class VendorRegistry {
 public:
  static VendorRegistry parse(std::istream& in) {
    VendorRegistry reg;
    std::string line;
    while (std::getline(in, line)) {
      size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream ls(line);
      std::string id_tok;
      if (!(ls >> id_tok)) continue;
      uint32_t id = static_cast<uint32_t>(std::stoul(id_tok, nullptr, 16));
      std::string name;
      std::getline(ls, name);
      size_t start = name.find_first_not_of(" \t");
      if (start == std::string::npos) continue;
      size_t end = name.find_last_not_of(" \t\r");
      reg.names_[static_cast<uint16_t>(id)] =
          name.substr(start, end - start + 1);
    }
    return reg;
  }

  static VendorRegistry load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open vendor registry: " + path);
    return parse(in);
  }

  /// Registry built from the embedded copy of the shipped table.
  static const VendorRegistry& builtin() {
    static VendorRegistry reg = [] {
      std::istringstream in(builtin_table());
      return parse(in);
    }();
    return reg;
  }

  std::string name(VendorId id) const {
    auto it = names_.find(id.value);
    if (it != names_.end()) return it->second;
    char buf[8];
    std::snprintf(buf, sizeof buf, "%04X", id.value);
    return std::string("Unknown (0x") + buf + ")";
  }

  size_t size() const { return names_.size(); }

  bool operator==(const VendorRegistry& other) const {
    return names_ == other.names_;
  }

  static const char* builtin_table() {
    return R"(# OMG DDS vendor id registry
0x0101 Real-Time Innovations, Inc. - Connext DDS
0x0102 PrismTech Inc. - OpenSplice DDS
0x0103 Object Computing Inc. - OpenDDS
0x0104 MilSoft
0x0105 Gallium Visual Systems Inc. - InterCOM DDS
0x0106 TwinOaks Computing, Inc. - CoreDX DDS
0x0107 Lakota Technical Solutions, Inc.
0x0108 ICOUP Consulting
0x0109 ETRI - Electronics and Telecommunication Research Institute
0x010A Real-Time Innovations, Inc. - Connext DDS Micro
0x010B PrismTech - OpenSplice Mobile
0x010C PrismTech - OpenSplice Gateway
0x010D PrismTech - OpenSplice Lite
0x010E Technicolor - Qeo
0x010F eProsima - Fast DDS
0x0110 Eclipse Foundation - Cyclone DDS
0x0111 GurumNetworks - GurumDDS
0x0112 RustDDS - Atostek
0x0113 Nanjing Zhenrong - ZRDDS
0x0114 S2E Software Systems - Dust DDS
)";
  }

 private:
  std::map<uint16_t, std::string> names_;
};

/// Display name for a vendor id, "Unknown (0xNNNN)" when unregistered.
inline std::string vendor_name(VendorId id) {
  return VendorRegistry::builtin().name(id);
}

}  // namespace graphguard::wire

#endif  // GRAPHGUARD_WIRE_HPP_
