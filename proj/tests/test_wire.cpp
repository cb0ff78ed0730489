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

#include "graphguard/wire.hpp"

#include <gtest/gtest.h>

#include <random>

#include "graphguard/simnet.hpp"

namespace graphguard {
namespace {

using wire::parse_message;
using wire::RtpsMessage;
using wire::serialize_message;

// Hand-assembled message: header, one INFO_TS, one PAD. Every byte below
// was written against the wire layout by hand, so this is an oracle the
// serializer had no part in.
constexpr const char* kHandMessageHex =
    "52 54 50 53"              // 'RTPS'
    "02 02"                    // protocol 2.2
    "01 0f"                    // vendor 0x010f
    "01 03 02 42 ac 11 00 03 00 99 47 3a"  // guid prefix
    "09 01 08 00"              // INFO_TS, little-endian, 8 octets
    "11 22 33 44 55 66 77 88"  // opaque timestamp body
    "01 00 00 04"              // PAD, big-endian flags=0, 4 octets
    "de ad be ef";

TEST(WireParse, HandAssembledMessage) {
  Bytes input = from_hex(kHandMessageHex);
  RtpsMessage msg = parse_message(input);
  EXPECT_EQ(msg.version.major, 2);
  EXPECT_EQ(msg.version.minor, 2);
  EXPECT_EQ(msg.vendor_id.value, 0x010f);
  ASSERT_EQ(msg.submessages.size(), 2u);

  const wire::Submessage& ts = msg.submessages[0];
  EXPECT_EQ(ts.header.submessage_id, wire::submessage_id::kInfoTimestamp);
  EXPECT_EQ(ts.header.flags, 0x01);
  EXPECT_EQ(ts.header.body_endianness(), Endian::little);
  EXPECT_EQ(ts.header.octets_to_next_header, 8);
  EXPECT_EQ(ts.body, from_hex("11 22 33 44 55 66 77 88"));
  EXPECT_FALSE(ts.extends_to_end);

  const wire::Submessage& pad = msg.submessages[1];
  EXPECT_EQ(pad.header.submessage_id, wire::submessage_id::kPad);
  EXPECT_EQ(pad.header.body_endianness(), Endian::big);
  // Big-endian length field: 00 04 -> 4.
  EXPECT_EQ(pad.header.octets_to_next_header, 4);
  EXPECT_EQ(pad.body, from_hex("de ad be ef"));

  EXPECT_EQ(serialize_message(msg), input);
}

TEST(WireParse, GuidPrefixIdViews) {
  Bytes input = from_hex(kHandMessageHex);
  RtpsMessage msg = parse_message(input);
  EXPECT_EQ(msg.guid_prefix.host_id(), 16974402u);
  EXPECT_EQ(msg.guid_prefix.app_id(), 2886795267u);
  EXPECT_EQ(msg.guid_prefix.instance_id(), 10045242u);
  EXPECT_EQ(msg.guid_prefix.str(), "01030242ac1100030099473a");

  wire::GuidPrefix rebuilt =
      wire::GuidPrefix::from_ids(16974402u, 2886795267u, 10045242u);
  EXPECT_EQ(rebuilt, msg.guid_prefix);
}

TEST(WireParse, ExtendsToEndShorthand) {
  // Final submessage with a zero length field runs to the end of the
  // message.
  Bytes input = from_hex(
      "52 54 50 53 02 02 01 0f"
      "00 00 00 00 00 00 00 00 00 00 00 01"
      "15 01 00 00"
      "aa bb cc dd ee");
  RtpsMessage msg = parse_message(input);
  ASSERT_EQ(msg.submessages.size(), 1u);
  EXPECT_TRUE(msg.submessages[0].extends_to_end);
  EXPECT_EQ(msg.submessages[0].body, from_hex("aa bb cc dd ee"));
  EXPECT_EQ(serialize_message(msg), input);
}

TEST(WireParse, HeaderOnlyMessageHasNoSubmessages) {
  Bytes input = from_hex(
      "52 54 50 53 02 02 01 0f"
      "00 00 00 00 00 00 00 00 00 00 00 01");
  RtpsMessage msg = parse_message(input);
  EXPECT_TRUE(msg.submessages.empty());
  EXPECT_EQ(serialize_message(msg), input);
}

TEST(WireParse, RejectsBadMagic) {
  Bytes input = from_hex(kHandMessageHex);
  input[0] = 'X';
  EXPECT_THROW(parse_message(input), wire::BadMagic);
}

TEST(WireParse, BadMagicWinsOverShortInput) {
  // Four garbage bytes are classified as non-RTPS, not as a truncated
  // message; noise filtering depends on this ordering.
  EXPECT_THROW(parse_message(from_hex("de ad be ef")), wire::BadMagic);
}

TEST(WireParse, RejectsTruncatedHeader) {
  EXPECT_THROW(parse_message(from_hex("52 54 50 53 02 02")), Truncated);
  EXPECT_THROW(parse_message(Bytes{}), Truncated);
}

TEST(WireParse, RejectsVersionZero) {
  Bytes input = from_hex(kHandMessageHex);
  input[4] = 0;
  EXPECT_THROW(parse_message(input), wire::UnsupportedVersion);
}

TEST(WireParse, RejectsLengthOverrun) {
  Bytes input = from_hex(
      "52 54 50 53 02 02 01 0f"
      "00 00 00 00 00 00 00 00 00 00 00 01"
      "15 01 ff 00"  // claims 255 octets, only 2 follow
      "aa bb");
  EXPECT_THROW(parse_message(input), Truncated);
}

TEST(WireSerialize, RejectsOversizedBody) {
  RtpsMessage msg;
  wire::Submessage sm;
  sm.header.submessage_id = wire::submessage_id::kData;
  sm.body.resize(0x10000);
  msg.submessages.push_back(sm);
  EXPECT_THROW(serialize_message(msg), wire::BodyTooLarge);
}

TEST(WireRoundTrip, RandomMessagesByteIdentity) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    RtpsMessage msg = simnet::random_message(rng);
    Bytes serialized = serialize_message(msg);
    RtpsMessage reparsed = parse_message(serialized);
    ASSERT_EQ(serialize_message(reparsed), serialized) << "iteration " << i;
    // Value-level identity too, save for the length field the serializer
    // recomputes from the body.
    ASSERT_EQ(reparsed.version, msg.version);
    ASSERT_EQ(reparsed.vendor_id, msg.vendor_id);
    ASSERT_EQ(reparsed.guid_prefix, msg.guid_prefix);
    ASSERT_EQ(reparsed.submessages.size(), msg.submessages.size());
    for (size_t j = 0; j < msg.submessages.size(); ++j) {
      ASSERT_EQ(reparsed.submessages[j].header.submessage_id,
                msg.submessages[j].header.submessage_id);
      ASSERT_EQ(reparsed.submessages[j].header.flags,
                msg.submessages[j].header.flags);
      ASSERT_EQ(reparsed.submessages[j].body, msg.submessages[j].body);
      ASSERT_EQ(reparsed.submessages[j].extends_to_end,
                msg.submessages[j].extends_to_end);
    }
  }
}

TEST(WireData, MakeAndDecodeRoundTrip) {
  Bytes payload = from_hex("00 03 00 00 01 00 00 00");
  wire::Submessage sm = wire::make_data_submessage(0x000100c7, 0x000100c2,
                                                   81985529216486895, payload);
  wire::DataPayload d = wire::decode_data(sm);
  EXPECT_EQ(d.reader_id, 0x000100c7u);
  EXPECT_EQ(d.writer_id, 0x000100c2u);
  EXPECT_EQ(d.sequence_number, 81985529216486895);
  EXPECT_EQ(d.payload, payload);
  EXPECT_TRUE(d.inline_qos.empty());
}

TEST(WireData, BigEndianBody) {
  wire::Submessage sm = wire::make_data_submessage(
      1, 2, 3, from_hex("aa bb"), Endian::big);
  EXPECT_EQ(sm.header.flags & wire::kFlagEndianness, 0);
  wire::DataPayload d = wire::decode_data(sm);
  EXPECT_EQ(d.reader_id, 1u);
  EXPECT_EQ(d.writer_id, 2u);
  EXPECT_EQ(d.sequence_number, 3);
}

TEST(WireData, InlineQosIsDelimitedBySentinel) {
  // Body with Q and D flags: fixed fields, two qos parameters plus the
  // sentinel, then payload.
  ByteWriter w;
  w.u16(0, Endian::little);   // extraFlags
  w.u16(16, Endian::little);  // octetsToInlineQos
  w.u32(0x000100c7, Endian::big);
  w.u32(0x000100c2, Endian::big);
  w.u32(0, Endian::little);
  w.u32(1, Endian::little);
  Bytes qos = from_hex(
      "70 00 04 00 01 02 03 04"   // some parameter
      "01 00 00 00");             // sentinel
  w.bytes(qos);
  Bytes payload = from_hex("ca fe");
  w.bytes(payload);

  wire::Submessage sm;
  sm.header.submessage_id = wire::submessage_id::kData;
  sm.header.flags = wire::kFlagEndianness | wire::data_flag::kInlineQos |
                    wire::data_flag::kData;
  sm.body = w.take();
  sm.header.octets_to_next_header = static_cast<uint16_t>(sm.body.size());

  wire::DataPayload d = wire::decode_data(sm);
  EXPECT_EQ(d.inline_qos, qos);
  EXPECT_EQ(d.payload, payload);
}

TEST(WireData, RejectsBadInlineQosOffset) {
  wire::Submessage sm = wire::make_data_submessage(1, 2, 3, from_hex("00"));
  // Patch octetsToInlineQos (bytes 2-3, little-endian) below the minimum.
  sm.body[2] = 8;
  sm.body[3] = 0;
  EXPECT_THROW(wire::decode_data(sm), Error);
  // And past the end of the body.
  sm.body[2] = 0xff;
  EXPECT_THROW(wire::decode_data(sm), Truncated);
}

TEST(WireData, RejectsNonDataSubmessage) {
  wire::Submessage sm;
  sm.header.submessage_id = wire::submessage_id::kHeartbeat;
  EXPECT_THROW(wire::decode_data(sm), Error);
}

TEST(VendorRegistry, KnownNames) {
  EXPECT_EQ(wire::vendor_name(wire::VendorId{0x0101}),
            "Real-Time Innovations, Inc. - Connext DDS");
  EXPECT_EQ(wire::vendor_name(wire::VendorId{0x010f}), "eProsima - Fast DDS");
  EXPECT_EQ(wire::vendor_name(wire::VendorId{0x0110}),
            "Eclipse Foundation - Cyclone DDS");
}

TEST(VendorRegistry, UnknownIdFormatting) {
  EXPECT_EQ(wire::vendor_name(wire::VendorId{0x0999}), "Unknown (0x0999)");
  EXPECT_EQ(wire::vendor_name(wire::VendorId{0}), "Unknown (0x0000)");
}

TEST(VendorRegistry, ShippedFileMatchesBuiltin) {
  wire::VendorRegistry shipped = wire::VendorRegistry::load_file(
      std::string(GRAPHGUARD_DATA_DIR) + "/vendor_ids.txt");
  EXPECT_EQ(shipped, wire::VendorRegistry::builtin());
  EXPECT_EQ(shipped.size(), 20u);
}

}  // namespace
}  // namespace graphguard
