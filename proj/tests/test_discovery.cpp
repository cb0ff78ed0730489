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

#include "graphguard/discovery.hpp"

#include <gtest/gtest.h>

#include "graphguard/simnet.hpp"
#include "graphguard/wire.hpp"

namespace graphguard {
namespace {

using discovery::ParameterList;
using discovery::parse_parameter_list;
using discovery::serialize_parameter_list;

// Complete SPDP announcement laid out by hand, byte by byte, as an oracle
// independent of the serializers: RTPS header, one little-endian DATA
// submessage whose payload is a PL_CDR_LE parameter list.
constexpr const char* kHandSpdpHex =
    // RTPS header: version 2.2, vendor RTI, the example guid prefix
    "52 54 50 53 02 02 01 01"
    "01 03 02 42 ac 11 00 03 00 99 47 3a"
    // DATA, flags E|D = 0x05, 80 octets to next header
    "15 05 50 00"
    // extraFlags, octetsToInlineQos = 16
    "00 00 10 00"
    // readerId = SPDP builtin reader, writerId = SPDP builtin writer
    "00 01 00 c7 00 01 00 c2"
    // sequence number 1
    "00 00 00 00 01 00 00 00"
    // PL_CDR_LE encapsulation, options 0
    "00 03 00 00"
    // protocol version 2.2 (pid 0x0015, len 4)
    "15 00 04 00 02 02 00 00"
    // vendor id 0x0101 (pid 0x0016, len 4, value big-endian on the wire)
    "16 00 04 00 01 01 00 00"
    // domain id 42 (pid 0x000f, len 4)
    "0f 00 04 00 2a 00 00 00"
    // participant guid (pid 0x0050, len 16): prefix + entity 0x000001c1
    "50 00 10 00 01 03 02 42 ac 11 00 03 00 99 47 3a 00 00 01 c1"
    // product version 6.0.1.25 (vendor pid 0x8000, len 4)
    "00 80 04 00 06 00 01 19"
    // sentinel
    "01 00 00 00";

// SEDP publication announcing writer of "rt/chatter". Same layering, the
// parameter list carries topic name, type name and the endpoint guid.
constexpr const char* kHandSedpHex =
    "52 54 50 53 02 02 01 01"
    "01 03 02 42 ac 11 00 03 00 99 47 3a"
    "15 05 6c 00"
    "00 00 10 00"
    // SEDP publications reader/writer entity ids
    "00 00 03 c7 00 00 03 c2"
    "00 00 00 00 02 00 00 00"
    "00 03 00 00"
    // topic name "rt/chatter": u32 len 11 incl NUL, padded to 16
    "05 00 10 00 0b 00 00 00 72 74 2f 63 68 61 74 74 65 72 00 00"
    // type name "std_msgs::msg::dds_::String_": len 29, padded to 36
    "07 00 24 00 1d 00 00 00"
    "73 74 64 5f 6d 73 67 73 3a 3a 6d 73 67 3a 3a 64 64 73 5f 3a 3a"
    "53 74 72 69 6e 67 5f 00 00 00 00"
    // endpoint guid: prefix + entity 0x00000102 (user writer)
    "5a 00 10 00 01 03 02 42 ac 11 00 03 00 99 47 3a 00 00 01 02"
    "01 00 00 00";

TEST(Discovery, HandEncodedSpdpDecodes) {
  wire::RtpsMessage msg = wire::parse_message(from_hex(kHandSpdpHex));
  discovery::ParticipantResult result = discovery::decode_participant(msg);
  ASSERT_TRUE(result.errors.empty()) << result.errors.front();
  ASSERT_TRUE(result.announcement);
  const auto& ann = *result.announcement;
  EXPECT_EQ(ann.guid_prefix.host_id(), 16974402u);
  EXPECT_EQ(ann.guid_prefix.app_id(), 2886795267u);
  EXPECT_EQ(ann.guid_prefix.instance_id(), 10045242u);
  EXPECT_EQ(ann.protocol_version.str(), "2.2");
  EXPECT_EQ(ann.vendor_id.value, 0x0101);
  EXPECT_EQ(ann.domain_id, 42u);
  ASSERT_TRUE(ann.product_version);
  EXPECT_EQ(ann.product_version->str(), "6.0.1.25");
}

TEST(Discovery, HandEncodedSedpDecodes) {
  wire::RtpsMessage msg = wire::parse_message(from_hex(kHandSedpHex));
  discovery::EndpointResult result = discovery::decode_endpoint(msg);
  ASSERT_TRUE(result.errors.empty()) << result.errors.front();
  ASSERT_EQ(result.announcements.size(), 1u);
  const auto& ann = result.announcements[0];
  EXPECT_EQ(ann.kind, discovery::EndpointKind::writer);
  EXPECT_EQ(ann.topic_name, "rt/chatter");
  EXPECT_EQ(ann.type_name, "std_msgs::msg::dds_::String_");
  EXPECT_EQ(ann.entity_id, 0x00000102u);
  EXPECT_EQ(ann.guid_prefix.host_id(), 16974402u);
}

TEST(Discovery, ParameterListRoundTripsByteExact) {
  // The hand-laid payload starts 24 octets into the DATA body.
  wire::RtpsMessage msg = wire::parse_message(from_hex(kHandSpdpHex));
  wire::DataPayload data = wire::decode_data(msg.submessages[0]);
  ParameterList list = parse_parameter_list(data.payload);
  EXPECT_EQ(list.endianness, Endian::little);
  EXPECT_EQ(list.parameters.size(), 5u);
  EXPECT_EQ(serialize_parameter_list(list), data.payload);
}

TEST(Discovery, BigEndianParameterList) {
  Bytes payload = from_hex(
      "00 02 00 00"              // PL_CDR_BE
      "00 0f 00 04 00 00 00 07"  // domain id 7
      "00 01 00 00");            // sentinel
  ParameterList list = parse_parameter_list(payload);
  EXPECT_EQ(list.endianness, Endian::big);
  ASSERT_EQ(list.parameters.size(), 1u);
  EXPECT_EQ(list.parameters[0].pid, discovery::pid::kDomainId);
  EXPECT_EQ(serialize_parameter_list(list), payload);
}

TEST(Discovery, EncapsulationErrors) {
  EXPECT_THROW(parse_parameter_list(from_hex("00")),
               discovery::BadEncapsulation);
  EXPECT_THROW(parse_parameter_list(from_hex("00 09 00 00 01 00 00 00")),
               discovery::BadEncapsulation);
  EXPECT_THROW(parse_parameter_list(from_hex("00 03")),
               discovery::BadEncapsulation);
}

TEST(Discovery, MissingSentinelIsAnError) {
  EXPECT_THROW(parse_parameter_list(from_hex("00 03 00 00")),
               discovery::UnterminatedList);
  EXPECT_THROW(
      parse_parameter_list(from_hex("00 03 00 00 0f 00 04 00 01 00 00 00")),
      discovery::UnterminatedList);
}

TEST(Discovery, ParameterLengthOverrun) {
  EXPECT_THROW(parse_parameter_list(from_hex("00 03 00 00 0f 00 20 00 aa bb")),
               discovery::LengthOverrun);
}

TEST(Discovery, TrailingBytesAfterSentinelIgnored) {
  Bytes payload = from_hex("00 03 00 00 01 00 00 00 12 34 56 78");
  ParameterList list = parse_parameter_list(payload);
  EXPECT_TRUE(list.parameters.empty());
}

TEST(Discovery, CdrStringHelpers) {
  Bytes encoded = discovery::cdr_string_bytes("rt/chatter", Endian::little);
  // u32 length 11 (text plus NUL), text, NUL, pad to four.
  EXPECT_EQ(encoded.size(), 16u);
  EXPECT_EQ(encoded[0], 11);
  ByteReader r(encoded);
  EXPECT_EQ(discovery::read_cdr_string(r, Endian::little), "rt/chatter");

  Bytes empty = discovery::cdr_string_bytes("", Endian::little);
  ByteReader r2(empty);
  EXPECT_EQ(discovery::read_cdr_string(r2, Endian::little), "");
}

TEST(Discovery, CdrStringSequence) {
  std::vector<std::string> seq = {"alpha", "b", "partition_three"};
  Bytes encoded = discovery::cdr_string_seq_bytes(seq, Endian::little);
  EXPECT_EQ(discovery::read_cdr_string_seq(encoded, Endian::little), seq);
}

TEST(Discovery, EndpointWithoutTopicIsReported) {
  // Endpoint guid only; no topic name parameter.
  discovery::ParameterList list;
  list.endianness = Endian::little;
  ByteWriter guid;
  for (int i = 0; i < 12; ++i) guid.u8(static_cast<uint8_t>(i));
  guid.u32(0x00000107, Endian::big);
  list.parameters.push_back({discovery::pid::kEndpointGuid, guid.take()});

  wire::RtpsMessage msg;
  msg.guid_prefix.bytes.fill(1);
  msg.submessages.push_back(wire::make_data_submessage(
      discovery::entity_id::kSedpPublicationsReader,
      discovery::entity_id::kSedpPublicationsWriter, 1,
      serialize_parameter_list(list)));
  discovery::EndpointResult result = discovery::decode_endpoint(msg);
  EXPECT_TRUE(result.announcements.empty());
  ASSERT_EQ(result.errors.size(), 1u);
  EXPECT_NE(result.errors[0].find("topic name"), std::string::npos);
}

TEST(Discovery, NonDiscoveryWritersAreIgnored) {
  wire::RtpsMessage msg;
  msg.submessages.push_back(wire::make_data_submessage(
      0x00000107, 0x00000102, 1, from_hex("00 03 00 00 01 00 00 00")));
  EXPECT_FALSE(discovery::decode_participant(msg).announcement);
  EXPECT_TRUE(discovery::decode_endpoint(msg).announcements.empty());
}

TEST(Discovery, MalformedSpdpPayloadIsReportedNotThrown) {
  wire::RtpsMessage msg;
  msg.submessages.push_back(wire::make_data_submessage(
      discovery::entity_id::kSpdpReader, discovery::entity_id::kSpdpWriter, 1,
      from_hex("00 03 00 00 0f 00 04 00")));  // truncated, no sentinel
  discovery::ParticipantResult result = discovery::decode_participant(msg);
  EXPECT_FALSE(result.announcement);
  EXPECT_EQ(result.errors.size(), 1u);
}

TEST(Discovery, ProductVersionFromVendorParameter) {
  simnet::SimParticipant p;
  p.host_id = 1;
  p.app_id = 2;
  p.instance_id = 3;
  p.vendor = 0x0101;
  p.product_version = discovery::ProductVersion{6, 0, 1, 25};
  simnet::SimSpec spec;
  wire::RtpsMessage msg = simnet::spdp_message(spec, p);
  auto result = discovery::decode_participant(msg);
  ASSERT_TRUE(result.announcement);
  ASSERT_TRUE(result.announcement->product_version);
  EXPECT_EQ(result.announcement->product_version->str(), "6.0.1.25");
}

TEST(Discovery, ProductVersionFromUserDataFallback) {
  simnet::SimParticipant p;
  p.host_id = 1;
  p.app_id = 2;
  p.instance_id = 3;
  p.vendor = 0x010f;  // vendor parameter not applicable
  p.node_name = "talker";
  p.product_version = discovery::ProductVersion{2, 3, 0, 0};
  simnet::SimSpec spec;
  wire::RtpsMessage msg = simnet::spdp_message(spec, p);
  auto result = discovery::decode_participant(msg);
  ASSERT_TRUE(result.announcement);
  ASSERT_TRUE(result.announcement->user_data);
  ASSERT_TRUE(result.announcement->product_version);
  EXPECT_EQ(result.announcement->product_version->str(), "2.3.0.0");
}

TEST(Discovery, NoProductVersionDecodesToNothing) {
  simnet::SimParticipant p;
  p.host_id = 1;
  p.app_id = 2;
  p.instance_id = 3;
  p.vendor = 0x0110;
  simnet::SimSpec spec;
  auto result = discovery::decode_participant(simnet::spdp_message(spec, p));
  ASSERT_TRUE(result.announcement);
  EXPECT_FALSE(result.announcement->product_version);
}

}  // namespace
}  // namespace graphguard
