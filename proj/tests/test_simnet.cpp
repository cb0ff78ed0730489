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

#include "graphguard/simnet.hpp"

#include <gtest/gtest.h>

#include "graphguard/graph.hpp"

namespace graphguard {
namespace {

simnet::SimSpec talker_listener_spec() {
  return simnet::parse_spec(std::string(R"(
# classic two-node demo
seed 11
domain 7
participant 0x01030242 0xac110003 0x0099473a vendor=0x010f name=talker namespace=/demo
writer rt/demo/chatter std_msgs::msg::dds_::String_
participant 10 20 30 vendor=0x0110 name=listener namespace=/demo
reader rt/demo/chatter std_msgs::msg::dds_::String_
)"));
}

TEST(SimSpec, ParsesDirectives) {
  simnet::SimSpec spec = talker_listener_spec();
  EXPECT_EQ(spec.seed, 11u);
  EXPECT_EQ(spec.domain_id, 7u);
  ASSERT_EQ(spec.participants.size(), 2u);
  const auto& talker = spec.participants[0];
  EXPECT_EQ(talker.host_id, 0x01030242u);
  EXPECT_EQ(talker.vendor, 0x010f);
  EXPECT_EQ(talker.node_name, "talker");
  EXPECT_EQ(talker.node_namespace, "/demo");
  ASSERT_EQ(talker.endpoints.size(), 1u);
  EXPECT_EQ(talker.endpoints[0].kind, discovery::EndpointKind::writer);
  EXPECT_EQ(talker.endpoints[0].topic, "rt/demo/chatter");
  EXPECT_EQ(spec.participants[1].endpoints[0].kind,
            discovery::EndpointKind::reader);
}

TEST(SimSpec, ParsesVersionOption) {
  simnet::SimSpec spec = simnet::parse_spec(std::string(
      "participant 1 2 3 vendor=0x0101 version=6.0.1.25\n"));
  ASSERT_TRUE(spec.participants[0].product_version);
  EXPECT_EQ(spec.participants[0].product_version->str(), "6.0.1.25");
}

TEST(SimSpec, ErrorsCarryLineNumbers) {
  try {
    simnet::parse_spec(std::string("seed 1\nbogus directive\n"));
    FAIL() << "expected BadSpec";
  } catch (const simnet::BadSpec& err) {
    EXPECT_NE(std::string(err.what()).find("line 2"), std::string::npos);
  }
  EXPECT_THROW(simnet::parse_spec(std::string("writer rt/x t\n")),
               simnet::BadSpec);
  EXPECT_THROW(simnet::parse_spec(std::string("participant 1 2\n")),
               simnet::BadSpec);
  EXPECT_THROW(
      simnet::parse_spec(std::string("participant 1 2 3 version=6.0\n")),
      simnet::BadSpec);
  EXPECT_THROW(
      simnet::parse_spec(std::string("participant 1 2 3 color=red\n")),
      simnet::BadSpec);
}

TEST(SimSpec, RejectsBadNoiseRatio) {
  simnet::SimSpec spec;
  spec.noise_ratio = 1.0;
  EXPECT_THROW(simnet::synthesize(spec), simnet::BadSpec);
  spec.noise_ratio = -0.1;
  EXPECT_THROW(simnet::synthesize(spec), simnet::BadSpec);
}

TEST(Simnet, SynthesizedCaptureDecodesBackToTheSpec) {
  simnet::SimSpec spec = talker_listener_spec();
  pcap::PcapReader reader(simnet::synthesize(spec));
  graph::AccumulateResult result = graph::accumulate_capture(reader);
  EXPECT_TRUE(result.decode_errors.empty());
  EXPECT_EQ(result.rtps_messages, 4u);  // 2 SPDP + 2 SEDP
  EXPECT_EQ(result.non_rtps_datagrams, 0u);

  const graph::GraphSnapshot& snapshot = result.snapshot;
  ASSERT_EQ(snapshot.participants().size(), 2u);
  ASSERT_EQ(snapshot.endpoints().size(), 2u);
  auto nodes = snapshot.nodes();
  ASSERT_EQ(nodes.size(), 2u);
  EXPECT_EQ(nodes[0].id.full(), "/demo/listener");
  EXPECT_EQ(nodes[1].id.full(), "/demo/talker");
  ASSERT_EQ(nodes[1].accesses.size(), 1u);
  EXPECT_EQ(nodes[1].accesses.begin()->capability,
            graph::Capability::topic_publish);
  EXPECT_EQ(nodes[1].accesses.begin()->name, "/demo/chatter");
}

TEST(Simnet, DomainAndVendorSurviveTheWire) {
  simnet::SimSpec spec = talker_listener_spec();
  pcap::PcapReader reader(simnet::synthesize(spec));
  auto result = graph::accumulate_capture(reader);
  for (const auto& p : result.snapshot.participants()) {
    EXPECT_EQ(p.domain_id, 7u);
  }
}

TEST(Simnet, NoiseDatagramsAreCountedSeparately) {
  simnet::SimSpec spec = talker_listener_spec();
  spec.noise_ratio = 0.5;
  pcap::PcapReader reader(simnet::synthesize(spec));
  auto result = graph::accumulate_capture(reader);
  EXPECT_TRUE(result.decode_errors.empty());
  EXPECT_EQ(result.rtps_messages, 4u);
  EXPECT_EQ(result.non_rtps_datagrams, 4u);  // ratio 0.5 doubles the count
  // Noise never perturbs what the capture decodes to.
  simnet::SimSpec clean = talker_listener_spec();
  pcap::PcapReader clean_reader(simnet::synthesize(clean));
  EXPECT_EQ(graph::accumulate_capture(clean_reader).snapshot, result.snapshot);
}

TEST(Simnet, SameSeedSameBytes) {
  simnet::SimSpec spec = talker_listener_spec();
  spec.noise_ratio = 0.3;
  EXPECT_EQ(simnet::synthesize(spec), simnet::synthesize(spec));
  simnet::SimSpec other = spec;
  other.seed = 12;
  EXPECT_NE(simnet::synthesize(other), simnet::synthesize(spec));
}

TEST(Simnet, RandomSpecsSynthesizeCleanly) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 25; ++i) {
    simnet::SimSpec spec = simnet::random_spec(rng);
    pcap::PcapReader reader(simnet::synthesize(spec));
    auto result = graph::accumulate_capture(reader);
    ASSERT_TRUE(result.decode_errors.empty());
    ASSERT_EQ(result.snapshot.participants().size(),
              spec.participants.size());
  }
}

TEST(Simnet, RandomMessagesAreParseable) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    wire::RtpsMessage msg = simnet::random_message(rng);
    Bytes serialized = wire::serialize_message(msg);
    EXPECT_NO_THROW(wire::parse_message(serialized));
  }
}

}  // namespace
}  // namespace graphguard
