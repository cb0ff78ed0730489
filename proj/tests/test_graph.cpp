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

#include "graphguard/graph.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "graphguard/simnet.hpp"

namespace graphguard {
namespace {

discovery::ParticipantAnnouncement participant(uint32_t host,
                                               const std::string& user_data) {
  discovery::ParticipantAnnouncement p;
  p.guid_prefix = wire::GuidPrefix::from_ids(host, 2, 3);
  p.vendor_id = wire::VendorId{0x010f};
  if (!user_data.empty()) {
    p.user_data = Bytes(user_data.begin(), user_data.end());
  }
  return p;
}

discovery::EndpointAnnouncement endpoint(uint32_t host,
                                         discovery::EndpointKind kind,
                                         const std::string& topic) {
  discovery::EndpointAnnouncement e;
  e.kind = kind;
  e.guid_prefix = wire::GuidPrefix::from_ids(host, 2, 3);
  e.entity_id = kind == discovery::EndpointKind::writer ? 0x0102u : 0x0107u;
  e.topic_name = topic;
  e.type_name = "type";
  return e;
}

TEST(Mangle, TopicsServicesAndErrors) {
  EXPECT_EQ(graph::mangle(graph::MangleKind::topic, "/chatter"), "rt/chatter");
  EXPECT_EQ(graph::mangle(graph::MangleKind::topic, "/demo/chatter"),
            "rt/demo/chatter");
  EXPECT_EQ(graph::mangle(graph::MangleKind::service_request, "/add_two_ints"),
            "rq/add_two_intsRequest");
  EXPECT_EQ(graph::mangle(graph::MangleKind::service_reply, "/add_two_ints"),
            "rr/add_two_intsReply");
  EXPECT_THROW(graph::mangle(graph::MangleKind::topic, "chatter"),
               graph::InvalidName);
  EXPECT_THROW(graph::mangle(graph::MangleKind::topic, ""),
               graph::InvalidName);
  EXPECT_THROW(graph::mangle(graph::MangleKind::topic, "/"),
               graph::InvalidName);
}

TEST(Mangle, DemangleInvertsMangle) {
  const std::string names[] = {"/chatter", "/demo/chatter", "/a/b/c", "/tf"};
  for (const auto& name : names) {
    for (auto kind : {graph::MangleKind::topic,
                      graph::MangleKind::service_request,
                      graph::MangleKind::service_reply}) {
      auto back = graph::demangle(graph::mangle(kind, name));
      ASSERT_TRUE(back);
      EXPECT_EQ(back->kind, kind);
      EXPECT_EQ(back->name, name);
    }
  }
}

TEST(Mangle, ForeignTopicsDemangleToNothing) {
  EXPECT_FALSE(graph::demangle("ros_discovery_info"));
  EXPECT_FALSE(graph::demangle("rt"));
  EXPECT_FALSE(graph::demangle("rt/"));
  EXPECT_FALSE(graph::demangle("rq/Request"));
  EXPECT_FALSE(graph::demangle("rr/Reply"));
  EXPECT_FALSE(graph::demangle("rq/foo"));  // no Request suffix
  EXPECT_FALSE(graph::demangle("DCPSParticipant"));
}

TEST(Mangle, ActionsExpandToFiveResources) {
  graph::ActionResources r = graph::expand_action("/nav");
  ASSERT_EQ(r.services.size(), 3u);
  ASSERT_EQ(r.topics.size(), 2u);
  EXPECT_EQ(r.services[0], "/nav/_action/send_goal");
  EXPECT_EQ(r.services[1], "/nav/_action/cancel_goal");
  EXPECT_EQ(r.services[2], "/nav/_action/get_result");
  EXPECT_EQ(r.topics[0], "/nav/_action/feedback");
  EXPECT_EQ(r.topics[1], "/nav/_action/status");
  EXPECT_THROW(graph::expand_action("nav"), graph::InvalidName);
}

TEST(Graph, CapabilityFollowsEndpointDirection) {
  using discovery::EndpointKind;
  using graph::Capability;
  using graph::MangleKind;
  EXPECT_EQ(graph::capability_for(EndpointKind::writer, MangleKind::topic),
            Capability::topic_publish);
  EXPECT_EQ(graph::capability_for(EndpointKind::reader, MangleKind::topic),
            Capability::topic_subscribe);
  // A service client writes requests and reads replies.
  EXPECT_EQ(
      graph::capability_for(EndpointKind::writer, MangleKind::service_request),
      Capability::service_request);
  EXPECT_EQ(
      graph::capability_for(EndpointKind::reader, MangleKind::service_reply),
      Capability::service_request);
  // A service server reads requests and writes replies.
  EXPECT_EQ(
      graph::capability_for(EndpointKind::reader, MangleKind::service_request),
      Capability::service_reply);
  EXPECT_EQ(
      graph::capability_for(EndpointKind::writer, MangleKind::service_reply),
      Capability::service_reply);
}

TEST(Graph, NodeIdComesFromUserData) {
  auto id = graph::node_id_for(participant(1, "name=talker;namespace=/demo;"));
  EXPECT_EQ(id.name, "talker");
  EXPECT_EQ(id.node_namespace, "/demo");
  EXPECT_EQ(id.full(), "/demo/talker");

  auto root = graph::node_id_for(participant(1, "name=talker;"));
  EXPECT_EQ(root.full(), "/talker");
}

TEST(Graph, AnonymousParticipantsGetSyntheticNames) {
  auto id = graph::node_id_for(participant(0x01030242, ""));
  EXPECT_EQ(id.full(), "/participant_01030242_00000002_00000003");
}

TEST(Graph, SnapshotJoinsEndpointsToNodes) {
  graph::GraphSnapshot s;
  s.observe(participant(1, "name=talker;namespace=/demo;"));
  s.observe(endpoint(1, discovery::EndpointKind::writer, "rt/demo/chatter"));
  s.observe(endpoint(1, discovery::EndpointKind::writer,
                     "rq/demo/add_two_intsRequest"));
  s.observe(endpoint(1, discovery::EndpointKind::reader,
                     "rr/demo/add_two_intsReply"));

  auto accesses = s.accesses();
  ASSERT_EQ(accesses.size(), 2u);  // request + reply collapse to one access
  auto it = accesses.begin();
  EXPECT_EQ(it->capability, graph::Capability::topic_publish);
  EXPECT_EQ(it->name, "/demo/chatter");
  ++it;
  EXPECT_EQ(it->capability, graph::Capability::service_request);
  EXPECT_EQ(it->name, "/demo/add_two_ints");

  auto resources = s.resources();
  ASSERT_EQ(resources.size(), 2u);
  EXPECT_EQ(resources.begin()->kind, graph::ResourceKind::topic);
  EXPECT_EQ(std::next(resources.begin())->kind, graph::ResourceKind::service);
}

TEST(Graph, ObservationOrderDoesNotMatter) {
  graph::GraphSnapshot forward;
  forward.observe(participant(1, "name=talker;"));
  forward.observe(endpoint(1, discovery::EndpointKind::writer, "rt/chatter"));

  graph::GraphSnapshot reverse;
  reverse.observe(endpoint(1, discovery::EndpointKind::writer, "rt/chatter"));
  reverse.observe(participant(1, "name=talker;"));

  EXPECT_EQ(forward, reverse);
  EXPECT_EQ(graph::render(forward), graph::render(reverse));
  // Observation is idempotent.
  forward.observe(endpoint(1, discovery::EndpointKind::writer, "rt/chatter"));
  EXPECT_EQ(forward, reverse);
}

TEST(Graph, EndpointWithoutParticipantFallsBackToGuidName) {
  graph::GraphSnapshot s;
  s.observe(endpoint(7, discovery::EndpointKind::reader, "rt/scan"));
  auto accesses = s.accesses();
  ASSERT_EQ(accesses.size(), 1u);
  EXPECT_EQ(accesses.begin()->node.full(),
            "/participant_00000007_00000002_00000003");
}

TEST(Graph, SilentParticipantsStillAppearAsNodes) {
  graph::GraphSnapshot s;
  s.observe(participant(1, "name=quiet;"));
  auto nodes = s.nodes();
  ASSERT_EQ(nodes.size(), 1u);
  EXPECT_EQ(nodes[0].id.full(), "/quiet");
  EXPECT_TRUE(nodes[0].accesses.empty());
  ASSERT_EQ(nodes[0].participants.size(), 1u);
}

TEST(Graph, UnmappedTopicsAreReportedNotDropped) {
  graph::GraphSnapshot s;
  s.observe(endpoint(1, discovery::EndpointKind::writer, "ros_discovery_info"));
  EXPECT_TRUE(s.accesses().empty());
  ASSERT_EQ(s.unmapped_topics().size(), 1u);
  EXPECT_EQ(*s.unmapped_topics().begin(), "ros_discovery_info");
}

TEST(Graph, RenderIsSortedAndStable) {
  graph::GraphSnapshot s;
  discovery::ParticipantAnnouncement p = participant(1, "name=talker;");
  p.vendor_id = wire::VendorId{0x0101};
  p.product_version = discovery::ProductVersion{6, 0, 1, 25};
  s.observe(p);
  s.observe(endpoint(1, discovery::EndpointKind::writer, "rt/chatter"));
  s.observe(endpoint(1, discovery::EndpointKind::writer, "ros_discovery_info"));
  EXPECT_EQ(graph::render(s),
            "node /talker\n"
            "  topic-publish /chatter\n"
            "participant 000000010000000200000003 vendor "
            "Real-Time Innovations, Inc. - Connext DDS version 6.0.1.25 "
            "node /talker\n"
            "unmapped ros_discovery_info\n");
}

TEST(Graph, AccumulateFileMatchesInMemoryCapture) {
  simnet::SimSpec spec = simnet::parse_spec(std::string(
      "participant 1 2 3 name=talker\nwriter rt/chatter t\n"));
  Bytes capture = simnet::synthesize(spec);
  auto path = std::filesystem::temp_directory_path() / "graphguard_graph.pcap";
  {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(capture.data()),
              static_cast<std::streamsize>(capture.size()));
  }
  graph::AccumulateResult from_file = graph::accumulate_file(path.string());
  pcap::PcapReader reader(capture);
  graph::AccumulateResult from_bytes = graph::accumulate_capture(reader);
  EXPECT_EQ(from_file.snapshot, from_bytes.snapshot);
  EXPECT_EQ(from_file.rtps_messages, from_bytes.rtps_messages);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace graphguard
