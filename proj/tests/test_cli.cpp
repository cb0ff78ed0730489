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

// End-to-end checks through the installed binary. Every test shells out;
// stdout and stderr are captured through redirect files.

#include <sys/wait.h>
#include <unistd.h>

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void spit(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("graphguard_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  void TearDown() override { fs::remove_all(dir_); }

  RunResult run(const std::string& args) {
    fs::path out = dir_ / "stdout.txt";
    fs::path err = dir_ / "stderr.txt";
    std::string cmd = std::string(GRAPHGUARD_CLI_PATH) + " " + args + " > " +
                      out.string() + " 2> " + err.string();
    int status = std::system(cmd.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = slurp(out);
    result.err = slurp(err);
    return result;
  }

  /// One decoded json object per stdout line.
  static std::vector<json> json_lines(const std::string& text) {
    std::vector<json> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty()) out.push_back(json::parse(line));
    }
    return out;
  }

  fs::path make_capture(const std::string& spec_text,
                        const std::string& name = "capture.pcap") {
    fs::path spec = dir_ / "scenario.spec";
    spit(spec, spec_text);
    fs::path pcap = dir_ / name;
    RunResult r =
        run("simnet --spec " + spec.string() + " -o " + pcap.string());
    EXPECT_EQ(r.exit_code, 0) << r.err;
    EXPECT_TRUE(fs::exists(pcap));
    return pcap;
  }

  static std::string demo_spec() {
    return "seed 5\n"
           "participant 1 2 3 name=talker namespace=/demo\n"
           "writer rt/demo/chatter std_msgs::msg::dds_::String_\n"
           "participant 4 5 6 name=listener namespace=/demo\n"
           "reader rt/demo/chatter std_msgs::msg::dds_::String_\n";
  }

  fs::path dir_;
};

TEST_F(CliTest, HelpExitsCleanlyBadUsageDoesNot) {
  EXPECT_EQ(run("--help").exit_code, 0);
  EXPECT_EQ(run("").exit_code, 2);
  EXPECT_EQ(run("frobnicate").exit_code, 2);
  EXPECT_EQ(run("graph list").exit_code, 2);  // --pcap is required
}

TEST_F(CliTest, SimnetWritesAClassicCapture) {
  fs::path pcap = make_capture(demo_spec());
  std::ifstream in(pcap, std::ios::binary);
  uint32_t magic = 0;
  in.read(reinterpret_cast<char*>(&magic), 4);
  EXPECT_EQ(magic, 0xa1b2c3d4u);

  fs::path bad_spec = dir_ / "bad.spec";
  spit(bad_spec, "nonsense\n");
  RunResult r = run("simnet --spec " + bad_spec.string() + " -o " +
                    (dir_ / "x.pcap").string());
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
}

TEST_F(CliTest, GraphListRendersNodesAndStats) {
  fs::path pcap = make_capture(demo_spec());
  RunResult r = run("graph list --pcap " + pcap.string());
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_NE(r.out.find("node /demo/talker"), std::string::npos);
  EXPECT_NE(r.out.find("  topic-publish /demo/chatter"), std::string::npos);
  EXPECT_NE(r.out.find("node /demo/listener"), std::string::npos);
  EXPECT_NE(r.err.find("4 RTPS messages, 0 other datagrams"),
            std::string::npos);
}

TEST_F(CliTest, GraphListJsonIsOneRecordPerLine) {
  fs::path pcap = make_capture(demo_spec());
  RunResult r = run("graph list --json --pcap " + pcap.string());
  EXPECT_EQ(r.exit_code, 0);
  auto records = json_lines(r.out);
  ASSERT_EQ(records.size(), 4u);  // 2 nodes + 2 participants
  EXPECT_EQ(records[0]["type"], "node");
  EXPECT_EQ(records[0]["node"], "/demo/listener");
  EXPECT_EQ(records[0]["accesses"][0]["kind"], "topic-subscribe");
  EXPECT_EQ(records[1]["node"], "/demo/talker");
  EXPECT_EQ(records[2]["type"], "participant");
}

TEST_F(CliTest, PolicyGenerateAuditRefineRoundTrip) {
  fs::path pcap = make_capture(demo_spec());
  fs::path policy = dir_ / "policy.xml";
  RunResult gen = run("policy generate --pcap " + pcap.string() + " -o " +
                      policy.string());
  EXPECT_EQ(gen.exit_code, 0);
  EXPECT_TRUE(fs::exists(policy));

  RunResult clean = run("policy audit --pcap " + pcap.string() +
                        " --policy " + policy.string());
  EXPECT_EQ(clean.exit_code, 0) << clean.out;
  EXPECT_NE(clean.err.find("0 uncovered, 0 unobserved"), std::string::npos);

  // A capture with one extra access makes the same policy under-grant.
  fs::path wider = make_capture(
      demo_spec() +
          "participant 7 8 9 name=teleop namespace=/demo\n"
          "writer rt/demo/cmd_vel geometry_msgs::msg::dds_::Twist_\n",
      "wider.pcap");
  RunResult dirty = run("policy audit --pcap " + wider.string() +
                        " --policy " + policy.string());
  EXPECT_EQ(dirty.exit_code, 1);
  EXPECT_NE(dirty.out.find("uncovered /demo/teleop topic-publish "
                           "/demo/cmd_vel"),
            std::string::npos);

  RunResult dirty_json = run("policy audit --json --pcap " + wider.string() +
                             " --policy " + policy.string());
  EXPECT_EQ(dirty_json.exit_code, 1);
  auto records = json_lines(dirty_json.out);
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0]["type"], "uncovered");
  EXPECT_EQ(records[0]["node"], "/demo/teleop");

  fs::path denials = dir_ / "denials.log";
  spit(denials,
       "DENY /demo/teleop topic-publish /demo/cmd_vel\n");
  fs::path refined = dir_ / "refined.xml";
  RunResult ref = run("policy refine " + policy.string() + " --denials " +
                      denials.string() + " -o " + refined.string());
  EXPECT_EQ(ref.exit_code, 0);
  RunResult after = run("policy audit --pcap " + wider.string() +
                        " --policy " + refined.string());
  EXPECT_EQ(after.exit_code, 0) << after.out;
}

TEST_F(CliTest, PolicyGenerateAssignsEnclaves) {
  fs::path pcap = make_capture(demo_spec());
  fs::path policy = dir_ / "policy.xml";
  RunResult r = run("policy generate --pcap " + pcap.string() +
                    " --assign /demo/talker=/pub --assign "
                    "/demo/listener=/sub -o " +
                    policy.string());
  EXPECT_EQ(r.exit_code, 0);
  std::string text = slurp(policy);
  EXPECT_NE(text.find("path=\"/pub\""), std::string::npos);
  EXPECT_NE(text.find("path=\"/sub\""), std::string::npos);

  RunResult missing = run("policy generate --pcap " + pcap.string() +
                          " --assign /demo/talker=/pub -o " +
                          (dir_ / "x.xml").string());
  EXPECT_EQ(missing.exit_code, 2);
  EXPECT_NE(missing.err.find("missing from the assignment"),
            std::string::npos);
}

TEST_F(CliTest, MonitorFindsVulnerableParticipants) {
  fs::path pcap = make_capture(
      "participant 0x01030242 0xac110003 0x0099473a vendor=0x0101 "
      "version=6.0.1.25\n");
  std::string db = std::string(GRAPHGUARD_DATA_DIR) + "/cve_db.txt";
  RunResult r = run("monitor --pcap " + pcap.string() + " --cve-db " + db);
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("sniffing the DDS network..."), std::string::npos);
  EXPECT_NE(r.out.find("Vulnerable DDS endpoint found (hostId=16974402, "
                       "appId=2886795267, instanceId=10045242)"),
            std::string::npos);
  EXPECT_NE(r.out.find("* CVE-2021-38487"), std::string::npos);

  RunResult j = run("monitor --json --pcap " + pcap.string() + " --cve-db " +
                    db);
  EXPECT_EQ(j.exit_code, 1);
  auto records = json_lines(j.out);
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0]["type"], "finding");
  EXPECT_EQ(records[0]["host_id"], 16974402u);
  EXPECT_EQ(records[0]["cve_ids"].size(), 2u);
  EXPECT_EQ(records[1]["type"], "summary");
  EXPECT_EQ(records[1]["vulnerable"], 1u);
}

TEST_F(CliTest, MonitorStaysQuietOnPatchedVersions) {
  fs::path pcap = make_capture(
      "participant 1 2 3 vendor=0x0101 version=7.3.0.0\n");
  std::string db = std::string(GRAPHGUARD_DATA_DIR) + "/cve_db.txt";
  RunResult r = run("monitor --pcap " + pcap.string() + " --cve-db " + db);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.out.find("Vulnerable"), std::string::npos);
  EXPECT_NE(r.out.find("1 participants, 0 vulnerable"), std::string::npos);
}

TEST_F(CliTest, MonitorRefusesLiveCapture) {
  std::string db = std::string(GRAPHGUARD_DATA_DIR) + "/cve_db.txt";
  RunResult r = run("monitor --iface eth0 --cve-db " + db);
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("record the interface to a pcap"), std::string::npos);

  RunResult neither = run("monitor --cve-db " + db);
  EXPECT_EQ(neither.exit_code, 2);
  EXPECT_NE(neither.err.find("needs --pcap or --iface"), std::string::npos);
}

TEST_F(CliTest, KeystoreLifecycleThroughTheBinary) {
  fs::path root = dir_ / "keystore";
  RunResult init = run("keystore init " + root.string() + " --domain 7");
  EXPECT_EQ(init.exit_code, 0) << init.err;
  EXPECT_TRUE(fs::exists(root / "enclaves" / "governance.p7s"));
  EXPECT_EQ(run("keystore init " + root.string()).exit_code, 2);

  RunResult verify = run("keystore verify " + root.string());
  EXPECT_EQ(verify.exit_code, 0);
  EXPECT_NE(verify.out.find("0 enclaves checked, 0 failures"),
            std::string::npos);

  fs::path pcap = make_capture(demo_spec());
  fs::path policy = dir_ / "policy.xml";
  ASSERT_EQ(run("policy generate --pcap " + pcap.string() + " -o " +
                policy.string())
                .exit_code,
            0);
  RunResult created = run("enclave create " + root.string() + " / --policy " +
                          policy.string());
  EXPECT_EQ(created.exit_code, 0) << created.err;
  for (const char* file : {"cert.pem", "key.pem", "governance.p7s",
                           "permissions.xml", "permissions.p7s"}) {
    EXPECT_TRUE(fs::exists(root / "enclaves" / file)) << file;
  }

  RunResult reverify = run("keystore verify --json " + root.string());
  EXPECT_EQ(reverify.exit_code, 0);
  auto records = json_lines(reverify.out);
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0]["enclaves_checked"], 1u);

  // Tampering shows up as a nonzero exit and a failure line.
  fs::path permissions = root / "enclaves" / "permissions.xml";
  std::string text = slurp(permissions);
  text[text.find("DENY")] = 'd';
  spit(permissions, text);
  RunResult tampered = run("keystore verify " + root.string());
  EXPECT_EQ(tampered.exit_code, 1);
  EXPECT_NE(tampered.out.find("SIGNATURE"), std::string::npos);
}

TEST_F(CliTest, KeystoreRootFallsBackToTheEnvironment) {
  fs::path root = dir_ / "env_keystore";
  ASSERT_EQ(run("keystore init " + root.string()).exit_code, 0);
  ::setenv("GRAPHGUARD_KEYSTORE", root.string().c_str(), 1);
  RunResult r = run("keystore verify");
  ::unsetenv("GRAPHGUARD_KEYSTORE");
  EXPECT_EQ(r.exit_code, 0);

  RunResult bare = run("keystore verify");
  EXPECT_EQ(bare.exit_code, 2);
  EXPECT_NE(bare.err.find("GRAPHGUARD_KEYSTORE"), std::string::npos);
}

}  // namespace
