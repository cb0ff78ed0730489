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

// Command-line front end. Subcommands follow the methodology steps:
// model the graph from traffic, generate and refine a policy, audit it,
// deploy keystore artifacts, monitor the network. Exit codes: 0 success,
// 1 findings or violations present, 2 usage or runtime error. With
// --json, records go to stdout and human text to stderr, never mixed.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "graphguard/graphguard.hpp"

namespace {

using nlohmann::ordered_json;

constexpr int kOk = 0;
constexpr int kFindings = 1;
constexpr int kError = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw graphguard::Error("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw graphguard::Error("cannot write " + path);
  out << content;
}

/// Keystore root from the argument or GRAPHGUARD_KEYSTORE.
std::string keystore_root(const std::string& arg) {
  if (!arg.empty()) return arg;
  if (const char* env = std::getenv("GRAPHGUARD_KEYSTORE");
      env && *env != '\0') {
    return env;
  }
  throw graphguard::Error(
      "no keystore root: pass one or set GRAPHGUARD_KEYSTORE");
}

// ---------------------------------------------------------------------------
// keystore / enclave
// ---------------------------------------------------------------------------

int run_keystore_init(const std::string& root_arg, bool shared_ca, bool rsa,
                      const std::vector<uint32_t>& domains) {
  graphguard::pki::KeystoreOptions options;
  options.shared_ca = shared_ca;
  if (rsa) options.algorithm = graphguard::pki::KeyAlgorithm::rsa_3072;
  if (!domains.empty()) options.domains = domains;
  std::string root = keystore_root(root_arg);
  graphguard::pki::Keystore::init(root, options);
  std::cerr << "initialized keystore at " << root << "\n";
  return kOk;
}

int run_keystore_verify(const std::string& root_arg, bool json) {
  std::string root = keystore_root(root_arg);
  graphguard::pki::Keystore ks = graphguard::pki::Keystore::open(root);
  graphguard::pki::VerifyReport report = ks.verify();
  if (json) {
    for (const auto& failure : report.failures) {
      std::cout << ordered_json{{"type", "failure"}, {"detail", failure}}
                << "\n";
    }
    std::cout << ordered_json{{"type", "summary"},
                              {"enclaves_checked", report.enclaves_checked},
                              {"failures", report.failures.size()}}
              << "\n";
  } else {
    for (const auto& failure : report.failures) {
      std::cout << failure << "\n";
    }
    std::cout << report.enclaves_checked << " enclaves checked, "
              << report.failures.size() << " failures\n";
  }
  return report.ok() ? kOk : kFindings;
}

int run_enclave_create(const std::string& root_arg, const std::string& path,
                       const std::string& policy_file) {
  graphguard::policy::SecurityPolicy policy =
      graphguard::policy::load_policy_file(policy_file);
  std::string root = keystore_root(root_arg);
  graphguard::pki::Keystore ks = graphguard::pki::Keystore::open(root);
  ks.create_enclave(path, policy);
  std::cerr << "created enclave " << path << " under " << root << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// graph
// ---------------------------------------------------------------------------

graphguard::graph::AccumulateResult load_snapshot(const std::string& pcap) {
  return graphguard::graph::accumulate_file(pcap);
}

int run_graph_list(const std::string& pcap, bool json) {
  graphguard::graph::AccumulateResult result = load_snapshot(pcap);
  if (json) {
    for (const auto& node : result.snapshot.nodes()) {
      ordered_json accesses = ordered_json::array();
      for (const auto& a : node.accesses) {
        auto [kind, action] = graphguard::policy::capability_pair(a.capability);
        accesses.push_back(
            {{"kind", graphguard::policy::kind_action_token(kind, action)},
             {"name", a.name}});
      }
      std::cout << ordered_json{{"type", "node"},
                                {"node", node.id.full()},
                                {"accesses", accesses}}
                << "\n";
    }
    for (const auto& p : result.snapshot.participants()) {
      ordered_json record{{"type", "participant"},
                          {"guid_prefix", p.guid_prefix.str()},
                          {"vendor", graphguard::wire::vendor_name(p.vendor_id)}};
      if (p.product_version) record["version"] = p.product_version->str();
      std::cout << record << "\n";
    }
    for (const auto& t : result.snapshot.unmapped_topics()) {
      std::cout << ordered_json{{"type", "unmapped"}, {"topic", t}} << "\n";
    }
  } else {
    std::cout << graphguard::graph::render(result.snapshot);
  }
  std::cerr << result.rtps_messages << " RTPS messages, "
            << result.non_rtps_datagrams << " other datagrams";
  if (!result.decode_errors.empty()) {
    std::cerr << ", " << result.decode_errors.size() << " decode errors";
  }
  std::cerr << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// policy
// ---------------------------------------------------------------------------

int run_policy_generate(const std::string& pcap,
                        const std::vector<std::string>& assignments,
                        const std::string& out) {
  std::map<std::string, std::string> assignment;
  for (const auto& a : assignments) {
    size_t eq = a.find('=');
    if (eq == std::string::npos) {
      throw graphguard::Error("--assign expects node=enclave, got '" + a +
                              "'");
    }
    assignment[a.substr(0, eq)] = a.substr(eq + 1);
  }
  graphguard::graph::AccumulateResult result = load_snapshot(pcap);
  graphguard::policy::SecurityPolicy policy =
      graphguard::policy::generate_policy(result.snapshot, assignment);
  write_file(out, graphguard::policy::save_policy(policy));
  std::cerr << "wrote " << out << " (" << policy.enclaves.size()
            << " enclaves)\n";
  return kOk;
}

int run_policy_refine(const std::string& policy_file,
                      const std::string& denials_file,
                      const std::string& out) {
  graphguard::policy::SecurityPolicy policy =
      graphguard::policy::load_policy_file(policy_file);
  std::ifstream log(denials_file, std::ios::binary);
  if (!log) throw graphguard::Error("cannot open " + denials_file);
  std::vector<graphguard::policy::Denial> denials =
      graphguard::policy::parse_denials(log);
  graphguard::policy::SecurityPolicy refined =
      graphguard::policy::refine(policy, denials);
  write_file(out, graphguard::policy::save_policy(refined));
  std::cerr << "applied " << denials.size() << " denial events, wrote " << out
            << "\n";
  return kOk;
}

int run_policy_audit(const std::string& pcap, const std::string& policy_file,
                     bool json) {
  graphguard::policy::SecurityPolicy policy =
      graphguard::policy::load_policy_file(policy_file);
  graphguard::graph::AccumulateResult result = load_snapshot(pcap);
  graphguard::policy::AuditReport report =
      graphguard::policy::audit(policy, result.snapshot);
  if (json) {
    for (const auto& u : report.uncovered) {
      std::cout << ordered_json{
                       {"type", "uncovered"},
                       {"node", u.node},
                       {"kind", graphguard::policy::kind_action_token(
                                    u.kind, u.action)},
                       {"name", u.name},
                       {"explicit_deny", u.explicitly_denied}}
                << "\n";
    }
    for (const auto& g : report.unobserved) {
      ordered_json actions = ordered_json::array();
      for (auto a : g.rule.actions) {
        actions.push_back(graphguard::policy::action_str(a));
      }
      std::cout << ordered_json{
                       {"type", "unobserved"},
                       {"node", g.node},
                       {"kind",
                        graphguard::policy::resource_kind_str(g.rule.kind)},
                       {"actions", actions},
                       {"pattern", g.rule.pattern},
                       {"via", g.via_common}}
                << "\n";
    }
    for (const auto& w : report.wildcards) {
      std::cout << ordered_json{
                       {"type", "wildcard"},
                       {"node", w.node},
                       {"kind",
                        graphguard::policy::resource_kind_str(w.rule.kind)},
                       {"pattern", w.rule.pattern},
                       {"matches", w.observed_matches}}
                << "\n";
    }
  } else {
    std::cout << report.render();
  }
  std::cerr << report.uncovered.size() << " uncovered, "
            << report.unobserved.size() << " unobserved grants\n";
  return report.clean() ? kOk : kFindings;
}

// ---------------------------------------------------------------------------
// monitor
// ---------------------------------------------------------------------------

int run_monitor(const std::string& pcap, const std::string& iface,
                const std::string& cve_db, bool json, bool verbose) {
  if (!iface.empty()) {
    throw graphguard::Error(
        "live capture is not built in; record the interface to a pcap and "
        "pass --pcap");
  }
  std::vector<graphguard::monitor::CveRecord> db =
      graphguard::monitor::load_cve_db_file(cve_db);
  std::cerr << "sniffing the DDS network...\n";
  graphguard::monitor::ScanResult result =
      graphguard::monitor::scan_file(pcap, std::move(db));
  if (json) {
    for (const auto& f : result.findings) {
      std::cout << ordered_json{{"type", "finding"},
                                {"host_id", f.guid_prefix.host_id()},
                                {"app_id", f.guid_prefix.app_id()},
                                {"instance_id", f.guid_prefix.instance_id()},
                                {"vendor", f.vendor_name},
                                {"version", f.version.str()},
                                {"cve_ids", f.cve_ids}}
                << "\n";
    }
    std::cout << ordered_json{{"type", "summary"},
                              {"participants", result.summary.participants},
                              {"vulnerable", result.summary.vulnerable},
                              {"unparsed", result.summary.unparsed}}
              << "\n";
  } else {
    std::cout << graphguard::monitor::render_report(result, verbose);
  }
  return result.findings.empty() ? kOk : kFindings;
}

// ---------------------------------------------------------------------------
// simnet
// ---------------------------------------------------------------------------

int run_simnet(const std::string& spec_file, const std::string& out) {
  std::ifstream in(spec_file, std::ios::binary);
  if (!in) throw graphguard::Error("cannot open " + spec_file);
  graphguard::simnet::SimSpec spec = graphguard::simnet::parse_spec(in);
  graphguard::Bytes pcap = graphguard::simnet::synthesize(spec);
  std::ofstream os(out, std::ios::binary | std::ios::trunc);
  if (!os) throw graphguard::Error("cannot write " + out);
  os.write(reinterpret_cast<const char*>(pcap.data()),
           static_cast<std::streamsize>(pcap.size()));
  std::cerr << "wrote " << out << " (" << spec.participants.size()
            << " participants)\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DDS computational-graph security toolkit"};
  app.require_subcommand(1);

  // keystore
  CLI::App* keystore = app.add_subcommand("keystore", "manage the keystore");
  keystore->require_subcommand(1);
  CLI::App* ks_init = keystore->add_subcommand("init", "create a keystore");
  std::string ks_root;
  bool shared_ca = false;
  bool rsa = false;
  std::vector<uint32_t> domains;
  ks_init->add_option("root", ks_root, "keystore root directory");
  ks_init->add_flag("--shared-ca", shared_ca,
                    "one CA key for identity and permissions");
  ks_init->add_flag("--rsa", rsa, "RSA-3072 keys instead of ECDSA P-256");
  ks_init->add_option("--domain", domains, "DDS domain id (repeatable)");

  CLI::App* ks_verify =
      keystore->add_subcommand("verify", "check keystore integrity");
  std::string ks_verify_root;
  bool ks_verify_json = false;
  ks_verify->add_option("root", ks_verify_root, "keystore root directory");
  ks_verify->add_flag("--json", ks_verify_json, "machine-readable output");

  // enclave
  CLI::App* enclave = app.add_subcommand("enclave", "manage enclaves");
  enclave->require_subcommand(1);
  CLI::App* enclave_create =
      enclave->add_subcommand("create", "issue material for one enclave");
  std::string ec_root, ec_path, ec_policy;
  enclave_create->add_option("root", ec_root, "keystore root directory");
  enclave_create->add_option("path", ec_path, "enclave path")->required();
  enclave_create->add_option("--policy", ec_policy, "policy XML file")
      ->required();

  // graph
  CLI::App* graph = app.add_subcommand("graph", "model the graph");
  graph->require_subcommand(1);
  CLI::App* graph_list =
      graph->add_subcommand("list", "nodes and resources from a capture");
  std::string gl_pcap;
  bool gl_json = false;
  graph_list->add_option("--pcap", gl_pcap, "capture file")->required();
  graph_list->add_flag("--json", gl_json, "machine-readable output");

  // policy
  CLI::App* policy = app.add_subcommand("policy", "work with policies");
  policy->require_subcommand(1);
  CLI::App* policy_generate = policy->add_subcommand(
      "generate", "least-privilege policy from a capture");
  std::string pg_pcap, pg_out;
  std::vector<std::string> pg_assign;
  policy_generate->add_option("--pcap", pg_pcap, "capture file")->required();
  policy_generate->add_option("--assign", pg_assign,
                              "node=enclave mapping (repeatable)");
  policy_generate->add_option("-o,--output", pg_out, "output policy file")
      ->required();

  CLI::App* policy_refine =
      policy->add_subcommand("refine", "fold denial events into a policy");
  std::string pr_policy, pr_denials, pr_out;
  policy_refine->add_option("policy", pr_policy, "policy XML file")
      ->required();
  policy_refine->add_option("--denials", pr_denials, "denial event log")
      ->required();
  policy_refine->add_option("-o,--output", pr_out, "output policy file")
      ->required();

  CLI::App* policy_audit =
      policy->add_subcommand("audit", "compare policy against a capture");
  std::string pa_pcap, pa_policy;
  bool pa_json = false;
  policy_audit->add_option("--pcap", pa_pcap, "capture file")->required();
  policy_audit->add_option("--policy", pa_policy, "policy XML file")
      ->required();
  policy_audit->add_flag("--json", pa_json, "machine-readable output");

  // monitor
  CLI::App* monitor =
      app.add_subcommand("monitor", "scan traffic for vulnerable participants");
  std::string mon_pcap, mon_iface, mon_db;
  bool mon_json = false;
  bool mon_verbose = false;
  monitor->add_option("--pcap", mon_pcap, "capture file");
  monitor->add_option("--iface", mon_iface, "interface name (not built in)");
  monitor->add_option("--cve-db", mon_db, "CVE database file")->required();
  monitor->add_flag("--json", mon_json, "machine-readable output");
  monitor->add_flag("--verbose", mon_verbose, "list all participants");

  // simnet
  CLI::App* simnet =
      app.add_subcommand("simnet", "synthesize discovery traffic");
  std::string sn_spec, sn_out;
  simnet->add_option("--spec", sn_spec, "scenario spec file")->required();
  simnet->add_option("-o,--output", sn_out, "output pcap file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kError;
  }

  try {
    if (ks_init->parsed()) {
      return run_keystore_init(ks_root, shared_ca, rsa, domains);
    }
    if (ks_verify->parsed()) {
      return run_keystore_verify(ks_verify_root, ks_verify_json);
    }
    if (enclave_create->parsed()) {
      return run_enclave_create(ec_root, ec_path, ec_policy);
    }
    if (graph_list->parsed()) return run_graph_list(gl_pcap, gl_json);
    if (policy_generate->parsed()) {
      return run_policy_generate(pg_pcap, pg_assign, pg_out);
    }
    if (policy_refine->parsed()) {
      return run_policy_refine(pr_policy, pr_denials, pr_out);
    }
    if (policy_audit->parsed()) {
      return run_policy_audit(pa_pcap, pa_policy, pa_json);
    }
    if (monitor->parsed()) {
      if (mon_pcap.empty() && mon_iface.empty()) {
        throw graphguard::Error("monitor needs --pcap or --iface");
      }
      return run_monitor(mon_pcap, mon_iface, mon_db, mon_json, mon_verbose);
    }
    if (simnet->parsed()) return run_simnet(sn_spec, sn_out);
  } catch (const graphguard::Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kError;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kError;
  }
  return kError;
}
