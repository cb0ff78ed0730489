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

// Passive vulnerability monitor: fingerprints DDS participants from
// discovery traffic (vendor id plus product version) and matches the
// fingerprints against a line-oriented CVE database.

#ifndef GRAPHGUARD_MONITOR_HPP_
#define GRAPHGUARD_MONITOR_HPP_

#include <array>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
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

namespace graphguard::monitor {

class BadRecord : public Error {
 public:
  BadRecord(int line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// ---------------------------------------------------------------------------
// Version predicates
// ---------------------------------------------------------------------------

/// Predicate over 4-tuple product versions. Grammar:
///   *            any version
///   ==V  <=V  >=V  <V  >V    comparison against a version pattern
///   A-B          closed range
/// A version pattern is 1 to 4 dot-separated components; '*' components
/// are allowed in trailing positions only, and omitted components behave
/// like '*'. A wildcard names the whole series it abbreviates: it expands
/// toward whichever bound keeps the series inside the predicate (maximum
/// for <= and range ends, minimum for >= and range starts) and excludes
/// the series for the strict comparisons.
class VersionPredicate {
 public:
  enum class Kind { any, eq, le, ge, lt, gt, range };

  static VersionPredicate parse(const std::string& text) {
    VersionPredicate p;
    if (text == "*") {
      p.kind_ = Kind::any;
      return p;
    }
    auto starts = [&](const char* prefix) {
      return text.rfind(prefix, 0) == 0;
    };
    if (starts("==")) {
      p.kind_ = Kind::eq;
      p.a_ = parse_pattern(text.substr(2));
    } else if (starts("<=")) {
      p.kind_ = Kind::le;
      p.a_ = parse_pattern(text.substr(2));
    } else if (starts(">=")) {
      p.kind_ = Kind::ge;
      p.a_ = parse_pattern(text.substr(2));
    } else if (starts("<")) {
      p.kind_ = Kind::lt;
      p.a_ = parse_pattern(text.substr(1));
    } else if (starts(">")) {
      p.kind_ = Kind::gt;
      p.a_ = parse_pattern(text.substr(1));
    } else if (size_t dash = text.find('-'); dash != std::string::npos) {
      p.kind_ = Kind::range;
      p.a_ = parse_pattern(text.substr(0, dash));
      p.b_ = parse_pattern(text.substr(dash + 1));
    } else {
      throw Error("unrecognized version predicate '" + text + "'");
    }
    return p;
  }

  bool matches(const discovery::ProductVersion& v) const {
    std::array<uint32_t, 4> t = {v.major, v.minor, v.release, v.revision};
    switch (kind_) {
      case Kind::any:
        return true;
      case Kind::eq:
        for (size_t i = 0; i < 4; ++i) {
          if (a_[i] && *a_[i] != t[i]) return false;
        }
        return true;
      case Kind::le: return t <= fill(a_, kMax);
      case Kind::ge: return t >= fill(a_, 0);
      case Kind::lt: return t < fill(a_, 0);
      case Kind::gt: return t > fill(a_, kMax);
      case Kind::range:
        return t >= fill(a_, 0) && t <= fill(b_, kMax);
    }
    return false;
  }

  Kind kind() const { return kind_; }

 private:
  using Pattern = std::array<std::optional<uint32_t>, 4>;
  static constexpr uint32_t kMax = std::numeric_limits<uint32_t>::max();

  static Pattern parse_pattern(const std::string& text) {
    Pattern out{};
    if (text.empty()) throw Error("empty version pattern");
    size_t part = 0;
    size_t at = 0;
    bool saw_wildcard = false;
    while (at <= text.size()) {
      size_t dot = text.find('.', at);
      if (dot == std::string::npos) dot = text.size();
      std::string piece = text.substr(at, dot - at);
      if (part >= 4) throw Error("version '" + text + "' has too many parts");
      if (piece == "*") {
        saw_wildcard = true;
      } else {
        if (saw_wildcard) {
          throw Error("version '" + text +
                      "': numeric component after a wildcard");
        }
        if (piece.empty() ||
            piece.find_first_not_of("0123456789") != std::string::npos) {
          throw Error("bad version component '" + piece + "' in '" + text +
                      "'");
        }
        out[part] = static_cast<uint32_t>(std::stoul(piece));
      }
      ++part;
      if (dot == text.size()) break;
      at = dot + 1;
    }
    return out;
  }

  static std::array<uint32_t, 4> fill(const Pattern& p, uint32_t wildcard) {
    std::array<uint32_t, 4> out{};
    for (size_t i = 0; i < 4; ++i) out[i] = p[i] ? *p[i] : wildcard;
    return out;
  }

  Kind kind_ = Kind::any;
  Pattern a_{};
  Pattern b_{};
};

// ---------------------------------------------------------------------------
// CVE database
// ---------------------------------------------------------------------------

struct CveRecord {
  uint16_t vendor_id = 0;
  std::string product;
  VersionPredicate affected;
  std::vector<std::string> cve_ids;
};

/// Line format: `vendor_hex product predicate cve_id[,cve_id...]`.
/// The predicate may contain spaces ("<= 6.1.0.*"); everything between
/// the product and the final token is joined into one predicate string.
inline std::vector<CveRecord> load_cve_db(std::istream& in) {
  std::vector<CveRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (size_t hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    std::istringstream ls(line);
    std::vector<std::string> tokens;
    std::string token;
    while (ls >> token) tokens.push_back(token);
    if (tokens.empty()) continue;
    if (tokens.size() < 4) {
      throw BadRecord(line_no,
                      "expected 'vendor product predicate cve[,cve...]'");
    }
    CveRecord record;
    try {
      unsigned long vendor = std::stoul(tokens[0], nullptr, 16);
      if (vendor > 0xffff) throw Error("vendor id out of range");
      record.vendor_id = static_cast<uint16_t>(vendor);
    } catch (const std::exception&) {
      throw BadRecord(line_no, "bad vendor id '" + tokens[0] + "'");
    }
    record.product = tokens[1];
    std::string predicate;
    for (size_t i = 2; i + 1 < tokens.size(); ++i) predicate += tokens[i];
    try {
      record.affected = VersionPredicate::parse(predicate);
    } catch (const Error& err) {
      throw BadRecord(line_no, err.what());
    }
    std::istringstream cves(tokens.back());
    std::string cve;
    while (std::getline(cves, cve, ',')) {
      if (!cve.empty()) record.cve_ids.push_back(cve);
    }
    if (record.cve_ids.empty()) {
      throw BadRecord(line_no, "record lists no CVE ids");
    }
    out.push_back(std::move(record));
  }
  return out;
}

inline std::vector<CveRecord> load_cve_db(const std::string& text) {
  std::istringstream in(text);
  return load_cve_db(in);
}

inline std::vector<CveRecord> load_cve_db_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open CVE database " + path);
  return load_cve_db(in);
}

// ---------------------------------------------------------------------------
// Scanning
// ---------------------------------------------------------------------------

/// Everything learned about one participant.
struct Sighting {
  wire::GuidPrefix guid_prefix;
  wire::VendorId vendor_id;
  std::optional<discovery::ProductVersion> version;
  uint64_t first_seen_us = 0;
  uint64_t last_seen_us = 0;
  size_t announcements = 0;
};

struct Finding {
  wire::GuidPrefix guid_prefix;
  wire::VendorId vendor_id;
  std::string vendor_name;
  discovery::ProductVersion version;
  std::vector<std::string> cve_ids;
  uint64_t first_seen_us = 0;
  uint64_t last_seen_us = 0;
};

struct ScanSummary {
  size_t datagrams = 0;
  size_t rtps_messages = 0;
  size_t unparsed = 0;
  size_t participants = 0;
  size_t vulnerable = 0;
};

/// One capture producer feeds one Scanner; the scanner owns all analysis
/// state. A finding is emitted the moment a (participant, vendor,
/// version) fingerprint first completes with at least one CVE match,
/// and that fingerprint never reports again.
class Scanner {
 public:
  explicit Scanner(std::vector<CveRecord> db) : db_(std::move(db)) {}

  /// Returns a finding when this datagram completes a new vulnerable
  /// fingerprint.
  std::optional<Finding> feed(uint64_t timestamp_us, BytesView payload) {
    ++summary_.datagrams;
    wire::RtpsMessage msg;
    try {
      msg = wire::parse_message(payload);
    } catch (const Error&) {
      ++summary_.unparsed;
      return std::nullopt;
    }
    ++summary_.rtps_messages;
    discovery::ParticipantResult result = discovery::decode_participant(msg);
    if (!result.announcement) return std::nullopt;
    const discovery::ParticipantAnnouncement& ann = *result.announcement;

    Sighting& s = sightings_[ann.guid_prefix];
    if (s.announcements == 0) {
      s.guid_prefix = ann.guid_prefix;
      s.first_seen_us = timestamp_us;
    }
    ++s.announcements;
    s.last_seen_us = timestamp_us;
    s.vendor_id = ann.vendor_id;
    if (ann.product_version) s.version = ann.product_version;
    if (!s.version) return std::nullopt;

    Fingerprint fp{ann.guid_prefix, s.vendor_id.value, *s.version};
    if (reported_.count(fp)) return std::nullopt;
    std::vector<std::string> cves = matching_cves(s.vendor_id.value,
                                                  *s.version);
    if (cves.empty()) return std::nullopt;
    reported_.insert(fp);
    Finding finding;
    finding.guid_prefix = s.guid_prefix;
    finding.vendor_id = s.vendor_id;
    finding.vendor_name = wire::vendor_name(s.vendor_id);
    finding.version = *s.version;
    finding.cve_ids = std::move(cves);
    finding.first_seen_us = s.first_seen_us;
    finding.last_seen_us = s.last_seen_us;
    findings_.push_back(finding);
    return finding;
  }

  const std::vector<Finding>& findings() const { return findings_; }

  std::vector<Sighting> sightings() const {
    std::vector<Sighting> out;
    for (const auto& [prefix, s] : sightings_) out.push_back(s);
    return out;
  }

  ScanSummary summary() const {
    ScanSummary s = summary_;
    s.participants = sightings_.size();
    std::set<std::array<uint8_t, 12>> vulnerable;
    for (const auto& f : findings_) vulnerable.insert(f.guid_prefix.bytes);
    s.vulnerable = vulnerable.size();
    return s;
  }

 private:
  struct Fingerprint {
    wire::GuidPrefix prefix;
    uint16_t vendor;
    discovery::ProductVersion version;
    auto operator<=>(const Fingerprint&) const = default;
  };

  /// CVE ids in database order, deduplicated, from records whose vendor
  /// and predicate both accept the fingerprint.
  std::vector<std::string> matching_cves(
      uint16_t vendor, const discovery::ProductVersion& version) const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& record : db_) {
      if (record.vendor_id != vendor) continue;
      if (!record.affected.matches(version)) continue;
      for (const auto& cve : record.cve_ids) {
        if (seen.insert(cve).second) out.push_back(cve);
      }
    }
    return out;
  }

  std::vector<CveRecord> db_;
  std::map<wire::GuidPrefix, Sighting> sightings_;
  std::set<Fingerprint> reported_;
  std::vector<Finding> findings_;
  ScanSummary summary_;
};

struct ScanResult {
  std::vector<Finding> findings;
  std::vector<Sighting> sightings;
  ScanSummary summary;
};

inline ScanResult scan_capture(pcap::PcapReader& reader,
                               std::vector<CveRecord> db) {
  Scanner scanner(std::move(db));
  for (const auto& dgram : reader.read_all()) {
    scanner.feed(dgram.timestamp_us, dgram.payload);
  }
  return ScanResult{scanner.findings(), scanner.sightings(),
                    scanner.summary()};
}

inline ScanResult scan_file(const std::string& path,
                            std::vector<CveRecord> db) {
  pcap::PcapReader reader(path);
  return scan_capture(reader, std::move(db));
}

// ---------------------------------------------------------------------------
// Report rendering
// ---------------------------------------------------------------------------

/// The indented block layout, one per finding:
///
///   Vulnerable DDS endpoint found (hostId=..., appId=..., instanceId=...)
///       - vendorId: <vendor display name>
///       - version: <a.b.c.d>
///       - CVE IDs:
///           * CVE-....
inline std::string render_finding(const Finding& f) {
  std::ostringstream os;
  os << "Vulnerable DDS endpoint found (hostId="
     << f.guid_prefix.host_id() << ", appId=" << f.guid_prefix.app_id()
     << ", instanceId=" << f.guid_prefix.instance_id() << ")\n";
  os << "    - vendorId: " << f.vendor_name << "\n";
  os << "    - version: " << f.version.str() << "\n";
  os << "    - CVE IDs:\n";
  for (const auto& cve : f.cve_ids) {
    os << "        * " << cve << "\n";
  }
  return os.str();
}

inline std::string render_report(const ScanResult& result,
                                 bool verbose = false) {
  std::ostringstream os;
  for (const auto& f : result.findings) os << render_finding(f);
  if (verbose) {
    for (const auto& s : result.sightings) {
      os << "Participant (hostId=" << s.guid_prefix.host_id()
         << ", appId=" << s.guid_prefix.app_id()
         << ", instanceId=" << s.guid_prefix.instance_id() << ")"
         << " vendorId=" << wire::vendor_name(s.vendor_id);
      if (s.version) os << " version=" << s.version->str();
      os << " announcements=" << s.announcements << "\n";
    }
  }
  const ScanSummary& sum = result.summary;
  os << sum.participants << " participants, " << sum.vulnerable
     << " vulnerable, " << sum.unparsed << " unparsed datagrams\n";
  return os.str();
}

}  // namespace graphguard::monitor

#endif  // GRAPHGUARD_MONITOR_HPP_
