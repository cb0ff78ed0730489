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

// Keystore management: Identity and Permissions CAs, per-enclave identity
// material, governance and permissions documents, S/MIME detached
// signatures. Layout under the keystore root:
//
//   public/identity_ca.cert.pem      public/permissions_ca.cert.pem
//   private/identity_ca.key.pem     private/permissions_ca.key.pem
//   enclaves/governance.p7s
//   enclaves/<path...>/{cert.pem, key.pem, governance.p7s,
//                       permissions.xml, permissions.p7s}
//
// The private area is never world-readable. Mutating operations hold an
// advisory lock on <root>/.lock.

#ifndef GRAPHGUARD_PKI_HPP_
#define GRAPHGUARD_PKI_HPP_

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <openssl/asn1.h>
#include <openssl/bio.h>
#include <openssl/cms.h>
#include <openssl/err.h>
#include <openssl/evp.h>
#include <openssl/pem.h>
#include <openssl/x509.h>
#include <openssl/x509v3.h>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "graphguard/graph.hpp"
#include "graphguard/policy.hpp"
#include "graphguard/xml.hpp"

namespace graphguard::pki {

class AlreadyInitialized : public Error {
 public:
  explicit AlreadyInitialized(const std::string& what) : Error(what) {}
};

class IoFailure : public Error {
 public:
  explicit IoFailure(const std::string& what) : Error(what) {}
};

class UnknownEnclave : public Error {
 public:
  explicit UnknownEnclave(const std::string& what) : Error(what) {}
};

class ChainFailure : public Error {
 public:
  explicit ChainFailure(const std::string& what) : Error(what) {}
};

class KeyMissing : public Error {
 public:
  explicit KeyMissing(const std::string& what) : Error(what) {}
};

class SignatureInvalid : public Error {
 public:
  explicit SignatureInvalid(const std::string& what) : Error(what) {}
};

class EmptyEnclave : public Error {
 public:
  explicit EmptyEnclave(const std::string& what) : Error(what) {}
};

class OpensslFailure : public Error {
 public:
  explicit OpensslFailure(const std::string& what)
      : Error(what + ": " + collect()) {}

 private:
  static std::string collect() {
    std::string out;
    unsigned long code;
    while ((code = ERR_get_error()) != 0) {
      char buf[256];
      ERR_error_string_n(code, buf, sizeof(buf));
      if (!out.empty()) out += "; ";
      out += buf;
    }
    return out.empty() ? "no openssl error queue" : out;
  }
};

namespace detail {

struct OsslDeleter {
  void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
  void operator()(X509* p) const { X509_free(p); }
  void operator()(BIO* p) const { BIO_free(p); }
  void operator()(CMS_ContentInfo* p) const { CMS_ContentInfo_free(p); }
  void operator()(X509_STORE* p) const { X509_STORE_free(p); }
  void operator()(X509_STORE_CTX* p) const { X509_STORE_CTX_free(p); }
};

template <typename T>
using Handle = std::unique_ptr<T, OsslDeleter>;

using KeyHandle = Handle<EVP_PKEY>;
using CertHandle = Handle<X509>;

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void write_file(const std::filesystem::path& path,
                       const std::string& content, mode_t mode) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot write " + path.string());
  out << content;
  out.close();
  if (::chmod(path.c_str(), mode) != 0) {
    throw IoFailure("cannot set mode on " + path.string());
  }
}

/// Advisory exclusive lock on <root>/.lock, held for the object lifetime.
class ScopedLock {
 public:
  explicit ScopedLock(const std::filesystem::path& root) {
    fd_ = ::open((root / ".lock").c_str(), O_CREAT | O_RDWR, 0600);
    if (fd_ < 0) throw IoFailure("cannot open lock file in " + root.string());
    if (::flock(fd_, LOCK_EX) != 0) {
      ::close(fd_);
      fd_ = -1;
      throw IoFailure("cannot lock keystore " + root.string());
    }
  }
  ~ScopedLock() {
    if (fd_ >= 0) {
      ::flock(fd_, LOCK_UN);
      ::close(fd_);
    }
  }
  ScopedLock(const ScopedLock&) = delete;
  ScopedLock& operator=(const ScopedLock&) = delete;

 private:
  int fd_ = -1;
};

inline std::string bio_to_string(BIO* bio) {
  char* data = nullptr;
  long len = BIO_get_mem_data(bio, &data);
  return std::string(data, data + len);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Keys and certificates
// ---------------------------------------------------------------------------

enum class KeyAlgorithm { ec_p256, rsa_3072 };

inline detail::KeyHandle generate_key(KeyAlgorithm algorithm) {
  EVP_PKEY* key = nullptr;
  if (algorithm == KeyAlgorithm::ec_p256) {
    key = EVP_PKEY_Q_keygen(nullptr, nullptr, "EC", "P-256");
  } else {
    key = EVP_PKEY_Q_keygen(nullptr, nullptr, "RSA", static_cast<size_t>(3072));
  }
  if (!key) throw OpensslFailure("key generation failed");
  return detail::KeyHandle(key);
}

namespace detail {

inline void add_extension(X509* cert, X509* issuer, int nid,
                          const char* value) {
  X509V3_CTX ctx;
  X509V3_set_ctx_nodb(&ctx);
  X509V3_set_ctx(&ctx, issuer, cert, nullptr, nullptr, 0);
  X509_EXTENSION* ext = X509V3_EXT_conf_nid(nullptr, &ctx, nid,
                                            const_cast<char*>(value));
  if (!ext) throw OpensslFailure(std::string("extension ") + value);
  X509_add_ext(cert, ext, -1);
  X509_EXTENSION_free(ext);
}

inline void set_subject_cn(X509* cert, const std::string& cn,
                           bool also_issuer) {
  X509_NAME* name = X509_get_subject_name(cert);
  if (X509_NAME_add_entry_by_txt(
          name, "CN", MBSTRING_ASC,
          reinterpret_cast<const unsigned char*>(cn.c_str()), -1, -1, 0) != 1) {
    throw OpensslFailure("subject name");
  }
  if (also_issuer) X509_set_issuer_name(cert, name);
}

inline CertHandle new_cert_skeleton(EVP_PKEY* pubkey, long days) {
  CertHandle cert(X509_new());
  if (!cert) throw OpensslFailure("X509_new");
  X509_set_version(cert.get(), 2);
  uint64_t serial = 0;
  std::random_device rd;
  serial = (static_cast<uint64_t>(rd()) << 32) | rd();
  ASN1_INTEGER_set_uint64(X509_get_serialNumber(cert.get()), serial);
  // Backdated one day so small clock skew between hosts stays harmless.
  X509_gmtime_adj(X509_getm_notBefore(cert.get()), -86400L);
  X509_gmtime_adj(X509_getm_notAfter(cert.get()), days * 86400L);
  X509_set_pubkey(cert.get(), pubkey);
  return cert;
}

}  // namespace detail

/// Self-signed CA certificate for the given key.
inline detail::CertHandle make_ca_certificate(EVP_PKEY* key,
                                              const std::string& common_name,
                                              long days) {
  detail::CertHandle cert = detail::new_cert_skeleton(key, days);
  detail::set_subject_cn(cert.get(), common_name, true);
  detail::add_extension(cert.get(), cert.get(), NID_basic_constraints,
                        "critical,CA:TRUE");
  detail::add_extension(cert.get(), cert.get(), NID_key_usage,
                        "critical,keyCertSign,cRLSign,digitalSignature");
  detail::add_extension(cert.get(), cert.get(), NID_subject_key_identifier,
                        "hash");
  if (X509_sign(cert.get(), key, EVP_sha256()) == 0) {
    throw OpensslFailure("CA self-sign");
  }
  return cert;
}

/// Leaf certificate with subject CN = subject, signed by the CA.
inline detail::CertHandle issue_certificate(EVP_PKEY* ca_key, X509* ca_cert,
                                            EVP_PKEY* subject_key,
                                            const std::string& subject,
                                            long days) {
  detail::CertHandle cert = detail::new_cert_skeleton(subject_key, days);
  detail::set_subject_cn(cert.get(), subject, false);
  X509_set_issuer_name(cert.get(), X509_get_subject_name(ca_cert));
  detail::add_extension(cert.get(), ca_cert, NID_basic_constraints,
                        "critical,CA:FALSE");
  detail::add_extension(cert.get(), ca_cert, NID_key_usage,
                        "critical,digitalSignature");
  detail::add_extension(cert.get(), ca_cert, NID_subject_key_identifier,
                        "hash");
  if (X509_sign(cert.get(), ca_key, EVP_sha256()) == 0) {
    throw OpensslFailure("certificate issue");
  }
  return cert;
}

inline std::string key_to_pem(EVP_PKEY* key) {
  detail::Handle<BIO> bio(BIO_new(BIO_s_mem()));
  if (PEM_write_bio_PrivateKey(bio.get(), key, nullptr, nullptr, 0, nullptr,
                               nullptr) != 1) {
    throw OpensslFailure("private key PEM");
  }
  return detail::bio_to_string(bio.get());
}

inline std::string cert_to_pem(X509* cert) {
  detail::Handle<BIO> bio(BIO_new(BIO_s_mem()));
  if (PEM_write_bio_X509(bio.get(), cert) != 1) {
    throw OpensslFailure("certificate PEM");
  }
  return detail::bio_to_string(bio.get());
}

inline detail::KeyHandle key_from_pem(const std::string& pem) {
  detail::Handle<BIO> bio(
      BIO_new_mem_buf(pem.data(), static_cast<int>(pem.size())));
  EVP_PKEY* key = PEM_read_bio_PrivateKey(bio.get(), nullptr, nullptr, nullptr);
  if (!key) throw OpensslFailure("private key parse");
  return detail::KeyHandle(key);
}

inline detail::CertHandle cert_from_pem(const std::string& pem) {
  detail::Handle<BIO> bio(
      BIO_new_mem_buf(pem.data(), static_cast<int>(pem.size())));
  X509* cert = PEM_read_bio_X509(bio.get(), nullptr, nullptr, nullptr);
  if (!cert) throw OpensslFailure("certificate parse");
  return detail::CertHandle(cert);
}

/// True when the leaf chains to exactly this CA.
inline bool chains_to(X509* leaf, X509* ca) {
  detail::Handle<X509_STORE> store(X509_STORE_new());
  X509_STORE_add_cert(store.get(), ca);
  detail::Handle<X509_STORE_CTX> ctx(X509_STORE_CTX_new());
  if (X509_STORE_CTX_init(ctx.get(), store.get(), leaf, nullptr) != 1) {
    throw OpensslFailure("verify context");
  }
  return X509_verify_cert(ctx.get()) == 1;
}

// ---------------------------------------------------------------------------
// Detached signatures
// ---------------------------------------------------------------------------

/// Signs content into a self-contained S/MIME multipart envelope (content
/// plus detached CMS signature). The multipart reader reassembles the
/// content part with CRLF line endings, so the digest has to cover that
/// canonical form rather than the raw bytes; omitting CMS_BINARY makes the
/// signer canonicalize the same way.
inline std::string sign_detached(const std::string& content, EVP_PKEY* key,
                                 X509* cert) {
  if (!key) throw KeyMissing("no signing key");
  // CMS_STREAM defers finalization into SMIME_write_CMS, which digests the
  // detached data while writing; signing eagerly and writing afterwards
  // would finalize twice.
  constexpr unsigned int kFlags = CMS_DETACHED | CMS_STREAM;
  detail::Handle<BIO> in(
      BIO_new_mem_buf(content.data(), static_cast<int>(content.size())));
  detail::Handle<CMS_ContentInfo> cms(
      CMS_sign(cert, key, nullptr, in.get(), kFlags));
  if (!cms) throw OpensslFailure("CMS sign");
  detail::Handle<BIO> data(
      BIO_new_mem_buf(content.data(), static_cast<int>(content.size())));
  detail::Handle<BIO> out(BIO_new(BIO_s_mem()));
  if (SMIME_write_CMS(out.get(), cms.get(), data.get(), kFlags) != 1) {
    throw OpensslFailure("S/MIME write");
  }
  return detail::bio_to_string(out.get());
}

namespace detail {

inline std::string crlf_to_lf(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\r' && i + 1 < text.size() && text[i + 1] == '\n') continue;
    out.push_back(text[i]);
  }
  return out;
}

}  // namespace detail

/// Accepts exactly the envelopes signed by the given CA certificate; the
/// embedded certificate chain is ignored, so a signature from any other
/// key fails even if it carries a plausible chain. Returns the verified
/// content through *content when non-null, with the reader's CRLF line
/// endings folded back to LF so round trips compare equal.
inline bool verify_detached(const std::string& envelope, X509* ca_cert,
                            std::string* content = nullptr) {
  detail::Handle<BIO> in(
      BIO_new_mem_buf(envelope.data(), static_cast<int>(envelope.size())));
  BIO* raw_detached = nullptr;
  detail::Handle<CMS_ContentInfo> cms(SMIME_read_CMS(in.get(), &raw_detached));
  detail::Handle<BIO> detached(raw_detached);
  if (!cms || !detached) {
    ERR_clear_error();
    return false;
  }
  STACK_OF(X509)* signers = sk_X509_new_null();
  sk_X509_push(signers, ca_cert);
  detail::Handle<BIO> out(BIO_new(BIO_s_mem()));
  int ok = CMS_verify(cms.get(), signers, nullptr, detached.get(), out.get(),
                      CMS_NOINTERN | CMS_NO_SIGNER_CERT_VERIFY);
  sk_X509_free(signers);
  if (ok != 1) {
    ERR_clear_error();
    return false;
  }
  if (content) *content = detail::crlf_to_lf(detail::bio_to_string(out.get()));
  return true;
}

// ---------------------------------------------------------------------------
// Governance and permissions documents
// ---------------------------------------------------------------------------

namespace detail {

inline xml::Element text_element(const std::string& name,
                                 const std::string& text) {
  xml::Element el;
  el.name = name;
  el.text = text;
  return el;
}

inline xml::Element domains_element(const std::vector<uint32_t>& ids) {
  xml::Element domains;
  domains.name = "domains";
  for (uint32_t id : ids) {
    domains.children.push_back(text_element("id", std::to_string(id)));
  }
  return domains;
}

}  // namespace detail

/// Governance defaults: everything that can be encrypted is encrypted,
/// rtps is SIGN so locators stay routable, access control is on for both
/// directions and unauthenticated participants are rejected.
inline std::string generate_governance(const std::vector<uint32_t>& domains) {
  if (domains.empty()) throw Error("governance needs at least one domain id");
  xml::Element topic_rule;
  topic_rule.name = "topic_rule";
  topic_rule.children.push_back(detail::text_element("topic_expression", "*"));
  topic_rule.children.push_back(
      detail::text_element("enable_discovery_protection", "true"));
  topic_rule.children.push_back(
      detail::text_element("enable_liveliness_protection", "true"));
  topic_rule.children.push_back(
      detail::text_element("enable_read_access_control", "true"));
  topic_rule.children.push_back(
      detail::text_element("enable_write_access_control", "true"));
  topic_rule.children.push_back(
      detail::text_element("metadata_protection_kind", "ENCRYPT"));
  topic_rule.children.push_back(
      detail::text_element("data_protection_kind", "ENCRYPT"));

  xml::Element topic_rules;
  topic_rules.name = "topic_access_rules";
  topic_rules.children.push_back(std::move(topic_rule));

  xml::Element rule;
  rule.name = "domain_rule";
  rule.children.push_back(detail::domains_element(domains));
  rule.children.push_back(
      detail::text_element("allow_unauthenticated_participants", "false"));
  rule.children.push_back(
      detail::text_element("enable_join_access_control", "true"));
  rule.children.push_back(
      detail::text_element("discovery_protection_kind", "ENCRYPT"));
  rule.children.push_back(
      detail::text_element("liveliness_protection_kind", "ENCRYPT"));
  rule.children.push_back(detail::text_element("rtps_protection_kind", "SIGN"));
  rule.children.push_back(std::move(topic_rules));

  xml::Element rules;
  rules.name = "domain_access_rules";
  rules.children.push_back(std::move(rule));
  xml::Element root;
  root.name = "dds";
  root.children.push_back(std::move(rules));
  return xml::serialize(root);
}

/// DDS topic names granted by one profile rule, split into the publish
/// and subscribe sides of the wire exchange. Services and actions fan out
/// to their request/reply (and feedback/status) resources.
struct MangledGrant {
  std::set<std::string> publish;
  std::set<std::string> subscribe;
};

inline void mangle_rule_into(const policy::Rule& rule, const std::string& ns,
                             MangledGrant* grant) {
  std::string abs = policy::resolve_name(ns, rule.pattern);
  auto add_service = [&](const std::string& name, bool server) {
    std::string request = graph::mangle(graph::MangleKind::service_request,
                                        name);
    std::string reply = graph::mangle(graph::MangleKind::service_reply, name);
    if (server) {
      grant->subscribe.insert(request);
      grant->publish.insert(reply);
    } else {
      grant->publish.insert(request);
      grant->subscribe.insert(reply);
    }
  };
  for (policy::Action action : rule.actions) {
    switch (action) {
      case policy::Action::publish:
        grant->publish.insert(graph::mangle(graph::MangleKind::topic, abs));
        break;
      case policy::Action::subscribe:
        grant->subscribe.insert(graph::mangle(graph::MangleKind::topic, abs));
        break;
      case policy::Action::reply:
        add_service(abs, true);
        break;
      case policy::Action::request:
        add_service(abs, false);
        break;
      case policy::Action::call:
      case policy::Action::execute: {
        bool server = action == policy::Action::execute;
        graph::ActionResources res = graph::expand_action(abs);
        for (const auto& service : res.services) add_service(service, server);
        for (const auto& topic : res.topics) {
          std::string dds = graph::mangle(graph::MangleKind::topic, topic);
          if (server) {
            grant->publish.insert(dds);
          } else {
            grant->subscribe.insert(dds);
          }
        }
        break;
      }
    }
  }
}

namespace detail {

inline std::string format_utc(std::time_t t) {
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%S", &tm);
  return buf;
}

inline xml::Element criteria_element(const char* side,
                                     const std::set<std::string>& names) {
  xml::Element topics;
  topics.name = "topics";
  for (const auto& n : names) {
    topics.children.push_back(text_element("topic", n));
  }
  xml::Element el;
  el.name = side;
  el.children.push_back(std::move(topics));
  return el;
}

}  // namespace detail

/// Permissions document for one enclave: a single grant whose subject
/// matches the enclave certificate, ALLOW rules derived from the policy
/// profiles, DENY rules first, default DENY. The validity window is the
/// caller's contract with the certificate.
inline std::string generate_permissions(const policy::Enclave& enclave,
                                        const std::vector<uint32_t>& domains,
                                        std::time_t not_before,
                                        std::time_t not_after) {
  if (enclave.profiles.empty()) {
    throw EmptyEnclave("enclave " + enclave.path + " has no profiles");
  }
  if (not_after <= not_before) {
    throw Error("permissions validity window is empty");
  }
  MangledGrant allow;
  MangledGrant deny;
  for (const auto& profile : enclave.profiles) {
    for (const auto& rule : profile.rules) {
      mangle_rule_into(rule, profile.node_namespace,
                       rule.qualifier == policy::Qualifier::allow ? &allow
                                                                  : &deny);
    }
  }

  xml::Element grant;
  grant.name = "grant";
  std::string grant_name = enclave.path == "/" ? "root" : enclave.path.substr(1);
  for (auto& c : grant_name) {
    if (c == '/') c = '_';
  }
  grant.attributes.emplace_back("name", grant_name);
  grant.children.push_back(
      detail::text_element("subject_name", "CN=" + enclave.path));
  xml::Element validity;
  validity.name = "validity";
  validity.children.push_back(
      detail::text_element("not_before", detail::format_utc(not_before)));
  validity.children.push_back(
      detail::text_element("not_after", detail::format_utc(not_after)));
  grant.children.push_back(std::move(validity));

  auto rule_element = [&](const char* name, const MangledGrant& g) {
    xml::Element el;
    el.name = name;
    el.children.push_back(detail::domains_element(domains));
    if (!g.publish.empty()) {
      el.children.push_back(detail::criteria_element("publish", g.publish));
    }
    if (!g.subscribe.empty()) {
      el.children.push_back(detail::criteria_element("subscribe", g.subscribe));
    }
    return el;
  };
  // DENY before ALLOW: DDS permissions evaluate rules in order, and a
  // grant must never loosen what the policy explicitly denied.
  if (!deny.publish.empty() || !deny.subscribe.empty()) {
    grant.children.push_back(rule_element("deny_rule", deny));
  }
  if (!allow.publish.empty() || !allow.subscribe.empty()) {
    grant.children.push_back(rule_element("allow_rule", allow));
  }
  grant.children.push_back(detail::text_element("default", "DENY"));

  xml::Element permissions;
  permissions.name = "permissions";
  permissions.children.push_back(std::move(grant));
  xml::Element root;
  root.name = "dds";
  root.children.push_back(std::move(permissions));
  return xml::serialize(root);
}

// ---------------------------------------------------------------------------
// Keystore
// ---------------------------------------------------------------------------

struct KeystoreOptions {
  KeyAlgorithm algorithm = KeyAlgorithm::ec_p256;
  /// One key pair serving as both CAs, for tooling that expects a single
  /// CA. Distinct CAs remain the default.
  bool shared_ca = false;
  long validity_days = 3650;
  std::vector<uint32_t> domains = {0};
};

struct VerifyReport {
  std::vector<std::string> failures;
  size_t enclaves_checked = 0;

  bool ok() const { return failures.empty(); }
};

class Keystore {
 public:
  /// Creates the layout, both CAs and the signed governance document.
  /// The root must not exist yet or must be an empty directory.
  static Keystore init(const std::filesystem::path& root,
                       const KeystoreOptions& options = {}) {
    namespace fs = std::filesystem;
    if (fs::exists(root) && !fs::is_empty(root)) {
      throw AlreadyInitialized(root.string() + " is not empty");
    }
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) throw IoFailure("cannot create " + root.string());
    detail::ScopedLock lock(root);

    fs::create_directories(root / "public");
    fs::create_directories(root / "private");
    fs::create_directories(root / "enclaves");
    fs::permissions(root / "private", fs::perms::owner_all,
                    fs::perm_options::replace);

    detail::KeyHandle identity_key = generate_key(options.algorithm);
    detail::CertHandle identity_cert = make_ca_certificate(
        identity_key.get(), "Identity CA", options.validity_days);
    detail::KeyHandle permissions_key;
    detail::CertHandle permissions_cert;
    if (options.shared_ca) {
      permissions_key = key_from_pem(key_to_pem(identity_key.get()));
      permissions_cert = cert_from_pem(cert_to_pem(identity_cert.get()));
    } else {
      permissions_key = generate_key(options.algorithm);
      permissions_cert = make_ca_certificate(
          permissions_key.get(), "Permissions CA", options.validity_days);
    }

    detail::write_file(root / "public" / "identity_ca.cert.pem",
                       cert_to_pem(identity_cert.get()), 0644);
    detail::write_file(root / "public" / "permissions_ca.cert.pem",
                       cert_to_pem(permissions_cert.get()), 0644);
    detail::write_file(root / "private" / "identity_ca.key.pem",
                       key_to_pem(identity_key.get()), 0600);
    detail::write_file(root / "private" / "permissions_ca.key.pem",
                       key_to_pem(permissions_key.get()), 0600);

    std::string governance = generate_governance(options.domains);
    detail::write_file(
        root / "enclaves" / "governance.p7s",
        sign_detached(governance, permissions_key.get(),
                      permissions_cert.get()),
        0644);

    Keystore ks(root);
    ks.options_ = options;
    return ks;
  }

  /// Opens an initialized keystore; fails when the layout is incomplete.
  /// The key algorithm and domain list are recovered from the stored
  /// material so later enclaves stay consistent with the CAs.
  static Keystore open(const std::filesystem::path& root) {
    for (const char* required :
         {"public/identity_ca.cert.pem", "public/permissions_ca.cert.pem",
          "private/identity_ca.key.pem", "private/permissions_ca.key.pem",
          "enclaves/governance.p7s"}) {
      if (!std::filesystem::exists(root / required)) {
        throw IoFailure(root.string() + " is not an initialized keystore (" +
                        required + " missing)");
      }
    }
    Keystore ks(root);
    try {
      detail::KeyHandle ca_key = key_from_pem(
          detail::read_file(root / "private" / "identity_ca.key.pem"));
      ks.options_.algorithm = EVP_PKEY_get_base_id(ca_key.get()) == EVP_PKEY_RSA
                                  ? KeyAlgorithm::rsa_3072
                                  : KeyAlgorithm::ec_p256;
      detail::CertHandle permissions_cert = cert_from_pem(
          detail::read_file(root / "public" / "permissions_ca.cert.pem"));
      std::string governance;
      if (verify_detached(
              detail::read_file(root / "enclaves" / "governance.p7s"),
              permissions_cert.get(), &governance)) {
        std::vector<uint32_t> ids;
        xml::Element doc = xml::parse(governance);
        if (const xml::Element* rules = doc.child("domain_access_rules")) {
          for (const auto& rule : rules->children) {
            if (const xml::Element* domains = rule.child("domains")) {
              for (const xml::Element* id : domains->children_named("id")) {
                ids.push_back(static_cast<uint32_t>(std::stoul(id->text)));
              }
            }
          }
        }
        if (!ids.empty()) ks.options_.domains = ids;
      }
    } catch (const Error&) {
      // Damaged metadata surfaces through verify(); defaults suffice here.
    }
    return ks;
  }

  const std::filesystem::path& root() const { return root_; }

  std::filesystem::path enclave_dir(const std::string& enclave_path) const {
    std::filesystem::path dir = root_ / "enclaves";
    std::string trimmed =
        enclave_path.size() > 1 ? enclave_path.substr(1) : "";
    if (!trimmed.empty()) dir /= trimmed;
    return dir;
  }

  /// Issues identity material for one enclave of the policy and writes
  /// the five artifact files under enclaves/<path>.
  void create_enclave(const std::string& enclave_path,
                      const policy::SecurityPolicy& policy) const {
    namespace fs = std::filesystem;
    detail::ScopedLock lock(root_);
    const policy::Enclave* enclave = policy::find_enclave(policy, enclave_path);
    if (!enclave) {
      throw UnknownEnclave("enclave " + enclave_path +
                           " is not in the policy");
    }
    if (enclave->profiles.empty()) {
      throw EmptyEnclave("enclave " + enclave_path + " has no profiles");
    }

    detail::KeyHandle identity_key =
        key_from_pem(detail::read_file(root_ / "private" /
                                       "identity_ca.key.pem"));
    detail::CertHandle identity_cert =
        cert_from_pem(detail::read_file(root_ / "public" /
                                        "identity_ca.cert.pem"));
    detail::KeyHandle permissions_key =
        key_from_pem(detail::read_file(root_ / "private" /
                                       "permissions_ca.key.pem"));
    detail::CertHandle permissions_cert =
        cert_from_pem(detail::read_file(root_ / "public" /
                                        "permissions_ca.cert.pem"));

    detail::KeyHandle key = generate_key(options_.algorithm);
    detail::CertHandle cert =
        issue_certificate(identity_key.get(), identity_cert.get(), key.get(),
                          enclave_path, options_.validity_days);
    if (!chains_to(cert.get(), identity_cert.get())) {
      throw ChainFailure("issued certificate does not chain to Identity CA");
    }

    // Permissions validity = the certificate window, so containment in
    // the signing cert's lifetime holds by construction.
    std::time_t not_before = asn1_to_time(X509_get0_notBefore(cert.get()));
    std::time_t not_after = asn1_to_time(X509_get0_notAfter(cert.get()));
    std::string permissions = generate_permissions(*enclave, options_.domains,
                                                   not_before, not_after);

    fs::path dir = enclave_dir(enclave_path);
    fs::create_directories(dir);
    detail::write_file(dir / "cert.pem", cert_to_pem(cert.get()), 0644);
    detail::write_file(dir / "key.pem", key_to_pem(key.get()), 0600);
    detail::write_file(dir / "governance.p7s",
                       detail::read_file(root_ / "enclaves" /
                                         "governance.p7s"),
                       0644);
    detail::write_file(dir / "permissions.xml", permissions, 0644);
    detail::write_file(
        dir / "permissions.p7s",
        sign_detached(permissions, permissions_key.get(),
                      permissions_cert.get()),
        0644);
  }

  /// Checks layout, chains, signatures, validity windows and private
  /// file modes. Failures are report entries, never exceptions.
  VerifyReport verify() const {
    namespace fs = std::filesystem;
    VerifyReport report;
    auto fail = [&](const std::string& category, const std::string& what) {
      report.failures.push_back(category + " " + what);
    };

    detail::CertHandle identity_cert, permissions_cert;
    try {
      identity_cert = cert_from_pem(
          detail::read_file(root_ / "public" / "identity_ca.cert.pem"));
      permissions_cert = cert_from_pem(
          detail::read_file(root_ / "public" / "permissions_ca.cert.pem"));
    } catch (const Error& err) {
      fail("LAYOUT", err.what());
      return report;
    }

    for (const char* key_file :
         {"private/identity_ca.key.pem", "private/permissions_ca.key.pem"}) {
      fs::path path = root_ / key_file;
      struct ::stat st{};
      if (::stat(path.c_str(), &st) != 0) {
        fail("LAYOUT", path.string() + " missing");
      } else if ((st.st_mode & 0044) != 0) {
        fail("MODE", path.string() + " is group/world readable");
      }
    }

    try {
      std::string governance =
          detail::read_file(root_ / "enclaves" / "governance.p7s");
      if (!verify_detached(governance, permissions_cert.get())) {
        fail("SIGNATURE", "enclaves/governance.p7s does not verify");
      }
    } catch (const Error& err) {
      fail("LAYOUT", err.what());
    }

    std::time_t now = std::time(nullptr);
    // The "/" enclave lives directly in enclaves/, so that directory is a
    // candidate too, not just its children.
    std::vector<fs::path> candidates = {root_ / "enclaves"};
    for (const auto& entry :
         fs::recursive_directory_iterator(root_ / "enclaves")) {
      if (entry.is_directory()) candidates.push_back(entry.path());
    }
    for (const auto& dir : candidates) {
      if (!fs::exists(dir / "cert.pem")) continue;
      ++report.enclaves_checked;
      std::string where = fs::relative(dir, root_ / "enclaves").string();
      try {
        detail::CertHandle cert =
            cert_from_pem(detail::read_file(dir / "cert.pem"));
        detail::KeyHandle key =
            key_from_pem(detail::read_file(dir / "key.pem"));
        if (!chains_to(cert.get(), identity_cert.get())) {
          fail("CHAIN", where + ": cert does not chain to Identity CA");
        }
        if (X509_check_private_key(cert.get(), key.get()) != 1) {
          fail("KEY", where + ": key does not match cert");
        }
        if (asn1_to_time(X509_get0_notAfter(cert.get())) < now) {
          fail("EXPIRED", where + ": certificate expired");
        }
        struct ::stat st{};
        if (::stat((dir / "key.pem").c_str(), &st) == 0 &&
            (st.st_mode & 0044) != 0) {
          fail("MODE", where + ": key.pem is group/world readable");
        }

        std::string permissions_xml =
            detail::read_file(dir / "permissions.xml");
        std::string envelope =
            detail::read_file(dir / "permissions.p7s");
        std::string signed_content;
        if (!verify_detached(envelope, permissions_cert.get(),
                             &signed_content)) {
          fail("SIGNATURE", where + ": permissions.p7s does not verify");
        } else if (signed_content != permissions_xml) {
          fail("SIGNATURE",
               where + ": permissions.xml differs from the signed copy");
        }
        check_permissions_window(permissions_xml, cert.get(), where, &report);

        std::string governance_copy =
            detail::read_file(dir / "governance.p7s");
        if (!verify_detached(governance_copy, permissions_cert.get())) {
          fail("SIGNATURE", where + ": governance.p7s does not verify");
        }
      } catch (const Error& err) {
        fail("LAYOUT", where + ": " + err.what());
      }
    }
    return report;
  }

 private:
  explicit Keystore(std::filesystem::path root) : root_(std::move(root)) {}

  static std::time_t asn1_to_time(const ASN1_TIME* at) {
    std::tm tm{};
    if (ASN1_TIME_to_tm(at, &tm) != 1) {
      throw OpensslFailure("ASN1 time conversion");
    }
    return timegm(&tm);
  }

  static std::optional<std::time_t> parse_utc(const std::string& text) {
    std::tm tm{};
    if (sscanf(text.c_str(), "%d-%d-%dT%d:%d:%d", &tm.tm_year, &tm.tm_mon,
               &tm.tm_mday, &tm.tm_hour, &tm.tm_min, &tm.tm_sec) != 6) {
      return std::nullopt;
    }
    tm.tm_year -= 1900;
    tm.tm_mon -= 1;
    return timegm(&tm);
  }

  static void check_permissions_window(const std::string& permissions_xml,
                                       X509* cert, const std::string& where,
                                       VerifyReport* report) {
    try {
      xml::Element root = xml::parse(permissions_xml);
      const xml::Element* perms = root.child("permissions");
      const xml::Element* grant = perms ? perms->child("grant") : nullptr;
      const xml::Element* validity = grant ? grant->child("validity") : nullptr;
      if (!validity) {
        report->failures.push_back("PERMS " + where +
                                   ": permissions.xml has no validity");
        return;
      }
      auto nb = validity->child("not_before");
      auto na = validity->child("not_after");
      auto begin = nb ? parse_utc(nb->text) : std::nullopt;
      auto end = na ? parse_utc(na->text) : std::nullopt;
      if (!begin || !end) {
        report->failures.push_back("PERMS " + where +
                                   ": unparseable validity timestamps");
        return;
      }
      std::time_t now = std::time(nullptr);
      if (*end < now) {
        report->failures.push_back("EXPIRED " + where +
                                   ": permissions validity ended");
      }
      if (*end > asn1_to_time(X509_get0_notAfter(cert)) ||
          *begin < asn1_to_time(X509_get0_notBefore(cert))) {
        report->failures.push_back(
            "PERMS " + where +
            ": permissions validity exceeds the certificate window");
      }
    } catch (const Error& err) {
      report->failures.push_back("PERMS " + where + ": " + err.what());
    }
  }

  std::filesystem::path root_;
  KeystoreOptions options_;
};

}  // namespace graphguard::pki

#endif  // GRAPHGUARD_PKI_HPP_
