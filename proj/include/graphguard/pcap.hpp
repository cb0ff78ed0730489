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

#ifndef GRAPHGUARD_PCAP_HPP_
#define GRAPHGUARD_PCAP_HPP_

#include <arpa/inet.h>

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "graphguard/bytes.hpp"

namespace graphguard::pcap {

class NotPcap : public Error {
 public:
  explicit NotPcap(const std::string& what) : Error(what) {}
};

/// One UDP datagram lifted out of a capture. Addresses render as
/// "ip:port" ("[ip]:port" for IPv6).
struct UdpDatagram {
  uint64_t timestamp_us = 0;
  std::string src;
  std::string dst;
  Bytes payload;
};

/// Skip-and-continue notes from a capture pass.
struct CaptureLog {
  size_t frames = 0;
  size_t udp_datagrams = 0;
  size_t non_udp_skipped = 0;
  size_t corrupt_records = 0;
  std::vector<std::string> notes;

  void corrupt(std::string note) {
    ++corrupt_records;
    notes.push_back(std::move(note));
  }
};

namespace detail {

inline std::string ipv4_str(const uint8_t* addr, uint16_t port) {
  char buf[INET_ADDRSTRLEN];
  ::inet_ntop(AF_INET, addr, buf, sizeof buf);
  return std::string(buf) + ":" + std::to_string(port);
}

inline std::string ipv6_str(const uint8_t* addr, uint16_t port) {
  char buf[INET6_ADDRSTRLEN];
  ::inet_ntop(AF_INET6, addr, buf, sizeof buf);
  return "[" + std::string(buf) + "]:" + std::to_string(port);
}

/// Decodes one IP packet (v4 or v6) down to its UDP payload. Returns
/// nothing for non-UDP traffic and for fragments.
inline std::optional<UdpDatagram> decode_ip(BytesView packet,
                                            uint64_t timestamp_us,
                                            CaptureLog& log) {
  try {
    ByteReader r(packet);
    uint8_t first = r.u8();
    uint8_t ip_version = first >> 4;
    if (ip_version == 4) {
      size_t ihl = (first & 0x0f) * 4u;
      if (ihl < 20) {
        log.corrupt("IPv4 header length below 20 octets");
        return std::nullopt;
      }
      r.skip(1);  // DSCP/ECN
      uint16_t total_len = r.u16(Endian::big);
      r.skip(2);  // identification
      uint16_t frag = r.u16(Endian::big);
      if ((frag & 0x2000) || (frag & 0x1fff)) {
        ++log.non_udp_skipped;  // no reassembly
        return std::nullopt;
      }
      r.skip(1);  // TTL
      uint8_t protocol = r.u8();
      r.skip(2);  // checksum
      BytesView src = r.view(4);
      BytesView dst = r.view(4);
      if (protocol != 17) {
        ++log.non_udp_skipped;
        return std::nullopt;
      }
      r.skip(ihl - 20);
      if (total_len < ihl + 8) {
        log.corrupt("IPv4 total length too small for UDP");
        return std::nullopt;
      }
      uint16_t src_port = r.u16(Endian::big);
      uint16_t dst_port = r.u16(Endian::big);
      uint16_t udp_len = r.u16(Endian::big);
      r.skip(2);  // checksum
      if (udp_len < 8) {
        log.corrupt("UDP length below header size");
        return std::nullopt;
      }
      size_t payload_len = std::min<size_t>(udp_len - 8, r.remaining());
      UdpDatagram d;
      d.timestamp_us = timestamp_us;
      d.src = ipv4_str(src.data(), src_port);
      d.dst = ipv4_str(dst.data(), dst_port);
      d.payload = r.bytes(payload_len);
      return d;
    }
    if (ip_version == 6) {
      r.skip(3);  // rest of version/class/flow
      uint16_t payload_len = r.u16(Endian::big);
      uint8_t next_header = r.u8();
      r.skip(1);  // hop limit
      BytesView src = r.view(16);
      BytesView dst = r.view(16);
      if (next_header != 17) {
        ++log.non_udp_skipped;  // extension-header chains included
        return std::nullopt;
      }
      uint16_t src_port = r.u16(Endian::big);
      uint16_t dst_port = r.u16(Endian::big);
      uint16_t udp_len = r.u16(Endian::big);
      r.skip(2);
      if (udp_len < 8 || udp_len > payload_len) {
        log.corrupt("IPv6 UDP length inconsistent");
        return std::nullopt;
      }
      size_t n = std::min<size_t>(udp_len - 8, r.remaining());
      UdpDatagram d;
      d.timestamp_us = timestamp_us;
      d.src = ipv6_str(src.data(), src_port);
      d.dst = ipv6_str(dst.data(), dst_port);
      d.payload = r.bytes(n);
      return d;
    }
    ++log.non_udp_skipped;
    return std::nullopt;
  } catch (const Truncated&) {
    log.corrupt("truncated IP packet");
    return std::nullopt;
  }
}

/// Strips the link-layer framing for the capture's link type and hands the
/// IP packet to decode_ip.
inline std::optional<UdpDatagram> decode_frame(BytesView frame,
                                               uint32_t link_type,
                                               uint64_t timestamp_us,
                                               CaptureLog& log) {
  ++log.frames;
  try {
    switch (link_type) {
      case 1: {  // Ethernet
        ByteReader r(frame);
        r.skip(12);  // MACs
        uint16_t ethertype = r.u16(Endian::big);
        while (ethertype == 0x8100 || ethertype == 0x88a8) {  // VLAN tags
          r.skip(2);
          ethertype = r.u16(Endian::big);
        }
        if (ethertype != 0x0800 && ethertype != 0x86dd) {
          ++log.non_udp_skipped;
          return std::nullopt;
        }
        return decode_ip(r.rest(), timestamp_us, log);
      }
      case 0: {  // BSD loopback: 4-byte family header
        ByteReader r(frame);
        r.skip(4);
        return decode_ip(r.rest(), timestamp_us, log);
      }
      case 101:  // raw IP
        return decode_ip(frame, timestamp_us, log);
      default:
        ++log.non_udp_skipped;
        return std::nullopt;
    }
  } catch (const Truncated&) {
    log.corrupt("truncated link-layer frame");
    return std::nullopt;
  }
}

}  // namespace detail

/// Sequential single-consumer reader over a classic pcap or pcapng capture.
/// Non-UDP frames are skipped; corrupt records are skipped and noted in the
/// log. Only the UDP transport mapping is surfaced.
class PcapReader {
 public:
  explicit PcapReader(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotPcap("cannot open capture: " + path);
    data_.assign(std::istreambuf_iterator<char>(in),
                 std::istreambuf_iterator<char>());
    init();
  }

  explicit PcapReader(Bytes data) : data_(std::move(data)) { init(); }

  std::optional<UdpDatagram> next() {
    while (true) {
      auto frame = next_frame();
      if (!frame) return std::nullopt;
      auto d = detail::decode_frame(frame->data, frame->link_type,
                                    frame->timestamp_us, log_);
      if (d) {
        ++log_.udp_datagrams;
        return d;
      }
    }
  }

  std::vector<UdpDatagram> read_all() {
    std::vector<UdpDatagram> out;
    while (auto d = next()) out.push_back(std::move(*d));
    return out;
  }

  const CaptureLog& log() const { return log_; }

 private:
  struct Frame {
    uint64_t timestamp_us;
    uint32_t link_type;
    BytesView data;
  };

  void init() {
    if (data_.size() < 4) throw NotPcap("capture shorter than any magic");
    uint32_t magic_le = static_cast<uint32_t>(data_[0]) |
                        static_cast<uint32_t>(data_[1]) << 8 |
                        static_cast<uint32_t>(data_[2]) << 16 |
                        static_cast<uint32_t>(data_[3]) << 24;
    if (magic_le == 0x0a0d0d0a) {
      format_ = Format::pcapng;
      pos_ = 0;
      return;
    }
    switch (magic_le) {
      case 0xa1b2c3d4:
        format_ = Format::classic;
        endian_ = Endian::little;
        nanos_ = false;
        break;
      case 0xd4c3b2a1:
        format_ = Format::classic;
        endian_ = Endian::big;
        nanos_ = false;
        break;
      case 0xa1b23c4d:
        format_ = Format::classic;
        endian_ = Endian::little;
        nanos_ = true;
        break;
      case 0x4d3cb2a1:
        format_ = Format::classic;
        endian_ = Endian::big;
        nanos_ = true;
        break;
      default:
        throw NotPcap("unrecognized capture magic");
    }
    if (data_.size() < 24) throw NotPcap("classic pcap global header truncated");
    ByteReader r(BytesView(data_).subspan(4));
    r.skip(16);  // version, thiszone, sigfigs, snaplen
    link_type_ = r.u32(endian_);
    pos_ = 24;
  }

  std::optional<Frame> next_frame() {
    if (format_ == Format::classic) return next_classic();
    return next_pcapng();
  }

  std::optional<Frame> next_classic() {
    if (pos_ >= data_.size()) return std::nullopt;
    if (data_.size() - pos_ < 16) {
      log_.corrupt("trailing bytes shorter than a record header");
      pos_ = data_.size();
      return std::nullopt;
    }
    ByteReader r(BytesView(data_).subspan(pos_));
    uint32_t ts_sec = r.u32(endian_);
    uint32_t ts_sub = r.u32(endian_);
    uint32_t incl_len = r.u32(endian_);
    r.skip(4);  // orig_len
    if (incl_len > data_.size() - pos_ - 16) {
      log_.corrupt("record length overruns capture");
      pos_ = data_.size();
      return std::nullopt;
    }
    Frame f;
    f.timestamp_us = static_cast<uint64_t>(ts_sec) * 1000000u +
                     (nanos_ ? ts_sub / 1000u : ts_sub);
    f.link_type = link_type_;
    f.data = BytesView(data_).subspan(pos_ + 16, incl_len);
    pos_ += 16 + incl_len;
    return f;
  }

  std::optional<Frame> next_pcapng() {
    while (pos_ + 12 <= data_.size()) {
      ByteReader r(BytesView(data_).subspan(pos_));
      uint32_t block_type = r.u32(endian_);
      if (block_type == 0x0a0d0d0a) {
        // Section header: byte-order magic decides endianness for the section.
        uint32_t raw_len = r.u32(endian_);
        uint32_t bom = r.u32(endian_);
        if (bom == 0x4d3c2b1a) {
          endian_ = endian_ == Endian::little ? Endian::big : Endian::little;
          ByteReader r2(BytesView(data_).subspan(pos_ + 4));
          raw_len = r2.u32(endian_);
        } else if (bom != 0x1a2b3c4d) {
          throw NotPcap("pcapng byte-order magic invalid");
        }
        if (!advance_block(raw_len)) return std::nullopt;
        interfaces_.clear();
        continue;
      }
      uint32_t block_len = r.u32(endian_);
      if (block_len < 12 || block_len % 4 != 0 ||
          block_len > data_.size() - pos_) {
        log_.corrupt("pcapng block length invalid");
        pos_ = data_.size();
        return std::nullopt;
      }
      BytesView body = BytesView(data_).subspan(pos_ + 8, block_len - 12);
      std::optional<Frame> out;
      try {
        if (block_type == 1) {
          parse_idb(body);
        } else if (block_type == 6) {
          out = parse_epb(body);
        } else if (block_type == 3) {
          out = parse_spb(body);
        }
      } catch (const Truncated&) {
        log_.corrupt("pcapng block body truncated");
      }
      pos_ += block_len;
      if (out) return out;
    }
    return std::nullopt;
  }

  bool advance_block(uint32_t block_len) {
    if (block_len < 12 || block_len > data_.size() - pos_) {
      log_.corrupt("pcapng section header length invalid");
      pos_ = data_.size();
      return false;
    }
    pos_ += block_len;
    return true;
  }

  struct Interface {
    uint32_t link_type = 1;
    uint64_t ticks_per_second = 1000000;
  };

  void parse_idb(BytesView body) {
    ByteReader r(body);
    Interface itf;
    itf.link_type = r.u16(endian_);
    r.skip(2);  // reserved
    r.skip(4);  // snaplen
    // Options: look for if_tsresol (code 9).
    while (r.remaining() >= 4) {
      uint16_t code = r.u16(endian_);
      uint16_t len = r.u16(endian_);
      if (code == 0) break;
      if (len > r.remaining()) break;
      if (code == 9 && len >= 1) {
        uint8_t resol = r.view(len)[0];
        if (resol & 0x80) {
          itf.ticks_per_second = 1ull << (resol & 0x7f);
        } else {
          itf.ticks_per_second = 1;
          for (int i = 0; i < (resol & 0x7f); ++i) itf.ticks_per_second *= 10;
        }
      } else {
        r.skip(len);
      }
      r.align(4);
    }
    interfaces_.push_back(itf);
  }

  std::optional<Frame> parse_epb(BytesView body) {
    ByteReader r(body);
    uint32_t iface = r.u32(endian_);
    uint64_t ts_high = r.u32(endian_);
    uint64_t ts_low = r.u32(endian_);
    uint32_t cap_len = r.u32(endian_);
    r.skip(4);  // original length
    Interface itf = iface < interfaces_.size() ? interfaces_[iface]
                                               : Interface{};
    uint64_t ticks = ts_high << 32 | ts_low;
    Frame f;
    f.timestamp_us = ticks * 1000000u / itf.ticks_per_second;
    f.link_type = itf.link_type;
    f.data = r.view(cap_len);
    return f;
  }

  std::optional<Frame> parse_spb(BytesView body) {
    ByteReader r(body);
    r.skip(4);  // original length; captured == block body remainder
    Interface itf = interfaces_.empty() ? Interface{} : interfaces_[0];
    Frame f;
    f.timestamp_us = 0;
    f.link_type = itf.link_type;
    f.data = r.rest();
    return f;
  }

  enum class Format { classic, pcapng };

  Bytes data_;
  size_t pos_ = 0;
  Format format_ = Format::classic;
  Endian endian_ = Endian::little;
  bool nanos_ = false;
  uint32_t link_type_ = 1;
  std::vector<Interface> interfaces_;
  CaptureLog log_;
};

/// Classic-format pcap writer (microsecond timestamps, Ethernet link type).
/// Frames are synthesized as Ethernet + IPv4 + UDP around each payload.
class PcapWriter {
 public:
  PcapWriter() {
    w_.u32(0xa1b2c3d4, Endian::little);
    w_.u16(2, Endian::little);   // major
    w_.u16(4, Endian::little);   // minor
    w_.u32(0, Endian::little);   // thiszone
    w_.u32(0, Endian::little);   // sigfigs
    w_.u32(65535, Endian::little);
    w_.u32(1, Endian::little);   // Ethernet
  }

  void add(uint64_t timestamp_us, uint32_t src_ip, uint16_t src_port,
           uint32_t dst_ip, uint16_t dst_port, BytesView payload) {
    Bytes frame = build_frame(src_ip, src_port, dst_ip, dst_port, payload);
    w_.u32(static_cast<uint32_t>(timestamp_us / 1000000u), Endian::little);
    w_.u32(static_cast<uint32_t>(timestamp_us % 1000000u), Endian::little);
    w_.u32(static_cast<uint32_t>(frame.size()), Endian::little);
    w_.u32(static_cast<uint32_t>(frame.size()), Endian::little);
    w_.bytes(frame);
  }

  void add(uint64_t timestamp_us, const std::string& src_ip, uint16_t src_port,
           const std::string& dst_ip, uint16_t dst_port, BytesView payload) {
    add(timestamp_us, parse_ipv4(src_ip), src_port, parse_ipv4(dst_ip),
        dst_port, payload);
  }

  static uint32_t parse_ipv4(const std::string& dotted) {
    in_addr a;
    if (::inet_pton(AF_INET, dotted.c_str(), &a) != 1) {
      throw Error("bad IPv4 address: " + dotted);
    }
    return ntohl(a.s_addr);
  }

  /// Appends a raw frame with an arbitrary ethertype payload (test hook for
  /// non-IP traffic).
  void add_raw_frame(uint64_t timestamp_us, BytesView frame) {
    w_.u32(static_cast<uint32_t>(timestamp_us / 1000000u), Endian::little);
    w_.u32(static_cast<uint32_t>(timestamp_us % 1000000u), Endian::little);
    w_.u32(static_cast<uint32_t>(frame.size()), Endian::little);
    w_.u32(static_cast<uint32_t>(frame.size()), Endian::little);
    w_.bytes(frame);
  }

  const Bytes& data() const { return w_.data(); }

  void write_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write capture: " + path);
    out.write(reinterpret_cast<const char*>(w_.data().data()),
              static_cast<std::streamsize>(w_.data().size()));
  }

  static Bytes build_frame(uint32_t src_ip, uint16_t src_port, uint32_t dst_ip,
                           uint16_t dst_port, BytesView payload) {
    ByteWriter f;
    // Ethernet: locally administered MACs derived from the IPs.
    f.u8(0x02); f.u8(0x00);
    f.u32(dst_ip, Endian::big);
    f.u8(0x02); f.u8(0x00);
    f.u32(src_ip, Endian::big);
    f.u16(0x0800, Endian::big);
    // IPv4 header, no options.
    uint16_t total_len = static_cast<uint16_t>(20 + 8 + payload.size());
    ByteWriter ip;
    ip.u8(0x45);
    ip.u8(0);
    ip.u16(total_len, Endian::big);
    ip.u16(0, Endian::big);       // identification
    ip.u16(0x4000, Endian::big);  // don't fragment
    ip.u8(64);                    // TTL
    ip.u8(17);                    // UDP
    ip.u16(0, Endian::big);       // checksum placeholder
    ip.u32(src_ip, Endian::big);
    ip.u32(dst_ip, Endian::big);
    Bytes ip_hdr = ip.take();
    uint16_t checksum = ipv4_checksum(ip_hdr);
    ip_hdr[10] = static_cast<uint8_t>(checksum >> 8);
    ip_hdr[11] = static_cast<uint8_t>(checksum);
    f.bytes(ip_hdr);
    // UDP header, checksum omitted (0 is "not computed" for IPv4).
    f.u16(src_port, Endian::big);
    f.u16(dst_port, Endian::big);
    f.u16(static_cast<uint16_t>(8 + payload.size()), Endian::big);
    f.u16(0, Endian::big);
    f.bytes(payload);
    return f.take();
  }

 private:
  static uint16_t ipv4_checksum(BytesView header) {
    uint32_t sum = 0;
    for (size_t i = 0; i + 1 < header.size(); i += 2) {
      sum += static_cast<uint32_t>(header[i]) << 8 | header[i + 1];
    }
    while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
    return static_cast<uint16_t>(~sum);
  }

  ByteWriter w_;
};

}  // namespace graphguard::pcap

#endif  // GRAPHGUARD_PCAP_HPP_
