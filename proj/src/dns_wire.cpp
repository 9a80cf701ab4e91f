// Copyright (c) the chaindns authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "chaindns/dns_wire.hpp"

#include <arpa/inet.h>

#include <algorithm>
#include <cstring>

namespace chaindns
{
  namespace
  {
    constexpr uint16_t flag_qr = 0x8000;
    constexpr uint16_t flag_aa = 0x0400;
    constexpr uint16_t flag_tc = 0x0200;
    constexpr uint16_t flag_rd = 0x0100;

    uint16_t get_u16(std::span<const uint8_t> p, size_t off)
    {
      return static_cast<uint16_t>((p[off] << 8) | p[off + 1]);
    }

    void put_u16(std::vector<uint8_t>& out, uint16_t v)
    {
      out.push_back(static_cast<uint8_t>(v >> 8));
      out.push_back(static_cast<uint8_t>(v & 0xff));
    }

    void put_u32(std::vector<uint8_t>& out, uint32_t v)
    {
      out.push_back(static_cast<uint8_t>(v >> 24));
      out.push_back(static_cast<uint8_t>(v >> 16));
      out.push_back(static_cast<uint8_t>(v >> 8));
      out.push_back(static_cast<uint8_t>(v & 0xff));
    }

    void put_header(std::vector<uint8_t>& out, uint16_t id, uint16_t flags, uint16_t qd,
                    uint16_t an)
    {
      put_u16(out, id);
      put_u16(out, flags);
      put_u16(out, qd);
      put_u16(out, an);
      put_u16(out, 0); // NSCOUNT
      put_u16(out, 0); // ARCOUNT
    }

    bool put_qname(std::vector<uint8_t>& out, std::string_view name)
    {
      size_t start = 0;
      size_t total = 1; // terminating zero
      while (start <= name.size())
      {
        auto dot = name.find('.', start);
        auto label = name.substr(start, dot == std::string_view::npos ? dot : dot - start);
        if (label.empty() || label.size() > 63)
          return false;
        total += label.size() + 1;
        if (total > 255)
          return false;
        out.push_back(static_cast<uint8_t>(label.size()));
        out.insert(out.end(), label.begin(), label.end());
        if (dot == std::string_view::npos)
          break;
        start = dot + 1;
      }
      out.push_back(0);
      return true;
    }

    void put_question(std::vector<uint8_t>& out, const DnsQuestion& q)
    {
      put_qname(out, q.qname);
      put_u16(out, q.qtype);
      put_u16(out, q.qclass);
    }

    // One resource record with the owner name compressed to the question
    // name at offset 12 (exactly one question precedes the answers).
    bool put_rr(std::vector<uint8_t>& out, uint16_t type, uint32_t ttl,
                const std::vector<uint8_t>& rdata)
    {
      size_t need = 2 + 2 + 2 + 4 + 2 + rdata.size();
      if (out.size() + need > max_packet_bytes)
        return false;
      out.push_back(0xc0);
      out.push_back(0x0c);
      put_u16(out, type);
      put_u16(out, 1); // IN
      put_u32(out, ttl);
      put_u16(out, static_cast<uint16_t>(rdata.size()));
      out.insert(out.end(), rdata.begin(), rdata.end());
      return true;
    }

    std::vector<uint8_t> a_rdata(const std::string& ip)
    {
      in_addr addr{};
      if (inet_pton(AF_INET, ip.c_str(), &addr) != 1)
        return {};
      std::vector<uint8_t> out(4);
      std::memcpy(out.data(), &addr, 4);
      return out;
    }

    std::vector<uint8_t> aaaa_rdata(const std::string& ip)
    {
      in6_addr addr{};
      if (inet_pton(AF_INET6, ip.c_str(), &addr) != 1)
        return {};
      std::vector<uint8_t> out(16);
      std::memcpy(out.data(), &addr, 16);
      return out;
    }

    std::vector<uint8_t> name_rdata(const std::string& host)
    {
      std::vector<uint8_t> out;
      if (!put_qname(out, host))
        return {};
      return out;
    }

    std::vector<uint8_t> txt_rdata(const std::string& text)
    {
      // character-strings of at most 255 bytes each
      std::vector<uint8_t> out;
      size_t pos = 0;
      do
      {
        size_t chunk = std::min<size_t>(255, text.size() - pos);
        out.push_back(static_cast<uint8_t>(chunk));
        out.insert(out.end(), text.begin() + pos, text.begin() + pos + chunk);
        pos += chunk;
      } while (pos < text.size());
      return out;
    }
  }

  DecodedQuery decode_query(std::span<const uint8_t> packet)
  {
    DecodedQuery q;
    if (packet.size() >= 2)
    {
      q.id = get_u16(packet, 0);
      q.id_known = true;
    }
    if (packet.size() < 12 || packet.size() > max_packet_bytes)
      return q; // malformed

    uint16_t flags = get_u16(packet, 2);
    uint16_t qdcount = get_u16(packet, 4);
    q.rd = (flags & flag_rd) != 0;
    if (flags & flag_qr)
      return q; // a response; nothing to answer

    uint16_t opcode = (flags >> 11) & 0xf;
    if (opcode != 0 || qdcount != 1)
    {
      q.status = DecodeStatus::unsupported;
      return q;
    }

    // Question name. Compression pointers are not legal here: nothing
    // earlier in the packet could be pointed at.
    size_t off = 12;
    std::string name;
    while (true)
    {
      if (off >= packet.size())
        return q; // ran off the end: malformed
      uint8_t len = packet[off];
      if (len == 0)
      {
        off++;
        break;
      }
      if (len >= 0xc0)
        return q;
      if (off + 1 + len > packet.size())
        return q;
      if (!name.empty())
        name.push_back('.');
      name.append(reinterpret_cast<const char*>(packet.data()) + off + 1, len);
      if (name.size() > 255)
        return q;
      off += 1 + len;
    }
    if (off + 4 > packet.size())
      return q;

    q.question.qname = std::move(name);
    q.question.qtype = get_u16(packet, off);
    q.question.qclass = get_u16(packet, off + 2);
    q.question_known = true;

    if (q.question.qclass != 1 ||
        (q.question.qtype != qtype_a && q.question.qtype != qtype_aaaa &&
         q.question.qtype != qtype_any))
    {
      q.status = DecodeStatus::unsupported;
      return q;
    }
    q.status = DecodeStatus::ok;
    return q;
  }

  std::vector<uint8_t> encode_error(uint16_t id, bool rd, uint8_t rcode,
                                    const DnsQuestion* question, bool authoritative)
  {
    std::vector<uint8_t> out;
    uint16_t flags = flag_qr | rcode;
    if (rd)
      flags |= flag_rd;
    if (authoritative)
      flags |= flag_aa;
    put_header(out, id, flags, question ? 1 : 0, 0);
    if (question)
      put_question(out, *question);
    return out;
  }

  std::vector<uint8_t> encode_answers(uint16_t id, bool rd, const DnsQuestion& question,
                                      const DnsRecordSet& records, uint32_t ttl)
  {
    std::vector<uint8_t> out;
    put_header(out, id, 0, 1, 0);
    put_question(out, question);

    uint16_t count = 0;
    bool truncated = false;
    auto add = [&](uint16_t type, const std::vector<uint8_t>& rdata) {
      if (rdata.empty())
        return;
      if (put_rr(out, type, ttl, rdata))
        count++;
      else
        truncated = true;
    };

    bool want_a = question.qtype == qtype_a || question.qtype == qtype_any;
    bool want_aaaa = question.qtype == qtype_aaaa || question.qtype == qtype_any;
    if (want_a)
      for (const auto& ip : records.a)
        add(qtype_a, a_rdata(ip));
    if (want_aaaa)
      for (const auto& ip : records.aaaa)
        add(qtype_aaaa, aaaa_rdata(ip));
    if (question.qtype == qtype_any)
    {
      for (const auto& host : records.ns)
        add(qtype_ns, name_rdata(host));
      for (const auto& text : records.txt)
        add(qtype_txt, txt_rdata(text));
    }

    uint16_t flags = flag_qr | flag_aa;
    if (rd)
      flags |= flag_rd;
    if (truncated)
      flags |= flag_tc;
    out[2] = static_cast<uint8_t>(flags >> 8);
    out[3] = static_cast<uint8_t>(flags & 0xff);
    out[6] = static_cast<uint8_t>(count >> 8);
    out[7] = static_cast<uint8_t>(count & 0xff);
    return out;
  }
}
