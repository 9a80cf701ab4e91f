// Copyright (c) the chaindns authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "chaindns/nvs.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace chaindns
{
  // Served RFC 1035 subset: UDP packets up to 512 bytes, one IN-class
  // question, qtypes A, AAAA and ANY.
  inline constexpr size_t max_packet_bytes = 512;

  inline constexpr uint16_t qtype_a = 1;
  inline constexpr uint16_t qtype_ns = 2;
  inline constexpr uint16_t qtype_txt = 16;
  inline constexpr uint16_t qtype_aaaa = 28;
  inline constexpr uint16_t qtype_any = 255;

  inline constexpr uint8_t rcode_noerror = 0;
  inline constexpr uint8_t rcode_formerr = 1;
  inline constexpr uint8_t rcode_servfail = 2;
  inline constexpr uint8_t rcode_nxdomain = 3;
  inline constexpr uint8_t rcode_notimp = 4;
  inline constexpr uint8_t rcode_refused = 5;

  struct DnsQuestion
  {
    std::string qname; // labels joined with '.', bytes verbatim
    uint16_t qtype = 0;
    uint16_t qclass = 0;
  };

  enum class DecodeStatus : uint8_t
  {
    ok = 0,
    /// Structurally broken: short header, label overrun, compression in the
    /// question, oversized packet. Answered with FORMERR or dropped.
    malformed = 1,
    /// Parsed but outside the served subset: opcode != QUERY, QDCOUNT != 1,
    /// class != IN or qtype not in {A, AAAA, ANY}. Answered with NOTIMP.
    unsupported = 2
  };

  struct DecodedQuery
  {
    DecodeStatus status = DecodeStatus::malformed;
    uint16_t id = 0;
    bool id_known = false;       // header id was readable
    bool rd = false;             // recursion-desired bit, echoed in replies
    bool question_known = false; // question section was readable
    DnsQuestion question;
  };

  DecodedQuery decode_query(std::span<const uint8_t> packet);

  /// Builds a response with the given rcode. The question is echoed only
  /// when present; error responses to unparseable questions carry zero
  /// sections. AA is set only when `authoritative`.
  std::vector<uint8_t> encode_error(uint16_t id, bool rd, uint8_t rcode,
                                    const DnsQuestion* question, bool authoritative);

  /// Positive response: echoes the question and appends answer records of
  /// the requested type (ANY serves A, AAAA, NS and TXT in that order).
  /// Answers that would push the packet past 512 bytes are dropped and TC
  /// is set. Answer names use a compression pointer to the question name.
  std::vector<uint8_t> encode_answers(uint16_t id, bool rd, const DnsQuestion& question,
                                      const DnsRecordSet& records, uint32_t ttl);
}
