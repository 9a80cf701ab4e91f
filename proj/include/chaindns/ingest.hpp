// Copyright (c) the chaindns authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "chaindns/types.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace chaindns
{
  class NameDb;

  // Caps enforced before anything reaches the database. Oversized input is
  // rejected whole, never truncated.
  inline constexpr size_t max_line_bytes = 256 * 1024;
  inline constexpr size_t max_name_bytes = 255;
  inline constexpr size_t max_value_bytes = 20 * 1024;

  /// Raised by parse_dump_line; reason is a stable slug used in reports
  /// (bad-json, unexpected-key, unknown-chain, bad-txid, ...).
  class DumpError : public std::runtime_error
  {
  public:
    DumpError(std::string reason, const std::string& detail)
      : std::runtime_error(detail.empty() ? reason : reason + ": " + detail),
        reason_(std::move(reason))
    {}

    const std::string& reason() const
    {
      return reason_;
    }

  private:
    std::string reason_;
  };

  /// Parses one NDJSON dump line into a NameOperation, throwing DumpError on
  /// any malformed or out-of-contract input. The accepted object carries
  /// exactly the keys chain, op, name, value, owner, height, time, txid and
  /// optionally expiry_days (emercoin only; delete lines must have an empty
  /// value).
  NameOperation parse_dump_line(std::string_view line);

  /// parse_dump_line's inverse; emits the canonical compact JSON line.
  std::string serialize_operation(const NameOperation& op);

  struct IngestReport
  {
    uint64_t accepted = 0;
    uint64_t rejected = 0;
    std::vector<std::pair<uint64_t, std::string>> rejects; // (line number, reason)
    uint64_t min_height = 0; // over accepted ops; 0/0 when none
    uint64_t max_height = 0;

    uint64_t total() const
    {
      return accepted + rejected;
    }
  };

  /// Reads NDJSON lines, sorts the parsed ops by (height, txid, content) and
  /// applies them to db. A txid seen again, whether the line is identical or
  /// not (or the txid is already in db), is rejected as duplicate-txid. Blank
  /// lines are skipped without affecting the tally, so accepted + rejected
  /// equals the number of non-blank lines.
  IngestReport ingest_stream(std::istream& in, NameDb& db);

  IngestReport ingest_file(const std::string& path, NameDb& db);
}
