// Copyright (c) the chaindns authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace chaindns
{
  enum class Chain : uint8_t
  {
    namecoin = 0,
    emercoin = 1
  };

  enum class OpKind : uint8_t
  {
    reg = 0,
    update = 1,
    del = 2
  };

  std::string_view to_string(Chain c);
  std::string_view to_string(OpKind k);
  std::optional<Chain> chain_from_string(std::string_view s);
  std::optional<OpKind> op_from_string(std::string_view s);

  /// One name operation as it appears in a chain dump. Field bytes are kept
  /// verbatim; no case folding or trimming happens at this layer.
  struct NameOperation
  {
    Chain chain{};
    OpKind op{};
    std::string raw_name;
    std::string value;
    std::string owner;
    uint64_t height = 0;
    int64_t time = 0;
    std::string txid; // 64 lowercase hex chars
    std::optional<uint32_t> expiry_days; // emercoin only
  };

  /// Point in chain history used to evaluate registration and expiry.
  /// height drives block-horizon checks, time drives wall-clock checks.
  struct AsOf
  {
    uint64_t height = 0;
    int64_t time = 0;
  };

  inline bool valid_txid(std::string_view s)
  {
    if (s.size() != 64)
      return false;
    for (char c : s)
      if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f')))
        return false;
    return true;
  }

  inline char ascii_lower(char c)
  {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
  }

  inline std::string ascii_lower_copy(std::string_view s)
  {
    std::string out(s);
    for (char& c : out)
      c = ascii_lower(c);
    return out;
  }
}
