// Copyright (c) the chaindns authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "chaindns/types.hpp"

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace chaindns
{
  /// Typed record sets extracted from a name's value payload. All lists are
  /// deduplicated keeping first-appearance order; addresses are stored in
  /// canonical text form.
  struct DnsRecordSet
  {
    std::vector<std::string> a;
    std::vector<std::string> aaaa;
    std::vector<std::string> ns;
    std::vector<std::string> txt;
    std::vector<std::string> extras;   // unrecognized tokens/keys, verbatim
    std::vector<std::string> warnings; // per-item parse notes

    bool has_addresses() const
    {
      return !a.empty() || !aaaa.empty();
    }
    bool empty() const
    {
      return a.empty() && aaaa.empty() && ns.empty() && txt.empty();
    }
  };

  /// Namecoin values may carry one level of sublabel record sets next to the
  /// root set; the gateway serves only the root, sublabels surface here.
  struct NamecoinValue
  {
    DnsRecordSet root;
    std::vector<std::pair<std::string, DnsRecordSet>> subs;
  };

  enum class NamespaceTag : uint8_t
  {
    d = 0,     // namecoin d/ domain namespace
    dns = 1,   // emercoin dns: namespace
    other = 2  // anything else; kept for analytics, never resolvable
  };

  std::string_view to_string(NamespaceTag t);

  struct FqdnInfo
  {
    std::string fqdn; // lowercase; empty when the name has no usable SLD
    NamespaceTag tag = NamespaceTag::other;
  };

  /// Maps a raw chain name to the fully qualified lowercase domain it would
  /// serve. d/<sld> gains the bit suffix, dns:<name> is used as-is; names in
  /// any other namespace keep their bytes (lowercased) under tag other.
  /// Returns nullopt when the SLD left after stripping the prefix is empty.
  std::optional<FqdnInfo> name_to_fqdn(Chain chain, std::string_view raw_name);

  /// Pipe-separated KEY=payload tokens, payloads comma-separated; the emcdns
  /// value convention. Recognized keys: A, AAAA, NS, TXT. Anything else
  /// (including tokens without '=') lands in extras untouched. Invalid
  /// addresses are dropped item-by-item with a warning.
  DnsRecordSet parse_emercoin_value(std::string_view value);

  /// Inverse of parse_emercoin_value over the recognized-key subset.
  std::string serialize_emercoin_value(const DnsRecordSet& rs);

  /// JSON object with optional ip/ip6/ns (string or list) and a one-level
  /// map of sublabel to {ip, ip6}. Any other shape yields an empty set and
  /// a warning; unknown keys are preserved in extras.
  NamecoinValue parse_namecoin_value(std::string_view value);

  /// Known-TLD set, lowercase entries, possibly multi-label (co.uk).
  using TldSet = std::set<std::string, std::less<>>;

  /// Built-in fallback list used when no TLD file is configured.
  const TldSet& builtin_tlds();

  /// Loads one TLD per line; '#' starts a comment. Entries are lowercased.
  TldSet load_tld_file(const std::string& path);

  struct LexicalProfile
  {
    size_t length = 0; // SLD byte count
    bool has_capitals = false;
    bool has_whitespace = false;
    bool is_punycode = false;
    std::optional<std::string> embedded_tld;
    double shannon_entropy = 0.0; // bits per byte over the SLD
  };

  /// Profile of the namespace-stripped name, computed before any case
  /// folding so that capitalization anomalies survive. length and entropy
  /// cover the SLD (label left of the final dot, or the whole name when it
  /// has no dots); the boolean flags cover the entire stripped name.
  LexicalProfile lexical_profile(std::string_view raw_name, const TldSet& known_tlds);

  /// The stripped portion lexical_profile works on, exposed for analytics.
  std::string_view strip_namespace(std::string_view raw_name);

  /// SLD used for length/entropy: label left of the final dot.
  std::string_view plain_sld(std::string_view stripped);

  /// Public-suffix aware SLD: label left of the longest known suffix, used
  /// for list-correlation matching (handles co.uk style suffixes).
  std::string_view suffix_sld(std::string_view host, const TldSet& known_tlds);

  struct SaleMatch
  {
    bool strict = false; // "for sale" or a currency mark adjacent to digits
    bool loose = false;  // strict, or any '$' at all
    std::vector<std::string> markers; // rule names: for-sale, dollar-amount, dollar-sign
    std::string excerpt; // bytes around the first match, possibly truncated
  };

  /// Scans a value payload for resale solicitation. "for sale" matches
  /// case-insensitively; '$' counts as an amount only when a digit sits
  /// directly on either side of it.
  SaleMatch is_sale_offer(std::string_view value);
}
