// Copyright (c) the chaindns authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "chaindns/dns_wire.hpp"
#include "chaindns/namedb.hpp"

#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

namespace chaindns
{
  /// Maps the final label of a query name to the chain that owns it. A TLD
  /// maps to at most one backend by construction.
  struct RoutingTable
  {
    enum class UnknownTld : uint8_t
    {
      nxdomain = 0,
      refuse = 1
    };

    std::map<std::string, Chain> tld_to_chain;
    UnknownTld unknown_action = UnknownTld::nxdomain;

    /// bit -> namecoin; coin, emc, lib, bazar -> emercoin.
    static RoutingTable defaults();
  };

  /// Backend for the final label of `fqdn`; nullopt when the label is not
  /// routed or the name has no dot to split on.
  std::optional<Chain> route_tld(const RoutingTable& table, std::string_view fqdn);

  enum class ResolveStatus : uint8_t
  {
    ok = 0,
    nxdomain = 1,
    unsupported_tld = 2,
    no_address_data = 3,
    transient = 4 // backing store unavailable
  };

  std::string_view to_string(ResolveStatus s);

  struct ResolutionSource
  {
    Chain chain{};
    std::string raw_name;
    uint64_t height = 0; // height of the history entry whose value is served
  };

  struct ResolutionResult
  {
    ResolveStatus status = ResolveStatus::nxdomain;
    DnsRecordSet answers; // filtered to the queried type
    bool collision = false;
    std::optional<ResolutionSource> source;
  };

  struct GatewayOptions
  {
    uint32_t ttl = 300;
    bool drop_malformed = false; // false: answer FORMERR; true: stay silent
  };

  /// Read side of the resolver: routes by TLD, serves the earliest-registered
  /// record when several active raw names normalize to one fqdn, and maps
  /// outcomes onto wire rcodes. The database snapshot is swapped whole by
  /// the writer; every request works against the snapshot it started with.
  class Gateway
  {
  public:
    Gateway(std::shared_ptr<const NameDb> db, RoutingTable routing, GatewayOptions opts = {});

    /// `fqdn` must already be lowercase; wire and REST entry points fold
    /// before calling. qtype is one of the served wire types.
    ResolutionResult resolve(std::string_view fqdn, uint16_t qtype,
                             std::optional<uint64_t> at_height = std::nullopt) const;

    /// Byte-exact escape hatch for raw names that case folding or routing
    /// would hide. Tries dns:<name>, d/<sld> for *.bit, and the verbatim
    /// name on both chains; TLD routing is bypassed entirely.
    ResolutionResult resolve_exact(std::string_view name, uint16_t qtype) const;

    /// decode -> resolve -> encode. An empty vector means drop (malformed
    /// input under the drop policy).
    std::vector<uint8_t> handle_packet(std::span<const uint8_t> packet) const;

    void swap_db(std::shared_ptr<const NameDb> db);
    std::shared_ptr<const NameDb> db() const;

    const GatewayOptions& options() const
    {
      return opts_;
    }
    const RoutingTable& routing() const
    {
      return routing_;
    }

  private:
    ResolutionResult resolve_on(const NameDb& db, std::string_view fqdn, uint16_t qtype,
                                std::optional<uint64_t> at_height) const;

    mutable std::shared_mutex mu_;
    std::shared_ptr<const NameDb> db_;
    RoutingTable routing_;
    GatewayOptions opts_;
  };

  /// Trims answers to the queried type; used by both wire and REST paths.
  DnsRecordSet filter_answers(const DnsRecordSet& rs, uint16_t qtype);
}
