// Copyright (c) the chaindns authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "chaindns/namedb.hpp"
#include "chaindns/nvs.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace chaindns
{
  /// CIDR-to-country table (IPv4). Longest matching prefix wins; addresses
  /// outside every range map to "??".
  class GeoTable
  {
  public:
    void add(uint32_t network, int prefix_len, std::string country);
    static GeoTable load_csv(const std::string& path); // cidr,country lines
    std::string lookup(const std::string& ipv4) const;

    size_t size() const
    {
      return entries_.size();
    }

  private:
    struct Entry
    {
      uint32_t network;
      uint32_t mask;
      int prefix_len;
      std::string country;
    };
    std::vector<Entry> entries_;
  };

  using CountList = std::vector<std::pair<std::string, uint64_t>>;

  struct SaleListing
  {
    std::string fqdn;
    std::string raw_name;
    std::vector<std::string> markers;
  };

  struct AlexaGroup
  {
    std::string sld;
    std::vector<std::string> tlds; // deduplicated, sorted
  };

  struct StatsOptions
  {
    const TldSet* known_tlds = nullptr; // builtin_tlds() when null
    std::vector<std::string> alexa;     // ranked host list, already loaded
    const GeoTable* geo = nullptr;
    size_t top_addresses = 10;
    size_t top_ips = 15;
    bool active_only = true;
    std::optional<Chain> chain_filter;
    ExpiryPolicy policy{}; // echoed into the report, not applied here
    AsOf asof{};
  };

  struct PolicyEcho
  {
    uint64_t namecoin_horizon_blocks = 0;
    uint32_t emercoin_default_days = 0;
    uint64_t asof_height = 0;
    int64_t asof_time = 0;
    bool active_only = true;
    std::string chain_filter; // "all", "namecoin" or "emercoin"
    size_t top_addresses = 0;
    size_t top_ips = 0;
  };

  struct StatsReport
  {
    PolicyEcho policy;
    uint64_t considered = 0;

    std::map<uint64_t, uint64_t> length_histogram; // SLD byte count -> names
    std::map<std::string, uint64_t> tld_counts;    // records with addresses
    CountList top_registrants;                     // count desc, addr asc
    CountList ip_concentration;                    // names per A-record IP
    uint64_t lexical_embedded_com = 0;
    uint64_t lexical_punycode = 0;
    uint64_t lexical_capitals = 0;
    uint64_t lexical_whitespace = 0;
    uint64_t sale_strict = 0;
    uint64_t sale_loose = 0;
    std::vector<SaleListing> sale_listing; // strict matches, sorted by fqdn
    uint64_t alexa_matches = 0;            // records sharing an SLD with the list
    uint64_t alexa_unique_slds = 0;
    std::vector<AlexaGroup> alexa_groups;
    std::map<std::string, uint64_t> timeline;     // "YYYY-MM" (UTC) -> names
    std::map<std::string, uint64_t> timeline_com; // embedded-com subset
    std::map<std::string, uint64_t> country_events;     // per resolved A record
    std::map<std::string, uint64_t> country_unique_ips; // per distinct address
  };

  // The individual counting passes, exposed for targeted tests. Each is a
  // single loop over the views with no shared state.
  std::map<uint64_t, uint64_t> length_distribution(std::span<const RecordView> views);
  std::map<std::string, uint64_t> tld_distribution(std::span<const RecordView> views);
  CountList top_registrants(std::span<const RecordView> views, size_t k);
  CountList ip_concentration(std::span<const RecordView> views, size_t k);

  StatsReport compute_stats(std::span<const RecordView> views, const StatsOptions& opts);

  /// Loads a ranked host list: one entry per line, '#' comments, lowercased.
  std::vector<std::string> load_host_list(const std::string& path);

  std::string report_to_json(const StatsReport& report); // deterministic bytes
  std::string report_to_text(const StatsReport& report); // aligned tables

  /// Writes report.json, report.txt, length_histogram.csv, timeline.csv and
  /// manifest.json into `dir` (created if missing).
  void write_report_files(const StatsReport& report, const std::string& dir);
}
