// Copyright (c) the chaindns authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "chaindns/analytics.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace chaindns
{
  /// SLD x TLD cross product, SLD-major, inputs deduplicated first keeping
  /// order of first appearance.
  std::vector<std::string> generate_candidates(const std::vector<std::string>& slds,
                                               const std::vector<std::string>& tlds);

  /// RFC 1918 blocks plus loopback and link-local.
  bool is_private_ip(const std::string& ipv4);

  struct IpObservation
  {
    std::string ip;
    bool is_private = false;
  };

  struct CrawlResult
  {
    std::string fqdn;
    bool registered = false;
    std::vector<IpObservation> ips; // empty unless registered
    std::optional<int> http_status;
    std::optional<std::string> redirect; // Location of a 3xx answer
    std::optional<std::string> error;    // transport or gateway failure note
  };

  std::string crawl_result_to_json(const CrawlResult& r);
  CrawlResult crawl_result_from_json(std::string_view line);

  struct CrawlOptions
  {
    int concurrency = 8;
    double rate_per_sec = 50.0; // shared token bucket across workers
    int timeout_ms = 5000;
    bool probe_http = false; // off by default; resolution-only sweeps
    int probe_timeout_ms = 5000;
    int abort_after_connect_failures = 25; // consecutive, any worker
    size_t stop_after = 0;                 // 0 = no limit; test hook
  };

  /// Raised when the endpoint is unreachable at preflight or dies mid-sweep;
  /// the journal keeps everything finished so far.
  class CrawlAborted : public std::runtime_error
  {
  public:
    explicit CrawlAborted(const std::string& what) : std::runtime_error(what) {}
  };

  /// Sweeps candidates against a resolver REST endpoint, appending one
  /// journal line per finished candidate. Candidates already present in the
  /// journal are skipped, so a killed sweep resumes where it stopped and
  /// re-running a finished sweep is a no-op. Returns every result, journaled
  /// and fresh, in candidate order.
  std::vector<CrawlResult> crawl(const std::vector<std::string>& candidates,
                                 const std::string& endpoint, const CrawlOptions& opts,
                                 const std::string& journal_path);

  /// One GET / against the record's address with the name in the Host
  /// header. Redirects are recorded, never followed; bodies are read up to
  /// 4 KiB and discarded.
  void http_probe(CrawlResult& r, int timeout_ms);

  struct CrawlSummary
  {
    uint64_t candidates = 0;
    uint64_t registered = 0;
    uint64_t ip_events = 0; // resolved addresses, not deduplicated
    uint64_t private_events = 0;
    uint64_t public_events = 0;
    uint64_t unique_public_ips = 0;
    CountList top_ips;                              // per-event counts, desc
    std::map<std::string, uint64_t> country_events; // public events only
    std::map<std::string, uint64_t> country_unique_ips;
  };

  CrawlSummary aggregate_crawl(const std::vector<CrawlResult>& results, const GeoTable* geo);

  std::string summary_to_json(const CrawlSummary& s);
}
