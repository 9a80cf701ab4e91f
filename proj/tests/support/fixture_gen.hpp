// Copyright (c) the chaindns authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

// Deterministic dump/file builders shared by the unit and acceptance tests.
// Every writer returns the paths it produced; expected table values live in
// the tests themselves so the numbers stay visible next to the assertions.
namespace testfix
{
  struct ShapedCorpus
  {
    std::string dump_path;
    std::string alexa_path;
    std::string tld_path;
  };

  // Two-chain corpus with a fixed ownership, address, lexical, sale, and
  // popular-list profile. 15046 register operations, all active at the final
  // height. See the acceptance test for the exact expected tables.
  ShapedCorpus write_shaped_corpus(const std::string& dir);

  struct CrawlCorpus
  {
    std::string dump_path;
    std::string slds_path;
    std::string tlds_path;
    std::string geo_path;
  };

  // 464 registered names under a 1000 x 25 candidate grid, with a fixed
  // public/private address split and per-country totals.
  CrawlCorpus write_crawl_corpus(const std::string& dir);

  // Randomized mixed-validity dump: registers, updates, deletes, expired
  // generations, malformed lines, duplicate txids. Same seed, same bytes.
  std::string write_random_dump(const std::string& dir, uint32_t seed, size_t lines);

  // Companion inputs for the random dump: a host list overlapping some of
  // the generated names and a geo table covering some generated addresses.
  std::string write_random_alexa(const std::string& dir, uint32_t seed);
  std::string write_random_geo(const std::string& dir);

  // Line-level permutation of an NDJSON file, seeded.
  std::string write_permuted(const std::string& src, const std::string& dst, uint32_t seed);
}
