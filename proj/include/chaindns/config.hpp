// Copyright (c) the chaindns authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "chaindns/crawler.hpp"
#include "chaindns/gateway.hpp"
#include "chaindns/namedb.hpp"

#include <optional>
#include <string>

namespace chaindns
{
  /// Process configuration. File values fill whatever the command line left
  /// untouched; flags always win.
  struct Config
  {
    std::string db_path = "chaindns.db";
    ExpiryPolicy policy;
    RoutingTable routing = RoutingTable::defaults();
    std::string tld_list_path;  // empty: builtin list
    std::string geo_csv_path;   // empty: no country tables
    std::string alexa_path;     // empty: correlation section empty
    std::string dns_host = "127.0.0.1";
    uint16_t dns_port = 8053;
    std::string rest_host = "127.0.0.1";
    uint16_t rest_port = 8080;
    uint32_t ttl = 300;
    bool drop_malformed = false;
    CrawlOptions crawl;
  };

  /// Parse failures and unknown keys throw std::runtime_error with a
  /// "path:line: message" prefix.
  Config load_config(const std::string& path);

  /// CHAINDNS_CONFIG; checked when --config is absent.
  const char* config_env_var();
}
