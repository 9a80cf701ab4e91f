// Copyright (c) the chaindns authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "chaindns/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace chaindns
{
  const char* config_env_var()
  {
    return "CHAINDNS_CONFIG";
  }

  namespace
  {
    [[noreturn]] void fail(const std::string& path, size_t line, const std::string& msg)
    {
      throw std::runtime_error(path + ":" + std::to_string(line) + ": " + msg);
    }

    size_t line_of_byte(const std::string& text, size_t byte)
    {
      size_t line = 1;
      for (size_t i = 0; i < byte && i < text.size(); i++)
        if (text[i] == '\n')
          line++;
      return line;
    }

    /// First occurrence of the quoted key, for anchoring semantic errors.
    size_t line_of_key(const std::string& text, const std::string& key)
    {
      auto pos = text.find("\"" + key + "\"");
      return pos == std::string::npos ? 1 : line_of_byte(text, pos);
    }

    uint16_t as_port(const std::string& path, const std::string& text, const std::string& key,
                     const nlohmann::json& v)
    {
      if (!v.is_number_unsigned() || v.get<uint64_t>() > 65535)
        fail(path, line_of_key(text, key), key + " must be a port number (0-65535)");
      return static_cast<uint16_t>(v.get<uint64_t>());
    }
  }

  Config load_config(const std::string& path)
  {
    std::ifstream in(path, std::ios::binary);
    if (!in)
      fail(path, 0, "cannot open config file");
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();

    nlohmann::json j;
    try
    {
      j = nlohmann::json::parse(text);
    }
    catch (const nlohmann::json::parse_error& e)
    {
      fail(path, line_of_byte(text, e.byte > 0 ? e.byte - 1 : 0), e.what());
    }
    if (!j.is_object())
      fail(path, 1, "config root must be an object");

    Config cfg;
    for (const auto& [key, value] : j.items())
    {
      size_t line = line_of_key(text, key);
      auto need = [&](bool ok, const char* what) {
        if (!ok)
          fail(path, line, key + " must be " + what);
      };

      if (key == "db_path")
      {
        need(value.is_string(), "a string");
        cfg.db_path = value.get<std::string>();
      }
      else if (key == "namecoin_horizon_blocks")
      {
        need(value.is_number_unsigned() && value.get<uint64_t>() > 0, "a positive integer");
        cfg.policy.namecoin_horizon_blocks = value.get<uint64_t>();
      }
      else if (key == "emercoin_default_days")
      {
        need(value.is_number_unsigned() && value.get<uint64_t>() > 0 &&
               value.get<uint64_t>() <= UINT32_MAX,
             "a positive integer");
        cfg.policy.emercoin_default_days = value.get<uint32_t>();
      }
      else if (key == "routing")
      {
        need(value.is_object(), "an object mapping TLD to chain");
        cfg.routing.tld_to_chain.clear();
        for (const auto& [tld, chain] : value.items())
        {
          if (tld == "unknown_tld")
          {
            std::string action = chain.is_string() ? chain.get<std::string>() : "";
            if (action == "nxdomain")
              cfg.routing.unknown_action = RoutingTable::UnknownTld::nxdomain;
            else if (action == "refuse")
              cfg.routing.unknown_action = RoutingTable::UnknownTld::refuse;
            else
              fail(path, line_of_key(text, tld), "unknown_tld must be nxdomain or refuse");
            continue;
          }
          auto parsed = chain.is_string() ? chain_from_string(chain.get<std::string>())
                                          : std::nullopt;
          if (!parsed)
            fail(path, line_of_key(text, tld),
                 "routing." + tld + " must be namecoin or emercoin");
          cfg.routing.tld_to_chain[ascii_lower_copy(tld)] = *parsed;
        }
      }
      else if (key == "tld_list")
      {
        need(value.is_string(), "a string");
        cfg.tld_list_path = value.get<std::string>();
      }
      else if (key == "geo_csv")
      {
        need(value.is_string(), "a string");
        cfg.geo_csv_path = value.get<std::string>();
      }
      else if (key == "alexa_list")
      {
        need(value.is_string(), "a string");
        cfg.alexa_path = value.get<std::string>();
      }
      else if (key == "dns_host")
      {
        need(value.is_string(), "a string");
        cfg.dns_host = value.get<std::string>();
      }
      else if (key == "dns_port")
      {
        cfg.dns_port = as_port(path, text, key, value);
      }
      else if (key == "rest_host")
      {
        need(value.is_string(), "a string");
        cfg.rest_host = value.get<std::string>();
      }
      else if (key == "rest_port")
      {
        cfg.rest_port = as_port(path, text, key, value);
      }
      else if (key == "ttl")
      {
        need(value.is_number_unsigned() && value.get<uint64_t>() <= UINT32_MAX, "an integer TTL");
        cfg.ttl = value.get<uint32_t>();
      }
      else if (key == "drop_malformed")
      {
        need(value.is_boolean(), "a boolean");
        cfg.drop_malformed = value.get<bool>();
      }
      else if (key == "crawl")
      {
        need(value.is_object(), "an object");
        for (const auto& [ck, cv] : value.items())
        {
          size_t cline = line_of_key(text, ck);
          auto cneed = [&](bool ok, const char* what) {
            if (!ok)
              fail(path, cline, "crawl." + ck + " must be " + what);
          };
          if (ck == "concurrency")
          {
            cneed(cv.is_number_unsigned() && cv.get<uint64_t>() >= 1, "a positive integer");
            cfg.crawl.concurrency = cv.get<int>();
          }
          else if (ck == "rate_per_sec")
          {
            cneed(cv.is_number() && cv.get<double>() >= 0, "a non-negative number");
            cfg.crawl.rate_per_sec = cv.get<double>();
          }
          else if (ck == "timeout_ms")
          {
            cneed(cv.is_number_unsigned() && cv.get<uint64_t>() >= 1, "a positive integer");
            cfg.crawl.timeout_ms = cv.get<int>();
          }
          else if (ck == "probe_http")
          {
            cneed(cv.is_boolean(), "a boolean");
            cfg.crawl.probe_http = cv.get<bool>();
          }
          else if (ck == "probe_timeout_ms")
          {
            cneed(cv.is_number_unsigned() && cv.get<uint64_t>() >= 1, "a positive integer");
            cfg.crawl.probe_timeout_ms = cv.get<int>();
          }
          else if (ck == "abort_after_connect_failures")
          {
            cneed(cv.is_number_unsigned(), "a non-negative integer");
            cfg.crawl.abort_after_connect_failures = cv.get<int>();
          }
          else
          {
            fail(path, cline, "unknown key crawl." + ck);
          }
        }
      }
      else
      {
        fail(path, line, "unknown key " + key);
      }
    }
    return cfg;
  }
}
