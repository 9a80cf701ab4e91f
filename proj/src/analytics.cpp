// Copyright (c) the chaindns authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "chaindns/analytics.hpp"

#include <arpa/inet.h>

#include <algorithm>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace chaindns
{
  // ------------------------------------------------------------- GeoTable

  void GeoTable::add(uint32_t network, int prefix_len, std::string country)
  {
    uint32_t mask = prefix_len <= 0 ? 0 : (prefix_len >= 32 ? ~0u : ~0u << (32 - prefix_len));
    entries_.push_back(Entry{network & mask, mask, prefix_len, std::move(country)});
  }

  namespace
  {
    std::optional<uint32_t> parse_ipv4_u32(const std::string& s)
    {
      in_addr addr{};
      if (::inet_pton(AF_INET, s.c_str(), &addr) != 1)
        return std::nullopt;
      return ntohl(addr.s_addr);
    }

    std::string trim(std::string s)
    {
      auto issp = [](unsigned char c) { return c == ' ' || c == '\t' || c == '\r'; };
      while (!s.empty() && issp(s.back()))
        s.pop_back();
      size_t i = 0;
      while (i < s.size() && issp(s[i]))
        i++;
      return s.substr(i);
    }
  }

  GeoTable GeoTable::load_csv(const std::string& path)
  {
    std::ifstream in(path);
    if (!in)
      throw std::runtime_error("cannot open geo table: " + path);

    GeoTable table;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line))
    {
      lineno++;
      line = trim(line);
      if (line.empty() || line[0] == '#')
        continue;
      auto comma = line.find(',');
      auto slash = line.find('/');
      if (comma == std::string::npos || slash == std::string::npos || slash > comma)
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": expected cidr,country");
      auto net = parse_ipv4_u32(line.substr(0, slash));
      int plen;
      try
      {
        plen = std::stoi(line.substr(slash + 1, comma - slash - 1));
      }
      catch (const std::exception&)
      {
        plen = -1;
      }
      std::string country = trim(line.substr(comma + 1));
      if (!net || plen < 0 || plen > 32 || country.empty())
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad cidr,country row");
      table.add(*net, plen, std::move(country));
    }
    return table;
  }

  std::string GeoTable::lookup(const std::string& ipv4) const
  {
    auto addr = parse_ipv4_u32(ipv4);
    if (!addr)
      return "??";
    const Entry* best = nullptr;
    for (const auto& e : entries_)
      if ((*addr & e.mask) == e.network && (!best || e.prefix_len > best->prefix_len))
        best = &e;
    return best ? best->country : "??";
  }

  // ------------------------------------------------------- counting passes

  std::map<uint64_t, uint64_t> length_distribution(std::span<const RecordView> views)
  {
    std::map<uint64_t, uint64_t> hist;
    for (const auto& v : views)
      hist[plain_sld(strip_namespace(v.raw_name())).size()]++;
    return hist;
  }

  std::map<std::string, uint64_t> tld_distribution(std::span<const RecordView> views)
  {
    std::map<std::string, uint64_t> counts;
    for (const auto& v : views)
    {
      if (!v.records.has_addresses())
        continue;
      const std::string& fqdn = v.fqdn();
      auto dot = fqdn.rfind('.');
      counts[dot == std::string::npos ? fqdn : fqdn.substr(dot + 1)]++;
    }
    return counts;
  }

  namespace
  {
    CountList top_k(std::unordered_map<std::string, uint64_t>& counts, size_t k)
    {
      CountList list(counts.begin(), counts.end());
      std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second)
          return a.second > b.second;
        return a.first < b.first;
      });
      if (list.size() > k)
        list.resize(k);
      return list;
    }
  }

  CountList top_registrants(std::span<const RecordView> views, size_t k)
  {
    std::unordered_map<std::string, uint64_t> counts;
    for (const auto& v : views)
      counts[v.folded.owner]++;
    return top_k(counts, k);
  }

  CountList ip_concentration(std::span<const RecordView> views, size_t k)
  {
    std::unordered_map<std::string, uint64_t> counts;
    for (const auto& v : views)
      for (const auto& ip : v.records.a)
        counts[ip]++;
    return top_k(counts, k);
  }

  // ----------------------------------------------------------- full report

  namespace
  {
    std::string month_bucket(int64_t unixtime)
    {
      time_t t = static_cast<time_t>(unixtime);
      tm parts{};
      gmtime_r(&t, &parts);
      // Buffer sized for the widest int year; far-future timestamps are legal.
      char buf[24];
      std::snprintf(buf, sizeof(buf), "%04d-%02d", parts.tm_year + 1900, parts.tm_mon + 1);
      return buf;
    }
  }

  StatsReport compute_stats(std::span<const RecordView> views, const StatsOptions& opts)
  {
    const TldSet& tlds = opts.known_tlds ? *opts.known_tlds : builtin_tlds();

    StatsReport r;
    r.policy.namecoin_horizon_blocks = opts.policy.namecoin_horizon_blocks;
    r.policy.emercoin_default_days = opts.policy.emercoin_default_days;
    r.policy.asof_height = opts.asof.height;
    r.policy.asof_time = opts.asof.time;
    r.policy.active_only = opts.active_only;
    r.policy.chain_filter = opts.chain_filter ? std::string(to_string(*opts.chain_filter)) : "all";
    r.policy.top_addresses = opts.top_addresses;
    r.policy.top_ips = opts.top_ips;

    // Alexa SLD set, extracted with the same suffix rules applied to records.
    std::set<std::string, std::less<>> alexa_slds;
    for (const auto& host : opts.alexa)
    {
      std::string_view sld = suffix_sld(host, tlds);
      if (!sld.empty())
        alexa_slds.insert(ascii_lower_copy(sld));
    }

    std::unordered_map<std::string, uint64_t> registrants;
    std::unordered_map<std::string, uint64_t> per_ip;
    std::map<std::string, std::set<std::string>> alexa_groups;
    std::unordered_set<std::string> seen_ips;

    for (const auto& v : views)
    {
      if (opts.chain_filter && v.chain() != *opts.chain_filter)
        continue;
      r.considered++;

      std::string_view stripped = strip_namespace(v.raw_name());
      r.length_histogram[plain_sld(stripped).size()]++;

      if (v.records.has_addresses())
      {
        const std::string& fqdn = v.fqdn();
        auto dot = fqdn.rfind('.');
        r.tld_counts[dot == std::string::npos ? fqdn : fqdn.substr(dot + 1)]++;
      }

      registrants[v.folded.owner]++;

      for (const auto& ip : v.records.a)
      {
        per_ip[ip]++;
        if (opts.geo)
        {
          r.country_events[opts.geo->lookup(ip)]++;
          if (seen_ips.insert(ip).second)
            r.country_unique_ips[opts.geo->lookup(ip)]++;
        }
      }

      LexicalProfile prof = lexical_profile(v.raw_name(), tlds);
      bool is_com = prof.embedded_tld && *prof.embedded_tld == "com";
      if (is_com)
        r.lexical_embedded_com++;
      if (prof.is_punycode)
        r.lexical_punycode++;
      if (prof.has_capitals)
        r.lexical_capitals++;
      if (prof.has_whitespace)
        r.lexical_whitespace++;

      SaleMatch sale = is_sale_offer(v.folded.value);
      if (sale.strict)
      {
        r.sale_strict++;
        r.sale_listing.push_back(SaleListing{v.fqdn(), v.raw_name(), sale.markers});
      }
      if (sale.loose)
        r.sale_loose++;

      std::string sld = ascii_lower_copy(suffix_sld(stripped, tlds));
      if (alexa_slds.count(sld))
      {
        r.alexa_matches++;
        std::string stripped_lower = ascii_lower_copy(stripped);
        std::string variant =
          stripped_lower.size() > sld.size() ? stripped_lower.substr(sld.size() + 1) : "";
        alexa_groups[sld].insert(variant);
      }

      std::string bucket = month_bucket(v.state->history.front().time);
      r.timeline[bucket]++;
      if (is_com)
        r.timeline_com[bucket]++;
    }

    r.top_registrants = top_k(registrants, opts.top_addresses);
    r.ip_concentration = top_k(per_ip, opts.top_ips);

    std::sort(r.sale_listing.begin(), r.sale_listing.end(),
              [](const SaleListing& a, const SaleListing& b) {
                if (a.fqdn != b.fqdn)
                  return a.fqdn < b.fqdn;
                return a.raw_name < b.raw_name;
              });

    r.alexa_unique_slds = alexa_groups.size();
    for (auto& [sld, variants] : alexa_groups)
      r.alexa_groups.push_back(AlexaGroup{sld, {variants.begin(), variants.end()}});

    return r;
  }

  std::vector<std::string> load_host_list(const std::string& path)
  {
    std::ifstream in(path);
    if (!in)
      throw std::runtime_error("cannot open host list: " + path);
    std::vector<std::string> hosts;
    std::string line;
    while (std::getline(in, line))
    {
      line = trim(line);
      if (line.empty() || line[0] == '#')
        continue;
      hosts.push_back(ascii_lower_copy(line));
    }
    return hosts;
  }

  // --------------------------------------------------------------- output

  namespace
  {
    nlohmann::json pairs_json(const CountList& list)
    {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& [key, count] : list)
        arr.push_back(nlohmann::json::array({key, count}));
      return arr;
    }

    template <typename K>
    nlohmann::json map_json(const std::map<K, uint64_t>& m)
    {
      if constexpr (std::is_same_v<K, uint64_t>)
      {
        // Numeric keys as sorted pairs, not an object: object keys would
        // sort as strings and shuffle the histogram.
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& [k, v] : m)
          arr.push_back(nlohmann::json::array({k, v}));
        return arr;
      }
      else
      {
        nlohmann::json obj = nlohmann::json::object();
        for (const auto& [k, v] : m)
          obj[k] = v;
        return obj;
      }
    }
  }

  std::string report_to_json(const StatsReport& r)
  {
    nlohmann::json j;
    j["policy"] = {{"namecoin_horizon_blocks", r.policy.namecoin_horizon_blocks},
                   {"emercoin_default_days", r.policy.emercoin_default_days},
                   {"asof_height", r.policy.asof_height},
                   {"asof_time", r.policy.asof_time},
                   {"active_only", r.policy.active_only},
                   {"chain_filter", r.policy.chain_filter},
                   {"top_addresses", r.policy.top_addresses},
                   {"top_ips", r.policy.top_ips}};
    j["considered"] = r.considered;
    j["length_histogram"] = map_json(r.length_histogram);
    j["tld_counts"] = map_json(r.tld_counts);
    j["top_registrants"] = pairs_json(r.top_registrants);
    j["ip_concentration"] = pairs_json(r.ip_concentration);
    j["lexical"] = {{"embedded_com", r.lexical_embedded_com},
                    {"punycode", r.lexical_punycode},
                    {"capitals", r.lexical_capitals},
                    {"whitespace", r.lexical_whitespace}};
    nlohmann::json listing = nlohmann::json::array();
    for (const auto& s : r.sale_listing)
      listing.push_back({{"fqdn", s.fqdn}, {"name", s.raw_name}, {"markers", s.markers}});
    j["sale"] = {{"strict", r.sale_strict}, {"loose", r.sale_loose}, {"listing", listing}};
    nlohmann::json groups = nlohmann::json::array();
    for (const auto& g : r.alexa_groups)
      groups.push_back({{"sld", g.sld}, {"tlds", g.tlds}});
    j["alexa"] = {{"matches", r.alexa_matches},
                  {"unique_slds", r.alexa_unique_slds},
                  {"groups", groups}};
    j["timeline"] = map_json(r.timeline);
    j["timeline_com"] = map_json(r.timeline_com);
    j["country_events"] = map_json(r.country_events);
    j["country_unique_ips"] = map_json(r.country_unique_ips);
    return j.dump(2) + "\n";
  }

  namespace
  {
    void table_header(std::ostringstream& out, const std::string& title)
    {
      out << "\n" << title << "\n" << std::string(title.size(), '-') << "\n";
    }
  }

  std::string report_to_text(const StatsReport& r)
  {
    std::ostringstream out;
    out << "records considered: " << r.considered << "  (chain=" << r.policy.chain_filter
        << ", active_only=" << (r.policy.active_only ? "yes" : "no")
        << ", asof_height=" << r.policy.asof_height << ")\n";

    table_header(out, "name length histogram (SLD bytes)");
    for (const auto& [len, n] : r.length_histogram)
      out << "  " << len << "\t" << n << "\n";

    table_header(out, "TLDs of records with addresses");
    {
      CountList rows(r.tld_counts.begin(), r.tld_counts.end());
      std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second)
          return a.second > b.second;
        return a.first < b.first;
      });
      for (const auto& [tld, n] : rows)
        out << "  " << tld << "\t" << n << "\n";
    }

    table_header(out, "top registrant addresses");
    for (const auto& [addr, n] : r.top_registrants)
      out << "  " << addr << "\t" << n << "\n";

    table_header(out, "top A-record addresses");
    for (const auto& [ip, n] : r.ip_concentration)
      out << "  " << ip << "\t" << n << "\n";

    table_header(out, "lexical anomalies");
    out << "  embedded .com\t" << r.lexical_embedded_com << "\n"
        << "  punycode\t" << r.lexical_punycode << "\n"
        << "  capitals\t" << r.lexical_capitals << "\n"
        << "  whitespace\t" << r.lexical_whitespace << "\n";

    table_header(out, "sale offers");
    out << "  strict\t" << r.sale_strict << "\n  loose\t" << r.sale_loose << "\n";

    table_header(out, "popular-list correlation");
    out << "  matches\t" << r.alexa_matches << "\n  unique SLDs\t" << r.alexa_unique_slds << "\n";

    table_header(out, "registrations per month");
    for (const auto& [month, n] : r.timeline)
    {
      out << "  " << month << "\t" << n;
      auto it = r.timeline_com.find(month);
      if (it != r.timeline_com.end())
        out << "\t(.com " << it->second << ")";
      out << "\n";
    }

    if (!r.country_events.empty())
    {
      table_header(out, "countries (per address event / per unique address)");
      for (const auto& [cc, n] : r.country_events)
      {
        auto it = r.country_unique_ips.find(cc);
        out << "  " << cc << "\t" << n << "\t" << (it != r.country_unique_ips.end() ? it->second : 0)
            << "\n";
      }
    }
    return out.str();
  }

  void write_report_files(const StatsReport& r, const std::string& dir)
  {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    auto write = [&](const std::string& name, const std::string& body) {
      std::ofstream out(fs::path(dir) / name, std::ios::binary);
      if (!out)
        throw std::runtime_error("cannot write " + name + " under " + dir);
      out << body;
    };

    write("report.json", report_to_json(r));
    write("report.txt", report_to_text(r));

    std::ostringstream hist;
    hist << "length,count\n";
    for (const auto& [len, n] : r.length_histogram)
      hist << len << "," << n << "\n";
    write("length_histogram.csv", hist.str());

    std::ostringstream tl;
    tl << "month,registrations,embedded_com\n";
    for (const auto& [month, n] : r.timeline)
    {
      auto it = r.timeline_com.find(month);
      tl << month << "," << n << "," << (it != r.timeline_com.end() ? it->second : 0) << "\n";
    }
    write("timeline.csv", tl.str());

    nlohmann::json manifest;
    manifest["files"] = {"report.json", "report.txt", "length_histogram.csv", "timeline.csv"};
    manifest["considered"] = r.considered;
    write("manifest.json", manifest.dump(2) + "\n");
  }
}
