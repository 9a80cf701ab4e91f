// Copyright (c) the chaindns authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "chaindns/nvs.hpp"

#include <nlohmann/json.hpp>

#include <arpa/inet.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace chaindns
{
  namespace
  {
    bool is_ws_byte(char c)
    {
      return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    }

    std::optional<std::string> canonical_ipv4(std::string_view s)
    {
      if (s.empty() || s.size() > 15)
        return std::nullopt;
      char buf[16];
      std::memcpy(buf, s.data(), s.size());
      buf[s.size()] = '\0';
      in_addr addr{};
      if (inet_pton(AF_INET, buf, &addr) != 1)
        return std::nullopt;
      char out[INET_ADDRSTRLEN];
      inet_ntop(AF_INET, &addr, out, sizeof(out));
      return std::string(out);
    }

    std::optional<std::string> canonical_ipv6(std::string_view s)
    {
      if (s.empty() || s.size() > 45)
        return std::nullopt;
      char buf[46];
      std::memcpy(buf, s.data(), s.size());
      buf[s.size()] = '\0';
      in6_addr addr{};
      if (inet_pton(AF_INET6, buf, &addr) != 1)
        return std::nullopt;
      char out[INET6_ADDRSTRLEN];
      inet_ntop(AF_INET6, &addr, out, sizeof(out));
      return std::string(out);
    }

    void push_unique(std::vector<std::string>& list, std::string v)
    {
      if (std::find(list.begin(), list.end(), v) == list.end())
        list.push_back(std::move(v));
    }

    void add_address(DnsRecordSet& rs, bool v6, std::string_view item, std::string_view context)
    {
      auto canon = v6 ? canonical_ipv6(item) : canonical_ipv4(item);
      if (canon)
        push_unique(v6 ? rs.aaaa : rs.a, std::move(*canon));
      else
        rs.warnings.push_back(std::string("invalid ") + (v6 ? "AAAA" : "A") + " address in " +
                              std::string(context) + ": " + std::string(item));
    }

    std::vector<std::string_view> split(std::string_view s, char sep)
    {
      std::vector<std::string_view> out;
      size_t start = 0;
      while (true)
      {
        size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos)
        {
          out.push_back(s.substr(start));
          return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
      }
    }
  }

  std::string_view to_string(NamespaceTag t)
  {
    switch (t)
    {
      case NamespaceTag::d:
        return "d";
      case NamespaceTag::dns:
        return "dns";
      default:
        return "other";
    }
  }

  std::optional<FqdnInfo> name_to_fqdn(Chain chain, std::string_view raw_name)
  {
    if (chain == Chain::namecoin && raw_name.starts_with("d/"))
    {
      auto sld = raw_name.substr(2);
      if (sld.empty())
        return std::nullopt;
      return FqdnInfo{ascii_lower_copy(sld) + ".bit", NamespaceTag::d};
    }
    if (chain == Chain::emercoin && raw_name.starts_with("dns:"))
    {
      auto host = raw_name.substr(4);
      if (host.empty())
        return std::nullopt;
      return FqdnInfo{ascii_lower_copy(host), NamespaceTag::dns};
    }
    if (raw_name.empty())
      return std::nullopt;
    return FqdnInfo{ascii_lower_copy(raw_name), NamespaceTag::other};
  }

  DnsRecordSet parse_emercoin_value(std::string_view value)
  {
    DnsRecordSet rs;
    if (value.empty())
      return rs;
    for (auto token : split(value, '|'))
    {
      if (token.empty())
        continue;
      size_t eq = token.find('=');
      if (eq == std::string_view::npos)
      {
        // Free text, e.g. a sale notice occupying the whole value.
        rs.extras.emplace_back(token);
        continue;
      }
      auto key = token.substr(0, eq);
      auto payload = token.substr(eq + 1);
      if (key == "A" || key == "AAAA")
      {
        for (auto item : split(payload, ','))
          if (!item.empty())
            add_address(rs, key == "AAAA", item, key);
      }
      else if (key == "NS")
      {
        for (auto item : split(payload, ','))
          if (!item.empty())
            push_unique(rs.ns, std::string(item));
      }
      else if (key == "TXT")
      {
        for (auto item : split(payload, ','))
          if (!item.empty())
            push_unique(rs.txt, std::string(item));
      }
      else
      {
        rs.extras.emplace_back(token);
      }
    }
    return rs;
  }

  std::string serialize_emercoin_value(const DnsRecordSet& rs)
  {
    std::string out;
    auto append = [&out](std::string_view key, const std::vector<std::string>& items) {
      if (items.empty())
        return;
      if (!out.empty())
        out += '|';
      out += key;
      out += '=';
      for (size_t i = 0; i < items.size(); i++)
      {
        if (i)
          out += ',';
        out += items[i];
      }
    };
    append("A", rs.a);
    append("AAAA", rs.aaaa);
    append("NS", rs.ns);
    append("TXT", rs.txt);
    return out;
  }

  namespace
  {
    void collect_json_addresses(DnsRecordSet& rs, const nlohmann::json& node, bool v6,
                                std::string_view context)
    {
      if (node.is_string())
        add_address(rs, v6, node.get_ref<const std::string&>(), context);
      else if (node.is_array())
      {
        for (const auto& item : node)
        {
          if (item.is_string())
            add_address(rs, v6, item.get_ref<const std::string&>(), context);
          else
            rs.warnings.push_back("non-string address entry in " + std::string(context));
        }
      }
      else
        rs.warnings.push_back("unexpected value shape for " + std::string(context));
    }
  }

  NamecoinValue parse_namecoin_value(std::string_view value)
  {
    NamecoinValue out;
    auto doc = nlohmann::json::parse(value, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded() || !doc.is_object())
    {
      out.root.warnings.push_back("value is not a JSON object");
      return out;
    }
    for (const auto& [key, node] : doc.items())
    {
      if (key == "ip")
        collect_json_addresses(out.root, node, false, "ip");
      else if (key == "ip6")
        collect_json_addresses(out.root, node, true, "ip6");
      else if (key == "ns")
      {
        if (node.is_string())
          push_unique(out.root.ns, node.get<std::string>());
        else if (node.is_array())
        {
          for (const auto& item : node)
          {
            if (item.is_string())
              push_unique(out.root.ns, item.get<std::string>());
            else
              out.root.warnings.push_back("non-string ns entry");
          }
        }
        else
          out.root.warnings.push_back("unexpected value shape for ns");
      }
      else if (key == "map")
      {
        if (!node.is_object())
        {
          out.root.warnings.push_back("map is not an object");
          continue;
        }
        for (const auto& [sub, subnode] : node.items())
        {
          if (!subnode.is_object())
          {
            out.root.warnings.push_back("map entry " + sub + " is not an object");
            continue;
          }
          DnsRecordSet subset;
          for (const auto& [skey, sval] : subnode.items())
          {
            if (skey == "ip")
              collect_json_addresses(subset, sval, false, "map." + sub + ".ip");
            else if (skey == "ip6")
              collect_json_addresses(subset, sval, true, "map." + sub + ".ip6");
            else
              // One level only; deeper structure is preserved verbatim.
              subset.extras.push_back(skey + "=" + sval.dump());
          }
          out.subs.emplace_back(sub, std::move(subset));
        }
      }
      else
      {
        // alias, email, tls and anything else the chain may carry.
        out.root.extras.push_back(key + "=" + node.dump());
      }
    }
    return out;
  }

  const TldSet& builtin_tlds()
  {
    static const TldSet tlds = {
      "com",  "net",  "org",  "edu", "gov", "mil", "int",   "info", "biz", "name",
      "mobi", "pro",  "io",   "co",  "me",  "tv",  "cc",    "in",   "cn",  "jp",
      "kr",   "tw",   "hk",   "sg",  "ru",  "su",  "ua",    "de",   "fr",  "uk",
      "nl",   "be",   "at",   "ch",  "it",  "es",  "pt",    "se",   "no",  "fi",
      "dk",   "pl",   "cz",   "gr",  "ro",  "hu",  "ie",    "il",   "mx",  "br",
      "ar",   "ca",   "au",   "nz",  "us",  "za",  "co.uk", "org.uk"};
    return tlds;
  }

  TldSet load_tld_file(const std::string& path)
  {
    std::ifstream in(path);
    if (!in)
      throw std::runtime_error("cannot open TLD list: " + path);
    TldSet out;
    std::string line;
    while (std::getline(in, line))
    {
      auto hash = line.find('#');
      if (hash != std::string::npos)
        line.erase(hash);
      size_t b = 0, e = line.size();
      while (b < e && is_ws_byte(line[b]))
        b++;
      while (e > b && is_ws_byte(line[e - 1]))
        e--;
      if (b == e)
        continue;
      out.insert(ascii_lower_copy(std::string_view(line).substr(b, e - b)));
    }
    return out;
  }

  std::string_view strip_namespace(std::string_view raw_name)
  {
    if (raw_name.starts_with("dns:"))
      return raw_name.substr(4);
    auto slash = raw_name.find('/');
    if (slash != std::string_view::npos)
      return raw_name.substr(slash + 1);
    return raw_name;
  }

  std::string_view plain_sld(std::string_view stripped)
  {
    auto last = stripped.rfind('.');
    if (last == std::string_view::npos)
      return stripped;
    auto head = stripped.substr(0, last);
    auto prev = head.rfind('.');
    return prev == std::string_view::npos ? head : head.substr(prev + 1);
  }

  std::string_view suffix_sld(std::string_view host, const TldSet& known_tlds)
  {
    // Longest known suffix with at least one label to its left.
    size_t pos = 0;
    std::string lowered = ascii_lower_copy(host);
    std::string_view lv = lowered;
    size_t best = std::string_view::npos; // offset of the suffix start
    while (true)
    {
      auto dot = lv.find('.', pos);
      if (dot == std::string_view::npos)
        break;
      auto suffix = lv.substr(dot + 1);
      if (!suffix.empty() && known_tlds.count(suffix))
      {
        best = dot + 1;
        break; // leftmost match is the longest suffix
      }
      pos = dot + 1;
    }
    std::string_view head;
    if (best == std::string_view::npos)
      head = host; // no known suffix: fall back to the plain split
    else
      head = host.substr(0, best - 1);
    auto prev = head.rfind('.');
    return prev == std::string_view::npos ? head : head.substr(prev + 1);
  }

  LexicalProfile lexical_profile(std::string_view raw_name, const TldSet& known_tlds)
  {
    LexicalProfile p;
    auto stripped = strip_namespace(raw_name);
    if (stripped.empty())
      return p;

    for (char c : stripped)
    {
      if (c >= 'A' && c <= 'Z')
        p.has_capitals = true;
      if (is_ws_byte(c))
        p.has_whitespace = true;
    }

    // Label scan: punycode prefix on any label, known TLD as the last one.
    size_t start = 0;
    bool has_dot = stripped.find('.') != std::string_view::npos;
    while (start <= stripped.size())
    {
      auto dot = stripped.find('.', start);
      auto label = stripped.substr(start, dot == std::string_view::npos ? dot : dot - start);
      if (label.size() >= 4)
      {
        // xn-- compared without case so capitalized variants still count
        if (ascii_lower(label[0]) == 'x' && ascii_lower(label[1]) == 'n' && label[2] == '-' &&
            label[3] == '-')
          p.is_punycode = true;
      }
      if (dot == std::string_view::npos)
      {
        if (has_dot && !label.empty())
        {
          auto lowered = ascii_lower_copy(label);
          if (known_tlds.count(std::string_view(lowered)))
            p.embedded_tld = lowered;
        }
        break;
      }
      start = dot + 1;
    }

    auto sld = plain_sld(stripped);
    p.length = sld.size();
    if (!sld.empty())
    {
      std::array<uint32_t, 256> freq{};
      for (unsigned char c : sld)
        freq[c]++;
      double entropy = 0.0;
      const double n = static_cast<double>(sld.size());
      for (uint32_t f : freq)
      {
        if (!f)
          continue;
        double prob = f / n;
        entropy -= prob * std::log2(prob);
      }
      p.shannon_entropy = entropy;
    }
    return p;
  }

  SaleMatch is_sale_offer(std::string_view value)
  {
    SaleMatch m;
    // case-insensitive "for sale"
    static constexpr std::string_view needle = "for sale";
    size_t match_pos = std::string_view::npos;
    if (value.size() >= needle.size())
    {
      for (size_t i = 0; i + needle.size() <= value.size(); i++)
      {
        size_t j = 0;
        while (j < needle.size() && ascii_lower(value[i + j]) == needle[j])
          j++;
        if (j == needle.size())
        {
          match_pos = i;
          break;
        }
      }
    }
    if (match_pos != std::string_view::npos)
    {
      m.strict = m.loose = true;
      m.markers.push_back("for-sale");
    }

    bool dollar_any = false, dollar_amount = false;
    size_t dollar_pos = std::string_view::npos;
    for (size_t i = 0; i < value.size(); i++)
    {
      if (value[i] != '$')
        continue;
      dollar_any = true;
      if (dollar_pos == std::string_view::npos)
        dollar_pos = i;
      bool digit_after = i + 1 < value.size() && value[i + 1] >= '0' && value[i + 1] <= '9';
      bool digit_before = i > 0 && value[i - 1] >= '0' && value[i - 1] <= '9';
      if (digit_after || digit_before)
      {
        dollar_amount = true;
        dollar_pos = i;
        break;
      }
    }
    if (dollar_amount)
    {
      m.strict = m.loose = true;
      m.markers.push_back("dollar-amount");
    }
    else if (dollar_any)
    {
      m.loose = true;
      m.markers.push_back("dollar-sign");
    }

    size_t at = match_pos != std::string_view::npos ? match_pos : dollar_pos;
    if (at != std::string_view::npos)
    {
      size_t from = at >= 16 ? at - 16 : 0;
      m.excerpt = std::string(value.substr(from, std::min<size_t>(48, value.size() - from)));
    }
    return m;
  }
}
