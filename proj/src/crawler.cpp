// Copyright (c) the chaindns authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "chaindns/crawler.hpp"

#include <arpa/inet.h>

#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "httplib.h"
#include "json.hpp"

namespace chaindns
{
  std::vector<std::string> generate_candidates(const std::vector<std::string>& slds,
                                               const std::vector<std::string>& tlds)
  {
    auto dedup = [](const std::vector<std::string>& in) {
      std::vector<std::string> out;
      std::unordered_set<std::string> seen;
      for (const auto& s : in)
        if (!s.empty() && seen.insert(s).second)
          out.push_back(s);
      return out;
    };
    std::vector<std::string> s = dedup(slds);
    std::vector<std::string> t = dedup(tlds);

    std::vector<std::string> candidates;
    candidates.reserve(s.size() * t.size());
    for (const auto& sld : s)
      for (const auto& tld : t)
        candidates.push_back(sld + "." + tld);
    return candidates;
  }

  bool is_private_ip(const std::string& ipv4)
  {
    in_addr addr{};
    if (::inet_pton(AF_INET, ipv4.c_str(), &addr) != 1)
      return false;
    uint32_t v = ntohl(addr.s_addr);
    return (v & 0xff000000) == 0x0a000000 || // 10.0.0.0/8
           (v & 0xfff00000) == 0xac100000 || // 172.16.0.0/12
           (v & 0xffff0000) == 0xc0a80000 || // 192.168.0.0/16
           (v & 0xff000000) == 0x7f000000 || // 127.0.0.0/8
           (v & 0xffff0000) == 0xa9fe0000;   // 169.254.0.0/16
  }

  // ---------------------------------------------------------- journal I/O

  std::string crawl_result_to_json(const CrawlResult& r)
  {
    nlohmann::json j;
    j["fqdn"] = r.fqdn;
    j["registered"] = r.registered;
    nlohmann::json ips = nlohmann::json::array();
    for (const auto& obs : r.ips)
      ips.push_back({{"ip", obs.ip}, {"private", obs.is_private}});
    j["ips"] = ips;
    if (r.http_status)
      j["status"] = *r.http_status;
    if (r.redirect)
      j["redirect"] = *r.redirect;
    if (r.error)
      j["error"] = *r.error;
    return j.dump();
  }

  CrawlResult crawl_result_from_json(std::string_view line)
  {
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      throw std::runtime_error("journal line is not a JSON object");

    CrawlResult r;
    r.fqdn = j.at("fqdn").get<std::string>();
    r.registered = j.at("registered").get<bool>();
    for (const auto& obs : j.at("ips"))
      r.ips.push_back(IpObservation{obs.at("ip").get<std::string>(),
                                    obs.at("private").get<bool>()});
    if (j.contains("status"))
      r.http_status = j["status"].get<int>();
    if (j.contains("redirect"))
      r.redirect = j["redirect"].get<std::string>();
    if (j.contains("error"))
      r.error = j["error"].get<std::string>();
    return r;
  }

  // --------------------------------------------------------------- crawl

  namespace
  {
    using Clock = std::chrono::steady_clock;

    /// Capacity of a single token: strict pacing, so the observed rate over
    /// any window overshoots the configured one by at most one request.
    class TokenBucket
    {
    public:
      explicit TokenBucket(double rate) : rate_(rate), tokens_(1.0), last_(Clock::now()) {}

      void acquire(const std::atomic<bool>& cancelled)
      {
        if (rate_ <= 0)
          return;
        for (;;)
        {
          if (cancelled.load(std::memory_order_relaxed))
            return;
          double wait_s;
          {
            std::lock_guard lock(mu_);
            auto now = Clock::now();
            tokens_ = std::min(1.0, tokens_ + std::chrono::duration<double>(now - last_).count() *
                                               rate_);
            last_ = now;
            if (tokens_ >= 1.0)
            {
              tokens_ -= 1.0;
              return;
            }
            wait_s = (1.0 - tokens_) / rate_;
          }
          std::this_thread::sleep_for(
            std::min(std::chrono::duration<double>(wait_s), std::chrono::duration<double>(0.05)));
        }
      }

    private:
      double rate_;
      double tokens_;
      Clock::time_point last_;
      std::mutex mu_;
    };

    std::string normalize_endpoint(const std::string& endpoint)
    {
      if (endpoint.rfind("http://", 0) == 0 || endpoint.rfind("https://", 0) == 0)
        return endpoint;
      return "http://" + endpoint;
    }

    std::unique_ptr<httplib::Client> make_client(const std::string& base, int timeout_ms)
    {
      auto cli = std::make_unique<httplib::Client>(base);
      cli->set_connection_timeout(std::chrono::milliseconds(timeout_ms));
      cli->set_read_timeout(std::chrono::milliseconds(timeout_ms));
      cli->set_write_timeout(std::chrono::milliseconds(timeout_ms));
      return cli;
    }

    /// One resolution query. Returns false on a transport-level failure
    /// (the only kind that feeds the consecutive-failure abort).
    bool resolve_candidate(httplib::Client& cli, const std::string& fqdn, CrawlResult& out)
    {
      out.fqdn = fqdn;
      auto res = cli.Get("/resolve", httplib::Params{{"name", fqdn}, {"type", "ANY"}},
                         httplib::Headers{});
      if (!res)
      {
        out.error = "transport: " + httplib::to_string(res.error());
        return false;
      }
      if (res->status == 503)
      {
        out.error = "gateway-transient";
        return true;
      }
      if (res->status != 200)
      {
        out.error = "http-" + std::to_string(res->status);
        return true;
      }

      nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
      if (j.is_discarded() || !j.is_object() || !j.contains("status"))
      {
        out.error = "bad-response";
        return true;
      }
      std::string status = j["status"].get<std::string>();
      if (status == "ok" || status == "no_address_data")
      {
        out.registered = true;
        if (j.contains("answers") && j["answers"].is_object())
        {
          for (const char* key : {"a", "aaaa"})
          {
            auto it = j["answers"].find(key);
            if (it != j["answers"].end() && it->is_array())
              for (const auto& ip : *it)
                if (ip.is_string())
                  out.ips.push_back(
                    IpObservation{ip.get<std::string>(), is_private_ip(ip.get<std::string>())});
          }
        }
      }
      return true;
    }
  }

  void http_probe(CrawlResult& r, int timeout_ms)
  {
    if (r.ips.empty())
      return;

    // Test fixtures inject "ip:port"; bare addresses probe port 80.
    const std::string& target = r.ips.front().ip;
    auto colon = target.rfind(':');
    std::string host = target;
    int port = 80;
    if (colon != std::string::npos && target.find(':') == colon) // not IPv6
    {
      host = target.substr(0, colon);
      port = std::atoi(target.c_str() + colon + 1);
    }

    httplib::Client cli(host, port);
    cli.set_connection_timeout(std::chrono::milliseconds(timeout_ms));
    cli.set_read_timeout(std::chrono::milliseconds(timeout_ms));
    cli.set_follow_location(false);

    size_t received = 0;
    auto res = cli.Get(
      "/", httplib::Headers{{"Host", r.fqdn}},
      [&](const httplib::Response& response) {
        r.http_status = response.status;
        if (response.status >= 300 && response.status < 400 && response.has_header("Location"))
          r.redirect = response.get_header_value("Location");
        return true;
      },
      [&](const char*, size_t n) {
        received += n;
        return received <= 4096; // past the cap: abort the transfer
      });
    (void)res;
    if (!r.http_status)
      r.error = r.error ? *r.error + "; probe-error" : "probe-error";
  }

  std::vector<CrawlResult> crawl(const std::vector<std::string>& candidates,
                                 const std::string& endpoint, const CrawlOptions& opts,
                                 const std::string& journal_path)
  {
    std::unordered_map<std::string, CrawlResult> done;

    if (!journal_path.empty())
    {
      std::ifstream in(journal_path);
      std::string line;
      while (std::getline(in, line))
      {
        if (line.empty())
          continue;
        try
        {
          CrawlResult r = crawl_result_from_json(line);
          done[r.fqdn] = std::move(r);
        }
        catch (const std::exception&)
        {
          // A torn final line from a killed run; the candidate is redone.
        }
      }
    }

    std::vector<std::string> pending;
    for (const auto& c : candidates)
      if (!done.count(c))
        pending.push_back(c);

    std::string base = normalize_endpoint(endpoint);

    if (!pending.empty())
    {
      // Preflight: any HTTP answer proves the endpoint is alive; only a
      // transport failure aborts before the sweep starts.
      auto cli = make_client(base, opts.timeout_ms);
      auto res = cli->Get("/healthz");
      if (!res)
      {
        auto fallback = cli->Get("/");
        if (!fallback)
          throw CrawlAborted("endpoint unreachable: " + base + " (" +
                             httplib::to_string(fallback.error()) + ")");
      }
    }

    std::ofstream journal;
    if (!journal_path.empty())
    {
      // A torn final line from a killed run must not swallow the first
      // fresh write; terminate it so it stays an isolated parse failure.
      bool heal_tail = false;
      {
        std::ifstream probe(journal_path, std::ios::binary | std::ios::ate);
        if (probe && probe.tellg() > 0)
        {
          probe.seekg(-1, std::ios::end);
          char last = '\n';
          probe.get(last);
          heal_tail = last != '\n';
        }
      }
      journal.open(journal_path, std::ios::app | std::ios::binary);
      if (!journal)
        throw std::runtime_error("cannot open journal: " + journal_path);
      if (heal_tail)
        journal << "\n";
    }

    TokenBucket bucket(opts.rate_per_sec);
    std::atomic<bool> cancelled{false};
    std::atomic<size_t> next{0};
    std::atomic<size_t> completed{0};
    std::atomic<int> consecutive_failures{0};
    std::mutex sink_mu; // guards `done` and the journal stream

    auto worker = [&] {
      auto cli = make_client(base, opts.timeout_ms);
      while (!cancelled.load(std::memory_order_relaxed))
      {
        if (opts.stop_after && completed.load() >= opts.stop_after)
          break;
        size_t i = next.fetch_add(1);
        if (i >= pending.size())
          break;

        bucket.acquire(cancelled);
        if (cancelled.load(std::memory_order_relaxed))
          break;

        CrawlResult r;
        bool transport_ok = resolve_candidate(*cli, pending[i], r);
        if (transport_ok)
        {
          consecutive_failures.store(0);
          if (opts.probe_http && r.registered && !r.ips.empty())
            http_probe(r, opts.probe_timeout_ms);
        }
        else if (opts.abort_after_connect_failures > 0 &&
                 consecutive_failures.fetch_add(1) + 1 >= opts.abort_after_connect_failures)
        {
          cancelled.store(true);
        }

        {
          std::lock_guard lock(sink_mu);
          if (journal.is_open())
          {
            journal << crawl_result_to_json(r) << "\n";
            journal.flush();
          }
          done[r.fqdn] = std::move(r);
        }
        completed.fetch_add(1);
      }
    };

    int nworkers = std::max(1, opts.concurrency);
    std::vector<std::thread> threads;
    threads.reserve(nworkers);
    for (int i = 0; i < nworkers; i++)
      threads.emplace_back(worker);
    for (auto& t : threads)
      t.join();

    if (cancelled.load())
      throw CrawlAborted("endpoint died mid-sweep after " +
                         std::to_string(opts.abort_after_connect_failures) +
                         " consecutive transport failures");

    std::vector<CrawlResult> results;
    results.reserve(done.size());
    for (const auto& c : candidates)
    {
      auto it = done.find(c);
      if (it != done.end())
        results.push_back(it->second);
    }
    return results;
  }

  // ------------------------------------------------------------ aggregate

  CrawlSummary aggregate_crawl(const std::vector<CrawlResult>& results, const GeoTable* geo)
  {
    CrawlSummary s;
    s.candidates = results.size();

    std::unordered_map<std::string, uint64_t> per_ip;
    std::set<std::string> unique_public;

    for (const auto& r : results)
    {
      if (r.registered)
        s.registered++;
      for (const auto& obs : r.ips)
      {
        s.ip_events++;
        per_ip[obs.ip]++;
        if (obs.is_private)
        {
          s.private_events++;
        }
        else
        {
          s.public_events++;
          if (geo)
            s.country_events[geo->lookup(obs.ip)]++;
          if (unique_public.insert(obs.ip).second && geo)
            s.country_unique_ips[geo->lookup(obs.ip)]++;
        }
      }
    }
    s.unique_public_ips = unique_public.size();

    CountList list(per_ip.begin(), per_ip.end());
    std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second)
        return a.second > b.second;
      return a.first < b.first;
    });
    s.top_ips = std::move(list);
    return s;
  }

  std::string summary_to_json(const CrawlSummary& s)
  {
    nlohmann::json j;
    j["candidates"] = s.candidates;
    j["registered"] = s.registered;
    j["ip_events"] = s.ip_events;
    j["private_events"] = s.private_events;
    j["public_events"] = s.public_events;
    j["unique_public_ips"] = s.unique_public_ips;
    nlohmann::json top = nlohmann::json::array();
    for (const auto& [ip, n] : s.top_ips)
      top.push_back(nlohmann::json::array({ip, n}));
    j["top_ips"] = top;
    nlohmann::json ce = nlohmann::json::object();
    for (const auto& [cc, n] : s.country_events)
      ce[cc] = n;
    j["country_events"] = ce;
    nlohmann::json cu = nlohmann::json::object();
    for (const auto& [cc, n] : s.country_unique_ips)
      cu[cc] = n;
    j["country_unique_ips"] = cu;
    return j.dump(2) + "\n";
  }
}
