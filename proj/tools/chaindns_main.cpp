// Copyright (c) the chaindns authors. All rights reserved.
// Licensed under the Apache 2.0 License.
//
// chaindns: blockchain name-record gateway and analytics tool.
// Subcommands: ingest, resolve, serve, stats, crawl, export.
// Exit codes: 0 success, 1 error, 2 nxdomain, 3 unsupported TLD or qtype.

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "chaindns/analytics.hpp"
#include "chaindns/config.hpp"
#include "chaindns/crawler.hpp"
#include "chaindns/gateway.hpp"
#include "chaindns/ingest.hpp"
#include "chaindns/namedb.hpp"
#include "chaindns/servers.hpp"

namespace
{
  using namespace chaindns;

  NameDb open_db(const Config& cfg)
  {
    if (std::filesystem::exists(cfg.db_path))
      return NameDb::load_snapshot(cfg.db_path);
    return NameDb(cfg.policy);
  }

  uint16_t qtype_from_flag(const std::string& type)
  {
    std::string t = ascii_lower_copy(type);
    if (t == "a" || t.empty())
      return qtype_a;
    if (t == "aaaa")
      return qtype_aaaa;
    if (t == "any")
      return qtype_any;
    throw CLI::ValidationError("--type", "must be A, AAAA or ANY");
  }

  int cmd_ingest(const Config& cfg, const std::string& dump_path, bool lenient, bool as_json)
  {
    NameDb db = open_db(cfg);
    IngestReport report = ingest_file(dump_path, db);
    db.save_snapshot(cfg.db_path);

    if (as_json)
    {
      nlohmann::json j;
      j["accepted"] = report.accepted;
      j["rejected"] = report.rejected;
      j["names"] = db.name_count();
      j["min_height"] = report.min_height;
      j["max_height"] = report.max_height;
      nlohmann::json rejects = nlohmann::json::array();
      for (const auto& [line, reason] : report.rejects)
        rejects.push_back({{"line", line}, {"reason", reason}});
      j["rejects"] = rejects;
      std::cout << j.dump() << "\n";
    }
    else
    {
      std::cout << "accepted=" << report.accepted << " rejected=" << report.rejected
                << " names=" << db.name_count() << "\n";
      for (const auto& [line, reason] : report.rejects)
        std::cerr << "line " << line << ": " << reason << "\n";
    }
    return (report.rejected == 0 || lenient) ? 0 : 1;
  }

  int print_resolution(const std::string& name, const ResolutionResult& r, bool as_json)
  {
    if (as_json)
    {
      nlohmann::json j;
      j["name"] = name;
      j["status"] = std::string(to_string(r.status));
      j["a"] = r.answers.a;
      j["aaaa"] = r.answers.aaaa;
      j["ns"] = r.answers.ns;
      j["txt"] = r.answers.txt;
      j["collision"] = r.collision;
      if (r.source)
        j["source"] = {{"chain", std::string(to_string(r.source->chain))},
                       {"name", r.source->raw_name},
                       {"height", r.source->height}};
      std::cout << j.dump() << "\n";
    }
    else
    {
      std::cout << to_string(r.status) << " " << name;
      for (const auto& ip : r.answers.a)
        std::cout << " " << ip;
      for (const auto& ip : r.answers.aaaa)
        std::cout << " " << ip;
      for (const auto& ns : r.answers.ns)
        std::cout << " ns:" << ns;
      for (const auto& txt : r.answers.txt)
        std::cout << " txt:" << txt;
      if (r.collision)
        std::cout << " (collision)";
      std::cout << "\n";
    }
    switch (r.status)
    {
      case ResolveStatus::ok:
      case ResolveStatus::no_address_data:
        return 0;
      case ResolveStatus::nxdomain:
        return 2;
      case ResolveStatus::unsupported_tld:
        return 3;
      default:
        return 1;
    }
  }

  int cmd_resolve(const Config& cfg, const std::string& name, const std::string& type, bool exact,
                  std::optional<uint64_t> at, bool as_json)
  {
    auto db = std::make_shared<NameDb>(open_db(cfg));
    Gateway gw(std::move(db), cfg.routing, GatewayOptions{cfg.ttl, cfg.drop_malformed});
    uint16_t qtype = qtype_from_flag(type);
    ResolutionResult r =
      exact ? gw.resolve_exact(name, qtype) : gw.resolve(ascii_lower_copy(name), qtype, at);
    return print_resolution(name, r, as_json);
  }

  int cmd_serve(const Config& cfg)
  {
    // Block the shutdown signals before any server thread exists so they
    // are only ever delivered to sigwait below.
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);

    auto db = std::make_shared<NameDb>(open_db(cfg));
    size_t names = db->name_count();
    auto gw = std::make_shared<Gateway>(std::shared_ptr<const NameDb>(std::move(db)), cfg.routing,
                                        GatewayOptions{cfg.ttl, cfg.drop_malformed});

    UdpDnsServer dns(gw, cfg.dns_host, cfg.dns_port);
    RestServer rest(gw, cfg.rest_host, cfg.rest_port);
    dns.start();
    rest.start();

    std::cout << "serving " << names << " names; dns=" << cfg.dns_host << ":" << dns.port()
              << "/udp rest=http://" << cfg.rest_host << ":" << rest.port() << std::endl;

    int sig = 0;
    sigwait(&set, &sig);
    std::cout << "signal " << sig << ", draining" << std::endl;
    dns.stop();
    rest.stop();
    return 0;
  }

  int cmd_stats(const Config& cfg, const std::string& out_dir, const std::string& chain,
                bool include_inactive, std::optional<uint64_t> at, size_t top_addresses,
                size_t top_ips)
  {
    NameDb db = open_db(cfg);

    TldSet tlds = cfg.tld_list_path.empty() ? builtin_tlds() : load_tld_file(cfg.tld_list_path);

    StatsOptions opts;
    opts.known_tlds = &tlds;
    opts.top_addresses = top_addresses;
    opts.top_ips = top_ips;
    opts.active_only = !include_inactive;
    opts.policy = db.policy();
    opts.asof = db.as_of(at);
    if (!chain.empty())
    {
      auto parsed = chain_from_string(ascii_lower_copy(chain));
      if (!parsed)
        throw CLI::ValidationError("--chain", "must be namecoin or emercoin");
      opts.chain_filter = parsed;
    }
    if (!cfg.alexa_path.empty())
      opts.alexa = load_host_list(cfg.alexa_path);

    GeoTable geo;
    if (!cfg.geo_csv_path.empty())
    {
      geo = GeoTable::load_csv(cfg.geo_csv_path);
      opts.geo = &geo;
    }

    auto views = db.collect(opts.asof, opts.active_only);
    StatsReport report = compute_stats(views, opts);
    write_report_files(report, out_dir);
    std::cout << "wrote " << out_dir << " considered=" << report.considered << "\n";
    return 0;
  }

  bool is_local_endpoint(const std::string& endpoint)
  {
    std::string e = endpoint;
    if (e.rfind("http://", 0) == 0)
      e = e.substr(7);
    else if (e.rfind("https://", 0) == 0)
      e = e.substr(8);
    return e.rfind("127.", 0) == 0 || e.rfind("localhost", 0) == 0 || e.rfind("[::1]", 0) == 0;
  }

  int cmd_crawl(const Config& cfg, const std::string& sld_path, const std::string& tld_path,
                std::string endpoint, bool allow_external, const std::string& journal_path,
                const std::string& summary_path)
  {
    auto slds = load_host_list(sld_path);
    auto tlds = load_host_list(tld_path);
    auto candidates = generate_candidates(slds, tlds);

    // Self-hosted by default: the sweep runs against this process's own
    // gateway unless an endpoint is given, and non-local endpoints need the
    // explicit opt-in flag.
    std::unique_ptr<RestServer> own;
    std::shared_ptr<Gateway> gw;
    if (endpoint.empty())
    {
      auto db = std::make_shared<NameDb>(open_db(cfg));
      gw = std::make_shared<Gateway>(std::shared_ptr<const NameDb>(std::move(db)), cfg.routing,
                                     GatewayOptions{cfg.ttl, cfg.drop_malformed});
      own = std::make_unique<RestServer>(gw, "127.0.0.1", 0);
      own->start();
      endpoint = "http://127.0.0.1:" + std::to_string(own->port());
    }
    else if (!is_local_endpoint(endpoint) && !allow_external)
    {
      std::cerr << "refusing non-local endpoint without --external: " << endpoint << "\n";
      return 1;
    }

    std::vector<CrawlResult> results;
    try
    {
      results = crawl(candidates, endpoint, cfg.crawl, journal_path);
    }
    catch (const CrawlAborted& e)
    {
      if (own)
        own->stop();
      std::cerr << "crawl aborted: " << e.what() << "\n";
      return 1;
    }
    if (own)
      own->stop();

    GeoTable geo;
    const GeoTable* geo_ptr = nullptr;
    if (!cfg.geo_csv_path.empty())
    {
      geo = GeoTable::load_csv(cfg.geo_csv_path);
      geo_ptr = &geo;
    }
    CrawlSummary summary = aggregate_crawl(results, geo_ptr);
    std::string body = summary_to_json(summary);
    if (!summary_path.empty())
    {
      std::ofstream out(summary_path, std::ios::binary);
      out << body;
    }
    std::cout << body;
    return 0;
  }

  int cmd_export(const Config& cfg, const std::string& out_path)
  {
    NameDb db = open_db(cfg);
    if (out_path == "-")
    {
      db.export_ndjson(std::cout);
      return 0;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out)
    {
      std::cerr << "cannot write " << out_path << "\n";
      return 1;
    }
    db.export_ndjson(out);
    std::cout << "exported to " << out_path << "\n";
    return 0;
  }
}

int main(int argc, char** argv)
{
  CLI::App app{"blockchain name-record gateway and analytics"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "config file (JSON); env " +
                                            std::string(config_env_var()) + " when absent");

  std::string db_path;
  app.add_option("--db", db_path, "snapshot file (overrides config)");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "apply an NDJSON dump to the database");
  std::string dump_path;
  bool lenient = false, ingest_json = false;
  ingest->add_option("dump", dump_path, "NDJSON dump file")->required();
  ingest->add_flag("--lenient", lenient, "exit 0 even when lines were rejected");
  ingest->add_flag("--json", ingest_json, "machine-readable report");

  // resolve
  auto* resolve = app.add_subcommand("resolve", "resolve one name");
  std::string name, rtype = "A";
  bool exact = false, resolve_json = false;
  std::optional<uint64_t> at_height;
  resolve->add_option("name", name, "name to resolve")->required();
  resolve->add_option("--type", rtype, "A, AAAA or ANY (default A)");
  resolve->add_flag("--exact", exact, "byte-exact raw-name lookup, no routing");
  resolve->add_option("--at", at_height, "resolve as of a block height");
  resolve->add_flag("--json", resolve_json, "machine-readable result");

  // serve
  auto* serve = app.add_subcommand("serve", "run the DNS and REST servers");
  std::string dns_host, rest_host;
  std::optional<uint16_t> dns_port, rest_port;
  serve->add_option("--dns-host", dns_host, "UDP bind address");
  serve->add_option("--dns-port", dns_port, "UDP port (0 = ephemeral)");
  serve->add_option("--rest-host", rest_host, "HTTP bind address");
  serve->add_option("--rest-port", rest_port, "HTTP port (0 = ephemeral)");

  // stats
  auto* stats = app.add_subcommand("stats", "write the analytics report");
  std::string out_dir = "report", stats_chain, alexa_path, geo_path, tld_list_path;
  bool include_inactive = false;
  std::optional<uint64_t> stats_at;
  size_t top_addresses = 10, top_ips = 15;
  stats->add_option("--out", out_dir, "output directory (default report/)");
  stats->add_option("--chain", stats_chain, "restrict to namecoin or emercoin");
  stats->add_flag("--all", include_inactive, "include expired and deleted names");
  stats->add_option("--at", stats_at, "report as of a block height");
  stats->add_option("--alexa", alexa_path, "ranked host list for correlation");
  stats->add_option("--geo", geo_path, "cidr,country CSV for country tables");
  stats->add_option("--tld-list", tld_list_path, "known-TLD list file");
  stats->add_option("--top-addresses", top_addresses, "registrant table size (default 10)");
  stats->add_option("--top-ips", top_ips, "address table size (default 15)");

  // crawl
  auto* crawl_cmd = app.add_subcommand("crawl", "sweep SLD x TLD candidates via REST");
  std::string sld_path, tld_path, endpoint, journal_path, summary_path, crawl_geo;
  bool allow_external = false, probe = false;
  std::optional<double> rate;
  std::optional<int> concurrency;
  crawl_cmd->add_option("--slds", sld_path, "SLD list file")->required();
  crawl_cmd->add_option("--tlds", tld_path, "TLD list file")->required();
  crawl_cmd->add_option("--endpoint", endpoint, "REST endpoint (default: own gateway)");
  crawl_cmd->add_flag("--external", allow_external, "allow a non-local endpoint");
  crawl_cmd->add_option("--journal", journal_path, "resumable NDJSON journal");
  crawl_cmd->add_option("--summary", summary_path, "write the summary JSON here too");
  crawl_cmd->add_option("--geo", crawl_geo, "cidr,country CSV for country tables");
  crawl_cmd->add_option("--rate", rate, "requests per second");
  crawl_cmd->add_option("--concurrency", concurrency, "worker count");
  crawl_cmd->add_flag("--probe", probe, "HTTP-probe resolved records");

  // export
  auto* export_cmd = app.add_subcommand("export", "dump the database as canonical NDJSON");
  std::string export_path;
  export_cmd->add_option("out", export_path, "output file, - for stdout")->required();

  CLI11_PARSE(app, argc, argv);

  try
  {
    Config cfg;
    if (config_path.empty())
      if (const char* env = std::getenv(config_env_var()))
        config_path = env;
    if (!config_path.empty())
      cfg = load_config(config_path);

    // Flags win over config values.
    if (!db_path.empty())
      cfg.db_path = db_path;

    if (*ingest)
      return cmd_ingest(cfg, dump_path, lenient, ingest_json);

    if (*resolve)
      return cmd_resolve(cfg, name, rtype, exact, at_height, resolve_json);

    if (*serve)
    {
      if (!dns_host.empty())
        cfg.dns_host = dns_host;
      if (dns_port)
        cfg.dns_port = *dns_port;
      if (!rest_host.empty())
        cfg.rest_host = rest_host;
      if (rest_port)
        cfg.rest_port = *rest_port;
      return cmd_serve(cfg);
    }

    if (*stats)
    {
      if (!alexa_path.empty())
        cfg.alexa_path = alexa_path;
      if (!geo_path.empty())
        cfg.geo_csv_path = geo_path;
      if (!tld_list_path.empty())
        cfg.tld_list_path = tld_list_path;
      return cmd_stats(cfg, out_dir, stats_chain, include_inactive, stats_at, top_addresses,
                       top_ips);
    }

    if (*crawl_cmd)
    {
      if (!crawl_geo.empty())
        cfg.geo_csv_path = crawl_geo;
      if (rate)
        cfg.crawl.rate_per_sec = *rate;
      if (concurrency)
        cfg.crawl.concurrency = *concurrency;
      if (probe)
        cfg.crawl.probe_http = true;
      return cmd_crawl(cfg, sld_path, tld_path, endpoint, allow_external, journal_path,
                       summary_path);
    }

    if (*export_cmd)
      return cmd_export(cfg, export_path);
  }
  catch (const std::exception& e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
