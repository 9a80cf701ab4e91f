// Copyright (c) the chaindns authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include <arpa/inet.h>
#include <netinet/in.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "test_paths.hpp"

namespace
{
  struct RunResult
  {
    int exit_code;
    std::string output; // stdout and stderr interleaved
  };

  RunResult run(const std::string& args)
  {
    std::string cmd = std::string(kChaindnsBin) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0)
      out.append(buf, n);
    int status = pclose(pipe);
    int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return RunResult{code, out};
  }

  std::string tmp_path(const std::string& name)
  {
    std::string path = std::string(kTestTmpDir) + "/" + name;
    std::filesystem::remove(path);
    return path;
  }

  std::string write_file(const std::string& name, const std::string& body)
  {
    std::string path = tmp_path(name);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << body;
    return path;
  }

  std::string mini_dump()
  {
    return std::string(kFixturesDir) + "/mini_emer.ndjson";
  }

  // First JSON object in the output (CLI prints one per line).
  nlohmann::json first_json(const std::string& out)
  {
    auto nl = out.find('\n');
    return nlohmann::json::parse(out.substr(0, nl));
  }
}

TEST_CASE("cli ingest")
{
  std::string db = tmp_path("cli_ingest.db");

  auto res = run("--db " + db + " ingest " + mini_dump());
  CHECK(res.exit_code == 0);
  CHECK(res.output.find("accepted=200 rejected=0 names=150") != std::string::npos);
  CHECK(std::filesystem::exists(db));

  // Re-ingesting the same dump rejects every line as a duplicate.
  res = run("--db " + db + " ingest " + mini_dump() + " --json --lenient");
  CHECK(res.exit_code == 0);
  auto j = first_json(res.output);
  CHECK(j["accepted"] == 0);
  CHECK(j["rejected"] == 200);
  CHECK(j["names"] == 150);
  CHECK(j["rejects"][0]["reason"] == "duplicate-txid");

  std::string db2 = tmp_path("cli_ingest2.db");
  res = run("--db " + db2 + " ingest " + mini_dump() + " --json");
  CHECK(res.exit_code == 0);
  j = first_json(res.output);
  CHECK(j["accepted"] == 200);
  CHECK(j["min_height"] == 1000);
  CHECK(j["max_height"] == 1249);
  CHECK(j["rejects"].empty());
}

TEST_CASE("cli ingest surfaces rejects")
{
  std::string good = "{\"chain\":\"emercoin\",\"op\":\"register\",\"name\":\"dns:clitest.coin\","
                     "\"value\":\"A=1.2.3.4\",\"owner\":\"EOwner\",\"height\":10,"
                     "\"time\":1500000000,\"txid\":\"" +
                     std::string(64, 'a') + "\",\"expiry_days\":36500}\n";
  std::string dump = write_file("cli_rejects.ndjson", good + "{\"bad\":true}\n");
  std::string db = tmp_path("cli_rejects.db");

  auto res = run("--db " + db + " ingest " + dump);
  CHECK(res.exit_code == 1);
  CHECK(res.output.find("accepted=1 rejected=1") != std::string::npos);
  CHECK(res.output.find("line 2: unexpected-key") != std::string::npos);

  std::string db2 = tmp_path("cli_rejects2.db");
  CHECK(run("--db " + db2 + " ingest " + dump + " --lenient").exit_code == 0);

  CHECK(run("--db " + db + " ingest /does/not/exist.ndjson").exit_code == 1);
}

TEST_CASE("cli resolve")
{
  std::string db = tmp_path("cli_resolve.db");
  REQUIRE(run("--db " + db + " ingest " + mini_dump()).exit_code == 0);

  auto res = run("--db " + db + " resolve mini000.coin");
  CHECK(res.exit_code == 0);
  CHECK(res.output == "ok mini000.coin 10.2.0.0\n");

  // mini100 was never updated; TXT appears only under ANY.
  res = run("--db " + db + " resolve mini100.coin --type ANY");
  CHECK(res.exit_code == 0);
  CHECK(res.output == "ok mini100.coin 10.1.0.100\n");
  res = run("--db " + db + " resolve mini000.coin --type ANY");
  CHECK(res.output == "ok mini000.coin 10.2.0.0 txt:updated\n");

  // Case folds; the historical value is served under --at.
  CHECK(run("--db " + db + " resolve MINI000.COIN").output ==
        "ok MINI000.COIN 10.2.0.0\n");
  CHECK(run("--db " + db + " resolve mini000.coin --at 1100").output ==
        "ok mini000.coin 10.1.0.0\n");

  res = run("--db " + db + " resolve nothere.coin");
  CHECK(res.exit_code == 2);
  CHECK(res.output.rfind("nxdomain", 0) == 0);

  res = run("--db " + db + " resolve something.com");
  CHECK(res.exit_code == 3);
  CHECK(res.output.rfind("unsupported_tld", 0) == 0);

  res = run("--db " + db + " resolve dns:mini000.coin --exact --json");
  CHECK(res.exit_code == 0);
  auto j = first_json(res.output);
  CHECK(j["status"] == "ok");
  CHECK(j["a"] == nlohmann::json::array({"10.2.0.0"}));
  CHECK(j["source"]["name"] == "dns:mini000.coin");
  CHECK(j["source"]["chain"] == "emercoin");

  CHECK(run("--db " + db + " resolve mini000.coin --type MX").exit_code == 1);
  CHECK(run("--db " + db + " resolve").exit_code != 0);
  CHECK(run("--db " + db + " bogus-subcommand").exit_code != 0);
}

TEST_CASE("cli export round trips")
{
  std::string db = tmp_path("cli_export.db");
  REQUIRE(run("--db " + db + " ingest " + mini_dump()).exit_code == 0);

  std::string out1 = tmp_path("cli_export1.ndjson");
  auto res = run("--db " + db + " export " + out1);
  CHECK(res.exit_code == 0);
  CHECK(res.output.find("exported to") != std::string::npos);

  std::ifstream f1(out1, std::ios::binary);
  std::string bytes1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  CHECK(std::count(bytes1.begin(), bytes1.end(), '\n') == 200);

  // stdout export carries the same bytes.
  res = run("--db " + db + " export -");
  CHECK(res.exit_code == 0);
  CHECK(res.output == bytes1);

  // Feeding the export into a fresh database reproduces it exactly.
  std::string db2 = tmp_path("cli_export2.db");
  REQUIRE(run("--db " + db2 + " ingest " + out1).exit_code == 0);
  std::string out2 = tmp_path("cli_export2.ndjson");
  REQUIRE(run("--db " + db2 + " export " + out2).exit_code == 0);
  std::ifstream f2(out2, std::ios::binary);
  std::string bytes2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(bytes2 == bytes1);

  CHECK(run("--db " + db + " export /no/such/dir/out.ndjson").exit_code == 1);
}

TEST_CASE("cli stats")
{
  std::string db = tmp_path("cli_stats.db");
  REQUIRE(run("--db " + db + " ingest " + mini_dump()).exit_code == 0);

  std::string dir = std::string(kTestTmpDir) + "/cli_stats_report";
  std::filesystem::remove_all(dir);
  auto res = run("--db " + db + " stats --out " + dir);
  CHECK(res.exit_code == 0);
  CHECK(res.output.find("considered=150") != std::string::npos);
  REQUIRE(std::filesystem::exists(dir + "/report.json"));

  std::ifstream rf(dir + "/report.json");
  auto report = nlohmann::json::parse(rf);
  CHECK(report["considered"] == 150);
  CHECK(report["policy"]["chain_filter"] == "all");
  // Every mini name is dns:miniNNN.coin with an address.
  CHECK(report["tld_counts"]["coin"] == 150);

  // Chain filters narrow the view.
  std::string dir2 = std::string(kTestTmpDir) + "/cli_stats_nc";
  std::filesystem::remove_all(dir2);
  res = run("--db " + db + " stats --out " + dir2 + " --chain namecoin");
  CHECK(res.exit_code == 0);
  CHECK(res.output.find("considered=0") != std::string::npos);

  CHECK(run("--db " + db + " stats --out " + dir2 + " --chain dogecoin").exit_code != 0);
}

TEST_CASE("cli crawl against its own gateway")
{
  std::string db = tmp_path("cli_crawl.db");
  REQUIRE(run("--db " + db + " ingest " + mini_dump()).exit_code == 0);

  std::string slds = write_file("cli_crawl_slds.txt", "mini000\nmini001\nnope\n");
  std::string tlds = write_file("cli_crawl_tlds.txt", "coin\nbit\n");
  std::string journal = tmp_path("cli_crawl_journal.ndjson");
  std::string summary = tmp_path("cli_crawl_summary.json");

  auto res = run("--db " + db + " crawl --slds " + slds + " --tlds " + tlds + " --rate 0" +
                 " --journal " + journal + " --summary " + summary);
  CHECK(res.exit_code == 0);
  REQUIRE(std::filesystem::exists(summary));

  std::ifstream sf(summary);
  auto s = nlohmann::json::parse(sf);
  CHECK(s["candidates"] == 6);
  CHECK(s["registered"] == 2);
  CHECK(s["ip_events"] == 2);
  CHECK(s["private_events"] == 2); // 10.x addresses
  CHECK(s["public_events"] == 0);

  std::ifstream jf(journal);
  std::string line;
  size_t lines = 0;
  while (std::getline(jf, line))
    if (!line.empty())
      lines++;
  CHECK(lines == 6);

  // Non-local endpoints require the explicit opt-in flag.
  res = run("--db " + db + " crawl --slds " + slds + " --tlds " + tlds +
            " --endpoint http://198.51.100.1:9/");
  CHECK(res.exit_code == 1);
  CHECK(res.output.find("refusing non-local endpoint") != std::string::npos);
}

TEST_CASE("cli config file")
{
  std::string db = tmp_path("cli_config.db");
  REQUIRE(run("--db " + db + " ingest " + mini_dump()).exit_code == 0);

  // Routing replacement: .coin now routes nowhere, .mini to emercoin.
  std::string cfg = write_file("cli_config.json",
                               "{\n"
                               "  \"db_path\": \"" + db + "\",\n"
                               "  \"routing\": {\"mini\": \"emercoin\", "
                               "\"unknown_tld\": \"refuse\"}\n"
                               "}\n");

  auto res = run("--config " + cfg + " resolve mini000.coin");
  CHECK(res.exit_code == 3); // coin is no longer routed
  res = run("--config " + cfg + " resolve mini000.coin --json");
  CHECK(first_json(res.output)["status"] == "unsupported_tld");

  // The environment variable stands in for --config.
  std::string env_cmd = "CHAINDNS_CONFIG=" + cfg + " " + std::string(kChaindnsBin) +
                        " resolve mini005.coin 2>&1";
  FILE* pipe = popen(env_cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[512];
  size_t n;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0)
    out.append(buf, n);
  int code = WEXITSTATUS(pclose(pipe));
  CHECK(code == 3);
  CHECK(out.rfind("unsupported_tld", 0) == 0);
}

TEST_CASE("cli config errors carry file and line")
{
  std::string db = tmp_path("cli_cfg_err.db");

  auto bad_key = write_file("cfg_badkey.json", "{\n  \"bogus\": 1\n}\n");
  auto res = run("--config " + bad_key + " --db " + db + " resolve x.bit");
  CHECK(res.exit_code == 1);
  CHECK(res.output.find("cfg_badkey.json:2") != std::string::npos);
  CHECK(res.output.find("unknown key bogus") != std::string::npos);

  auto bad_json = write_file("cfg_badjson.json", "{\n  \"ttl\": 300,\n}\n");
  res = run("--config " + bad_json + " --db " + db + " resolve x.bit");
  CHECK(res.exit_code == 1);
  CHECK(res.output.find("cfg_badjson.json:") != std::string::npos);

  auto bad_port = write_file("cfg_badport.json", "{\n  \"rest_port\": 70000\n}\n");
  res = run("--config " + bad_port + " --db " + db + " resolve x.bit");
  CHECK(res.exit_code == 1);
  CHECK(res.output.find("cfg_badport.json:2") != std::string::npos);

  auto bad_chain = write_file("cfg_badchain.json",
                              "{\n  \"routing\": {\"bit\": \"dogecoin\"}\n}\n");
  res = run("--config " + bad_chain + " --db " + db + " resolve x.bit");
  CHECK(res.exit_code == 1);
  CHECK(res.output.find("must be namecoin or emercoin") != std::string::npos);

  res = run("--config /does/not/exist.json --db " + db + " resolve x.bit");
  CHECK(res.exit_code == 1);
  CHECK(res.output.find("cannot open config file") != std::string::npos);
}

TEST_CASE("cli serve starts, answers and drains on SIGTERM")
{
  std::string db = tmp_path("cli_serve.db");
  REQUIRE(run("--db " + db + " ingest " + mini_dump()).exit_code == 0);

  int fds[2];
  REQUIRE(pipe(fds) == 0);
  pid_t pid = fork();
  REQUIRE(pid >= 0);
  if (pid == 0)
  {
    dup2(fds[1], 1);
    dup2(fds[1], 2);
    close(fds[0]);
    close(fds[1]);
    execl(kChaindnsBin, "chaindns", "--db", db.c_str(), "serve", "--dns-host", "127.0.0.1",
          "--dns-port", "0", "--rest-host", "127.0.0.1", "--rest-port", "0", (char*)nullptr);
    _exit(127);
  }
  close(fds[1]);
  FILE* out = fdopen(fds[0], "r");
  REQUIRE(out != nullptr);

  char line[512];
  REQUIRE(fgets(line, sizeof(line), out) != nullptr);
  std::string banner(line);
  CHECK(banner.find("serving 150 names") != std::string::npos);

  auto grab_port = [&](const std::string& marker) -> int {
    auto pos = banner.find(marker);
    REQUIRE(pos != std::string::npos);
    return std::atoi(banner.c_str() + pos + marker.size());
  };
  int dns_port = grab_port("dns=127.0.0.1:");
  int rest_port = grab_port("rest=http://127.0.0.1:");
  REQUIRE(dns_port > 0);
  REQUIRE(rest_port > 0);

  // REST answers.
  {
    httplib::Client client("127.0.0.1", rest_port);
    auto res = client.Get("/resolve?name=mini000.coin&type=A");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(nlohmann::json::parse(res->body)["status"] == "ok");
  }

  // DNS answers: id echo and the response bit are enough here.
  {
    int fd = ::socket(AF_INET, SOCK_DGRAM, 0);
    REQUIRE(fd >= 0);
    timeval tv{5, 0};
    ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<uint16_t>(dns_port));
    ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
    // mini000.coin, type A, id 0x7001
    std::vector<uint8_t> q{0x70, 0x01, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0,
                           7,    'm',  'i', 'n', 'i', '0', '0', '0',
                           4,    'c',  'o', 'i', 'n', 0,   0,   1,   0, 1};
    REQUIRE(::sendto(fd, q.data(), q.size(), 0, reinterpret_cast<sockaddr*>(&addr),
                     sizeof(addr)) == ssize_t(q.size()));
    uint8_t buf[512];
    ssize_t n = ::recv(fd, buf, sizeof(buf), 0);
    REQUIRE(n >= 12);
    CHECK(buf[0] == 0x70);
    CHECK(buf[1] == 0x01);
    CHECK((buf[2] & 0x80) != 0);
    ::close(fd);
  }

  REQUIRE(kill(pid, SIGTERM) == 0);
  std::string rest;
  while (fgets(line, sizeof(line), out) != nullptr)
    rest += line;
  fclose(out);
  CHECK(rest.find("signal 15") != std::string::npos);

  int status = 0;
  REQUIRE(waitpid(pid, &status, 0) == pid);
  REQUIRE(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == 0);
}
