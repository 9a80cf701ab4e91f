// Copyright (c) the chaindns authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include <arpa/inet.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <memory>
#include <string>
#include <vector>

#include "chaindns/gateway.hpp"
#include "chaindns/servers.hpp"
#include "doctest.h"
#include "httplib.h"
#include "json.hpp"

using namespace chaindns;

namespace
{
  NameOperation op_of(Chain chain, OpKind kind, const std::string& name, const std::string& value,
                      uint64_t height, int64_t time, int seq,
                      std::optional<uint32_t> days = std::nullopt)
  {
    NameOperation op;
    op.chain = chain;
    op.op = kind;
    op.raw_name = name;
    op.value = value;
    op.owner = "o";
    op.height = height;
    op.time = time;
    char buf[80];
    std::snprintf(buf, sizeof(buf), "%064x", seq);
    op.txid = buf;
    op.expiry_days = days;
    return op;
  }

  std::shared_ptr<NameDb> base_db()
  {
    auto db = std::make_shared<NameDb>();
    REQUIRE(db->apply_operation(op_of(Chain::namecoin, OpKind::reg, "d/foo",
                                      "{\"ip\":\"1.2.3.4\"}", 100, 1500000000, 1))
              .ok());
    REQUIRE(db->apply_operation(op_of(Chain::emercoin, OpKind::reg, "dns:shop.bazar",
                                      "A=5.6.7.8|TXT=hello", 101, 1500000100, 2, 36500))
              .ok());
    REQUIRE(db->apply_operation(
                op_of(Chain::namecoin, OpKind::reg, "d/blank", "{}", 102, 1500000200, 3))
              .ok());
    return db;
  }

  // Minimal wire query builder for names the fixture set does not cover.
  std::vector<uint8_t> build_query(uint16_t id, const std::string& name, uint16_t qtype)
  {
    std::vector<uint8_t> pkt{static_cast<uint8_t>(id >> 8), static_cast<uint8_t>(id & 0xff),
                             0, 0, 0, 1, 0, 0, 0, 0, 0, 0};
    size_t start = 0;
    while (start <= name.size())
    {
      auto dot = name.find('.', start);
      auto label = name.substr(start, dot == std::string::npos ? dot : dot - start);
      pkt.push_back(static_cast<uint8_t>(label.size()));
      pkt.insert(pkt.end(), label.begin(), label.end());
      if (dot == std::string::npos)
        break;
      start = dot + 1;
    }
    pkt.push_back(0);
    pkt.push_back(static_cast<uint8_t>(qtype >> 8));
    pkt.push_back(static_cast<uint8_t>(qtype & 0xff));
    pkt.push_back(0);
    pkt.push_back(1);
    return pkt;
  }
}

TEST_CASE("tld routing")
{
  auto table = RoutingTable::defaults();
  CHECK(route_tld(table, "foo.bit") == Chain::namecoin);
  CHECK(route_tld(table, "a.b.coin") == Chain::emercoin);
  CHECK(route_tld(table, "x.emc") == Chain::emercoin);
  CHECK(route_tld(table, "x.lib") == Chain::emercoin);
  CHECK(route_tld(table, "x.bazar") == Chain::emercoin);
  CHECK_FALSE(route_tld(table, "x.com").has_value());
  CHECK_FALSE(route_tld(table, "nodot").has_value());
  CHECK_FALSE(route_tld(table, "trailing.").has_value());
  CHECK_FALSE(route_tld(table, "").has_value());
}

TEST_CASE("resolve status surface")
{
  Gateway gw(base_db(), RoutingTable::defaults());

  auto ok = gw.resolve("foo.bit", qtype_a);
  CHECK(ok.status == ResolveStatus::ok);
  CHECK(ok.answers.a == std::vector<std::string>{"1.2.3.4"});
  CHECK_FALSE(ok.collision);
  REQUIRE(ok.source.has_value());
  CHECK(ok.source->chain == Chain::namecoin);
  CHECK(ok.source->raw_name == "d/foo");
  CHECK(ok.source->height == 100);

  CHECK(gw.resolve("absent.bit", qtype_a).status == ResolveStatus::nxdomain);
  CHECK(gw.resolve("foo.com", qtype_a).status == ResolveStatus::unsupported_tld);
  CHECK(gw.resolve("blank.bit", qtype_a).status == ResolveStatus::no_address_data);
  CHECK(gw.resolve("foo.bit", qtype_aaaa).status == ResolveStatus::no_address_data);

  Gateway dead(nullptr, RoutingTable::defaults());
  CHECK(dead.resolve("foo.bit", qtype_a).status == ResolveStatus::transient);
}

TEST_CASE("routing filters by owning chain")
{
  auto db = base_db();
  // An emercoin name that lands in .bit space is never served for .bit
  // queries; that TLD belongs to the namecoin backend.
  REQUIRE(db->apply_operation(op_of(Chain::emercoin, OpKind::reg, "dns:squat.bit", "A=9.9.9.9",
                                    103, 1500000300, 4, 36500))
            .ok());
  Gateway gw(std::shared_ptr<const NameDb>(db), RoutingTable::defaults());
  CHECK(gw.resolve("squat.bit", qtype_a).status == ResolveStatus::nxdomain);
  // The record is still reachable by its raw name.
  auto exact = gw.resolve_exact("squat.bit", qtype_a);
  CHECK(exact.status == ResolveStatus::ok);
  CHECK(exact.answers.a == std::vector<std::string>{"9.9.9.9"});
}

TEST_CASE("collisions serve the earliest registration")
{
  auto db = base_db();
  REQUIRE(db->apply_operation(op_of(Chain::emercoin, OpKind::reg, "dns:Dup.coin", "A=1.1.1.1",
                                    200, 1500001000, 5, 36500))
            .ok());
  REQUIRE(db->apply_operation(op_of(Chain::emercoin, OpKind::reg, "dns:DUP.coin", "A=2.2.2.2",
                                    201, 1500001100, 6, 36500))
            .ok());
  Gateway gw(std::shared_ptr<const NameDb>(db), RoutingTable::defaults());

  auto res = gw.resolve("dup.coin", qtype_a);
  CHECK(res.status == ResolveStatus::ok);
  CHECK(res.collision);
  CHECK(res.answers.a == std::vector<std::string>{"1.1.1.1"});
  REQUIRE(res.source.has_value());
  CHECK(res.source->raw_name == "dns:Dup.coin");
}

TEST_CASE("historical heights resolve against old state")
{
  auto db = base_db();
  REQUIRE(db->apply_operation(op_of(Chain::namecoin, OpKind::update, "d/foo",
                                    "{\"ip\":\"4.3.2.1\"}", 500, 1500005000, 7))
            .ok());
  Gateway gw(std::shared_ptr<const NameDb>(db), RoutingTable::defaults());

  CHECK(gw.resolve("foo.bit", qtype_a).answers.a == std::vector<std::string>{"4.3.2.1"});
  CHECK(gw.resolve("foo.bit", qtype_a, 300).answers.a == std::vector<std::string>{"1.2.3.4"});
  CHECK(gw.resolve("foo.bit", qtype_a, 99).status == ResolveStatus::nxdomain);
}

TEST_CASE("exact lookups bypass folding and routing")
{
  Gateway gw(base_db(), RoutingTable::defaults());

  // dns: prefix is tried first.
  auto res = gw.resolve_exact("shop.bazar", qtype_any);
  CHECK(res.status == ResolveStatus::ok);
  CHECK(res.answers.txt == std::vector<std::string>{"hello"});

  // .bit names map onto the namecoin namespace.
  res = gw.resolve_exact("foo.bit", qtype_a);
  CHECK(res.status == ResolveStatus::ok);
  REQUIRE(res.source.has_value());
  CHECK(res.source->raw_name == "d/foo");

  // Verbatim raw names hit both chains.
  CHECK(gw.resolve_exact("d/foo", qtype_a).status == ResolveStatus::ok);
  CHECK(gw.resolve_exact("dns:shop.bazar", qtype_a).status == ResolveStatus::ok);
  CHECK(gw.resolve_exact("no-such-name", qtype_a).status == ResolveStatus::nxdomain);

  // Case is preserved: an exact query for the cased form finds nothing
  // unless that exact byte string was registered.
  CHECK(gw.resolve_exact("FOO.bit", qtype_a).status == ResolveStatus::nxdomain);

  Gateway dead(nullptr, RoutingTable::defaults());
  CHECK(dead.resolve_exact("foo.bit", qtype_a).status == ResolveStatus::transient);
}

TEST_CASE("unknown tld policy changes the wire answer")
{
  auto query = build_query(0xaaaa, "foo.com", qtype_a);

  Gateway nx(base_db(), RoutingTable::defaults());
  auto reply = nx.handle_packet(query);
  REQUIRE(reply.size() >= 12);
  CHECK(reply[2] == 0x84); // QR|AA
  CHECK(reply[3] == 0x03); // NXDOMAIN

  RoutingTable refusing = RoutingTable::defaults();
  refusing.unknown_action = RoutingTable::UnknownTld::refuse;
  Gateway rf(base_db(), refusing);
  reply = rf.handle_packet(query);
  REQUIRE(reply.size() >= 12);
  CHECK(reply[2] == 0x80); // QR, not authoritative
  CHECK(reply[3] == 0x05); // REFUSED
}

TEST_CASE("database swaps take effect atomically")
{
  auto gw = std::make_shared<Gateway>(base_db(), RoutingTable::defaults());
  CHECK(gw->resolve("foo.bit", qtype_a).status == ResolveStatus::ok);

  gw->swap_db(std::make_shared<const NameDb>());
  CHECK(gw->resolve("foo.bit", qtype_a).status == ResolveStatus::nxdomain);

  gw->swap_db(nullptr);
  CHECK(gw->resolve("foo.bit", qtype_a).status == ResolveStatus::transient);

  gw->swap_db(base_db());
  CHECK(gw->resolve("foo.bit", qtype_a).status == ResolveStatus::ok);
}

TEST_CASE("rest endpoint")
{
  auto gw = std::make_shared<Gateway>(base_db(), RoutingTable::defaults());
  RestServer server(gw, "127.0.0.1", 0);
  server.start();
  REQUIRE(server.port() != 0);
  httplib::Client client("127.0.0.1", server.port());

  SUBCASE("resolves and reports the source")
  {
    auto res = client.Get("/resolve?name=foo.bit&type=A");
    REQUIRE(res);
    CHECK(res->status == 200);
    auto j = nlohmann::json::parse(res->body);
    CHECK(j["status"] == "ok");
    CHECK(j["answers"]["a"] == nlohmann::json::array({"1.2.3.4"}));
    CHECK(j["collision"] == false);
    CHECK(j["source"]["chain"] == "namecoin");
    CHECK(j["source"]["name"] == "d/foo");
    CHECK(j["source"]["height"] == 100);
  }
  SUBCASE("folds the queried name")
  {
    auto res = client.Get("/resolve?name=FOO.BIT&type=a");
    REQUIRE(res);
    auto j = nlohmann::json::parse(res->body);
    CHECK(j["status"] == "ok");
  }
  SUBCASE("type defaults to A")
  {
    auto res = client.Get("/resolve?name=foo.bit");
    REQUIRE(res);
    CHECK(nlohmann::json::parse(res->body)["status"] == "ok");
  }
  SUBCASE("exact mode")
  {
    auto res = client.Get("/resolve?name=d%2Ffoo&type=A&exact=1");
    REQUIRE(res);
    auto j = nlohmann::json::parse(res->body);
    CHECK(j["status"] == "ok");
    CHECK(j["source"]["name"] == "d/foo");
  }
  SUBCASE("historical query")
  {
    auto res = client.Get("/resolve?name=foo.bit&type=A&at=99");
    REQUIRE(res);
    CHECK(nlohmann::json::parse(res->body)["status"] == "nxdomain");
  }
  SUBCASE("nxdomain still returns 200")
  {
    auto res = client.Get("/resolve?name=absent.bit&type=A");
    REQUIRE(res);
    CHECK(res->status == 200);
    auto j = nlohmann::json::parse(res->body);
    CHECK(j["status"] == "nxdomain");
    CHECK(j["source"].is_null());
  }
  SUBCASE("parameter validation")
  {
    auto status_of = [&](const char* path) {
      auto res = client.Get(path);
      REQUIRE(res);
      return res->status;
    };
    CHECK(status_of("/resolve") == 400);
    CHECK(status_of("/resolve?name=") == 400);
    CHECK(status_of("/resolve?name=foo.bit&type=MX") == 400);
    CHECK(status_of("/resolve?name=foo.bit&at=abc") == 400);
    CHECK(status_of("/resolve?name=foo.bit&at=12x") == 400);
  }
  SUBCASE("health probe")
  {
    auto res = client.Get("/healthz");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(res->body == "ok\n");
  }

  server.stop();
}

TEST_CASE("rest reports an unavailable store as 503")
{
  auto gw = std::make_shared<Gateway>(nullptr, RoutingTable::defaults());
  RestServer server(gw, "127.0.0.1", 0);
  server.start();
  httplib::Client client("127.0.0.1", server.port());
  auto res = client.Get("/resolve?name=foo.bit&type=A");
  REQUIRE(res);
  CHECK(res->status == 503);
  CHECK(nlohmann::json::parse(res->body)["status"] == "transient");
  server.stop();
}

TEST_CASE("udp front end answers over a real socket")
{
  auto gw = std::make_shared<Gateway>(base_db(), RoutingTable::defaults());
  UdpDnsServer server(gw, "127.0.0.1", 0, 2);
  server.start();
  REQUIRE(server.port() != 0);

  int fd = ::socket(AF_INET, SOCK_DGRAM, 0);
  REQUIRE(fd >= 0);
  timeval tv{5, 0};
  ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(server.port());
  ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);

  auto query = build_query(0x4242, "foo.bit", qtype_a);
  REQUIRE(::sendto(fd, query.data(), query.size(), 0, reinterpret_cast<sockaddr*>(&addr),
                   sizeof(addr)) == ssize_t(query.size()));

  std::vector<uint8_t> buf(2048);
  ssize_t n = ::recv(fd, buf.data(), buf.size(), 0);
  REQUIRE(n > 12);
  buf.resize(size_t(n));
  CHECK(buf[0] == 0x42);
  CHECK(buf[1] == 0x42);
  CHECK(buf[2] == 0x84); // QR|AA
  CHECK((buf[3] & 0x0f) == 0);
  // One answer: the A record for foo.bit.
  CHECK(buf[7] == 1);
  std::vector<uint8_t> tail{1, 2, 3, 4};
  CHECK(std::equal(tail.begin(), tail.end(), buf.end() - 4, buf.end()));

  ::close(fd);
  server.stop();
}
