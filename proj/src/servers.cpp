// Copyright (c) the chaindns authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "chaindns/servers.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>
#include <stdexcept>

#include "httplib.h"
#include "json.hpp"

namespace chaindns
{
  // ------------------------------------------------------------------ UDP

  UdpDnsServer::UdpDnsServer(std::shared_ptr<Gateway> gw, std::string host, uint16_t port,
                             int threads)
    : gw_(std::move(gw)), host_(std::move(host)), port_(port), nthreads_(threads > 0 ? threads : 1)
  {}

  UdpDnsServer::~UdpDnsServer()
  {
    stop();
  }

  void UdpDnsServer::start()
  {
    fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (fd_ < 0)
      throw std::runtime_error("udp socket: " + std::string(std::strerror(errno)));

    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port_);
    if (::inet_pton(AF_INET, host_.c_str(), &addr.sin_addr) != 1)
    {
      ::close(fd_);
      fd_ = -1;
      throw std::runtime_error("udp bind address not parseable: " + host_);
    }
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
    {
      int err = errno;
      ::close(fd_);
      fd_ = -1;
      throw std::runtime_error("udp bind " + host_ + ": " + std::strerror(err));
    }

    // Learn the ephemeral port when asked to bind port 0.
    socklen_t len = sizeof(addr);
    if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) == 0)
      port_ = ntohs(addr.sin_port);

    // A short receive timeout keeps the workers responsive to stop()
    // without a self-pipe or socket shutdown dance.
    timeval tv{};
    tv.tv_usec = 200 * 1000;
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));

    stop_.store(false);
    for (int i = 0; i < nthreads_; i++)
      threads_.emplace_back([this] { loop(); });
  }

  void UdpDnsServer::loop()
  {
    std::vector<uint8_t> buf(2048);
    while (!stop_.load(std::memory_order_relaxed))
    {
      sockaddr_in peer{};
      socklen_t peer_len = sizeof(peer);
      ssize_t n = ::recvfrom(fd_, buf.data(), buf.size(), 0, reinterpret_cast<sockaddr*>(&peer),
                             &peer_len);
      if (n < 0)
      {
        if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR)
          continue;
        break; // socket closed or unusable
      }
      auto reply = gw_->handle_packet(std::span<const uint8_t>(buf.data(), size_t(n)));
      if (!reply.empty())
        ::sendto(fd_, reply.data(), reply.size(), 0, reinterpret_cast<sockaddr*>(&peer),
                 peer_len);
    }
  }

  void UdpDnsServer::stop()
  {
    stop_.store(true);
    for (auto& t : threads_)
      if (t.joinable())
        t.join();
    threads_.clear();
    if (fd_ >= 0)
    {
      ::close(fd_);
      fd_ = -1;
    }
  }

  // ----------------------------------------------------------------- REST

  struct RestServer::Impl
  {
    httplib::Server svr;
  };

  namespace
  {
    nlohmann::json record_set_json(const DnsRecordSet& rs)
    {
      return {{"a", rs.a}, {"aaaa", rs.aaaa}, {"ns", rs.ns}, {"txt", rs.txt}};
    }

    nlohmann::json result_json(const ResolutionResult& r)
    {
      nlohmann::json j;
      j["status"] = std::string(to_string(r.status));
      j["answers"] = record_set_json(r.answers);
      j["collision"] = r.collision;
      if (r.source)
        j["source"] = {{"chain", std::string(to_string(r.source->chain))},
                       {"name", r.source->raw_name},
                       {"height", r.source->height}};
      else
        j["source"] = nullptr;
      return j;
    }

    void send_json(httplib::Response& res, int status, const nlohmann::json& j)
    {
      res.status = status;
      res.set_content(j.dump(), "application/json");
    }

    std::optional<uint16_t> parse_qtype(const std::string& s)
    {
      std::string t = ascii_lower_copy(s);
      if (t.empty() || t == "a")
        return qtype_a;
      if (t == "aaaa")
        return qtype_aaaa;
      if (t == "any")
        return qtype_any;
      return std::nullopt;
    }
  }

  RestServer::RestServer(std::shared_ptr<Gateway> gw, std::string host, uint16_t port)
    : gw_(std::move(gw)), host_(std::move(host)), port_(port), impl_(std::make_unique<Impl>())
  {}

  RestServer::~RestServer()
  {
    stop();
  }

  void RestServer::start()
  {
    auto gw = gw_;
    impl_->svr.Get("/resolve", [gw](const httplib::Request& req, httplib::Response& res) {
      if (!req.has_param("name") || req.get_param_value("name").empty())
      {
        send_json(res, 400, {{"error", "missing required parameter: name"}});
        return;
      }
      std::string name = req.get_param_value("name");

      auto qtype = parse_qtype(req.get_param_value("type"));
      if (!qtype)
      {
        send_json(res, 400, {{"error", "type must be A, AAAA or ANY"}});
        return;
      }

      bool exact = req.get_param_value("exact") == "1";

      std::optional<uint64_t> at_height;
      if (req.has_param("at"))
      {
        const std::string& at = req.get_param_value("at");
        uint64_t h = 0;
        auto [p, ec] = std::from_chars(at.data(), at.data() + at.size(), h);
        if (ec != std::errc() || p != at.data() + at.size())
        {
          send_json(res, 400, {{"error", "at must be a block height"}});
          return;
        }
        at_height = h;
      }

      ResolutionResult r = exact ? gw->resolve_exact(name, *qtype)
                                 : gw->resolve(ascii_lower_copy(name), *qtype, at_height);
      send_json(res, r.status == ResolveStatus::transient ? 503 : 200, result_json(r));
    });

    impl_->svr.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("ok\n", "text/plain");
    });

    if (port_ == 0)
    {
      int bound = impl_->svr.bind_to_any_port(host_);
      if (bound < 0)
        throw std::runtime_error("rest bind " + host_ + " failed");
      port_ = static_cast<uint16_t>(bound);
    }
    else if (!impl_->svr.bind_to_port(host_, port_))
    {
      throw std::runtime_error("rest bind " + host_ + ":" + std::to_string(port_) + " failed");
    }

    thread_ = std::thread([this] { impl_->svr.listen_after_bind(); });
    impl_->svr.wait_until_ready();
  }

  void RestServer::stop()
  {
    if (impl_ && impl_->svr.is_running())
      impl_->svr.stop();
    if (thread_.joinable())
      thread_.join();
  }
}
