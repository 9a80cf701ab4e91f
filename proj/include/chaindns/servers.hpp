// Copyright (c) the chaindns authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "chaindns/gateway.hpp"

#include <atomic>
#include <memory>
#include <string>
#include <thread>
#include <vector>

namespace chaindns
{
  /// UDP front end. A small pool of threads shares one bound socket; each
  /// datagram is answered inline (resolution is a snapshot lookup, so there
  /// is no queue to drain beyond the in-flight datagrams themselves).
  class UdpDnsServer
  {
  public:
    UdpDnsServer(std::shared_ptr<Gateway> gw, std::string host, uint16_t port, int threads = 4);
    ~UdpDnsServer();

    UdpDnsServer(const UdpDnsServer&) = delete;
    UdpDnsServer& operator=(const UdpDnsServer&) = delete;

    void start();
    void stop(); // idempotent; joins the pool

    uint16_t port() const
    {
      return port_;
    }

  private:
    void loop();

    std::shared_ptr<Gateway> gw_;
    std::string host_;
    uint16_t port_;
    int nthreads_;
    int fd_ = -1;
    std::atomic<bool> stop_{false};
    std::vector<std::thread> threads_;
  };

  /// HTTP front end exposing GET /resolve. Wraps the vendored httplib
  /// server; stop() is graceful and drains in-flight handlers.
  class RestServer
  {
  public:
    RestServer(std::shared_ptr<Gateway> gw, std::string host, uint16_t port);
    ~RestServer();

    RestServer(const RestServer&) = delete;
    RestServer& operator=(const RestServer&) = delete;

    void start();
    void stop();

    uint16_t port() const
    {
      return port_;
    }

  private:
    struct Impl;
    std::shared_ptr<Gateway> gw_;
    std::string host_;
    uint16_t port_;
    std::unique_ptr<Impl> impl_;
    std::thread thread_;
  };
}
