// Copyright (c) the chaindns authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "chaindns/gateway.hpp"

#include <algorithm>
#include <mutex>

namespace chaindns
{
  RoutingTable RoutingTable::defaults()
  {
    RoutingTable t;
    t.tld_to_chain["bit"] = Chain::namecoin;
    t.tld_to_chain["coin"] = Chain::emercoin;
    t.tld_to_chain["emc"] = Chain::emercoin;
    t.tld_to_chain["lib"] = Chain::emercoin;
    t.tld_to_chain["bazar"] = Chain::emercoin;
    return t;
  }

  std::optional<Chain> route_tld(const RoutingTable& table, std::string_view fqdn)
  {
    auto dot = fqdn.rfind('.');
    if (dot == std::string_view::npos || dot + 1 == fqdn.size())
      return std::nullopt;
    auto it = table.tld_to_chain.find(std::string(fqdn.substr(dot + 1)));
    if (it == table.tld_to_chain.end())
      return std::nullopt;
    return it->second;
  }

  std::string_view to_string(ResolveStatus s)
  {
    switch (s)
    {
      case ResolveStatus::ok:
        return "ok";
      case ResolveStatus::nxdomain:
        return "nxdomain";
      case ResolveStatus::unsupported_tld:
        return "unsupported_tld";
      case ResolveStatus::no_address_data:
        return "no_address_data";
      default:
        return "transient";
    }
  }

  DnsRecordSet filter_answers(const DnsRecordSet& rs, uint16_t qtype)
  {
    DnsRecordSet out;
    if (qtype == qtype_a || qtype == qtype_any)
      out.a = rs.a;
    if (qtype == qtype_aaaa || qtype == qtype_any)
      out.aaaa = rs.aaaa;
    if (qtype == qtype_any)
    {
      out.ns = rs.ns;
      out.txt = rs.txt;
    }
    return out;
  }

  Gateway::Gateway(std::shared_ptr<const NameDb> db, RoutingTable routing, GatewayOptions opts)
    : db_(std::move(db)), routing_(std::move(routing)), opts_(opts)
  {}

  void Gateway::swap_db(std::shared_ptr<const NameDb> db)
  {
    std::unique_lock lock(mu_);
    db_ = std::move(db);
  }

  std::shared_ptr<const NameDb> Gateway::db() const
  {
    std::shared_lock lock(mu_);
    return db_;
  }

  namespace
  {
    ResolutionResult from_views(std::vector<RecordView> views, uint16_t qtype)
    {
      ResolutionResult res;
      if (views.empty())
      {
        res.status = ResolveStatus::nxdomain;
        return res;
      }
      res.collision = views.size() > 1;
      const RecordView& best = views.front();
      res.answers = filter_answers(best.records, qtype);
      res.source = ResolutionSource{best.chain(), best.raw_name(), best.folded.last_update_height};
      res.status = res.answers.empty() ? ResolveStatus::no_address_data : ResolveStatus::ok;
      return res;
    }
  }

  ResolutionResult Gateway::resolve_on(const NameDb& db, std::string_view fqdn, uint16_t qtype,
                                       std::optional<uint64_t> at_height) const
  {
    auto backend = route_tld(routing_, fqdn);
    if (!backend)
      return {ResolveStatus::unsupported_tld, {}, false, std::nullopt};

    AsOf at = db.as_of(at_height);
    auto views = db.lookup_fqdn(fqdn, at);
    std::erase_if(views, [&](const RecordView& v) { return v.chain() != *backend; });
    return from_views(std::move(views), qtype);
  }

  ResolutionResult Gateway::resolve(std::string_view fqdn, uint16_t qtype,
                                    std::optional<uint64_t> at_height) const
  {
    auto snapshot = db();
    if (!snapshot)
      return {ResolveStatus::transient, {}, false, std::nullopt};
    return resolve_on(*snapshot, fqdn, qtype, at_height);
  }

  ResolutionResult Gateway::resolve_exact(std::string_view name, uint16_t qtype) const
  {
    auto snapshot = db();
    if (!snapshot)
      return {ResolveStatus::transient, {}, false, std::nullopt};

    // Candidate raw forms per chain; no case folding, no TLD routing.
    std::vector<std::pair<Chain, std::string>> candidates;
    candidates.emplace_back(Chain::emercoin, "dns:" + std::string(name));
    if (name.size() > 4 && name.ends_with(".bit"))
      candidates.emplace_back(Chain::namecoin,
                              "d/" + std::string(name.substr(0, name.size() - 4)));
    candidates.emplace_back(Chain::emercoin, std::string(name));
    candidates.emplace_back(Chain::namecoin, std::string(name));

    AsOf at = snapshot->latest();
    std::vector<RecordView> views;
    for (const auto& [chain, raw] : candidates)
      if (auto v = snapshot->lookup_exact(chain, raw, at))
        views.push_back(std::move(*v));

    std::sort(views.begin(), views.end(), [](const RecordView& a, const RecordView& b) {
      if (a.folded.registered_height != b.folded.registered_height)
        return a.folded.registered_height < b.folded.registered_height;
      return a.folded.registered_txid < b.folded.registered_txid;
    });
    return from_views(std::move(views), qtype);
  }

  std::vector<uint8_t> Gateway::handle_packet(std::span<const uint8_t> packet) const
  {
    auto q = decode_query(packet);
    if (q.status == DecodeStatus::malformed)
    {
      if (opts_.drop_malformed || !q.id_known)
        return {};
      return encode_error(q.id, q.rd, rcode_formerr, nullptr, false);
    }
    if (q.status == DecodeStatus::unsupported)
      return encode_error(q.id, q.rd, rcode_notimp, q.question_known ? &q.question : nullptr,
                          false);

    auto result = resolve(ascii_lower_copy(q.question.qname), q.question.qtype);
    switch (result.status)
    {
      case ResolveStatus::ok:
        return encode_answers(q.id, q.rd, q.question, result.answers, opts_.ttl);
      case ResolveStatus::no_address_data:
        return encode_error(q.id, q.rd, rcode_noerror, &q.question, true);
      case ResolveStatus::nxdomain:
        return encode_error(q.id, q.rd, rcode_nxdomain, &q.question, true);
      case ResolveStatus::unsupported_tld:
        return encode_error(q.id, q.rd,
                            routing_.unknown_action == RoutingTable::UnknownTld::refuse
                              ? rcode_refused
                              : rcode_nxdomain,
                            &q.question,
                            routing_.unknown_action != RoutingTable::UnknownTld::refuse);
      case ResolveStatus::transient:
      default:
        return encode_error(q.id, q.rd, rcode_servfail, &q.question, false);
    }
  }
}
