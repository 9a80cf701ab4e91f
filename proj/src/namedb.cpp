// Copyright (c) the chaindns authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "chaindns/namedb.hpp"

#include "chaindns/ingest.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace chaindns
{
  ExpiryPoint compute_expiry(Chain chain, const FoldedState& folded, const ExpiryPolicy& policy)
  {
    ExpiryPoint e;
    if (chain == Chain::namecoin)
    {
      e.kind = ExpiryPoint::Kind::block_horizon;
      e.height = folded.last_update_height + policy.namecoin_horizon_blocks;
    }
    else
    {
      e.kind = ExpiryPoint::Kind::wall_clock;
      // 64-bit arithmetic throughout: registrations thousands of years out
      // must stay representable.
      e.time = folded.last_update_time + static_cast<int64_t>(folded.current_days) * 86400;
    }
    return e;
  }

  FoldedState fold_history(Chain chain, const std::vector<HistoryEntry>& entries, size_t count,
                           const ExpiryPolicy& policy)
  {
    FoldedState f;
    for (size_t i = 0; i < count && i < entries.size(); i++)
    {
      const auto& e = entries[i];
      switch (e.op)
      {
        case OpKind::reg:
          f.generation++;
          f.registered_height = e.height;
          f.registered_time = e.time;
          f.registered_txid = e.txid;
          [[fallthrough]];
        case OpKind::update:
          f.owner = e.owner;
          f.value = e.value;
          f.last_update_height = e.height;
          f.last_update_time = e.time;
          f.current_days = e.expiry_days.value_or(policy.emercoin_default_days);
          f.deleted = false;
          break;
        case OpKind::del:
          f.deleted = true;
          break;
      }
    }
    f.expires_at = compute_expiry(chain, f, policy);
    return f;
  }

  ApplyOutcome NameDb::apply_operation(const NameOperation& op)
  {
    if (txids_.count(op.txid))
      return {ApplyStatus::rejected, "duplicate-txid"};

    Key key{op.chain, op.raw_name};
    auto it = states_.find(key);
    NameState* st = it == states_.end() ? nullptr : &it->second;

    if (st && !st->history.empty())
    {
      const auto& last = st->history.back();
      if (op.height < last.height || (op.height == last.height && op.txid <= last.txid))
        return {ApplyStatus::rejected, "out-of-order"};
    }

    AsOf at{op.height, op.time};
    bool active = st && !st->latest.deleted && st->latest.generation > 0 &&
                  !st->latest.expires_at.expired_at(at);

    ApplyStatus status;
    switch (op.op)
    {
      case OpKind::reg:
        if (active)
          return {ApplyStatus::rejected, "already-active"};
        status = ApplyStatus::created;
        break;
      case OpKind::update:
        if (!st)
          return {ApplyStatus::rejected, "unknown-name"};
        if (!active)
          return {ApplyStatus::rejected, "expired-name"};
        status = ApplyStatus::updated;
        break;
      case OpKind::del:
      default:
        if (!st)
          return {ApplyStatus::rejected, "unknown-name"};
        if (!active)
          return {ApplyStatus::rejected, "expired-name"};
        status = ApplyStatus::deleted;
        break;
    }

    if (!st)
    {
      NameState fresh;
      fresh.chain = op.chain;
      fresh.raw_name = op.raw_name;
      if (auto info = name_to_fqdn(op.chain, op.raw_name))
      {
        fresh.fqdn = info->fqdn;
        fresh.tag = info->tag;
      }
      auto [pos, inserted] = states_.emplace(key, std::move(fresh));
      st = &pos->second;
      if (!st->fqdn.empty())
        fqdn_index_[st->fqdn].push_back(st);
    }

    st->history.push_back(
      {op.height, op.time, op.op, op.owner, op.value, op.txid, op.expiry_days});
    st->latest = fold_history(st->chain, st->history, st->history.size(), policy_);

    txids_.insert(op.txid);
    auto [ht, fresh_height] = height_times_.try_emplace(op.height, op.time);
    if (!fresh_height)
      ht->second = std::max(ht->second, op.time);
    latest_.height = std::max(latest_.height, op.height);
    latest_.time = std::max(latest_.time, op.time);
    return {status, ""};
  }

  AsOf NameDb::as_of(std::optional<uint64_t> height) const
  {
    if (!height)
      return latest_;
    AsOf at{*height, 0};
    for (auto it = height_times_.begin(); it != height_times_.end() && it->first <= *height; ++it)
      at.time = std::max(at.time, it->second);
    return at;
  }

  std::optional<RecordView> NameDb::view_at(const NameState& st, const AsOf& at) const
  {
    size_t count = 0;
    for (const auto& e : st.history)
    {
      if (e.height > at.height)
        break;
      count++;
    }
    if (count == 0)
      return std::nullopt;

    RecordView view;
    view.state = &st;
    view.folded = count == st.history.size() ? st.latest
                                             : fold_history(st.chain, st.history, count, policy_);
    if (view.folded.generation == 0)
      return std::nullopt;
    if (st.chain == Chain::namecoin)
      view.records = parse_namecoin_value(view.folded.value).root;
    else
      view.records = parse_emercoin_value(view.folded.value);
    return view;
  }

  namespace
  {
    bool view_active(const RecordView& v, const AsOf& at)
    {
      return !v.folded.deleted && !v.folded.expires_at.expired_at(at);
    }
  }

  std::optional<RecordView> NameDb::lookup_exact(Chain chain, std::string_view raw_name,
                                                 const AsOf& at) const
  {
    auto it = states_.find(Key{chain, std::string(raw_name)});
    if (it == states_.end())
      return std::nullopt;
    auto view = view_at(it->second, at);
    if (!view || !view_active(*view, at))
      return std::nullopt;
    return view;
  }

  std::vector<RecordView> NameDb::lookup_fqdn(std::string_view fqdn, const AsOf& at) const
  {
    std::vector<RecordView> out;
    auto it = fqdn_index_.find(std::string(fqdn));
    if (it == fqdn_index_.end())
      return out;
    for (const NameState* st : it->second)
    {
      auto view = view_at(*st, at);
      if (view && view_active(*view, at))
        out.push_back(std::move(*view));
    }
    std::sort(out.begin(), out.end(), [](const RecordView& a, const RecordView& b) {
      if (a.folded.registered_height != b.folded.registered_height)
        return a.folded.registered_height < b.folded.registered_height;
      return a.folded.registered_txid < b.folded.registered_txid;
    });
    return out;
  }

  std::vector<RecordView> NameDb::active_set(const AsOf& at) const
  {
    return collect(at, /*active_only=*/true);
  }

  std::vector<RecordView> NameDb::collect(const AsOf& at, bool active_only) const
  {
    std::vector<RecordView> out;
    out.reserve(states_.size());
    for (const auto& [key, st] : states_)
    {
      auto view = view_at(st, at);
      if (!view)
        continue;
      if (active_only && !view_active(*view, at))
        continue;
      out.push_back(std::move(*view));
    }
    // states_ iterates by (chain, raw_name); reorder to (chain, fqdn, raw_name)
    std::sort(out.begin(), out.end(), [](const RecordView& a, const RecordView& b) {
      if (a.chain() != b.chain())
        return a.chain() < b.chain();
      if (a.fqdn() != b.fqdn())
        return a.fqdn() < b.fqdn();
      return a.raw_name() < b.raw_name();
    });
    return out;
  }

  // ---------------------------------------------------------------------
  // Snapshot format: little-endian, length-prefixed strings, version gated.
  // Derived state is not stored; loading refolds every history, so a loaded
  // database is bit-for-bit the database that was saved.

  namespace
  {
    constexpr char snapshot_magic[4] = {'C', 'D', 'N', 'S'};
    constexpr uint32_t snapshot_version = 1;

    void put_u32(std::string& out, uint32_t v)
    {
      for (int i = 0; i < 4; i++)
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }

    void put_u64(std::string& out, uint64_t v)
    {
      for (int i = 0; i < 8; i++)
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }

    void put_str(std::string& out, const std::string& s)
    {
      put_u64(out, s.size());
      out += s;
    }

    struct Reader
    {
      const std::string& buf;
      size_t pos = 0;

      void need(size_t n) const
      {
        if (pos + n > buf.size())
          throw std::runtime_error("snapshot truncated");
      }

      uint32_t u32()
      {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; i++)
          v |= static_cast<uint32_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
        pos += 4;
        return v;
      }

      uint64_t u64()
      {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; i++)
          v |= static_cast<uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
        pos += 8;
        return v;
      }

      std::string str()
      {
        uint64_t n = u64();
        need(n);
        std::string s = buf.substr(pos, n);
        pos += n;
        return s;
      }
    };
  }

  void NameDb::save_snapshot(const std::string& path) const
  {
    std::string out;
    out.append(snapshot_magic, 4);
    put_u32(out, snapshot_version);
    put_u64(out, policy_.namecoin_horizon_blocks);
    put_u32(out, policy_.emercoin_default_days);
    put_u64(out, states_.size());
    for (const auto& [key, st] : states_)
    {
      out.push_back(static_cast<char>(st.chain));
      put_str(out, st.raw_name);
      put_u32(out, static_cast<uint32_t>(st.history.size()));
      for (const auto& e : st.history)
      {
        put_u64(out, e.height);
        put_u64(out, static_cast<uint64_t>(e.time));
        out.push_back(static_cast<char>(e.op));
        put_str(out, e.owner);
        put_str(out, e.value);
        put_str(out, e.txid);
        out.push_back(e.expiry_days ? 1 : 0);
        if (e.expiry_days)
          put_u32(out, *e.expiry_days);
      }
    }

    std::string tmp = path + ".tmp";
    {
      std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
      if (!f)
        throw std::runtime_error("cannot write snapshot: " + tmp);
      f.write(out.data(), static_cast<std::streamsize>(out.size()));
      f.flush();
      if (!f)
        throw std::runtime_error("short write: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
      throw std::runtime_error("cannot replace snapshot: " + path);
  }

  NameDb NameDb::load_snapshot(const std::string& path)
  {
    std::ifstream f(path, std::ios::binary);
    if (!f)
      throw std::runtime_error("cannot open snapshot: " + path);
    std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    Reader r{buf};
    r.need(4);
    if (std::memcmp(buf.data(), snapshot_magic, 4) != 0)
      throw std::runtime_error("not a snapshot file: " + path);
    r.pos = 4;
    uint32_t version = r.u32();
    if (version != snapshot_version)
      throw std::runtime_error("unsupported snapshot version " + std::to_string(version));

    ExpiryPolicy policy;
    policy.namecoin_horizon_blocks = r.u64();
    policy.emercoin_default_days = r.u32();
    NameDb db(policy);

    uint64_t count = r.u64();
    for (uint64_t i = 0; i < count; i++)
    {
      r.need(1);
      NameState st;
      st.chain = static_cast<Chain>(buf[r.pos++]);
      st.raw_name = r.str();
      if (auto info = name_to_fqdn(st.chain, st.raw_name))
      {
        st.fqdn = info->fqdn;
        st.tag = info->tag;
      }
      uint32_t entries = r.u32();
      st.history.reserve(entries);
      for (uint32_t j = 0; j < entries; j++)
      {
        HistoryEntry e;
        e.height = r.u64();
        e.time = static_cast<int64_t>(r.u64());
        r.need(1);
        e.op = static_cast<OpKind>(buf[r.pos++]);
        e.owner = r.str();
        e.value = r.str();
        e.txid = r.str();
        r.need(1);
        bool has_days = buf[r.pos++] != 0;
        if (has_days)
          e.expiry_days = r.u32();
        st.history.push_back(std::move(e));
      }
      st.latest = fold_history(st.chain, st.history, st.history.size(), policy);

      for (const auto& e : st.history)
      {
        db.txids_.insert(e.txid);
        auto [ht, fresh] = db.height_times_.try_emplace(e.height, e.time);
        if (!fresh)
          ht->second = std::max(ht->second, e.time);
        db.latest_.height = std::max(db.latest_.height, e.height);
        db.latest_.time = std::max(db.latest_.time, e.time);
      }

      Key key{st.chain, st.raw_name};
      auto [pos, inserted] = db.states_.emplace(key, std::move(st));
      if (!inserted)
        throw std::runtime_error("duplicate name in snapshot");
      if (!pos->second.fqdn.empty())
        db.fqdn_index_[pos->second.fqdn].push_back(&pos->second);
    }
    if (r.pos != buf.size())
      throw std::runtime_error("trailing bytes in snapshot");
    return db;
  }

  void NameDb::export_ndjson(std::ostream& out) const
  {
    struct Row
    {
      uint64_t height;
      const std::string* txid;
      const NameState* st;
      const HistoryEntry* entry;
    };
    std::vector<Row> rows;
    for (const auto& [key, st] : states_)
      for (const auto& e : st.history)
        rows.push_back({e.height, &e.txid, &st, &e});
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
      if (a.height != b.height)
        return a.height < b.height;
      return *a.txid < *b.txid;
    });
    for (const auto& row : rows)
    {
      NameOperation op;
      op.chain = row.st->chain;
      op.op = row.entry->op;
      op.raw_name = row.st->raw_name;
      op.value = row.entry->value;
      op.owner = row.entry->owner;
      op.height = row.entry->height;
      op.time = row.entry->time;
      op.txid = row.entry->txid;
      op.expiry_days = row.entry->expiry_days;
      out << serialize_operation(op) << '\n';
    }
  }
}
