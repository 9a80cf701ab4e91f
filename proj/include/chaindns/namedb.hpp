// Copyright (c) the chaindns authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "chaindns/nvs.hpp"
#include "chaindns/types.hpp"

#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

namespace chaindns
{
  struct ExpiryPolicy
  {
    uint64_t namecoin_horizon_blocks = 36000;
    uint32_t emercoin_default_days = 365;
  };

  struct ExpiryPoint
  {
    enum class Kind : uint8_t
    {
      block_horizon = 0, // namecoin: first height at which the name is gone
      wall_clock = 1,    // emercoin: first unix second at which it is gone
      never = 2
    };

    Kind kind = Kind::never;
    uint64_t height = 0;
    int64_t time = 0;

    bool expired_at(const AsOf& at) const
    {
      switch (kind)
      {
        case Kind::block_horizon:
          return at.height >= height;
        case Kind::wall_clock:
          return at.time >= time;
        default:
          return false;
      }
    }
  };

  struct HistoryEntry
  {
    uint64_t height = 0;
    int64_t time = 0;
    OpKind op{};
    std::string owner;
    std::string value;
    std::string txid;
    std::optional<uint32_t> expiry_days;
  };

  /// State of one name folded over a prefix of its history. All derived
  /// state is a pure function of the entries, which keeps snapshot loads
  /// and as-of queries on the single code path.
  struct FoldedState
  {
    std::string owner;
    std::string value;
    uint64_t registered_height = 0;
    int64_t registered_time = 0;
    std::string registered_txid;
    uint64_t last_update_height = 0;
    int64_t last_update_time = 0;
    uint32_t generation = 0; // count of register entries folded in
    bool deleted = false;    // last folded entry was a delete
    uint32_t current_days = 0;
    ExpiryPoint expires_at;
  };

  struct NameState
  {
    Chain chain{};
    std::string raw_name;
    std::string fqdn; // empty when name_to_fqdn failed; excluded from lookups
    NamespaceTag tag = NamespaceTag::other;
    std::vector<HistoryEntry> history; // strictly increasing (height, txid)
    FoldedState latest;                // fold of the full history
  };

  /// Materialized view of one name at an as-of point.
  struct RecordView
  {
    const NameState* state = nullptr;
    FoldedState folded;
    DnsRecordSet records; // parsed from folded.value per chain grammar

    Chain chain() const
    {
      return state->chain;
    }
    const std::string& raw_name() const
    {
      return state->raw_name;
    }
    const std::string& fqdn() const
    {
      return state->fqdn;
    }
  };

  enum class ApplyStatus : uint8_t
  {
    created = 0,
    updated = 1,
    deleted = 2,
    rejected = 3
  };

  struct ApplyOutcome
  {
    ApplyStatus status = ApplyStatus::rejected;
    std::string reason; // set when rejected: unknown-name, expired-name,
                        // already-active, duplicate-txid, out-of-order
    bool ok() const
    {
      return status != ApplyStatus::rejected;
    }
  };

  ExpiryPoint compute_expiry(Chain chain, const FoldedState& folded, const ExpiryPolicy& policy);

  FoldedState fold_history(Chain chain, const std::vector<HistoryEntry>& entries, size_t count,
                           const ExpiryPolicy& policy);

  /// In-memory name database. Single writer; concurrent readers are expected
  /// to hold a shared_ptr snapshot that the writer swaps out whole.
  class NameDb
  {
  public:
    explicit NameDb(ExpiryPolicy policy = {}) : policy_(policy) {}

    // fqdn_index_ points into states_ nodes; moves keep map nodes alive,
    // copies would not.
    NameDb(const NameDb&) = delete;
    NameDb& operator=(const NameDb&) = delete;
    NameDb(NameDb&&) = default;
    NameDb& operator=(NameDb&&) = default;

    const ExpiryPolicy& policy() const
    {
      return policy_;
    }

    /// Applies one operation. Rejections leave history and the txid set
    /// untouched. Register re-creates expired or deleted names under a new
    /// generation; register on a currently active name rejects.
    ApplyOutcome apply_operation(const NameOperation& op);

    /// Highest applied (height, time); the default as-of point.
    AsOf latest() const
    {
      return latest_;
    }

    /// As-of point for a height-only query: the time component is the
    /// maximum op time at or below that height.
    AsOf as_of(std::optional<uint64_t> height) const;

    size_t name_count() const
    {
      return states_.size();
    }

    bool txid_seen(std::string_view txid) const
    {
      return txids_.count(std::string(txid)) != 0;
    }

    /// Byte-exact raw-name lookup; no case folding. Present iff registered,
    /// not deleted and not expired at `at`.
    std::optional<RecordView> lookup_exact(Chain chain, std::string_view raw_name,
                                           const AsOf& at) const;

    /// All active records whose fqdn equals the (already lowercase) query,
    /// ordered by (registration height, registration txid), earliest first.
    std::vector<RecordView> lookup_fqdn(std::string_view fqdn, const AsOf& at) const;

    /// Every active record at `at`, ordered by (chain, fqdn, raw_name).
    std::vector<RecordView> active_set(const AsOf& at) const;

    /// Record views for analytics: active records only, or every name that
    /// has history (folded at `at`, including expired and deleted ones).
    std::vector<RecordView> collect(const AsOf& at, bool active_only) const;

    /// Versioned single-file binary snapshot, written next to `path` and
    /// moved over it atomically.
    void save_snapshot(const std::string& path) const;
    static NameDb load_snapshot(const std::string& path);

    /// All applied operations as canonical dump lines in (height, txid)
    /// order; feeding them back through ingest reproduces this database.
    void export_ndjson(std::ostream& out) const;

  private:
    struct Key
    {
      Chain chain;
      std::string raw_name;

      bool operator<(const Key& o) const
      {
        if (chain != o.chain)
          return chain < o.chain;
        return raw_name < o.raw_name;
      }
    };

    std::optional<RecordView> view_at(const NameState& st, const AsOf& at) const;

    ExpiryPolicy policy_;
    std::map<Key, NameState> states_;
    std::map<std::string, std::vector<const NameState*>> fqdn_index_;
    std::unordered_set<std::string> txids_; // applied ops only
    std::map<uint64_t, int64_t> height_times_;
    AsOf latest_{};
  };
}
