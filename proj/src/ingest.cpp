// Copyright (c) the chaindns authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "chaindns/ingest.hpp"

#include "chaindns/namedb.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <istream>

namespace chaindns
{
  namespace
  {
    using nlohmann::json;

    const json& require(const json& doc, const char* key)
    {
      auto it = doc.find(key);
      if (it == doc.end())
        throw DumpError("missing-field", key);
      return *it;
    }

    std::string require_string(const json& doc, const char* key)
    {
      const auto& node = require(doc, key);
      if (!node.is_string())
        throw DumpError("bad-field-type", std::string(key) + " must be a string");
      return node.get<std::string>();
    }

    int64_t require_integer(const json& doc, const char* key)
    {
      const auto& node = require(doc, key);
      if (!node.is_number_integer())
        throw DumpError("bad-field-type", std::string(key) + " must be an integer");
      return node.get<int64_t>();
    }
  }

  NameOperation parse_dump_line(std::string_view line)
  {
    if (line.size() > max_line_bytes)
      throw DumpError("line-too-long", "");

    auto doc = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded())
      throw DumpError("bad-json", "");
    if (!doc.is_object())
      throw DumpError("not-an-object", "");

    static const char* known_keys[] = {"chain", "op",   "name", "value",
                                       "owner", "height", "time", "txid",
                                       "expiry_days"};
    for (const auto& item : doc.items())
    {
      bool known = false;
      for (const char* k : known_keys)
        known = known || item.key() == k;
      if (!known)
        throw DumpError("unexpected-key", item.key());
    }

    NameOperation op;
    auto chain = chain_from_string(require_string(doc, "chain"));
    if (!chain)
      throw DumpError("unknown-chain", doc["chain"].get<std::string>());
    op.chain = *chain;

    auto kind = op_from_string(require_string(doc, "op"));
    if (!kind)
      throw DumpError("unknown-op", doc["op"].get<std::string>());
    op.op = *kind;

    op.raw_name = require_string(doc, "name");
    if (op.raw_name.empty())
      throw DumpError("empty-name", "");
    if (op.raw_name.size() > max_name_bytes)
      throw DumpError("name-too-long", "");

    op.value = require_string(doc, "value");
    if (op.value.size() > max_value_bytes)
      throw DumpError("value-too-long", "");
    if (op.op == OpKind::del && !op.value.empty())
      throw DumpError("delete-with-value", "");

    op.owner = require_string(doc, "owner");

    int64_t height = require_integer(doc, "height");
    if (height < 0)
      throw DumpError("bad-height", "negative");
    op.height = static_cast<uint64_t>(height);

    op.time = require_integer(doc, "time");
    if (op.time <= 0)
      throw DumpError("bad-time", "must be positive");

    op.txid = require_string(doc, "txid");
    if (!valid_txid(op.txid))
      throw DumpError("bad-txid", "");

    if (auto it = doc.find("expiry_days"); it != doc.end())
    {
      if (op.chain != Chain::emercoin)
        throw DumpError("expiry-on-namecoin", "");
      if (!it->is_number_integer())
        throw DumpError("bad-field-type", "expiry_days must be an integer");
      int64_t days = it->get<int64_t>();
      if (days <= 0 || days > INT32_MAX)
        throw DumpError("bad-expiry", "");
      op.expiry_days = static_cast<uint32_t>(days);
    }
    return op;
  }

  std::string serialize_operation(const NameOperation& op)
  {
    json doc;
    doc["chain"] = to_string(op.chain);
    doc["op"] = to_string(op.op);
    doc["name"] = op.raw_name;
    doc["value"] = op.value;
    doc["owner"] = op.owner;
    doc["height"] = op.height;
    doc["time"] = op.time;
    doc["txid"] = op.txid;
    if (op.expiry_days)
      doc["expiry_days"] = *op.expiry_days;
    return doc.dump();
  }

  IngestReport ingest_stream(std::istream& in, NameDb& db)
  {
    IngestReport report;

    struct Pending
    {
      NameOperation op;
      uint64_t line_no;
      std::string line; // exact duplicate detection
    };
    std::vector<Pending> pending;

    std::string line;
    uint64_t line_no = 0;
    while (std::getline(in, line))
    {
      line_no++;
      if (!line.empty() && line.back() == '\r')
        line.pop_back();
      bool blank = std::all_of(line.begin(), line.end(),
                               [](char c) { return c == ' ' || c == '\t'; });
      if (blank)
        continue;
      try
      {
        pending.push_back({parse_dump_line(line), line_no, line});
      }
      catch (const DumpError& e)
      {
        report.rejected++;
        report.rejects.emplace_back(line_no, e.reason());
      }
    }

    // Apply in (height, txid) order regardless of file order; the line bytes
    // break exact ties so any permutation of the input applies identically.
    std::sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) {
      if (a.op.height != b.op.height)
        return a.op.height < b.op.height;
      if (a.op.txid != b.op.txid)
        return a.op.txid < b.op.txid;
      return a.line < b.line;
    });

    bool have_height = false;
    for (size_t i = 0; i < pending.size(); i++)
    {
      const auto& p = pending[i];
      if (i > 0 && pending[i - 1].op.txid == p.op.txid)
      {
        report.rejected++;
        report.rejects.emplace_back(p.line_no, "duplicate-txid");
        continue;
      }
      auto outcome = db.apply_operation(p.op);
      if (outcome.ok())
      {
        report.accepted++;
        if (!have_height)
        {
          report.min_height = report.max_height = p.op.height;
          have_height = true;
        }
        else
        {
          report.min_height = std::min(report.min_height, p.op.height);
          report.max_height = std::max(report.max_height, p.op.height);
        }
      }
      else
      {
        report.rejected++;
        report.rejects.emplace_back(p.line_no, outcome.reason);
      }
    }
    std::sort(report.rejects.begin(), report.rejects.end());
    return report;
  }

  IngestReport ingest_file(const std::string& path, NameDb& db)
  {
    std::ifstream in(path, std::ios::binary);
    if (!in)
      throw std::runtime_error("cannot open dump: " + path);
    return ingest_stream(in, db);
  }
}
