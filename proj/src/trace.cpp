/**
 * Copyright (c) 2026 The pcsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <string>
#include <string_view>

#include "pcsim/workload.hpp"

namespace pcsim::workload {

  namespace {

    constexpr std::string_view kHeader[] = {
        "# pcsim-trace v1",
        "# prog,program_id,deployment_slot,effective_slot,account_size,valid",
        "# slot,slot,parent,branch",
        "# root,slot",
        "# tx,slot,sig,blockhash_ref,requested_cu,is_vote,data_bytes,programs,"
        "reads,writes,precompiles",
    };
    constexpr std::string_view kFooterPrefix = "# end,";

    template <typename T>
    void writeList(std::ostream &out, const std::vector<T> &items) {
      bool first = true;
      for (const auto &item : items) {
        if (!first) {
          out << ';';
        }
        first = false;
        if constexpr (std::is_same_v<T, ProgramId>) {
          out << item.hex();
        } else {
          out << item;
        }
      }
    }

    void writeRecord(std::ostream &out, const TraceRecord &record) {
      if (const auto *p = std::get_if<ProgramRecord>(&record)) {
        out << "prog," << p->id.hex() << ',' << p->deployment_slot << ','
            << p->effective_slot << ',' << p->account_size << ','
            << (p->valid ? 1 : 0);
      } else if (const auto *s = std::get_if<SlotRecord>(&record)) {
        out << "slot," << s->slot << ',' << s->parent << ','
            << (s->branch == Branch::Main ? "main" : "fork");
      } else if (const auto *r = std::get_if<RootRecord>(&record)) {
        out << "root," << r->slot;
      } else {
        const auto &t = std::get<TxRecord>(record);
        const auto &tx = t.tx;
        out << "tx," << t.slot << ',' << tx.sig << ',' << tx.blockhash_ref << ','
            << tx.requested_cu << ',' << (tx.is_vote ? 1 : 0) << ','
            << tx.data_bytes << ',';
        writeList(out, tx.programs);
        out << ',';
        writeList(out, tx.reads);
        out << ',';
        writeList(out, tx.writes);
        out << ',';
        writeList(out, tx.precompiles);
      }
      out << '\n';
    }

    class LineParser {
     public:
      explicit LineParser(std::size_t line) : line_(line) {}

      [[noreturn]] void fail(const std::string &what) const {
        throw WorkloadError(WorkloadError::Code::MalformedTrace,
                            "line " + std::to_string(line_) + ": " + what, line_);
      }

      std::vector<std::string_view> split(std::string_view text, char sep) const {
        std::vector<std::string_view> out;
        std::size_t start = 0;
        while (true) {
          auto pos = text.find(sep, start);
          if (pos == std::string_view::npos) {
            out.push_back(text.substr(start));
            return out;
          }
          out.push_back(text.substr(start, pos - start));
          start = pos + 1;
        }
      }

      template <typename T>
      T number(std::string_view field, const char *name) const {
        T value{};
        auto [ptr, ec] =
            std::from_chars(field.data(), field.data() + field.size(), value);
        if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
          fail(std::string("bad ") + name + " '" + std::string(field) + "'");
        }
        return value;
      }

      bool flag(std::string_view field, const char *name) const {
        if (field == "0") return false;
        if (field == "1") return true;
        fail(std::string("bad ") + name + " '" + std::string(field) + "'");
      }

      ProgramId program(std::string_view field) const {
        auto id = ProgramId::fromHex(field);
        if (!id) {
          fail("bad program id '" + std::string(field) + "'");
        }
        return *id;
      }

      template <typename T>
      std::vector<T> numberList(std::string_view field, const char *name) const {
        std::vector<T> out;
        if (field.empty()) {
          return out;
        }
        for (auto item : split(field, ';')) {
          out.push_back(number<T>(item, name));
        }
        return out;
      }

      std::vector<ProgramId> programList(std::string_view field) const {
        std::vector<ProgramId> out;
        if (field.empty()) {
          return out;
        }
        for (auto item : split(field, ';')) {
          out.push_back(program(item));
        }
        return out;
      }

     private:
      std::size_t line_;
    };

  }  // namespace

  void writeTrace(const std::vector<TraceRecord> &records, std::ostream &out) {
    for (auto h : kHeader) {
      out << h << '\n';
    }
    for (const auto &r : records) {
      writeRecord(out, r);
    }
    out << kFooterPrefix << records.size() << '\n';
    if (!out) {
      throw WorkloadError(WorkloadError::Code::IoFailure, "trace write failed");
    }
  }

  void writeTrace(const std::vector<TraceRecord> &records,
                  const std::filesystem::path &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
      throw WorkloadError(WorkloadError::Code::IoFailure,
                          "cannot open " + path.string() + " for writing");
    }
    writeTrace(records, out);
  }

  std::vector<TraceRecord> loadTrace(std::istream &in) {
    std::vector<TraceRecord> records;
    std::string line;
    std::size_t line_no = 0;

    for (auto expected : kHeader) {
      ++line_no;
      if (!std::getline(in, line) || line != expected) {
        LineParser(line_no).fail("expected header '" + std::string(expected) + "'");
      }
    }

    std::set<Slot> known{0};
    std::optional<Slot> current_slot;
    bool footer_seen = false;

    while (std::getline(in, line)) {
      ++line_no;
      LineParser p(line_no);
      if (footer_seen) {
        p.fail("content after end marker");
      }
      std::string_view text(line);
      if (text.starts_with(kFooterPrefix)) {
        auto count = p.number<std::size_t>(text.substr(kFooterPrefix.size()),
                                           "record count");
        if (count != records.size()) {
          p.fail("end marker counts " + std::to_string(count) + " records, found "
                 + std::to_string(records.size()));
        }
        footer_seen = true;
        continue;
      }

      auto fields = p.split(text, ',');
      const auto kind = fields[0];
      auto expect_fields = [&](std::size_t n) {
        if (fields.size() != n) {
          p.fail(std::string(kind) + " record needs " + std::to_string(n)
                 + " fields, got " + std::to_string(fields.size()));
        }
      };

      if (kind == "prog") {
        expect_fields(6);
        ProgramRecord r;
        r.id = p.program(fields[1]);
        r.deployment_slot = p.number<Slot>(fields[2], "deployment_slot");
        r.effective_slot = p.number<Slot>(fields[3], "effective_slot");
        r.account_size = p.number<std::uint64_t>(fields[4], "account_size");
        r.valid = p.flag(fields[5], "valid");
        if (r.effective_slot < r.deployment_slot) {
          p.fail("effective slot precedes deployment slot");
        }
        records.emplace_back(r);
      } else if (kind == "slot") {
        expect_fields(4);
        SlotRecord r;
        r.slot = p.number<Slot>(fields[1], "slot");
        r.parent = p.number<Slot>(fields[2], "parent");
        if (fields[3] == "main") {
          r.branch = Branch::Main;
        } else if (fields[3] == "fork") {
          r.branch = Branch::Fork;
        } else {
          p.fail("bad branch '" + std::string(fields[3]) + "'");
        }
        if (!known.contains(r.parent)) {
          p.fail("slot " + std::to_string(r.slot) + " has unknown parent "
                 + std::to_string(r.parent));
        }
        if (r.slot <= r.parent || known.contains(r.slot)) {
          p.fail("slot " + std::to_string(r.slot) + " is not a new child of "
                 + std::to_string(r.parent));
        }
        known.insert(r.slot);
        current_slot = r.slot;
        records.emplace_back(r);
      } else if (kind == "root") {
        expect_fields(2);
        RootRecord r{p.number<Slot>(fields[1], "slot")};
        if (!known.contains(r.slot)) {
          p.fail("root references unknown slot " + std::to_string(r.slot));
        }
        records.emplace_back(r);
      } else if (kind == "tx") {
        expect_fields(11);
        TxRecord r;
        r.slot = p.number<Slot>(fields[1], "slot");
        if (!current_slot || *current_slot != r.slot) {
          p.fail("transaction for slot " + std::to_string(r.slot)
                 + " outside its slot block");
        }
        auto &tx = r.tx;
        tx.sig = p.number<std::uint64_t>(fields[2], "sig");
        tx.blockhash_ref = p.number<Slot>(fields[3], "blockhash_ref");
        tx.requested_cu = p.number<std::uint64_t>(fields[4], "requested_cu");
        tx.is_vote = p.flag(fields[5], "is_vote");
        tx.data_bytes = p.number<std::uint64_t>(fields[6], "data_bytes");
        tx.programs = p.programList(fields[7]);
        tx.reads = p.numberList<txn::AccountId>(fields[8], "account");
        tx.writes = p.numberList<txn::AccountId>(fields[9], "account");
        tx.precompiles = p.numberList<txn::PrecompileId>(fields[10], "precompile");
        if (!tx.wellFormed()) {
          p.fail("account sets must be sorted, unique and disjoint");
        }
        records.emplace_back(std::move(r));
      } else {
        p.fail("unknown record kind '" + std::string(kind) + "'");
      }
    }

    if (in.bad()) {
      throw WorkloadError(WorkloadError::Code::IoFailure, "trace read failed");
    }
    if (!footer_seen) {
      LineParser(line_no + 1).fail("missing end marker (truncated trace?)");
    }
    return records;
  }

  std::vector<TraceRecord> loadTrace(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      throw WorkloadError(WorkloadError::Code::IoFailure,
                          "cannot open " + path.string());
    }
    return loadTrace(in);
  }

}  // namespace pcsim::workload
