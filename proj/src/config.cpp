/**
 * Copyright (c) 2026 The pcsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>

#include "pcsim/metrics.hpp"

namespace pcsim::metrics {

  namespace {

    std::string_view trim(std::string_view s) {
      while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
      }
      while (!s.empty()
             && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
      }
      return s;
    }

    class ValueReader {
     public:
      ValueReader(std::string origin, std::size_t line, std::string key)
          : origin_(std::move(origin)), line_(line), key_(std::move(key)) {}

      [[noreturn]] void fail(const std::string &what) const {
        throw MetricsError(MetricsError::Code::BadInput,
                           origin_ + ":" + std::to_string(line_) + ": " + key_ + ": "
                               + what);
      }

      std::uint64_t u64(std::string_view v) const {
        std::uint64_t out = 0;
        std::string digits;
        for (char c : v) {
          if (c != '_') digits.push_back(c);
        }
        auto [ptr, ec] =
            std::from_chars(digits.data(), digits.data() + digits.size(), out);
        if (digits.empty() || ec != std::errc{}
            || ptr != digits.data() + digits.size()) {
          fail("expected a non-negative integer, got '" + std::string(v) + "'");
        }
        return out;
      }

      double f64(std::string_view v) const {
        double out = 0;
        auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) {
          fail("expected a number, got '" + std::string(v) + "'");
        }
        return out;
      }

      std::string str(std::string_view v) const {
        if (v.size() < 2 || v.front() != '"' || v.back() != '"') {
          fail("expected a quoted string");
        }
        return std::string(v.substr(1, v.size() - 2));
      }

      // "[1, 2, 3]" or "1,2,3"; empty brackets give an empty list.
      std::vector<std::string_view> list(std::string_view v) const {
        if (!v.empty() && v.front() == '[') {
          if (v.back() != ']') {
            fail("unterminated list");
          }
          v = trim(v.substr(1, v.size() - 2));
        }
        std::vector<std::string_view> out;
        if (v.empty()) {
          return out;
        }
        std::size_t start = 0;
        while (true) {
          auto pos = v.find(',', start);
          out.push_back(trim(v.substr(start, pos - start)));
          if (pos == std::string_view::npos) {
            return out;
          }
          start = pos + 1;
        }
      }

     private:
      std::string origin_;
      std::size_t line_;
      std::string key_;
    };

    using Setter = std::function<void(SimConfig &, std::string_view, const ValueReader &)>;

    template <typename T>
    Setter setU64(T member) {
      return [member](SimConfig &c, std::string_view v, const ValueReader &r) {
        std::invoke(member, c) = r.u64(v);
      };
    }

    template <typename T>
    Setter setF64(T member) {
      return [member](SimConfig &c, std::string_view v, const ValueReader &r) {
        std::invoke(member, c) = r.f64(v);
      };
    }

    MicroTime micros(std::string_view v, const ValueReader &r) {
      return MicroTime::fromMicros(r.f64(v));
    }

    const std::map<std::string, Setter, std::less<>> &setters() {
      static const std::map<std::string, Setter, std::less<>> table = [] {
        std::map<std::string, Setter, std::less<>> m;
        auto wl = [](auto field) {
          return [field](SimConfig &c) -> auto & { return c.workload.*field; };
        };
        using W = workload::WorkloadConfig;
        m["workload.seed"] = [](SimConfig &c, std::string_view v, const ValueReader &r) {
          c.workload.seed = r.u64(v);
          c.sim.seed = c.workload.seed;
        };
        m["workload.num_programs"] = setU64(wl(&W::num_programs));
        m["workload.zipf_s"] = setF64(wl(&W::zipf_s));
        m["workload.num_accounts"] = setU64(wl(&W::num_accounts));
        m["workload.txs_per_slot_mean"] = setF64(wl(&W::txs_per_slot_mean));
        m["workload.write_prob"] = setF64(wl(&W::write_prob));
        m["workload.accounts_per_tx_min"] = setU64(wl(&W::accounts_per_tx_min));
        m["workload.accounts_per_tx_max"] = setU64(wl(&W::accounts_per_tx_max));
        m["workload.cu_min"] = setU64(wl(&W::cu_min));
        m["workload.cu_max"] = setU64(wl(&W::cu_max));
        m["workload.data_bytes_max"] = setU64(wl(&W::data_bytes_max));
        m["workload.vote_fraction"] = setF64(wl(&W::vote_fraction));
        m["workload.num_voters"] = setU64(wl(&W::num_voters));
        m["workload.slots"] = setU64(wl(&W::slots));
        m["workload.fork_prob_per_slot"] = setF64(wl(&W::fork_prob_per_slot));
        m["workload.root_lag"] = setU64(wl(&W::root_lag));
        m["workload.invalid_program_fraction"] =
            setF64(wl(&W::invalid_program_fraction));
        m["workload.trace"] = [](SimConfig &c, std::string_view v, const ValueReader &r) {
          c.trace_path = r.str(v);
        };

        m["cache.capacity"] = setU64([](SimConfig &c) -> auto & {
          return c.sim.cache.capacity;
        });
        m["cache.eviction_fraction"] = setF64([](SimConfig &c) -> auto & {
          return c.sim.cache.eviction_fraction;
        });
        m["cache.slots_per_epoch"] = setU64([](SimConfig &c) -> auto & {
          return c.sim.cache.slots_per_epoch;
        });

        auto lim = [](auto field) {
          return [field](SimConfig &c) -> auto & { return c.sim.slot.limits.*field; };
        };
        using L = txn::BlockLimits;
        m["budget.block_cu_limit"] = setU64(lim(&L::block_cu_limit));
        m["budget.per_account_cu_limit"] = setU64(lim(&L::per_account_cu_limit));
        m["budget.vote_cu_limit"] = setU64(lim(&L::vote_cu_limit));
        m["budget.account_data_limit_bytes"] =
            setU64(lim(&L::account_data_limit_bytes));
        m["budget.max_locks_per_tx"] = setU64(lim(&L::max_locks_per_tx));
        m["budget.max_tx_cu"] = setU64(lim(&L::max_tx_cu));
        m["budget.max_blockhash_age"] = setU64([](SimConfig &c) -> auto & {
          return c.sim.slot.max_blockhash_age;
        });
        m["budget.enabled_precompiles"] =
            [](SimConfig &c, std::string_view v, const ValueReader &r) {
              c.sim.slot.enabled_precompiles.clear();
              for (auto item : r.list(v)) {
                auto id = r.u64(item);
                if (id > 255) {
                  r.fail("precompile id out of range");
                }
                c.sim.slot.enabled_precompiles.insert(
                    static_cast<txn::PrecompileId>(id));
              }
            };

        m["latency.per_miss_load_us"] =
            [](SimConfig &c, std::string_view v, const ValueReader &r) {
              c.sim.latency.per_miss_load = micros(v, r);
            };
        m["latency.per_batch_base_us"] =
            [](SimConfig &c, std::string_view v, const ValueReader &r) {
              c.sim.latency.per_batch_base = micros(v, r);
            };
        m["latency.per_hit_us"] =
            [](SimConfig &c, std::string_view v, const ValueReader &r) {
              c.sim.latency.per_hit = micros(v, r);
            };
        m["latency.prune_per_entry_us"] =
            [](SimConfig &c, std::string_view v, const ValueReader &r) {
              c.sim.latency.prune_per_entry = micros(v, r);
            };

        m["sim.lanes"] = setU64([](SimConfig &c) -> auto & {
          return c.sim.slot.lanes;
        });
        m["sim.max_batch_size"] = setU64([](SimConfig &c) -> auto & {
          return c.sim.slot.max_batch_size;
        });
        m["sim.max_batches_per_slot"] = setU64([](SimConfig &c) -> auto & {
          return c.sim.slot.max_batches_per_slot;
        });
        m["sim.actual_cu_fraction"] = setF64([](SimConfig &c) -> auto & {
          return c.sim.slot.actual_cu_fraction;
        });
        return m;
      }();
      return table;
    }

    // [report] histogram.<metric> = width, max
    void setHistogram(SimConfig &c, std::string_view metric, std::string_view v,
                      const ValueReader &r, bool &replaced) {
      SeriesStore names;
      bool known = false;
      for (const auto &s : names.series()) {
        known = known || s.name == metric;
      }
      if (!known) {
        r.fail("no series named '" + std::string(metric) + "'");
      }
      auto parts = r.list(v);
      if (parts.size() != 2) {
        r.fail("expected 'bin_width, max_value'");
      }
      if (!replaced) {
        c.histograms.clear();
        replaced = true;
      }
      HistogramSpec spec{std::string(metric), r.f64(parts[0]), r.f64(parts[1])};
      if (!(spec.bin_width > 0.0) || !(spec.max_value >= 0.0)) {
        r.fail("bin_width must be > 0 and max_value >= 0");
      }
      c.histograms.push_back(std::move(spec));
    }

  }  // namespace

  void SimConfig::validate() const {
    workload.validate();
    sim.cache.validate();
    if (sim.slot.lanes == 0 || sim.slot.max_batch_size == 0
        || sim.slot.max_batches_per_slot == 0) {
      throw MetricsError(MetricsError::Code::BadInput,
                         "lanes, max_batch_size and max_batches_per_slot must be > 0");
    }
    if (!(sim.slot.actual_cu_fraction >= 0.0 && sim.slot.actual_cu_fraction <= 1.0)) {
      throw MetricsError(MetricsError::Code::BadInput,
                         "actual_cu_fraction must lie in [0, 1]");
    }
  }

  SimConfig parseConfig(std::istream &in, const std::string &origin) {
    SimConfig config;
    std::string section;
    std::string line;
    std::size_t line_no = 0;
    bool histograms_replaced = false;

    while (std::getline(in, line)) {
      ++line_no;
      std::string_view text(line);
      if (auto hash = text.find('#'); hash != std::string_view::npos) {
        text = text.substr(0, hash);
      }
      text = trim(text);
      if (text.empty()) {
        continue;
      }
      if (text.front() == '[') {
        if (text.back() != ']') {
          ValueReader(origin, line_no, std::string(text)).fail("bad section header");
        }
        section = std::string(trim(text.substr(1, text.size() - 2)));
        static const std::set<std::string> kSections{"workload", "cache", "budget",
                                                     "latency",  "sim",   "report"};
        if (!kSections.contains(section)) {
          ValueReader(origin, line_no, section).fail("unknown section");
        }
        continue;
      }
      auto eq = text.find('=');
      if (eq == std::string_view::npos) {
        ValueReader(origin, line_no, std::string(text)).fail("expected key = value");
      }
      auto key = trim(text.substr(0, eq));
      auto value = trim(text.substr(eq + 1));
      if (section.empty()) {
        ValueReader(origin, line_no, std::string(key)).fail("key outside a section");
      }
      std::string full = section + "." + std::string(key);
      ValueReader reader(origin, line_no, full);

      if (section == "report") {
        constexpr std::string_view kPrefix = "histogram.";
        if (!key.starts_with(kPrefix)) {
          reader.fail("unknown key");
        }
        setHistogram(config, key.substr(kPrefix.size()), value, reader,
                     histograms_replaced);
        continue;
      }
      auto it = setters().find(full);
      if (it == setters().end()) {
        reader.fail("unknown key");
      }
      it->second(config, value, reader);
    }
    try {
      config.validate();
    } catch (const std::exception &e) {
      throw MetricsError(MetricsError::Code::BadInput, origin + ": " + e.what());
    }
    return config;
  }

  SimConfig loadConfig(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
      throw MetricsError(MetricsError::Code::BadInput, "cannot open " + path.string());
    }
    auto config = parseConfig(in, path.string());
    if (config.trace_path && config.trace_path->is_relative()) {
      config.trace_path = path.parent_path() / *config.trace_path;
    }
    return config;
  }

}  // namespace pcsim::metrics
