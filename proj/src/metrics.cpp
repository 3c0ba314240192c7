/**
 * Copyright (c) 2026 The pcsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "pcsim/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace pcsim::metrics {

  namespace {

    constexpr std::int64_t kTimeScale = MicroTime::kTicksPerMicro;

    struct Column {
      const char *name;
      std::int64_t scale;
    };

    constexpr Column kColumns[] = {
        {"hits", 1},
        {"misses", 1},
        {"evictions", 1},
        {"pc_time_us", kTimeScale},
        {"prune_time_us", kTimeScale},
        {"executed", 1},
        {"deferred", 1},
        {"cu", 1},
    };

    constexpr const char *kBatchesHeader =
        "slot,batch_index,hits,misses,evictions,pc_time_us,prune_time_us,"
        "executed,deferred,cu";

    std::string renderNumber(double v, std::int64_t scale) {
      if (scale == 1 && v == std::floor(v) && std::abs(v) < 9e15) {
        return std::to_string(static_cast<std::int64_t>(v));
      }
      return formatScaled(static_cast<__int128>(std::llround(v * kTimeScale)),
                          kTimeScale);
    }

    [[noreturn]] void badInput(const std::string &what) {
      throw MetricsError(MetricsError::Code::BadInput, what);
    }

    std::vector<std::string_view> splitCsv(std::string_view line) {
      std::vector<std::string_view> out;
      std::size_t start = 0;
      while (true) {
        auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
          out.push_back(line.substr(start));
          return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
      }
    }

    std::int64_t parseInt(std::string_view field) {
      std::int64_t v = 0;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
        badInput("bad integer '" + std::string(field) + "'");
      }
      return v;
    }

    // "12.345678" -> 12345678 at scale 1e6; exact.
    std::int64_t parseFixed(std::string_view field, std::int64_t scale) {
      if (scale == 1) {
        return parseInt(field);
      }
      bool negative = !field.empty() && field.front() == '-';
      if (negative) {
        field.remove_prefix(1);
      }
      auto dot = field.find('.');
      std::string_view whole = field.substr(0, dot);
      std::string frac = dot == std::string_view::npos
                           ? std::string()
                           : std::string(field.substr(dot + 1));
      if (frac.size() > 6) {
        badInput("too many decimals in '" + std::string(field) + "'");
      }
      frac.resize(6, '0');
      std::int64_t v = parseInt(whole) * scale + parseInt(frac);
      return negative ? -v : v;
    }

  }  // namespace

  std::string MetricSeries::render(std::int64_t raw) const {
    if (scale == 1) {
      return std::to_string(raw);
    }
    return formatScaled(raw, scale);
  }

  std::string SummaryRow::meanText() const {
    if (count == 0) {
      return "0.000000";
    }
    return formatScaled(static_cast<__int128>(sum_raw),
                        static_cast<__int128>(scale) * count);
  }

  SeriesStore::SeriesStore() {
    for (const auto &c : kColumns) {
      series_.push_back(MetricSeries{c.name, c.scale, {}});
    }
  }

  void SeriesStore::recordBatch(const exec::BatchStats &s) {
    slots_.push_back(s.slot);
    batch_index_.push_back(s.batch_index);
    const std::int64_t values[] = {
        static_cast<std::int64_t>(s.hits),
        static_cast<std::int64_t>(s.misses),
        static_cast<std::int64_t>(s.evictions),
        s.pc_time.ticks(),
        s.prune_time.ticks(),
        static_cast<std::int64_t>(s.executed_count),
        static_cast<std::int64_t>(s.deferred_count),
        static_cast<std::int64_t>(s.cu_consumed),
    };
    for (std::size_t i = 0; i < series_.size(); ++i) {
      series_[i].values.push_back(values[i]);
    }
  }

  const MetricSeries &SeriesStore::get(std::string_view name) const {
    for (const auto &s : series_) {
      if (s.name == name) {
        return s;
      }
    }
    throw std::out_of_range("no series named " + std::string(name));
  }

  SummaryRow summarize(const MetricSeries &series) {
    if (series.values.empty()) {
      throw MetricsError(MetricsError::Code::EmptySeries,
                         "cannot summarize empty series " + series.name);
    }
    SummaryRow row;
    row.metric = series.name;
    row.scale = series.scale;
    auto [lo, hi] = std::minmax_element(series.values.begin(), series.values.end());
    row.min_raw = *lo;
    row.max_raw = *hi;
    for (auto v : series.values) {
      row.sum_raw += v;
    }
    row.count = series.values.size();
    return row;
  }

  std::vector<HistogramBin> histogram(const MetricSeries &series, double bin_width,
                                      double max_value) {
    if (!(bin_width > 0.0) || !(max_value >= 0.0) || !std::isfinite(bin_width)
        || !std::isfinite(max_value)) {
      throw MetricsError(MetricsError::Code::BadBins,
                         "histogram needs bin_width > 0 and max_value >= 0");
    }
    const auto regular =
        static_cast<std::size_t>(std::ceil(max_value / bin_width - 1e-12));
    std::vector<HistogramBin> bins(regular + 1);
    for (std::size_t i = 0; i < regular; ++i) {
      bins[i].start = static_cast<double>(i) * bin_width;
    }
    bins.back().start = max_value;
    bins.back().overflow = true;

    for (std::size_t i = 0; i < series.values.size(); ++i) {
      const double v = series.valueAt(i);
      if (v >= max_value) {
        ++bins.back().count;
        continue;
      }
      auto idx = v <= 0.0 ? 0 : static_cast<std::size_t>(std::floor(v / bin_width));
      ++bins[std::min(idx, regular - 1)].count;
    }
    return bins;
  }

  std::vector<HistogramSpec> defaultHistogramSpecs() {
    return {
        {"misses", 1.0, 64.0},
        {"evictions", 1.0, 64.0},
        {"prune_time_us", 50.0, 1000.0},
        {"pc_time_us", 5000.0, 300000.0},
    };
  }

  void writeBatchesCsv(const SeriesStore &store, std::ostream &out) {
    out << kBatchesHeader << '\n';
    const auto &series = store.series();
    for (std::size_t row = 0; row < store.size(); ++row) {
      out << store.slots()[row] << ',' << store.batchIndices()[row];
      for (const auto &s : series) {
        out << ',' << s.render(s.values[row]);
      }
      out << '\n';
    }
  }

  void writeSummaryCsv(const SeriesStore &store, std::ostream &out) {
    out << "metric,min,max,mean,sum,count\n";
    if (store.size() == 0) {
      return;
    }
    for (const auto &s : store.series()) {
      auto row = summarize(s);
      out << row.metric << ',' << s.render(row.min_raw) << ','
          << s.render(row.max_raw) << ',' << row.meanText() << ','
          << s.render(row.sum_raw) << ',' << row.count << '\n';
    }
  }

  void writeHistogramsCsv(const SeriesStore &store,
                          const std::vector<HistogramSpec> &specs, std::ostream &out) {
    out << "metric,bin_start,bin_end,count\n";
    for (const auto &spec : specs) {
      const auto &s = store.get(spec.metric);
      for (const auto &bin : histogram(s, spec.bin_width, spec.max_value)) {
        out << spec.metric << ',' << renderNumber(bin.start, s.scale) << ',';
        if (bin.overflow) {
          out << "inf";
        } else {
          out << renderNumber(std::min(bin.start + spec.bin_width, spec.max_value),
                              s.scale);
        }
        out << ',' << bin.count << '\n';
      }
    }
  }

  SeriesStore readBatchesCsv(std::istream &in) {
    std::string line;
    if (!std::getline(in, line) || line != kBatchesHeader) {
      badInput("batches.csv: unexpected header");
    }
    SeriesStore store;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      auto fields = splitCsv(line);
      if (fields.size() != 2 + std::size(kColumns)) {
        badInput("batches.csv line " + std::to_string(line_no)
                 + ": wrong field count");
      }
      exec::BatchStats s;
      s.slot = static_cast<Slot>(parseInt(fields[0]));
      s.batch_index = static_cast<std::uint64_t>(parseInt(fields[1]));
      s.hits = static_cast<std::uint64_t>(parseInt(fields[2]));
      s.misses = static_cast<std::uint64_t>(parseInt(fields[3]));
      s.evictions = static_cast<std::uint64_t>(parseInt(fields[4]));
      s.pc_time = MicroTime::fromTicks(parseFixed(fields[5], kTimeScale));
      s.prune_time = MicroTime::fromTicks(parseFixed(fields[6], kTimeScale));
      s.executed_count = static_cast<std::uint64_t>(parseInt(fields[7]));
      s.deferred_count = static_cast<std::uint64_t>(parseInt(fields[8]));
      s.cu_consumed = static_cast<std::uint64_t>(parseInt(fields[9]));
      store.recordBatch(s);
    }
    return store;
  }

  double SweepReport::meanOf(std::uint64_t capacity, std::string_view metric) const {
    for (const auto &c : columns) {
      if (c.capacity == capacity) {
        const auto &s = c.series.get(metric);
        return s.values.empty() ? 0.0 : summarize(s).mean();
      }
    }
    throw std::out_of_range("no sweep column for capacity "
                            + std::to_string(capacity));
  }

  void writeSweepCsv(const SweepReport &report, std::ostream &out) {
    out << "metric";
    for (const auto &c : report.columns) {
      out << ',' << c.capacity;
    }
    out << '\n';

    static constexpr const char *kMetrics[] = {"misses", "evictions", "pc_time_us",
                                               "prune_time_us"};
    for (const char *metric : kMetrics) {
      for (bool mean : {false, true}) {
        out << metric << (mean ? "_mean" : "_sum");
        for (const auto &c : report.columns) {
          const auto &s = c.series.get(metric);
          SummaryRow row;
          row.scale = s.scale;
          if (!s.values.empty()) {
            row = summarize(s);
          }
          out << ',' << (mean ? row.meanText() : s.render(row.sum_raw));
        }
        out << '\n';
      }
    }
    out << "batches";
    for (const auto &c : report.columns) {
      out << ',' << c.series.size();
    }
    out << '\n';
  }

}  // namespace pcsim::metrics
