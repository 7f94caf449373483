// Copyright 2026 The quadpool Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <tuple>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "quadpool/dataset.hpp"
#include "quadpool/error.hpp"
#include "quadpool/pipeline.hpp"
#include "quadpool/train.hpp"

namespace quadpool {

inline double accuracy(const std::vector<bool>& predicted, const std::vector<bool>& labels) {
  if (predicted.size() != labels.size()) throw InvalidParameterError("accuracy: length mismatch");
  if (predicted.empty()) throw InvalidParameterError("accuracy: no samples");
  std::size_t agree = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) agree += predicted[i] == labels[i] ? 1 : 0;
  return static_cast<double>(agree) / static_cast<double>(labels.size());
}

struct RunResult {
  std::string config_id;
  std::uint64_t seed = 0;
  double valid_accuracy = 0.0;
  double test_accuracy = 0.0;
};

enum class Metric { valid, test };

/// Mean and standard error (sample sd with n - 1, divided by sqrt(n)).
/// A single run has stderr 0 and is flagged `degenerate`.
struct AggregateResult {
  std::string config_id;
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
  bool degenerate = false;
};

inline AggregateResult aggregate(const std::string& config_id, std::span<const double> values) {
  if (values.empty()) throw InvalidParameterError("aggregate needs at least one run");
  AggregateResult r{config_id, 0.0, 0.0, values.size(), values.size() == 1};
  double sum = 0.0;
  for (double v : values) sum += v;
  r.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    r.std_error = sd / std::sqrt(static_cast<double>(values.size()));
  }
  return r;
}

inline AggregateResult aggregate_runs(const std::vector<RunResult>& runs, Metric metric = Metric::valid) {
  if (runs.empty()) throw InvalidParameterError("aggregate_runs needs at least one run");
  std::vector<double> values;
  values.reserve(runs.size());
  for (const auto& r : runs) {
    if (r.config_id != runs.front().config_id)
      throw InvalidParameterError("aggregate_runs: mixed configs '" + runs.front().config_id + "' and '" +
                                  r.config_id + "'");
    values.push_back(metric == Metric::valid ? r.valid_accuracy : r.test_accuracy);
  }
  return aggregate(runs.front().config_id, values);
}

/// Percent with two decimals, e.g. "98.58 ± 0.07".
inline std::string format_mean_stderr(const AggregateResult& r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f \xC2\xB1 %.2f", 100.0 * r.mean, 100.0 * r.std_error);
  return buf;
}

// --- configuration sweep ----------------------------------------------------

struct SweepCell {
  ModelConfig model;
  TrainConfig train;
};

struct SweepRow {
  std::string config_id;
  ModelConfig model;
  std::vector<RunResult> runs;
  std::optional<AggregateResult> valid;
  std::optional<AggregateResult> test;
  std::optional<std::string> error;
};

struct SweepTable {
  std::vector<SweepRow> rows;
  std::optional<std::size_t> best;  // highest mean validation accuracy

  std::string to_csv() const {
    std::ostringstream os;
    os.precision(10);
    os << "architecture,pooling,resolution,n,valid_mean,valid_stderr,test_mean,test_stderr,valid_pm,test_pm,"
          "selected,error\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      os << to_string(architecture_of(r.model)) << ',' << to_string(pooling_of(r.model)) << ','
         << resolution_of(r.model) << ',' << r.runs.size() << ',';
      if (r.valid && r.test) {
        os << r.valid->mean << ',' << r.valid->std_error << ',' << r.test->mean << ',' << r.test->std_error << ','
           << format_mean_stderr(*r.valid) << ',' << format_mean_stderr(*r.test) << ',';
      } else {
        os << ",,,,,,";
      }
      os << (best && *best == i ? 1 : 0) << ',';
      if (r.error) {
        std::string e = *r.error;
        std::replace(e.begin(), e.end(), ',', ';');
        std::replace(e.begin(), e.end(), '\n', ' ');
        os << e;
      }
      os << '\n';
    }
    return os.str();
  }
};

/// Table order: pyramid before patch, square before quadrilateral, then
/// resolution descending.
inline bool table_order(const ModelConfig& a, const ModelConfig& b) {
  auto key = [](const ModelConfig& c) {
    return std::make_tuple(architecture_of(c) == Architecture::pyramid ? 0 : 1,
                           pooling_of(c) == PoolingMethod::square ? 0 : 1, -resolution_of(c));
  };
  return key(a) < key(b);
}

/// Trains every cell with every seed (seed overrides TrainConfig::seed),
/// evaluates on the validation and test scenes, and aggregates. A failing
/// cell records its error and the sweep continues.
inline SweepTable sweep_configs(std::span<const CachedScene> train_scenes, std::span<const CachedScene> valid_scenes,
                                std::span<const CachedScene> test_scenes, const std::vector<SweepCell>& grid,
                                const std::vector<std::uint64_t>& seeds, int threads = 1) {
  if (seeds.empty()) throw InvalidParameterError("sweep needs at least one seed");
  SweepTable table;
  for (const auto& cell : grid) {
    SweepRow row{config_id(cell.model), cell.model, {}, std::nullopt, std::nullopt, std::nullopt};
    try {
      for (auto seed : seeds) {
        TrainConfig tc = cell.train;
        tc.seed = seed;
        const TrainResult tr = train(cell.model, train_scenes, {}, tc, init_params(seed));
        row.runs.push_back({row.config_id, seed, evaluate_accuracy(cell.model, tr.params, valid_scenes, threads),
                            evaluate_accuracy(cell.model, tr.params, test_scenes, threads)});
      }
      row.valid = aggregate_runs(row.runs, Metric::valid);
      row.test = aggregate_runs(row.runs, Metric::test);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    table.rows.push_back(std::move(row));
  }
  std::stable_sort(table.rows.begin(), table.rows.end(),
                   [](const SweepRow& a, const SweepRow& b) { return table_order(a.model, b.model); });
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& v = table.rows[i].valid;
    if (v && (!table.best || v->mean > table.rows[*table.best].valid->mean)) table.best = i;
  }
  return table;
}

}  // namespace quadpool
