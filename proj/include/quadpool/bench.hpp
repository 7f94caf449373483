// Copyright 2026 The quadpool Authors
// SPDX-License-Identifier: Apache-2.0
//
// Inference latency as a function of the number of parking spaces.

#pragma once

#include <algorithm>
#include <chrono>
#include <sstream>
#include <string>
#include <vector>

#include "quadpool/error.hpp"
#include "quadpool/pipeline.hpp"

namespace quadpool {

struct TimingPoint {
  int num_spaces = 0;
  double seconds = 0.0;
};

struct TimingCurve {
  std::string architecture;
  std::vector<TimingPoint> points;

  std::string to_csv(bool header = true) const {
    std::ostringstream os;
    os.precision(9);
    if (header) os << "architecture,num_spaces,seconds\n";
    for (const auto& p : points) os << architecture << ',' << p.num_spaces << ',' << std::fixed << p.seconds << '\n';
    return os.str();
  }
};

struct BenchOptions {
  int repetitions = 5;
  int warmup = 2;
  int threads = 1;
};

/// Scene with n spaces, cycling through the base quads.
inline std::vector<Quadrilateral> replicate_quads(const std::vector<Quadrilateral>& base, int n) {
  if (base.empty()) throw InvalidParameterError("benchmark needs at least one base quad");
  std::vector<Quadrilateral> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(base[static_cast<std::size_t>(i) % base.size()]);
  return out;
}

/// Median wall time of full-scene inference over `repetitions` runs after
/// `warmup` untimed runs, for each space count. Repetitions are interleaved
/// round-robin across counts so slow drifts in machine speed hit every count
/// alike instead of biasing whichever count was being timed.
inline TimingCurve benchmark_inference(const ModelConfig& model, const ModelParams& params, const ImageBuffer& image,
                                       const std::vector<Quadrilateral>& base_quads, const std::vector<int>& counts,
                                       const BenchOptions& opts = {}) {
  if (counts.empty()) throw InvalidParameterError("benchmark needs at least one space count");
  if (opts.repetitions < 1 || opts.warmup < 0) throw InvalidParameterError("invalid repetition settings");
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] < 1) throw InvalidParameterError("space counts must be >= 1");
    if (i > 0 && counts[i] <= counts[i - 1]) throw InvalidParameterError("space counts must be strictly increasing");
  }
  TimingCurve curve;
  curve.architecture = std::string(to_string(architecture_of(model)));
  if (opts.threads > 1) curve.architecture += "-mt" + std::to_string(opts.threads);
  std::vector<std::vector<Quadrilateral>> scenes;
  for (int n : counts) scenes.push_back(replicate_quads(base_quads, n));
  volatile double sink = 0.0;
  auto run = [&](const std::vector<Quadrilateral>& quads) {
    const auto pred = infer(model, params, image, quads, {opts.threads, nullptr});
    sink = sink + pred.scores.front();
  };
  for (const auto& quads : scenes)
    for (int w = 0; w < opts.warmup; ++w) run(quads);
  std::vector<std::vector<double>> times(scenes.size());
  for (int r = 0; r < opts.repetitions; ++r) {
    for (std::size_t k = 0; k < scenes.size(); ++k) {
      const auto t0 = std::chrono::steady_clock::now();
      run(scenes[k]);
      times[k].push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
  }
  for (std::size_t k = 0; k < scenes.size(); ++k) {
    auto& t = times[k];
    std::sort(t.begin(), t.end());
    const std::size_t m = t.size();
    curve.points.push_back({counts[k], m % 2 ? t[m / 2] : 0.5 * (t[m / 2 - 1] + t[m / 2])});
  }
  return curve;
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Least-squares fit of seconds against num_spaces.
inline LinearFit fit_line(const TimingCurve& curve) {
  const std::size_t n = curve.points.size();
  if (n < 2) throw InvalidParameterError("line fit needs at least two points");
  double mx = 0.0, my = 0.0;
  for (const auto& p : curve.points) {
    mx += p.num_spaces;
    my += p.seconds;
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& p : curve.points) {
    const double dx = p.num_spaces - mx;
    const double dy = p.seconds - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

/// (max - min) / median of the timings.
inline double relative_spread(const TimingCurve& curve) {
  if (curve.points.empty()) throw InvalidParameterError("empty timing curve");
  std::vector<double> t;
  for (const auto& p : curve.points) t.push_back(p.seconds);
  std::sort(t.begin(), t.end());
  const std::size_t m = t.size();
  const double median = m % 2 ? t[m / 2] : 0.5 * (t[m / 2 - 1] + t[m / 2]);
  return (t.back() - t.front()) / median;
}

inline std::vector<int> parse_count_range(const std::string& spec) {
  // "start:stop:step" (inclusive) or a comma-separated list.
  std::vector<int> out;
  if (spec.find(':') != std::string::npos) {
    std::istringstream is(spec);
    std::string a, b, c;
    if (!std::getline(is, a, ':') || !std::getline(is, b, ':')) throw InvalidParameterError("bad range " + spec);
    if (!std::getline(is, c)) c = "1";
    const int start = std::stoi(a), stop = std::stoi(b), step = std::stoi(c);
    if (step < 1 || start < 1 || stop < start) throw InvalidParameterError("bad range " + spec);
    for (int v = start; v <= stop; v += step) out.push_back(v);
  } else {
    std::istringstream is(spec);
    std::string tok;
    while (std::getline(is, tok, ',')) out.push_back(std::stoi(tok));
  }
  if (out.empty()) throw InvalidParameterError("empty count list");
  return out;
}

}  // namespace quadpool
