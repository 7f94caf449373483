// Copyright 2026 The quadpool Authors
// SPDX-License-Identifier: Apache-2.0
//
// Synthetic parking-lot scenes with exact ground truth.
//
// A lot is a grid of rows x spaces_per_row rectangular spaces on the ground
// plane. The plane is projected into the image through a tilt homography
// (the far edge is narrower than the near edge, plus per-scene corner
// jitter), which yields oblique quadrilateral outlines. Row 0 is the far
// row at the top of the image; the camera-near edge is the bottom.
//
// Rendering is done per pixel in plane coordinates: asphalt with uniform
// noise, painted boundary lines, and flat dark vehicle rectangles. Vehicles
// are pushed toward the camera by occlusion_strength * space depth, so they
// overhang into the next row's spaces.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "quadpool/dataset.hpp"
#include "quadpool/error.hpp"
#include "quadpool/geometry.hpp"
#include "quadpool/image.hpp"
#include "quadpool/rng.hpp"

namespace quadpool {

struct LotSpec {
  int rows = 3;
  int spaces_per_row = 6;
  double space_width = 24.0;  // plane units == near-edge pixels
  double space_depth = 40.0;
  double tilt = 0.3;          // far edge is (1 - tilt) times the near edge
  double foreshortening = 1.0;  // image depth per plane depth unit
  double corner_jitter = 3.0; // pixels, per trapezoid corner
  double occupancy_rate = 0.5;
  double occlusion_strength = 0.0;
  double noise_sigma = 0.02;
  std::string lot_id = "lot0";
  std::uint64_t seed = 0;

  static constexpr int kMargin = 8;

  int image_width() const { return static_cast<int>(std::ceil(spaces_per_row * space_width)) + 2 * kMargin; }
  int image_height() const {
    return static_cast<int>(std::ceil(rows * space_depth * foreshortening)) + 2 * kMargin;
  }

  void validate() const {
    if (rows < 1 || spaces_per_row < 1) throw InvalidParameterError("lot needs at least one row and one space");
    if (!(space_width >= 4.0) || !(space_depth >= 4.0)) throw InvalidParameterError("spaces must be >= 4 px");
    if (!(tilt >= 0.0 && tilt < 0.95)) throw InvalidParameterError("tilt must lie in [0, 0.95)");
    if (!(foreshortening > 0.0 && foreshortening <= 1.0))
      throw InvalidParameterError("foreshortening must lie in (0, 1]");
    if (!(corner_jitter >= 0.0)) throw InvalidParameterError("corner jitter must be >= 0");
    if (!(occupancy_rate >= 0.0 && occupancy_rate <= 1.0))
      throw InvalidParameterError("occupancy_rate must lie in [0, 1]");
    if (!(occlusion_strength >= 0.0 && occlusion_strength <= 1.0))
      throw InvalidParameterError("occlusion_strength must lie in [0, 1]");
    if (!(noise_sigma >= 0.0)) throw InvalidParameterError("noise_sigma must be >= 0");
    if (lot_id.empty()) throw InvalidParameterError("lot_id must be non-empty");
  }
};

/// What the generator decided for one space.
struct SpaceLedgerEntry {
  int row = 0;
  int col = 0;
  bool occupied = false;
  std::optional<Quadrilateral> vehicle;  // projected vehicle outline
  double vehicle_level = 0.0;            // base gray level of the vehicle
};

struct GeneratedScene {
  ImageBuffer image;
  SceneAnnotation annotation;
  std::vector<SpaceLedgerEntry> ledger;
};

inline constexpr double kAsphaltMin = 0.40;
inline constexpr double kAsphaltMax = 0.58;
inline constexpr double kVehicleMin = 0.04;
inline constexpr double kVehicleMax = 0.20;
inline constexpr double kLineLevel = 0.88;

namespace detail {

struct PlaneRect {
  double x0, y0, x1, y1;
  bool contains(Point2 p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
};

inline Quadrilateral project_rect(const Homography3x3& h, const PlaneRect& r) {
  return Quadrilateral({h.apply({r.x0, r.y0}), h.apply({r.x1, r.y0}), h.apply({r.x1, r.y1}), h.apply({r.x0, r.y1})});
}

}  // namespace detail

inline GeneratedScene generate_scene(const LotSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const int width = spec.image_width();
  const int height = spec.image_height();
  const double lot_w = spec.spaces_per_row * spec.space_width;
  const double lot_d = spec.rows * spec.space_depth;
  const double m = LotSpec::kMargin;

  // Plane rectangle [0, lot_w] x [0, lot_d] -> image trapezoid.
  const double near_left = m, near_right = width - 1 - m;
  const double cx = 0.5 * (near_left + near_right);
  const double far_half = 0.5 * (near_right - near_left) * (1.0 - spec.tilt);
  auto jitter = [&] { return spec.corner_jitter > 0.0 ? rng.uniform(-spec.corner_jitter, spec.corner_jitter) : 0.0; };
  std::array<Point2, 4> corners{Point2{cx - far_half, m}, Point2{cx + far_half, m},
                                Point2{near_right, height - 1 - m}, Point2{near_left, height - 1 - m}};
  for (auto& c : corners) c = {c.x + jitter(), c.y + jitter()};
  const Homography3x3 plane_to_image =
      homography_from_unit_square(Quadrilateral(corners)).scale_domain(1.0 / lot_w, 1.0 / lot_d);
  const Homography3x3 image_to_plane = plane_to_image.inverse();

  // Scene appearance.
  const double asphalt = rng.uniform(kAsphaltMin, kAsphaltMax);
  const Rgb tint{rng.uniform(-0.02, 0.02), rng.uniform(-0.02, 0.02), rng.uniform(-0.02, 0.02)};
  const double line_half_width = 0.03 * std::min(spec.space_width, spec.space_depth);

  GeneratedScene scene{ImageBuffer(width, height), {}, {}};
  scene.annotation.lot_id = spec.lot_id;
  struct Vehicle {
    detail::PlaneRect rect;
    Rgb color;
    int row;
  };
  std::vector<Vehicle> vehicles;
  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.spaces_per_row; ++c) {
      const detail::PlaneRect space{c * spec.space_width, r * spec.space_depth, (c + 1) * spec.space_width,
                                    (r + 1) * spec.space_depth};
      SpaceLedgerEntry entry{r, c, rng.bernoulli(spec.occupancy_rate), std::nullopt, 0.0};
      if (entry.occupied) {
        const double inset_x = 0.15 * spec.space_width;
        const double inset_y = 0.10 * spec.space_depth;
        const double shift = spec.occlusion_strength * spec.space_depth;
        const detail::PlaneRect body{space.x0 + inset_x, space.y0 + inset_y + shift, space.x1 - inset_x,
                                     space.y1 - inset_y + shift};
        entry.vehicle_level = rng.uniform(kVehicleMin, kVehicleMax);
        const Rgb color{entry.vehicle_level + rng.uniform(-0.03, 0.03), entry.vehicle_level + rng.uniform(-0.03, 0.03),
                        entry.vehicle_level + rng.uniform(-0.03, 0.03)};
        entry.vehicle = detail::project_rect(plane_to_image, body);
        vehicles.push_back({body, color, r});
      }
      const Quadrilateral outline = detail::project_rect(plane_to_image, space);
      const auto& v = outline.vertices();
      const bool visible = std::any_of(v.begin(), v.end(), [&](const Point2& p) {
        return p.x >= -0.5 && p.y >= -0.5 && p.x <= width - 0.5 && p.y <= height - 0.5;
      });
      if (!visible)
        throw InvalidParameterError("space (" + std::to_string(r) + ", " + std::to_string(c) +
                                    ") projects fully outside the canvas");
      scene.annotation.spaces.push_back({outline, entry.occupied});
      scene.ledger.push_back(std::move(entry));
    }
  }
  // Nearer rows are painted last.
  std::stable_sort(vehicles.begin(), vehicles.end(), [](const Vehicle& a, const Vehicle& b) { return a.row > b.row; });

  const double noise_half_range = spec.noise_sigma * std::sqrt(3.0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const Point2 q = image_to_plane.apply({static_cast<double>(x), static_cast<double>(y)});
      Rgb color{asphalt + tint[0], asphalt + tint[1], asphalt + tint[2]};
      const bool in_lot = q.x >= -line_half_width && q.x <= lot_w + line_half_width && q.y >= -line_half_width &&
                          q.y <= lot_d + line_half_width;
      if (in_lot) {
        const double gx = q.x / spec.space_width;
        const double gy = q.y / spec.space_depth;
        const double dx = std::abs(gx - std::round(gx)) * spec.space_width;
        const double dy = std::abs(gy - std::round(gy)) * spec.space_depth;
        if (dx <= line_half_width || dy <= line_half_width) color = {kLineLevel, kLineLevel, kLineLevel};
      }
      for (const auto& veh : vehicles) {
        if (veh.rect.contains(q)) {
          color = veh.color;
          break;
        }
      }
      for (auto& ch : color) {
        if (noise_half_range > 0.0) ch += rng.uniform(-noise_half_range, noise_half_range);
        ch = std::clamp(ch, 0.0, 1.0);
      }
      scene.image.set_pixel(x, y, color);
    }
  }
  return scene;
}

// --- datasets -----------------------------------------------------------------

/// lot_id -> split. Each lot must appear at most once.
using SplitAssignment = std::vector<std::pair<std::string, Split>>;

namespace detail {

inline std::map<std::string, Split> checked_assignment(const SplitAssignment& assignment) {
  std::map<std::string, Split> out;
  for (const auto& [lot, split] : assignment) {
    const auto [it, inserted] = out.emplace(lot, split);
    if (!inserted && it->second != split)
      throw InvalidParameterError("lot '" + lot + "' assigned to more than one split");
  }
  return out;
}

}  // namespace detail

/// Generates every scene in memory with its split set from the assignment.
inline std::vector<GeneratedScene> generate_scenes(const std::vector<LotSpec>& specs,
                                                   const SplitAssignment& assignment) {
  const auto splits = detail::checked_assignment(assignment);
  std::vector<GeneratedScene> out;
  out.reserve(specs.size());
  std::map<std::string, int> per_lot;
  for (const auto& spec : specs) {
    const auto it = splits.find(spec.lot_id);
    if (it == splits.end()) throw InvalidParameterError("lot '" + spec.lot_id + "' has no split assignment");
    GeneratedScene s = generate_scene(spec);
    s.annotation.split = it->second;
    char name[32];
    std::snprintf(name, sizeof name, "_%03d.ppm", per_lot[spec.lot_id]++);
    s.annotation.image = "images/" + spec.lot_id + name;
    out.push_back(std::move(s));
  }
  return out;
}

inline CachedDataset to_cached(const std::vector<GeneratedScene>& scenes) {
  std::vector<CachedScene> cached;
  cached.reserve(scenes.size());
  for (const auto& s : scenes) cached.push_back({s.annotation, s.image});
  return CachedDataset(std::move(cached));
}

struct GeneratedDataset {
  std::filesystem::path manifest_path;
  std::vector<SceneAnnotation> annotations;
  DatasetStats ledger_stats;  // counted from the generator's own decisions
};

/// Writes images/<lot>_<n>.ppm and manifest.json under `out_dir`.
inline GeneratedDataset generate_dataset(const std::vector<LotSpec>& specs, const SplitAssignment& assignment,
                                         const std::filesystem::path& out_dir) {
  auto scenes = generate_scenes(specs, assignment);
  std::filesystem::create_directories(out_dir / "images");
  GeneratedDataset ds;
  ds.manifest_path = out_dir / "manifest.json";
  for (auto& s : scenes) {
    s.annotation.image_path = out_dir / s.annotation.image;
    write_ppm(s.annotation.image_path, s.image);
    ds.annotations.push_back(s.annotation);

    auto& st = ds.ledger_stats;
    ++st.num_images;
    ++st.per_split_images[static_cast<std::size_t>(s.annotation.split)];
    st.per_split_spaces[static_cast<std::size_t>(s.annotation.split)] += s.ledger.size();
    for (const auto& e : s.ledger) {
      ++st.num_spaces;
      st.num_occupied += e.occupied ? 1 : 0;
    }
  }
  auto& st = ds.ledger_stats;
  st.occupied_fraction = st.num_spaces ? static_cast<double>(st.num_occupied) / st.num_spaces : 0.0;
  save_manifest(ds.manifest_path, ds.annotations);
  return ds;
}

/// Scene-level knobs shared by all lots of a generated dataset.
struct SceneStyle {
  double occupancy_rate = 0.5;
  double occlusion_strength = 0.0;
  double noise_sigma = 0.02;
  double foreshortening = 0.6;
};

/// `num_lots` lots named <prefix><i>, each with its own randomized layout
/// and `scenes_per_lot` views (different jitter, occupancy and appearance).
inline std::vector<LotSpec> make_lot_specs(const std::string& prefix, int num_lots, int scenes_per_lot,
                                           const SceneStyle& style, std::uint64_t seed) {
  std::vector<LotSpec> specs;
  for (int l = 0; l < num_lots; ++l) {
    Rng lot_rng = Rng::derive(seed, 0x107, static_cast<std::uint64_t>(l));
    LotSpec base;
    base.lot_id = prefix + std::to_string(l);
    base.rows = 2 + static_cast<int>(lot_rng.below(3));
    base.spaces_per_row = 4 + static_cast<int>(lot_rng.below(4));
    base.space_width = std::round(lot_rng.uniform(20.0, 28.0));
    base.space_depth = std::round(lot_rng.uniform(32.0, 44.0));
    base.tilt = lot_rng.uniform(0.15, 0.45);
    base.foreshortening = style.foreshortening;
    base.corner_jitter = 3.0;
    base.occupancy_rate = style.occupancy_rate;
    base.occlusion_strength = style.occlusion_strength;
    base.noise_sigma = style.noise_sigma;
    for (int s = 0; s < scenes_per_lot; ++s) {
      LotSpec spec = base;
      spec.seed = Rng::derive(seed, static_cast<std::uint64_t>(l) + 1, static_cast<std::uint64_t>(s)).next_u64();
      specs.push_back(spec);
    }
  }
  return specs;
}

}  // namespace quadpool
