// Copyright 2026 The quadpool Authors
// SPDX-License-Identifier: Apache-2.0
//
// Annotation manifest: a JSON array of scenes,
//
//   [{"image": "lot_a/000.ppm", "lot_id": "A", "split": "train",
//     "spaces": [{"quad": [[x, y], [x, y], [x, y], [x, y]], "occupied": true}]}]
//
// Image paths are relative to the manifest's directory.

#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "quadpool/error.hpp"
#include "quadpool/geometry.hpp"
#include "quadpool/image.hpp"

namespace quadpool {

enum class Split { train = 0, valid = 1, test = 2 };

inline constexpr std::array<Split, 3> kAllSplits{Split::train, Split::valid, Split::test};

inline std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::valid: return "valid";
    case Split::test: return "test";
  }
  return "?";
}

inline Split parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "valid" || s == "validation" || s == "val") return Split::valid;
  if (s == "test") return Split::test;
  throw DatasetError("unknown split '" + std::string(s) + "'");
}

struct SpaceLabel {
  Quadrilateral quad;
  bool occupied = false;

  friend bool operator==(const SpaceLabel&, const SpaceLabel&) = default;
};

struct SceneAnnotation {
  std::string image;                 // as written in the manifest
  std::filesystem::path image_path;  // resolved against the manifest directory
  std::string lot_id;
  Split split = Split::train;
  std::vector<SpaceLabel> spaces;

  std::vector<Quadrilateral> quads() const {
    std::vector<Quadrilateral> out;
    out.reserve(spaces.size());
    for (const auto& s : spaces) out.push_back(s.quad);
    return out;
  }
  std::vector<bool> labels() const {
    std::vector<bool> out;
    out.reserve(spaces.size());
    for (const auto& s : spaces) out.push_back(s.occupied);
    return out;
  }

  friend bool operator==(const SceneAnnotation&, const SceneAnnotation&) = default;
};

namespace detail {

inline std::string scene_context(std::size_t index, const nlohmann::json& j) {
  std::string ctx = "scene " + std::to_string(index);
  if (j.is_object() && j.contains("image") && j["image"].is_string())
    ctx += " (image '" + j["image"].get<std::string>() + "')";
  return ctx;
}

inline std::pair<std::size_t, std::size_t> line_col(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace detail

/// Parses and validates manifest text. Quads are canonicalized; images are
/// only referenced, not decoded.
inline std::vector<SceneAnnotation> parse_manifest(std::string_view text, const std::filesystem::path& base_dir = {},
                                                   const std::string& origin = "<manifest>") {
  if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) return {};

  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = detail::line_col(text, e.byte == 0 ? 0 : e.byte - 1);
    const std::size_t from = text.rfind('\n', e.byte == 0 ? 0 : e.byte - 1);
    const std::size_t begin = from == std::string_view::npos ? 0 : from + 1;
    const std::size_t end = std::min(text.find('\n', begin), text.size());
    throw DatasetError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) +
                       ": JSON parse error near '" + std::string(text.substr(begin, end - begin)) + "'");
  }
  if (!root.is_array()) throw DatasetError(origin + ": manifest must be a JSON array of scenes");

  std::vector<SceneAnnotation> scenes;
  scenes.reserve(root.size());
  for (std::size_t si = 0; si < root.size(); ++si) {
    const auto& js = root[si];
    const std::string ctx = origin + ": " + detail::scene_context(si, js);
    if (!js.is_object()) throw DatasetError(ctx + ": scene must be an object");
    auto require = [&](const char* key) -> const nlohmann::json& {
      if (!js.contains(key)) throw DatasetError(ctx + ": missing field '" + key + "'");
      return js[key];
    };
    SceneAnnotation scene;
    const auto& image = require("image");
    const auto& lot = require("lot_id");
    const auto& split = require("split");
    const auto& spaces = require("spaces");
    if (!image.is_string() || image.get<std::string>().empty())
      throw DatasetError(ctx + ": 'image' must be a non-empty string");
    if (!lot.is_string() || lot.get<std::string>().empty())
      throw DatasetError(ctx + ": 'lot_id' must be a non-empty string");
    if (!split.is_string()) throw DatasetError(ctx + ": 'split' must be a string");
    if (!spaces.is_array() || spaces.empty()) throw DatasetError(ctx + ": 'spaces' must be a non-empty array");
    scene.image = image.get<std::string>();
    scene.image_path = base_dir / scene.image;
    scene.lot_id = lot.get<std::string>();
    try {
      scene.split = parse_split(split.get<std::string>());
    } catch (const DatasetError& e) {
      throw DatasetError(ctx + ": " + e.what());
    }

    for (std::size_t k = 0; k < spaces.size(); ++k) {
      const auto& sp = spaces[k];
      const std::string sctx = ctx + ", space " + std::to_string(k);
      if (!sp.is_object() || !sp.contains("quad") || !sp.contains("occupied"))
        throw DatasetError(sctx + ": space needs 'quad' and 'occupied'");
      const auto& q = sp["quad"];
      if (!q.is_array() || q.size() != 4) throw DatasetError(sctx + ": 'quad' must hold exactly 4 points");
      std::array<Point2, 4> pts;
      for (std::size_t v = 0; v < 4; ++v) {
        const auto& p = q[v];
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
          throw DatasetError(sctx + ": vertex " + std::to_string(v) + " must be [x, y]");
        pts[v] = {p[0].get<double>(), p[1].get<double>()};
      }
      if (!sp["occupied"].is_boolean()) throw DatasetError(sctx + ": 'occupied' must be a boolean");
      try {
        scene.spaces.push_back({Quadrilateral(pts), sp["occupied"].get<bool>()});
      } catch (const DegenerateGeometryError& e) {
        throw DatasetError(sctx + ": " + e.what());
      }
    }
    scenes.push_back(std::move(scene));
  }
  return scenes;
}

inline std::vector<SceneAnnotation> load_dataset(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest '" + manifest_path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str(), manifest_path.parent_path(), manifest_path.string());
}

inline nlohmann::json to_json(const std::vector<SceneAnnotation>& scenes) {
  nlohmann::json root = nlohmann::json::array();
  for (const auto& s : scenes) {
    nlohmann::json spaces = nlohmann::json::array();
    for (const auto& sp : s.spaces) {
      nlohmann::json quad = nlohmann::json::array();
      for (const auto& p : sp.quad.vertices()) quad.push_back({p.x, p.y});
      spaces.push_back({{"quad", quad}, {"occupied", sp.occupied}});
    }
    root.push_back({{"image", s.image}, {"lot_id", s.lot_id}, {"split", to_string(s.split)}, {"spaces", spaces}});
  }
  return root;
}

inline void save_manifest(const std::filesystem::path& path, const std::vector<SceneAnnotation>& scenes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write manifest '" + path.string() + "'");
  out << to_json(scenes).dump(2) << '\n';
  if (!out) throw IoError("failed writing manifest '" + path.string() + "'");
}

// --- split validation -----------------------------------------------------

struct SplitLeak {
  std::string lot_id;
  std::vector<Split> splits;
};

struct SplitReport {
  std::vector<SplitLeak> leaks;  // sorted by lot_id

  bool lot_disjoint() const { return leaks.empty(); }

  nlohmann::json to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& l : leaks) {
      nlohmann::json splits = nlohmann::json::array();
      for (Split s : l.splits) splits.push_back(to_string(s));
      arr.push_back({{"lot_id", l.lot_id}, {"splits", splits}});
    }
    return arr;
  }
};

/// Flags every lot_id that occurs in more than one split.
inline SplitReport validate_splits(const std::vector<SceneAnnotation>& scenes) {
  std::map<std::string, std::set<Split>> seen;
  for (const auto& s : scenes) seen[s.lot_id].insert(s.split);
  SplitReport report;
  for (const auto& [lot, splits] : seen) {
    if (splits.size() > 1) report.leaks.push_back({lot, std::vector<Split>(splits.begin(), splits.end())});
  }
  return report;
}

// --- statistics -----------------------------------------------------------

struct DatasetStats {
  std::size_t num_images = 0;
  std::size_t num_spaces = 0;
  std::size_t num_occupied = 0;
  double occupied_fraction = 0.0;
  std::array<std::size_t, 3> per_split_images{};
  std::array<std::size_t, 3> per_split_spaces{};

  nlohmann::json to_json() const {
    nlohmann::json splits;
    for (Split s : kAllSplits) {
      splits[std::string(to_string(s))] = {{"images", per_split_images[static_cast<std::size_t>(s)]},
                                           {"spaces", per_split_spaces[static_cast<std::size_t>(s)]}};
    }
    return {{"num_images", num_images},
            {"num_spaces", num_spaces},
            {"num_occupied", num_occupied},
            {"occupied_fraction", occupied_fraction},
            {"splits", splits}};
  }
};

inline DatasetStats compute_stats(const std::vector<SceneAnnotation>& scenes) {
  DatasetStats st;
  st.num_images = scenes.size();
  for (const auto& s : scenes) {
    const auto split = static_cast<std::size_t>(s.split);
    ++st.per_split_images[split];
    st.per_split_spaces[split] += s.spaces.size();
    st.num_spaces += s.spaces.size();
    for (const auto& sp : s.spaces) st.num_occupied += sp.occupied ? 1 : 0;
  }
  st.occupied_fraction = st.num_spaces == 0 ? 0.0 : static_cast<double>(st.num_occupied) / st.num_spaces;
  return st;
}

// --- in-memory cache ------------------------------------------------------

/// A scene with its decoded image.
struct CachedScene {
  SceneAnnotation annotation;
  ImageBuffer image;
};

/// Every image decoded once, without augmentation; read-only afterwards.
class CachedDataset {
 public:
  CachedDataset() = default;
  explicit CachedDataset(std::vector<CachedScene> scenes) : scenes_(std::move(scenes)) {}

  std::size_t size() const { return scenes_.size(); }
  const CachedScene& operator[](std::size_t i) const { return scenes_[i]; }
  const std::vector<CachedScene>& scenes() const { return scenes_; }

  std::vector<CachedScene> split(Split s) const {
    std::vector<CachedScene> out;
    for (const auto& c : scenes_)
      if (c.annotation.split == s) out.push_back(c);
    return out;
  }

 private:
  std::vector<CachedScene> scenes_;
};

inline CachedDataset cache_in_memory(const std::vector<SceneAnnotation>& scenes) {
  std::vector<CachedScene> cached;
  cached.reserve(scenes.size());
  for (const auto& s : scenes) {
    ImageBuffer img = read_ppm(s.image_path);
    cached.push_back({s, std::move(img)});
  }
  return CachedDataset(std::move(cached));
}

}  // namespace quadpool
