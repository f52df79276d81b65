#pragma once

// Relativized descriptions: finite qualification views acting as filters on
// what can be said about an entity.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fpl/error.hpp"

namespace fpl::mrc {

/// One semantic axis g with its finite value set (cardinality w(g)).
class AspectView {
 public:
  AspectView(std::string aspect_id, std::vector<std::string> values)
      : aspect_id_(std::move(aspect_id)), values_(std::move(values)), sorted_(values_) {
    require(!aspect_id_.empty(), ErrorCode::InvalidView, "aspect id must be non-empty");
    require(!values_.empty(), ErrorCode::InvalidView, "aspect '" + aspect_id_ + "' has no values");
    std::sort(sorted_.begin(), sorted_.end());
    require(std::adjacent_find(sorted_.begin(), sorted_.end()) == sorted_.end(),
            ErrorCode::InvalidView, "aspect '" + aspect_id_ + "' has duplicate values");
  }

  const std::string& aspect_id() const noexcept { return aspect_id_; }
  const std::vector<std::string>& values() const noexcept { return values_; }
  std::size_t cardinality() const noexcept { return values_.size(); }

  bool admits(const std::string& value) const {
    return std::binary_search(sorted_.begin(), sorted_.end(), value);
  }

  friend bool operator==(const AspectView& a, const AspectView& b) {
    return a.aspect_id_ == b.aspect_id_ && a.values_ == b.values_;
  }

 private:
  std::string aspect_id_;
  std::vector<std::string> values_;
  std::vector<std::string> sorted_;
};

/// Discrete spatial frame attached to a view: 2 or 3 axes, 1-based coordinates.
struct GridFrame {
  std::vector<int> extents;

  bool contains(const std::vector<int>& coords) const {
    if (coords.size() != extents.size()) return false;
    for (std::size_t i = 0; i < coords.size(); ++i)
      if (coords[i] < 1 || coords[i] > extents[i]) return false;
    return true;
  }

  friend bool operator==(const GridFrame&, const GridFrame&) = default;
};

class View {
 public:
  explicit View(std::vector<AspectView> aspects, std::optional<GridFrame> grid = std::nullopt)
      : aspects_(std::move(aspects)), grid_(std::move(grid)) {
    require(!aspects_.empty(), ErrorCode::InvalidView, "a view needs at least one aspect");
    std::sort(aspects_.begin(), aspects_.end(),
              [](const AspectView& a, const AspectView& b) { return a.aspect_id() < b.aspect_id(); });
    for (std::size_t i = 1; i < aspects_.size(); ++i)
      require(aspects_[i - 1].aspect_id() != aspects_[i].aspect_id(), ErrorCode::InvalidView,
              "duplicate aspect '" + aspects_[i].aspect_id() + "'");
    if (grid_) {
      require(grid_->extents.size() == 2 || grid_->extents.size() == 3, ErrorCode::InvalidView,
              "grid frame must have 2 or 3 axes");
      for (int e : grid_->extents)
        require(e >= 1, ErrorCode::InvalidView, "grid extents must be positive");
    }
  }

  /// Aspects sorted by id.
  const std::vector<AspectView>& aspects() const noexcept { return aspects_; }
  std::size_t size() const noexcept { return aspects_.size(); }
  bool has_grid_frame() const noexcept { return grid_.has_value(); }
  const std::optional<GridFrame>& grid() const noexcept { return grid_; }

  const AspectView* find(const std::string& aspect_id) const {
    auto it = std::lower_bound(aspects_.begin(), aspects_.end(), aspect_id,
                               [](const AspectView& a, const std::string& id) { return a.aspect_id() < id; });
    return (it != aspects_.end() && it->aspect_id() == aspect_id) ? &*it : nullptr;
  }

  std::set<std::string> aspect_ids() const {
    std::set<std::string> ids;
    for (const auto& a : aspects_) ids.insert(a.aspect_id());
    return ids;
  }

  friend bool operator==(const View&, const View&) = default;

 private:
  std::vector<AspectView> aspects_;
  std::optional<GridFrame> grid_;
};

/// D/G, alpha_G, V/: one definite value per answered aspect, optionally
/// anchored to grid coordinates.
struct Description {
  std::string generator_id;
  std::string entity_id;
  std::map<std::string, std::string> points;
  std::optional<std::vector<int>> grid_coords;

  friend bool operator==(const Description&, const Description&) = default;
};

/// The pair (G, V) a description is relative to.
struct EpistemicReferential {
  std::string generator_id;
  View view;

  EpistemicReferential(std::string generator, View v) : generator_id(std::move(generator)), view(std::move(v)) {
    require(!generator_id.empty(), ErrorCode::InvalidArgument, "generator id must be non-empty");
  }
};

/// Keeps the aspects of `view` that `entity` answers. An entity answering none
/// of them has no mutual existence with the view.
inline Description apply_view(const View& view, const Description& entity) {
  Description out{entity.generator_id, entity.entity_id, {}, std::nullopt};
  for (const auto& [aspect, value] : entity.points) {
    const AspectView* av = view.find(aspect);
    if (!av) continue;
    require(av->admits(value), ErrorCode::ValueOutsideView,
            "value '" + value + "' is not in the value set of aspect '" + aspect + "'");
    out.points.emplace(aspect, value);
  }
  if (out.points.empty())
    fail(ErrorCode::NoMutualExistence,
         "entity '" + entity.entity_id + "' answers no aspect of the view");
  if (view.has_grid_frame() && entity.grid_coords) {
    require(view.grid()->contains(*entity.grid_coords), ErrorCode::OutOfGrid,
            "coordinates of '" + entity.entity_id + "' fall outside the view's frame");
    out.grid_coords = entity.grid_coords;
  }
  return out;
}

/// Sub-view on `keep`. The grid frame survives only when `keep_grid` is set.
inline View restrict_view(const View& view, const std::set<std::string>& keep, bool keep_grid = false) {
  if (keep.empty()) fail(ErrorCode::EmptyKeepSet, "restriction needs at least one aspect");
  std::vector<AspectView> kept;
  for (const auto& id : keep) {
    const AspectView* av = view.find(id);
    if (!av) fail(ErrorCode::UnknownAspect, "aspect '" + id + "' is not part of the view");
    kept.push_back(*av);
  }
  return View(std::move(kept), keep_grid ? view.grid() : std::nullopt);
}

}  // namespace fpl::mrc
