#pragma once

// The parcelled painting: a width x height grid of square tiles, each with a
// colour-form (opaque id plus four edge signatures) and an approximate-colour
// label j in 1..q. It is the ground truth every game is played against.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "fpl/error.hpp"
#include "fpl/grid.hpp"
#include "fpl/mrc.hpp"
#include "fpl/random.hpp"

namespace fpl::painting {

enum class EdgeMode { UniqueInteriorEdges, AmbiguousAllowed };

struct Tile {
  Cell coords;
  std::string colour_form_id;
  int approx_colour = 0;
  EdgeSigs edges{};

  friend bool operator==(const Tile&, const Tile&) = default;
};

struct PaintingSpec {
  int width = 0;
  int height = 0;
  int q = 0;
  std::map<int, long> label_counts;  // j -> n_rho(j)
  EdgeMode uniqueness_mode = EdgeMode::UniqueInteriorEdges;
  std::uint64_t seed = 0;
};

namespace detail {

inline std::size_t index_of(int width, Cell c) {
  return static_cast<std::size_t>(c.y - 1) * static_cast<std::size_t>(width) + static_cast<std::size_t>(c.x - 1);
}

}  // namespace detail

/// Checks that neighbouring cells agree on their shared edge, that the rim is
/// BOUNDARY and that no interior edge is. `edges_at` maps a cell to its sigs.
template <typename EdgesAt>
void check_edge_coherence(int width, int height, EdgesAt&& edges_at) {
  for (int y = 1; y <= height; ++y) {
    for (int x = 1; x <= width; ++x) {
      const Cell c{x, y};
      const EdgeSigs& sigs = edges_at(c);
      for (Side s : kSides) {
        const Cell n = step(c, s);
        const bool inside = n.x >= 1 && n.x <= width && n.y >= 1 && n.y <= height;
        const EdgeSignature mine = edge(sigs, s);
        if (!inside) {
          require(mine.is_boundary(), ErrorCode::InconsistentSignatures,
                  "perimeter edge at (" + std::to_string(x) + "," + std::to_string(y) + ") is not BOUNDARY");
        } else {
          require(!mine.is_boundary(), ErrorCode::InconsistentSignatures,
                  "interior edge at (" + std::to_string(x) + "," + std::to_string(y) + ") is BOUNDARY");
          require(edge(edges_at(n), opposite(s)) == mine, ErrorCode::InconsistentSignatures,
                  "edge mismatch between (" + std::to_string(x) + "," + std::to_string(y) + ") and (" +
                      std::to_string(n.x) + "," + std::to_string(n.y) + ")");
        }
      }
    }
  }
}

/// Edge signatures for a width x height grid, row-major from (1,1). In unique
/// mode every interior edge gets its own id; ambiguous mode draws ids from a
/// small alphabet and guarantees at least one repeat when two or more interior
/// edges exist.
inline std::vector<EdgeSigs> synthesize_edges(int width, int height, EdgeMode mode, Rng& rng) {
  const std::size_t horizontal = static_cast<std::size_t>(width - 1) * static_cast<std::size_t>(height);
  const std::size_t vertical = static_cast<std::size_t>(width) * static_cast<std::size_t>(height - 1);
  const std::size_t interior = horizontal + vertical;

  std::vector<std::uint32_t> ids(interior);
  if (mode == EdgeMode::UniqueInteriorEdges) {
    std::iota(ids.begin(), ids.end(), 1u);
    shuffle(std::span(ids), rng);
  } else {
    const std::uint64_t alphabet = std::max<std::uint64_t>(2, interior / 4);
    for (auto& id : ids) id = static_cast<std::uint32_t>(1 + uniform_below(rng, alphabet));
    if (interior >= 2) {
      std::vector<std::uint32_t> sorted = ids;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end()) ids.back() = ids.front();
    }
  }

  std::vector<EdgeSigs> grid(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  std::size_t next = 0;
  for (int y = 1; y <= height; ++y) {
    for (int x = 1; x < width; ++x) {
      const EdgeSignature sig(ids[next++]);
      grid[detail::index_of(width, {x, y})][static_cast<std::size_t>(Side::East)] = sig;
      grid[detail::index_of(width, {x + 1, y})][static_cast<std::size_t>(Side::West)] = sig;
    }
  }
  for (int y = 1; y < height; ++y) {
    for (int x = 1; x <= width; ++x) {
      const EdgeSignature sig(ids[next++]);
      grid[detail::index_of(width, {x, y})][static_cast<std::size_t>(Side::North)] = sig;
      grid[detail::index_of(width, {x, y + 1})][static_cast<std::size_t>(Side::South)] = sig;
    }
  }
  return grid;
}

class Painting {
 public:
  /// Tiles may come in any order; they are stored row-major from (1,1).
  Painting(int width, int height, int q, std::vector<Tile> tiles) : width_(width), height_(height), q_(q) {
    require(width >= 1 && height >= 1, ErrorCode::InvalidPainting, "grid extents must be positive");
    const std::size_t n = size();
    require(tiles.size() == n, ErrorCode::InvalidPainting,
            "expected " + std::to_string(n) + " tiles, got " + std::to_string(tiles.size()));
    // The single-tile grid is the one degenerate painting allowed to have q == width*height.
    require(q >= 1 && (static_cast<std::size_t>(q) < n || n == 1), ErrorCode::InvalidPainting,
            "q must satisfy 1 <= q < width*height");
    tiles_.resize(n);
    std::vector<bool> seen(n, false);
    std::vector<bool> label_seen(static_cast<std::size_t>(q) + 1, false);
    for (auto& t : tiles) {
      require(in_grid(t.coords), ErrorCode::InvalidPainting, "tile outside the grid");
      const auto i = detail::index_of(width_, t.coords);
      require(!seen[i], ErrorCode::InvalidPainting, "two tiles share a cell");
      require(t.approx_colour >= 1 && t.approx_colour <= q, ErrorCode::InvalidPainting, "label out of 1..q");
      seen[i] = true;
      label_seen[static_cast<std::size_t>(t.approx_colour)] = true;
      tiles_[i] = std::move(t);
    }
    for (int j = 1; j <= q; ++j)
      require(label_seen[static_cast<std::size_t>(j)], ErrorCode::InvalidPainting,
              "label " + std::to_string(j) + " is not realised on any tile");
    check_edge_coherence(width_, height_, [this](Cell c) -> const EdgeSigs& { return tile(c).edges; });
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int q() const noexcept { return q_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_); }
  const std::vector<Tile>& tiles() const noexcept { return tiles_; }

  bool in_grid(Cell c) const noexcept { return c.x >= 1 && c.x <= width_ && c.y >= 1 && c.y <= height_; }

  const Tile& tile(Cell c) const {
    require(in_grid(c), ErrorCode::OutOfGrid,
            "(" + std::to_string(c.x) + "," + std::to_string(c.y) + ") is outside the grid");
    return tiles_[detail::index_of(width_, c)];
  }

  friend bool operator==(const Painting&, const Painting&) = default;

 private:
  int width_;
  int height_;
  int q_;
  std::vector<Tile> tiles_;
};

inline void validate_spec(const PaintingSpec& spec) {
  require(spec.width >= 1 && spec.height >= 1, ErrorCode::InfeasibleSpec, "grid extents must be positive");
  const long cells = static_cast<long>(spec.width) * spec.height;
  require(spec.q >= 1 && spec.q < cells, ErrorCode::InfeasibleSpec,
          "need 1 <= q < width*height (q=" + std::to_string(spec.q) + ", cells=" + std::to_string(cells) + ")");
  require(spec.label_counts.size() == static_cast<std::size_t>(spec.q), ErrorCode::InfeasibleSpec,
          "label_counts must list every label 1..q");
  long total = 0;
  for (int j = 1; j <= spec.q; ++j) {
    auto it = spec.label_counts.find(j);
    require(it != spec.label_counts.end(), ErrorCode::InfeasibleSpec, "label " + std::to_string(j) + " has no count");
    require(it->second >= 1, ErrorCode::InfeasibleSpec, "label " + std::to_string(j) + " needs a count >= 1");
    total += it->second;
  }
  require(total == cells, ErrorCode::InfeasibleSpec,
          "label counts sum to " + std::to_string(total) + ", grid has " + std::to_string(cells) + " cells");
}

/// Deterministic in spec.seed. Labels are scattered uniformly over the cells.
inline Painting generate_painting(const PaintingSpec& spec) {
  validate_spec(spec);
  Rng rng(spec.seed);
  const std::size_t n = static_cast<std::size_t>(spec.width) * static_cast<std::size_t>(spec.height);

  std::vector<int> labels;
  labels.reserve(n);
  for (const auto& [j, count] : spec.label_counts) labels.insert(labels.end(), static_cast<std::size_t>(count), j);
  shuffle(std::span(labels), rng);

  std::vector<std::size_t> forms(n);
  std::iota(forms.begin(), forms.end(), std::size_t{1});
  shuffle(std::span(forms), rng);

  const auto edges = synthesize_edges(spec.width, spec.height, spec.uniqueness_mode, rng);

  std::vector<Tile> tiles;
  tiles.reserve(n);
  for (int y = 1; y <= spec.height; ++y) {
    for (int x = 1; x <= spec.width; ++x) {
      const auto i = detail::index_of(spec.width, {x, y});
      tiles.push_back(Tile{{x, y}, "cf_" + std::to_string(forms[i]), labels[i], edges[i]});
    }
  }
  return Painting(spec.width, spec.height, spec.q, std::move(tiles));
}

inline std::map<int, long> label_histogram(const Painting& p) {
  std::map<int, long> counts;
  for (const auto& t : p.tiles()) ++counts[t.approx_colour];
  return counts;
}

// ---------------------------------------------------------------------------
// Views on tiles

enum class ViewSelector { Location, ColourForm, ApproxColour };

namespace aspect {
inline const std::string x = "x";
inline const std::string y = "y";
inline const std::string colour_form = "colour_form";
inline const std::string approx_colour = "approx_colour";
inline const std::array<std::string, 4> edge{"edge_n", "edge_e", "edge_s", "edge_w"};
}  // namespace aspect

inline const std::string kGenerator = "parcelling";

inline std::string entity_id(Cell c) { return "sigma_" + std::to_string(c.x) + "_" + std::to_string(c.y); }

namespace detail {

inline std::vector<std::string> numbered(int n) {
  std::vector<std::string> v;
  for (int i = 1; i <= n; ++i) v.push_back(std::to_string(i));
  return v;
}

}  // namespace detail

/// V(El): the location frame-view.
inline mrc::View location_view(const Painting& p) {
  return mrc::View({mrc::AspectView(aspect::x, detail::numbered(p.width())),
                    mrc::AspectView(aspect::y, detail::numbered(p.height()))},
                   mrc::GridFrame{{p.width(), p.height()}});
}

/// Vc-phi: the colour-form view (form id plus the four border signatures).
inline mrc::View colour_form_view(const Painting& p) {
  std::vector<std::string> forms;
  std::vector<std::string> sigs{"B"};
  std::vector<std::uint32_t> ids;
  for (const auto& t : p.tiles()) {
    forms.push_back(t.colour_form_id);
    for (auto e : t.edges)
      if (!e.is_boundary()) ids.push_back(e.id());
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  for (auto id : ids) sigs.push_back(std::to_string(id));

  std::vector<mrc::AspectView> aspects{mrc::AspectView(aspect::colour_form, forms)};
  for (const auto& e : aspect::edge) aspects.emplace_back(e, sigs);
  return mrc::View(std::move(aspects));
}

/// Vac: the approximate-colour view.
inline mrc::View approx_colour_view(const Painting& p) {
  return mrc::View({mrc::AspectView(aspect::approx_colour, detail::numbered(p.q()))});
}

inline mrc::View view_for(const Painting& p, ViewSelector selector) {
  switch (selector) {
    case ViewSelector::Location: return location_view(p);
    case ViewSelector::ColourForm: return colour_form_view(p);
    case ViewSelector::ApproxColour: return approx_colour_view(p);
  }
  fail(ErrorCode::InvalidArgument, "unknown view selector");
}

/// Everything a square can answer, anchored at its coordinates.
inline mrc::Description source_description(const Painting& p, Cell c) {
  const Tile& t = p.tile(c);
  mrc::Description d{kGenerator, entity_id(c), {}, std::vector<int>{c.x, c.y}};
  d.points[aspect::x] = std::to_string(c.x);
  d.points[aspect::y] = std::to_string(c.y);
  d.points[aspect::colour_form] = t.colour_form_id;
  d.points[aspect::approx_colour] = std::to_string(t.approx_colour);
  for (std::size_t s = 0; s < 4; ++s) d.points[aspect::edge[s]] = to_string(t.edges[s]);
  return d;
}

inline mrc::Description describe_tile(const Painting& p, Cell c, ViewSelector selector) {
  const Tile& t = p.tile(c);
  mrc::Description d{kGenerator, entity_id(c), {}, std::nullopt};
  switch (selector) {
    case ViewSelector::Location:
      d.points[aspect::x] = std::to_string(c.x);
      d.points[aspect::y] = std::to_string(c.y);
      d.grid_coords = std::vector<int>{c.x, c.y};
      break;
    case ViewSelector::ColourForm:
      d.points[aspect::colour_form] = t.colour_form_id;
      for (std::size_t s = 0; s < 4; ++s) d.points[aspect::edge[s]] = to_string(t.edges[s]);
      break;
    case ViewSelector::ApproxColour:
      d.points[aspect::approx_colour] = std::to_string(t.approx_colour);
      break;
  }
  return d;
}

}  // namespace fpl::painting
