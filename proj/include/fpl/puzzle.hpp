#pragma once

// Reconstruction games on a parcelled painting: placing squares by their
// location labels, and placing them (across any number of intermingled
// replicas) by border continuity alone.

#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <vector>

#include "fpl/assembly.hpp"
#include "fpl/error.hpp"
#include "fpl/grid.hpp"
#include "fpl/mrc.hpp"
#include "fpl/painting.hpp"
#include "fpl/random.hpp"

namespace fpl::puzzle {

enum class Mode { Location, Border };

/// A square as seen through the game's view. Only what the view let through
/// is usable: coordinates in location mode, border signatures in border mode.
struct Fragment {
  mrc::Description description;
  std::optional<Cell> coords;
  EdgeSigs edges{};

  static Fragment from_description(mrc::Description d) {
    Fragment f{std::move(d), std::nullopt, {}};
    if (f.description.grid_coords) {
      const auto& g = *f.description.grid_coords;
      require(g.size() == 2, ErrorCode::InvalidPool, "fragment coordinates must be 2-D");
      f.coords = Cell{g[0], g[1]};
    }
    for (std::size_t s = 0; s < 4; ++s) {
      auto it = f.description.points.find(painting::aspect::edge[s]);
      f.edges[s] = it == f.description.points.end() ? EdgeSignature::boundary() : parse_signature(it->second);
    }
    return f;
  }
};

/// The ballot box: R copies of every square, drawn without replacement in a
/// seeded order.
class FragmentPool {
 public:
  FragmentPool(int width, int height, int replicas, Mode mode, std::vector<Fragment> fragments, std::uint64_t seed)
      : width_(width), height_(height), replicas_(replicas), mode_(mode), fragments_(std::move(fragments)) {
    require(width >= 1 && height >= 1, ErrorCode::InvalidPool, "grid extents must be positive");
    require(replicas >= 1, ErrorCode::InvalidPool, "need at least one replica");
    const auto expected = static_cast<std::size_t>(replicas) * static_cast<std::size_t>(width) *
                          static_cast<std::size_t>(height);
    require(fragments_.size() == expected, ErrorCode::InvalidPool,
            "pool holds " + std::to_string(fragments_.size()) + " fragments, expected " + std::to_string(expected));
    order_.resize(fragments_.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    Rng rng(seed);
    shuffle(std::span(order_), rng);
  }

  static FragmentPool from_painting(const painting::Painting& p, Mode mode, int replicas, std::uint64_t seed) {
    const auto selector = mode == Mode::Location ? painting::ViewSelector::Location : painting::ViewSelector::ColourForm;
    std::vector<Fragment> fragments;
    fragments.reserve(static_cast<std::size_t>(std::max(replicas, 0)) * p.size());
    for (int r = 0; r < replicas; ++r)
      for (const auto& t : p.tiles())
        fragments.push_back(Fragment::from_description(painting::describe_tile(p, t.coords, selector)));
    return FragmentPool(p.width(), p.height(), replicas, mode, std::move(fragments), seed);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int replicas() const noexcept { return replicas_; }
  Mode mode() const noexcept { return mode_; }
  std::size_t size() const noexcept { return fragments_.size(); }
  std::size_t remaining() const noexcept { return order_.size() - next_; }
  bool empty() const noexcept { return remaining() == 0; }
  const Fragment& fragment(std::size_t i) const { return fragments_.at(i); }

  /// Index of the next fragment out of the box.
  std::size_t draw() {
    require(!empty(), ErrorCode::InvalidPool, "the pool is empty");
    return order_[next_++];
  }

 private:
  int width_;
  int height_;
  int replicas_;
  Mode mode_;
  std::vector<Fragment> fragments_;
  std::vector<std::size_t> order_;
  std::size_t next_ = 0;
};

struct AssemblyReport {
  std::size_t draws = 0;
  std::size_t placements = 0;
  std::size_t trials = 0;  // attempted attachments, including failed and backtracked ones
  std::size_t completed_replicas = 0;
  std::size_t merges = 0;
  std::size_t ambiguous_draws = 0;
  std::size_t peak_nascent_boards = 0;
  std::vector<assembly::Completion> completion_order;  // (board id, 1-based draw)
  std::vector<std::map<Cell, std::size_t>> boards;     // completed boards, cell -> fragment index

  std::size_t failed_trials() const noexcept { return trials - placements; }
};

/// Places each square at its coordinates. Every placement is certain.
inline AssemblyReport solve_by_location(FragmentPool pool) {
  require(pool.mode() == Mode::Location, ErrorCode::InvalidPool, "location game needs a location-view pool");
  require(pool.replicas() == 1, ErrorCode::InvalidPool, "location game is played with a single replica");
  AssemblyReport report;
  std::map<Cell, std::size_t> board;
  while (!pool.empty()) {
    const std::size_t i = pool.draw();
    ++report.draws;
    ++report.trials;
    const auto& f = pool.fragment(i);
    require(f.coords.has_value(), ErrorCode::InvalidPool, "fragment carries no coordinates");
    const Cell c = *f.coords;
    require(c.x >= 1 && c.x <= pool.width() && c.y >= 1 && c.y <= pool.height(), ErrorCode::OutOfGrid,
            "fragment coordinates outside the grid");
    if (!board.emplace(c, i).second)
      fail(ErrorCode::DuplicateCoordinates,
           "two fragments claim (" + std::to_string(c.x) + "," + std::to_string(c.y) + ")");
    ++report.placements;
  }
  report.completed_replicas = 1;
  report.peak_nascent_boards = 1;
  report.completion_order.push_back({0, report.draws});
  report.boards.push_back(std::move(board));
  return report;
}

struct BorderOptions {
  std::size_t trial_budget = 1'000'000;
};

/// Assembles all R replicas from border signatures alone. Fragments are drawn
/// in the pool's order; each one attaches to the oldest board offering a
/// matching slot or seeds a new board. Boards may not outgrow the grid of
/// the void replicas. Dead ends (a board closing without filling its
/// rectangle or outgrowing the grid, or draws exhausted with open boards) are
/// undone by depth-first backtracking over the alternative slots, within the
/// budget.
inline AssemblyReport solve_by_borders(FragmentPool pool, BorderOptions options = {}) {
  require(pool.mode() == Mode::Border, ErrorCode::InvalidPool, "border game needs a colour-form pool");
  std::vector<std::size_t> drawn;
  drawn.reserve(pool.size());
  while (!pool.empty()) drawn.push_back(pool.draw());

  assembly::Assembler<Fragment> engine;
  engine.limit_frame(pool.width(), pool.height());
  for (std::size_t i : drawn) engine.add(pool.fragment(i));

  const std::size_t n = drawn.size();
  const auto replicas = static_cast<std::size_t>(pool.replicas());
  AssemblyReport report;
  report.draws = n;

  // With repeated signatures a border match can be a false one, so merges
  // become branch points instead of being taken greedily.
  std::map<std::pair<std::uint32_t, int>, std::size_t> seen;
  bool repeated = false;
  for (std::size_t i : drawn)
    for (Side side : kSides)
      if (auto sig = edge(pool.fragment(i).edges, side); !sig.is_boundary())
        repeated |= ++seen[{sig.id(), static_cast<int>(side)}] > replicas;

  struct Frame {
    std::size_t step;
    bool merging;
    std::vector<std::optional<assembly::Slot>> slots;          // nullopt: seed a new board
    std::vector<std::optional<assembly::MergeOption>> merges;  // nullopt: stop merging
    std::size_t next;
    std::size_t mark;

    std::size_t size() const { return merging ? merges.size() : slots.size(); }
    bool stopped() const { return merging && !merges[next - 1]; }
  };
  std::vector<Frame> stack;

  auto over_budget = [&] { return report.trials > options.trial_budget; };
  auto apply_next = [&](Frame& f) {
    const std::size_t i = f.next++;
    if (!f.merging) ++report.trials;
    if (f.merging) {
      if (f.merges[i]) engine.merge_with(f.step, *f.merges[i], f.step + 1);
    } else if (f.slots[i]) {
      engine.attach(*f.slots[i], f.step, f.step + 1, !repeated);
    } else {
      engine.open_board(f.step, f.step + 1, !repeated);
    }
    report.peak_nascent_boards = std::max(report.peak_nascent_boards, engine.live_boards());
  };
  auto dead_end = [&] { return engine.any_dead() || engine.completions().size() > replicas; };

  // Returns false when the search space is exhausted.
  auto backtrack = [&]() -> bool {
    while (!stack.empty()) {
      Frame& top = stack.back();
      engine.undo_to(top.mark);
      if (top.next < top.size()) {
        apply_next(top);
        if (!dead_end()) return true;
        continue;
      }
      stack.pop_back();
    }
    return false;
  };
  auto push = [&](Frame f) {
    stack.push_back(std::move(f));
    apply_next(stack.back());
    if (dead_end() && !backtrack()) fail(ErrorCode::UnsolvablePool, "no assembly completes every replica");
  };

  for (;;) {
    if (over_budget()) fail(ErrorCode::UnsolvablePool, "trial budget exhausted");
    if (repeated && !stack.empty() && !stack.back().stopped()) {
      const std::size_t at = stack.back().step;
      auto merges = engine.merge_options(at);
      if (!merges.empty()) {
        Frame f{at, true, {}, {}, 0, engine.mark()};
        for (const auto& m : merges) f.merges.emplace_back(m);
        f.merges.emplace_back(std::nullopt);
        push(std::move(f));
        continue;
      }
    }
    const std::size_t step = stack.empty() ? 0 : stack.back().step + 1;
    if (step == n) {
      if (engine.live_boards() == 0 && engine.completions().size() == replicas) break;
      if (!backtrack()) fail(ErrorCode::UnsolvablePool, "no assembly completes every replica");
      continue;
    }
    auto opts = engine.options(step);
    report.trials += opts.tested - opts.fitting.size();
    if (opts.ambiguous) ++report.ambiguous_draws;
    Frame f{step, false, {}, {}, 0, engine.mark()};
    for (const auto& s : opts.fitting) f.slots.emplace_back(s);
    f.slots.emplace_back(std::nullopt);
    push(std::move(f));
  }

  report.placements = n;
  report.merges = engine.merges();
  report.completed_replicas = engine.completions().size();
  report.completion_order = engine.completions();
  for (const auto& c : engine.completions()) {
    std::map<Cell, std::size_t> board;
    for (const auto& [cell, inst] : assembly::canonical_cells(engine.boards()[c.board]))
      board.emplace(cell, drawn[inst]);
    report.boards.push_back(std::move(board));
  }
  return report;
}

}  // namespace fpl::puzzle
