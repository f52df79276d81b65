#pragma once

// Border-matching assembly of fragments into replicas of a rectangular form.
//
// Fragments carry only four edge signatures. A drawn fragment attaches to a
// free cell of a nascent board whose occupied neighbours present matching
// signatures; otherwise it seeds a new board. When a placement makes a
// fragment face a matching open border on another board, the two boards are
// merged by rigid translation. A board closes when no non-BOUNDARY edge is left
// open; it is complete if it then fills its bounding rectangle.
//
// Every mutation is journaled so callers can backtrack with undo_to(mark()).

#include <algorithm>
#include <array>
#include <concepts>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <unordered_map>
#include <variant>
#include <vector>

#include "fpl/error.hpp"
#include "fpl/grid.hpp"

namespace fpl::assembly {

template <typename P>
concept EdgedPiece = requires(const P& p) {
  { p.edges } -> std::convertible_to<EdgeSigs>;
};

struct Slot {
  std::size_t board = 0;
  Cell cell;

  friend auto operator<=>(const Slot&, const Slot&) = default;
};

struct Board {
  std::size_t id = 0;
  std::unordered_map<Cell, std::size_t, CellHash> cells;  // cell -> piece
  long open_edges = 0;
  Cell lo{std::numeric_limits<int>::max(), std::numeric_limits<int>::max()};  // bounding box
  Cell hi{std::numeric_limits<int>::min(), std::numeric_limits<int>::min()};
  bool alive = true;     // false once merged into another board
  bool complete = false;
  bool dead = false;     // closed without filling its box, or outgrew the frame

  std::size_t size() const noexcept { return cells.size(); }
  int box_width() const noexcept { return cells.empty() ? 0 : hi.x - lo.x + 1; }
  int box_height() const noexcept { return cells.empty() ? 0 : hi.y - lo.y + 1; }
};

inline void extend_box(Board& b, Cell c) {
  b.lo = Cell{std::min(b.lo.x, c.x), std::min(b.lo.y, c.y)};
  b.hi = Cell{std::max(b.hi.x, c.x), std::max(b.hi.y, c.y)};
}

struct Completion {
  std::size_t board = 0;
  std::size_t draw = 0;

  friend bool operator==(const Completion&, const Completion&) = default;
};

/// Candidate placements for one piece, in deterministic (board id, cell) order.
struct Options {
  std::vector<Slot> fitting;
  std::size_t tested = 0;  // candidate slots examined, fitting or not
  bool ambiguous = false;  // some board offers two or more distinct cells
};

/// A board that can be laid against a placed piece: its cells shifted by
/// `shift` land in the piece's board frame with `contacts` new adjacencies.
struct MergeOption {
  std::size_t board = 0;
  Cell shift;
  long contacts = 0;

  friend auto operator<=>(const MergeOption&, const MergeOption&) = default;
};

/// Cells of a board translated so its bounding box starts at (1,1).
inline std::map<Cell, std::size_t> canonical_cells(const Board& b) {
  std::map<Cell, std::size_t> out;
  if (b.cells.empty()) return out;
  int min_x = std::numeric_limits<int>::max();
  int min_y = std::numeric_limits<int>::max();
  for (const auto& [c, _] : b.cells) {
    min_x = std::min(min_x, c.x);
    min_y = std::min(min_y, c.y);
  }
  const Cell shift{1 - min_x, 1 - min_y};
  for (const auto& [c, piece] : b.cells) out.emplace(c + shift, piece);
  return out;
}

template <EdgedPiece Piece>
class Assembler {
 public:
  std::size_t add(Piece p) {
    pieces_.push_back(std::move(p));
    where_.emplace_back();
    return pieces_.size() - 1;
  }

  const Piece& piece(std::size_t i) const { return pieces_.at(i); }
  std::size_t piece_count() const noexcept { return pieces_.size(); }
  bool is_placed(std::size_t i) const { return where_.at(i).has_value(); }

  const std::vector<Board>& boards() const noexcept { return boards_; }
  const std::vector<Completion>& completions() const noexcept { return completions_; }
  std::size_t merges() const noexcept { return merges_; }

  /// Boards that cannot sit inside a width x height grid whose rim is exactly
  /// the BOUNDARY edges are declared dead.
  void limit_frame(int width, int height) { frame_ = Cell{width, height}; }

  std::size_t live_boards() const {
    return static_cast<std::size_t>(std::count_if(boards_.begin(), boards_.end(), [](const Board& b) {
      return b.alive && !b.complete;
    }));
  }

  bool any_dead() const {
    return std::any_of(boards_.begin(), boards_.end(), [](const Board& b) { return b.alive && b.dead; });
  }

  /// Free cells of open boards where some occupied neighbour presents a
  /// signature matching one of the piece's edges.
  std::vector<Slot> candidates(std::size_t inst) const {
    const auto& sigs = edges_of(inst);
    std::vector<Slot> out;
    for (Side s : kSides) {
      const EdgeSignature sig = edge(sigs, s);
      if (sig.is_boundary()) continue;
      auto it = index_.find(key(sig, opposite(s)));
      if (it == index_.end()) continue;
      for (std::size_t q : it->second) {
        const auto& loc = where_[q];
        const Board& b = boards_[loc->board];
        if (!b.alive || b.complete || b.dead) continue;
        out.push_back(Slot{b.id, step(loc->cell, opposite(s))});
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  bool fits(const Slot& slot, std::size_t inst) const {
    const Board& b = boards_.at(slot.board);
    if (!b.alive || b.complete || b.dead || b.cells.contains(slot.cell)) return false;
    const auto& sigs = edges_of(inst);
    bool touches = false;
    for (Side s : kSides) {
      auto it = b.cells.find(step(slot.cell, s));
      if (it == b.cells.end()) continue;
      const EdgeSignature mine = edge(sigs, s);
      if (mine.is_boundary() || edge(edges_of(it->second), opposite(s)) != mine) return false;
      touches = true;
    }
    return touches;
  }

  Options options(std::size_t inst) const {
    Options o;
    std::map<std::size_t, std::size_t> per_board;
    for (const Slot& s : candidates(inst)) {
      ++o.tested;
      if (fits(s, inst)) {
        o.fitting.push_back(s);
        if (++per_board[s.board] > 1) o.ambiguous = true;
      }
    }
    return o;
  }

  /// Places `inst` at a fitting slot, merges (unless told not to) any board
  /// it now bridges to and records a completion stamped with `draw`.
  void attach(const Slot& slot, std::size_t inst, std::size_t draw, bool auto_merge = true) {
    require(fits(slot, inst), ErrorCode::InconsistentSignatures, "piece does not fit the requested slot");
    place(boards_[slot.board], slot.cell, inst);
    if (auto_merge) merge_around(inst);
    settle(where_[inst]->board, draw);
  }

  /// Seeds a new board with `inst` at the origin. Returns the board id.
  std::size_t open_board(std::size_t inst, std::size_t draw, bool auto_merge = true) {
    require(!is_placed(inst), ErrorCode::InvalidArgument, "piece is already placed");
    Board b;
    b.id = boards_.size();
    boards_.push_back(std::move(b));
    journal_.emplace_back(Opened{});
    place(boards_.back(), Cell{0, 0}, inst);
    if (auto_merge) merge_around(inst);
    settle(where_[inst]->board, draw);
    return boards_.size() - 1;
  }

  /// Open boards facing a free side of placed piece `inst` with a matching
  /// border, in (board, shift) order.
  std::vector<MergeOption> merge_options(std::size_t inst) const {
    std::vector<MergeOption> out;
    if (!is_placed(inst)) return out;
    const Location here = *where_[inst];
    const Board& mine = boards_[here.board];
    if (mine.complete || mine.dead) return out;
    const auto& sigs = edges_of(inst);
    for (Side s : kSides) {
      const EdgeSignature sig = edge(sigs, s);
      if (sig.is_boundary()) continue;
      const Cell target = step(here.cell, s);
      if (mine.cells.contains(target)) continue;
      auto it = index_.find(key(sig, opposite(s)));
      if (it == index_.end()) continue;
      for (std::size_t q : it->second) {
        const Location there = *where_[q];
        if (there.board == here.board) continue;
        const Board& other = boards_[there.board];
        if (!other.alive || other.complete || other.dead) continue;
        if (other.cells.contains(step(there.cell, opposite(s)))) continue;
        const Cell shift = target - there.cell;
        if (auto contacts = merge_contacts(mine, other, shift)) out.push_back({other.id, shift, *contacts});
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// Performs one option from merge_options(inst) and settles the result.
  void merge_with(std::size_t inst, const MergeOption& m, std::size_t draw) {
    join(where_.at(inst)->board, m);
    settle(where_[inst]->board, draw);
  }

  std::size_t mark() const noexcept { return journal_.size(); }

  void undo_to(std::size_t mark) {
    while (journal_.size() > mark) {
      std::visit([this](auto& entry) { revert(entry); }, journal_.back());
      journal_.pop_back();
    }
  }

 private:
  struct Location {
    std::size_t board;
    Cell cell;
  };
  struct Opened {};
  struct Placed {
    std::size_t inst;
    std::size_t board;
    Cell cell;
    long delta;
    Cell lo, hi;
  };
  struct Merged {
    std::size_t dst;
    std::size_t src;
    Cell shift;
    std::vector<std::pair<Cell, std::size_t>> moved;  // src coordinates
    long dst_open;
    long src_open;
    Cell dst_lo, dst_hi;
  };
  struct Completed {
    std::size_t board;
  };
  struct Died {
    std::size_t board;
  };
  using Entry = std::variant<Opened, Placed, Merged, Completed, Died>;

  static std::uint64_t key(EdgeSignature sig, Side side) {
    return (static_cast<std::uint64_t>(sig.id()) << 2) | static_cast<std::uint64_t>(side);
  }

  const EdgeSigs& edges_of(std::size_t inst) const { return pieces_[inst].edges; }

  void place(Board& b, Cell c, std::size_t inst) {
    const auto& sigs = edges_of(inst);
    long delta = 0;
    for (Side s : kSides) {
      if (b.cells.contains(step(c, s)))
        --delta;
      else if (!edge(sigs, s).is_boundary())
        ++delta;
    }
    journal_.emplace_back(Placed{inst, b.id, c, delta, b.lo, b.hi});
    b.cells.emplace(c, inst);
    b.open_edges += delta;
    extend_box(b, c);
    where_[inst] = Location{b.id, c};
    for (Side s : kSides)
      if (!edge(sigs, s).is_boundary()) index_[key(edge(sigs, s), s)].push_back(inst);
  }

  void revert(Opened&) { boards_.pop_back(); }

  void revert(Placed& e) {
    Board& b = boards_[e.board];
    b.cells.erase(e.cell);
    b.open_edges -= e.delta;
    b.lo = e.lo;
    b.hi = e.hi;
    where_[e.inst].reset();
    const auto& sigs = edges_of(e.inst);
    for (Side s : kSides)
      if (!edge(sigs, s).is_boundary()) index_[key(edge(sigs, s), s)].pop_back();
  }

  void revert(Merged& e) {
    Board& dst = boards_[e.dst];
    Board& src = boards_[e.src];
    for (const auto& [c, inst] : e.moved) {
      dst.cells.erase(c + e.shift);
      src.cells.emplace(c, inst);
      where_[inst] = Location{src.id, c};
    }
    dst.open_edges = e.dst_open;
    src.open_edges = e.src_open;
    dst.lo = e.dst_lo;
    dst.hi = e.dst_hi;
    src.alive = true;
    --merges_;
  }

  void revert(Completed& e) {
    boards_[e.board].complete = false;
    completions_.pop_back();
  }

  void revert(Died& e) { boards_[e.board].dead = false; }

  /// Number of new adjacencies if `src` is laid onto `dst` shifted by
  /// `shift`, or nullopt when the two conflict anywhere.
  std::optional<long> merge_contacts(const Board& dst, const Board& src, Cell shift) const {
    long contacts = 0;
    for (const auto& [c, inst] : src.cells) {
      const Cell target = c + shift;
      if (dst.cells.contains(target)) return std::nullopt;
      const auto& sigs = edges_of(inst);
      for (Side s : kSides) {
        auto it = dst.cells.find(step(target, s));
        if (it == dst.cells.end()) continue;
        const EdgeSignature mine = edge(sigs, s);
        if (mine.is_boundary() || edge(edges_of(it->second), opposite(s)) != mine) return std::nullopt;
        ++contacts;
      }
    }
    return contacts;
  }

  void merge(Board& dst, Board& src, Cell shift, long contacts) {
    Merged e{dst.id, src.id, shift, {}, dst.open_edges, src.open_edges, dst.lo, dst.hi};
    e.moved.reserve(src.cells.size());
    for (const auto& [c, inst] : src.cells) {
      e.moved.emplace_back(c, inst);
      dst.cells.emplace(c + shift, inst);
      extend_box(dst, c + shift);
      where_[inst] = Location{dst.id, c + shift};
    }
    dst.open_edges += src.open_edges - 2 * contacts;
    src.cells.clear();
    src.open_edges = 0;
    src.alive = false;
    ++merges_;
    journal_.emplace_back(std::move(e));
  }

  void join(std::size_t here, const MergeOption& m) {
    Board& mine = boards_[here];
    Board& other = boards_[m.board];
    if (other.id < mine.id)
      merge(other, mine, Cell{0, 0} - m.shift, m.contacts);
    else
      merge(mine, other, m.shift, m.contacts);
  }

  /// Keeps merging the first available board until none is left.
  void merge_around(std::size_t inst) {
    for (auto opts = merge_options(inst); !opts.empty(); opts = merge_options(inst))
      join(where_[inst]->board, opts.front());
  }

  // A BOUNDARY side must lie on the board's outermost line on that side, and
  // once one does, the whole line must be rim. Two opposite rims fix the
  // extent.
  bool breaks_rim(const Board& b) const {
    std::array<bool, 4> walled{};
    for (const auto& [c, inst] : b.cells) {
      const auto& sigs = edges_of(inst);
      const std::array<bool, 4> outer{c.y == b.hi.y, c.x == b.hi.x, c.y == b.lo.y, c.x == b.lo.x};
      for (Side s : kSides) {
        const auto i = static_cast<std::size_t>(s);
        if (edge(sigs, s).is_boundary()) {
          if (!outer[i]) return true;
          walled[i] = true;
        }
      }
    }
    // A walled board spanning the frame is walled on the far side as well.
    if (b.box_width() == frame_->x) walled[1] = walled[3] = walled[1] || walled[3];
    if (b.box_height() == frame_->y) walled[0] = walled[2] = walled[0] || walled[2];
    for (const auto& [c, inst] : b.cells) {
      const auto& sigs = edges_of(inst);
      const std::array<bool, 4> outer{c.y == b.hi.y, c.x == b.hi.x, c.y == b.lo.y, c.x == b.lo.x};
      for (Side s : kSides) {
        const auto i = static_cast<std::size_t>(s);
        if (walled[i] && outer[i] && !edge(sigs, s).is_boundary()) return true;
      }
    }
    if (walled[1] && walled[3] && b.box_width() != frame_->x) return true;
    if (walled[0] && walled[2] && b.box_height() != frame_->y) return true;
    return false;
  }

  void settle(std::size_t board, std::size_t draw) {
    Board& b = boards_[board];
    if (b.complete || b.dead) return;
    const bool outgrown = frame_ && (b.box_width() > frame_->x || b.box_height() > frame_->y || breaks_rim(b));
    if (!outgrown && b.open_edges != 0) return;
    const auto area = static_cast<std::size_t>(b.box_width()) * static_cast<std::size_t>(b.box_height());
    if (!outgrown && area == b.cells.size()) {
      b.complete = true;
      completions_.push_back(Completion{b.id, draw});
      journal_.emplace_back(Completed{b.id});
    } else {
      b.dead = true;
      journal_.emplace_back(Died{b.id});
    }
  }

  std::vector<Piece> pieces_;
  std::vector<std::optional<Location>> where_;
  std::vector<Board> boards_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> index_;
  std::vector<Completion> completions_;
  std::vector<Entry> journal_;
  std::size_t merges_ = 0;
  std::optional<Cell> frame_;
};

}  // namespace fpl::assembly
