#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

#include "fpl/error.hpp"

namespace fpl {

/// Grid cell; y grows northwards, so (1,1) is the lower-left corner.
struct Cell {
  int x = 0;
  int y = 0;

  friend auto operator<=>(const Cell&, const Cell&) = default;
  friend Cell operator+(Cell a, Cell b) { return {a.x + b.x, a.y + b.y}; }
  friend Cell operator-(Cell a, Cell b) { return {a.x - b.x, a.y - b.y}; }
};

struct CellHash {
  std::size_t operator()(const Cell& c) const noexcept {
    return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.x)) << 32) |
                                      static_cast<std::uint32_t>(c.y));
  }
};

enum class Side : std::uint8_t { North = 0, East = 1, South = 2, West = 3 };

inline constexpr std::array<Side, 4> kSides{Side::North, Side::East, Side::South, Side::West};

constexpr Side opposite(Side s) { return static_cast<Side>((static_cast<int>(s) + 2) % 4); }

constexpr Cell step(Cell c, Side s) {
  switch (s) {
    case Side::North: return {c.x, c.y + 1};
    case Side::East: return {c.x + 1, c.y};
    case Side::South: return {c.x, c.y - 1};
    case Side::West: return {c.x - 1, c.y};
  }
  return c;
}

/// Edge signature: an opaque id, or BOUNDARY for the outer rim of a form.
class EdgeSignature {
 public:
  constexpr EdgeSignature() = default;
  constexpr explicit EdgeSignature(std::uint32_t id) : id_(id) {
    if (id == 0) fail(ErrorCode::InvalidArgument, "signature id 0 is reserved for BOUNDARY");
  }
  static constexpr EdgeSignature boundary() { return EdgeSignature(); }

  constexpr bool is_boundary() const noexcept { return id_ == 0; }
  constexpr std::uint32_t id() const noexcept { return id_; }

  friend constexpr auto operator<=>(const EdgeSignature&, const EdgeSignature&) = default;

 private:
  std::uint32_t id_ = 0;
};

using EdgeSigs = std::array<EdgeSignature, 4>;

inline EdgeSignature edge(const EdgeSigs& sigs, Side s) { return sigs[static_cast<std::size_t>(s)]; }

/// Wire form: "B" for BOUNDARY, the decimal id otherwise.
inline std::string to_string(EdgeSignature sig) {
  return sig.is_boundary() ? std::string("B") : std::to_string(sig.id());
}

inline EdgeSignature parse_signature(const std::string& text) {
  if (text == "B") return EdgeSignature::boundary();
  std::size_t used = 0;
  unsigned long value = 0;
  try {
    value = std::stoul(text, &used);
  } catch (const std::exception&) {
    fail(ErrorCode::ParseError, "bad edge signature '" + text + "'");
  }
  if (used != text.size() || value == 0 || value > 0xFFFFFFFFul)
    fail(ErrorCode::ParseError, "bad edge signature '" + text + "'");
  return EdgeSignature(static_cast<std::uint32_t>(value));
}

}  // namespace fpl
