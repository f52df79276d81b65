#include <gtest/gtest.h>

#include <map>

#include "fpl/painting.hpp"

using namespace fpl;
using namespace fpl::painting;

namespace {

PaintingSpec reference_spec(std::uint64_t seed = 7) {
  return PaintingSpec{10, 10, 3, {{1, 60}, {2, 30}, {3, 10}}, EdgeMode::UniqueInteriorEdges, seed};
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::ParseError;
}

}  // namespace

TEST(GeneratePainting, ReferenceCountsAreRealised) {
  const auto p = generate_painting(reference_spec());
  std::map<int, long> counted;
  for (int y = 1; y <= 10; ++y)
    for (int x = 1; x <= 10; ++x) ++counted[p.tile({x, y}).approx_colour];
  EXPECT_EQ(counted, (std::map<int, long>{{1, 60}, {2, 30}, {3, 10}}));
  EXPECT_EQ(label_histogram(p), counted);
}

TEST(GeneratePainting, DeterministicInSeed) {
  EXPECT_EQ(generate_painting(reference_spec(11)), generate_painting(reference_spec(11)));
  EXPECT_NE(generate_painting(reference_spec(11)), generate_painting(reference_spec(12)));
}

TEST(GeneratePainting, SingleTileGridIsInfeasible) {
  EXPECT_EQ(code_of([] { generate_painting({1, 1, 1, {{1, 1}}, EdgeMode::UniqueInteriorEdges, 0}); }),
            ErrorCode::InfeasibleSpec);
}

TEST(GeneratePainting, CountMismatchAndLargeQAreInfeasible) {
  EXPECT_EQ(code_of([] { generate_painting({2, 2, 2, {{1, 2}, {2, 1}}, EdgeMode::UniqueInteriorEdges, 0}); }),
            ErrorCode::InfeasibleSpec);
  EXPECT_EQ(code_of([] {
              generate_painting({2, 2, 4, {{1, 1}, {2, 1}, {3, 1}, {4, 1}}, EdgeMode::UniqueInteriorEdges, 0});
            }),
            ErrorCode::InfeasibleSpec);
  EXPECT_EQ(code_of([] { generate_painting({2, 2, 2, {{1, 4}, {2, 0}}, EdgeMode::UniqueInteriorEdges, 0}); }),
            ErrorCode::InfeasibleSpec);
}

TEST(GeneratePainting, UniformPainting) {
  const auto p = generate_painting({2, 2, 1, {{1, 4}}, EdgeMode::UniqueInteriorEdges, 3});
  for (const auto& t : p.tiles()) EXPECT_EQ(t.approx_colour, 1);
  EXPECT_EQ(label_histogram(p), (std::map<int, long>{{1, 4}}));
}

TEST(GeneratePainting, EdgeCoherenceAndUniquenessAcrossSeeds) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const int w = 2 + int(seed % 7), h = 2 + int((seed * 5) % 9);
    const long cells = long(w) * h;
    const auto p = generate_painting({w, h, 2, {{1, cells - 1}, {2, 1}}, EdgeMode::UniqueInteriorEdges, seed});
    std::map<std::uint32_t, int> multiplicity;
    for (int y = 1; y <= h; ++y) {
      for (int x = 1; x <= w; ++x) {
        const auto& t = p.tile({x, y});
        // east/north neighbours agree on the shared edge
        if (x < w) { EXPECT_EQ(edge(t.edges, Side::East), edge(p.tile({x + 1, y}).edges, Side::West)); }
        if (y < h) { EXPECT_EQ(edge(t.edges, Side::North), edge(p.tile({x, y + 1}).edges, Side::South)); }
        if (x == 1) { EXPECT_TRUE(edge(t.edges, Side::West).is_boundary()); }
        if (x == w) { EXPECT_TRUE(edge(t.edges, Side::East).is_boundary()); }
        if (y == 1) { EXPECT_TRUE(edge(t.edges, Side::South).is_boundary()); }
        if (y == h) { EXPECT_TRUE(edge(t.edges, Side::North).is_boundary()); }
        for (auto e : t.edges)
          if (!e.is_boundary()) ++multiplicity[e.id()];
      }
    }
    EXPECT_EQ(multiplicity.size(), std::size_t((w - 1) * h + w * (h - 1)));
    for (const auto& [id, n] : multiplicity) EXPECT_EQ(n, 2) << "signature " << id;
  }
}

TEST(GeneratePainting, AmbiguousModeRepeatsSignatures) {
  const auto p = generate_painting({3, 3, 2, {{1, 5}, {2, 4}}, EdgeMode::AmbiguousAllowed, 5});
  std::map<std::uint32_t, int> multiplicity;
  for (const auto& t : p.tiles())
    for (auto e : t.edges)
      if (!e.is_boundary()) ++multiplicity[e.id()];
  bool repeated = false;
  for (const auto& [id, n] : multiplicity) repeated |= n > 2;
  EXPECT_TRUE(repeated);
}

TEST(Painting, ConstructorRejectsIncoherentEdges) {
  auto p = generate_painting({2, 2, 1, {{1, 4}}, EdgeMode::UniqueInteriorEdges, 1});
  auto tiles = p.tiles();
  tiles[0].edges[static_cast<std::size_t>(Side::East)] = EdgeSignature(999);
  EXPECT_EQ(code_of([&] { Painting(2, 2, 1, tiles); }), ErrorCode::InconsistentSignatures);
}

TEST(Painting, ConstructorRejectsMissingLabel) {
  auto p = generate_painting({2, 2, 2, {{1, 3}, {2, 1}}, EdgeMode::UniqueInteriorEdges, 1});
  auto tiles = p.tiles();
  for (auto& t : tiles) t.approx_colour = 1;
  EXPECT_EQ(code_of([&] { Painting(2, 2, 2, tiles); }), ErrorCode::InvalidPainting);
}

TEST(Painting, SingleTilePaintingIsAValue) {
  const Painting p(1, 1, 1, {Tile{{1, 1}, "cf_1", 1, {}}});
  EXPECT_EQ(p.size(), 1u);
}

TEST(DescribeTile, LocationViewOfOrigin) {
  const auto p = generate_painting(reference_spec());
  const auto d = describe_tile(p, {1, 1}, ViewSelector::Location);
  ASSERT_TRUE(d.grid_coords.has_value());
  EXPECT_EQ(*d.grid_coords, (std::vector<int>{1, 1}));
  EXPECT_EQ(d.points, (std::map<std::string, std::string>{{"x", "1"}, {"y", "1"}}));
}

TEST(DescribeTile, ApproxColourViewIsTheBareLabel) {
  const auto p = generate_painting(reference_spec());
  for (const auto& t : p.tiles()) {
    const auto d = describe_tile(p, t.coords, ViewSelector::ApproxColour);
    ASSERT_EQ(d.points.size(), 1u);
    EXPECT_EQ(d.points.at("approx_colour"), std::to_string(t.approx_colour));
    EXPECT_FALSE(d.grid_coords.has_value());
  }
}

TEST(DescribeTile, EveryViewAgreesWithFilteringTheSourceDescription) {
  const auto p = generate_painting(reference_spec());
  for (auto sel : {ViewSelector::Location, ViewSelector::ColourForm, ViewSelector::ApproxColour}) {
    const auto view = view_for(p, sel);
    for (const auto& t : p.tiles())
      ASSERT_EQ(describe_tile(p, t.coords, sel), mrc::apply_view(view, source_description(p, t.coords)));
  }
}

TEST(DescribeTile, ColourFormViewCarriesNoLocationOrLabel) {
  const auto p = generate_painting(reference_spec());
  const auto d = describe_tile(p, {4, 7}, ViewSelector::ColourForm);
  EXPECT_FALSE(d.grid_coords.has_value());
  EXPECT_FALSE(d.points.contains("approx_colour"));
  EXPECT_FALSE(d.points.contains("x"));
  EXPECT_EQ(d.points.size(), 5u);
}

TEST(DescribeTile, OutOfGrid) {
  const auto p = generate_painting(reference_spec());
  EXPECT_EQ(code_of([&] { describe_tile(p, {11, 1}, ViewSelector::Location); }), ErrorCode::OutOfGrid);
  EXPECT_EQ(code_of([&] { describe_tile(p, {0, 3}, ViewSelector::ApproxColour); }), ErrorCode::OutOfGrid);
}

TEST(LabelHistogram, ConservesTileCount) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = generate_painting(reference_spec(seed));
    long total = 0;
    for (const auto& [j, n] : label_histogram(p)) total += n;
    EXPECT_EQ(total, 100);
  }
}
