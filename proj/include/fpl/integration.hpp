#pragma once

// Semantic integration of a random phenomenon.
//
// Each realisation of the phenomenon ends in a label r (its basin) but also
// leaves a complexified trace: a global complexification value r' and border
// signatures. Playing the border puzzle on a stream of such traces rebuilds
// replicas of the hidden integrated form. Once a replica closes, its tile
// count fixes n_phi (confirmed on further replicas), and counting labels on it
// gives the factual law p(Dr) = n_phi(Dr) / n_{r,phi}, exactly.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fpl/assembly.hpp"
#include "fpl/error.hpp"
#include "fpl/grid.hpp"
#include "fpl/painting.hpp"
#include "fpl/phenomenon.hpp"
#include "fpl/prob.hpp"
#include "fpl/random.hpp"

namespace fpl::integration {

/// D_r(r'): label r, complexification r', border signatures. No coordinates.
struct ComplexifiedEvent {
  int label_r = 0;
  std::uint64_t r_prime = 0;
  EdgeSigs edges{};
  std::map<std::string, std::string> extra_values;

  friend bool operator==(const ComplexifiedEvent&, const ComplexifiedEvent&) = default;
};

struct FormTile {
  Cell coords;
  int label_r = 0;
  std::uint64_t r_prime = 0;
  EdgeSigs edges{};

  friend bool operator==(const FormTile&, const FormTile&) = default;
};

/// How much richer than the largest label cloud s' must be.
inline constexpr std::uint64_t kSPrimeFactor = 10;

/// The integrated form Phi that the integrator never sees directly.
class HiddenForm {
 public:
  HiddenForm(int width, int height, std::uint64_t s_prime, std::vector<FormTile> tiles)
      : width_(width), height_(height), s_prime_(s_prime) {
    require(width >= 1 && height >= 1, ErrorCode::InvalidPainting, "grid extents must be positive");
    const std::size_t n = size();
    require(tiles.size() == n, ErrorCode::InvalidPainting, "expected one tile per cell");
    tiles_.resize(n);
    std::vector<bool> seen(n, false);
    std::map<int, std::set<std::uint64_t>> clouds;
    for (auto& t : tiles) {
      require(in_grid(t.coords), ErrorCode::InvalidPainting, "tile outside the grid");
      const auto i = painting::detail::index_of(width_, t.coords);
      require(!seen[i], ErrorCode::InvalidPainting, "two tiles share a cell");
      seen[i] = true;
      require(t.label_r >= 1, ErrorCode::InvalidPainting, "labels start at 1");
      require(t.r_prime >= 1 && t.r_prime <= s_prime_, ErrorCode::InvalidPainting, "r' must lie in 1..s'");
      require(clouds[t.label_r].insert(t.r_prime).second, ErrorCode::InvalidPainting,
              "r' value " + std::to_string(t.r_prime) + " realised twice in the cloud of label " +
                  std::to_string(t.label_r));
      tiles_[i] = t;
    }
    s_ = clouds.rbegin()->first;
    for (int r = 1; r <= s_; ++r)
      require(clouds.contains(r), ErrorCode::InvalidPainting, "label " + std::to_string(r) + " is not realised");
    require(static_cast<std::size_t>(s_) < n || n == 1, ErrorCode::InvalidPainting, "need s < width*height");
    std::size_t largest = 0;
    for (const auto& [r, cloud] : clouds) largest = std::max(largest, cloud.size());
    require(s_prime_ >= kSPrimeFactor * largest, ErrorCode::InfeasibleSpec,
            "s' = " + std::to_string(s_prime_) + " is not rich enough: need s' >= " +
                std::to_string(kSPrimeFactor) + " x largest label count (" + std::to_string(largest) + ")");
    painting::check_edge_coherence(width_, height_, [this](Cell c) -> const EdgeSigs& { return tile(c).edges; });
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int s() const noexcept { return s_; }
  std::uint64_t s_prime() const noexcept { return s_prime_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_); }
  const std::vector<FormTile>& tiles() const noexcept { return tiles_; }
  bool in_grid(Cell c) const noexcept { return c.x >= 1 && c.x <= width_ && c.y >= 1 && c.y <= height_; }

  const FormTile& tile(Cell c) const {
    require(in_grid(c), ErrorCode::OutOfGrid, "cell outside the form");
    return tiles_[painting::detail::index_of(width_, c)];
  }

  std::map<int, long> label_counts() const {
    std::map<int, long> counts;
    for (const auto& t : tiles_) ++counts[t.label_r];
    return counts;
  }

  friend bool operator==(const HiddenForm&, const HiddenForm&) = default;

 private:
  int width_;
  int height_;
  std::uint64_t s_prime_;
  int s_ = 0;
  std::vector<FormTile> tiles_;
};

/// Distinct values from 1..s_prime, `count` of them, via Floyd's sampling.
inline std::vector<std::uint64_t> distinct_values(std::uint64_t s_prime, std::size_t count, Rng& rng) {
  require(count <= s_prime, ErrorCode::InfeasibleSpec, "not enough r' values");
  std::set<std::uint64_t> chosen;
  std::vector<std::uint64_t> out;
  for (std::uint64_t j = s_prime - count + 1; j <= s_prime; ++j) {
    const std::uint64_t t = 1 + uniform_below(rng, j);
    const std::uint64_t pick = chosen.contains(t) ? j : t;
    chosen.insert(pick);
    out.push_back(pick);
  }
  return out;
}

/// Dresses a painting's label grid and borders as a hidden form, drawing each
/// label cloud's r' values without repetition.
inline HiddenForm hidden_form_from_painting(const painting::Painting& p, std::uint64_t s_prime, std::uint64_t seed) {
  Rng rng(seed);
  const auto counts = painting::label_histogram(p);
  std::map<int, std::vector<std::uint64_t>> pools;
  for (const auto& [r, n] : counts) {
    require(s_prime >= kSPrimeFactor * static_cast<std::uint64_t>(n), ErrorCode::InfeasibleSpec,
            "s' must be at least " + std::to_string(kSPrimeFactor) + " x the largest label count");
    pools[r] = distinct_values(s_prime, static_cast<std::size_t>(n), rng);
  }
  std::vector<FormTile> tiles;
  for (const auto& t : p.tiles()) {
    auto& pool = pools[t.approx_colour];
    tiles.push_back(FormTile{t.coords, t.approx_colour, pool.back(), t.edges});
    pool.pop_back();
  }
  return HiddenForm(p.width(), p.height(), s_prime, std::move(tiles));
}

inline HiddenForm generate_hidden_form(const painting::PaintingSpec& spec, std::uint64_t s_prime) {
  return hidden_form_from_painting(painting::generate_painting(spec), s_prime, derive_seed(spec.seed, 1));
}

/// Normalised label histogram of the form itself. This reads the hidden
/// definition directly and exists to check integrate() against.
inline prob::Measure hidden_law(const HiddenForm& form) {
  const auto counts = form.label_counts();
  std::vector<long> v;
  for (int r = 1; r <= form.s(); ++r) v.push_back(counts.at(r));
  return prob::measure_from_counts(phenomenon::label_universe(form.s()), v);
}

/// Each realisation lands on a uniformly drawn tile of the form and reports
/// its complexified description with the coordinates stripped.
class ComplexifiedStream {
 public:
  ComplexifiedStream(const HiddenForm& form, std::uint64_t seed) : form_(&form), rng_(seed) {}

  ComplexifiedEvent next() {
    const auto& t = form_->tiles()[uniform_below(rng_, form_->size())];
    return ComplexifiedEvent{t.label_r, t.r_prime, t.edges, {}};
  }

 private:
  const HiddenForm* form_;
  Rng rng_;
};

inline ComplexifiedStream complexified_phenomenon(const HiddenForm& form, std::uint64_t seed) {
  return ComplexifiedStream(form, seed);
}

/// The bare-label phenomenon (Pi, {Dr}) underlying the complexified stream.
inline phenomenon::RandomPhenomenon label_projection(const HiddenForm& form, std::uint64_t seed) {
  std::vector<std::size_t> urn;
  urn.reserve(form.size());
  for (const auto& t : form.tiles()) urn.push_back(static_cast<std::size_t>(t.label_r - 1));
  return phenomenon::RandomPhenomenon("complexified-projection", phenomenon::label_universe(form.s()), std::move(urn),
                                      seed, {phenomenon::Provenance::Kind::HiddenForm, "form"});
}

struct IntegrationConfig {
  std::uint64_t max_events = 1'000'000;
  std::size_t confirmation_replicas = 3;  // K
  std::size_t ambiguity_budget = 0;       // draws allowed to see two candidate cells on one board
};

struct IntegrationResult {
  std::size_t n_phi_total = 0;                                         // n_phi
  std::map<std::pair<int, std::uint64_t>, long> per_pair_counts;       // n_phi[D_r(r')]
  std::map<int, long> per_label_complexified;                          // n_phi(r): distinct r' per r
  std::map<int, long> per_label;                                       // n_phi(Dr)
  long total_labels = 0;                                               // n_{r,phi}
  prob::Measure law;                                                   // p(Dr)
  std::size_t replicas_used_for_confirmation = 0;
  std::uint64_t events_consumed = 0;
  std::vector<assembly::Completion> completion_log;
  std::size_t peak_nascent_replicas = 0;
  std::size_t merges = 0;
  std::size_t ambiguous_events = 0;
};

namespace detail {

struct ReplicaCounts {
  std::size_t tiles = 0;
  std::map<std::pair<int, std::uint64_t>, long> pairs;

  friend bool operator==(const ReplicaCounts&, const ReplicaCounts&) = default;
};

template <typename Engine>
ReplicaCounts count_replica(const Engine& engine, const assembly::Board& board) {
  ReplicaCounts c;
  c.tiles = board.cells.size();
  for (const auto& [cell, inst] : board.cells) {
    const auto& e = engine.piece(inst);
    ++c.pairs[{e.label_r, e.r_prime}];
  }
  return c;
}

}  // namespace detail

template <typename S>
concept EventStream = requires(S s) {
  { s.next() } -> std::convertible_to<ComplexifiedEvent>;
};

/// Consumes events until K replicas of the form are complete, then reads the
/// factual law off the first one and confirms every count on the others.
template <EventStream Stream>
IntegrationResult integrate(Stream& stream, const IntegrationConfig& config) {
  require(config.confirmation_replicas >= 1, ErrorCode::InvalidArgument, "need K >= 1 confirmation replicas");
  assembly::Assembler<ComplexifiedEvent> engine;
  IntegrationResult result;

  std::uint64_t consumed = 0;
  while (engine.completions().size() < config.confirmation_replicas) {
    if (consumed == config.max_events)
      fail(ErrorCode::BudgetExhausted, std::to_string(consumed) + " events consumed, only " +
                                           std::to_string(engine.completions().size()) + " of " +
                                           std::to_string(config.confirmation_replicas) + " replicas complete");
    const std::size_t inst = engine.add(stream.next());
    ++consumed;
    const auto opts = engine.options(inst);
    if (opts.ambiguous && ++result.ambiguous_events > config.ambiguity_budget)
      fail(ErrorCode::AmbiguityExhausted, "border signatures leave more than " +
                                              std::to_string(config.ambiguity_budget) + " placements ambiguous");
    if (opts.fitting.empty())
      engine.open_board(inst, consumed);
    else
      engine.attach(opts.fitting.front(), inst, consumed);
    result.peak_nascent_replicas = std::max(result.peak_nascent_replicas, engine.live_boards());
  }

  const auto& completions = engine.completions();
  const auto first = detail::count_replica(engine, engine.boards()[completions.front().board]);
  for (std::size_t k = 1; k < config.confirmation_replicas; ++k) {
    const auto other = detail::count_replica(engine, engine.boards()[completions[k].board]);
    if (!(other == first))
      fail(ErrorCode::InconsistentReplicas, "replica " + std::to_string(k + 1) + " disagrees with the first (" +
                                                std::to_string(other.tiles) + " vs " + std::to_string(first.tiles) +
                                                " tiles)");
  }

  result.n_phi_total = first.tiles;
  result.per_pair_counts = first.pairs;
  for (const auto& [pair, n] : first.pairs) {
    ++result.per_label_complexified[pair.first];
    result.per_label[pair.first] += n;
    result.total_labels += n;
  }
  // Labels are read as 1..s; a label missing from a closed replica is not
  // part of the phenomenon's universe.
  std::vector<std::string> ids;
  std::vector<long> counts;
  for (const auto& [r, n] : result.per_label) {
    ids.push_back(std::to_string(r));
    counts.push_back(n);
  }
  result.law = prob::measure_from_counts(prob::Universe(ids), counts);
  result.replicas_used_for_confirmation = config.confirmation_replicas;
  result.events_consumed = consumed;
  result.completion_log = completions;
  result.merges = engine.merges();
  return result;
}

struct ComparisonReport {
  IntegrationResult integration;
  phenomenon::FrequencyTable frequencies;
  phenomenon::DivergenceReport divergence;
};

/// Integrates the form's stream, then samples the bare-label phenomenon with
/// an independent seed and measures how far its frequencies sit from the law.
inline ComparisonReport end_to_end_check(const HiddenForm& form, std::uint64_t draws, std::uint64_t seed,
                                         const IntegrationConfig& config = {}) {
  auto stream = complexified_phenomenon(form, derive_seed(seed, 0));
  auto integration = integrate(stream, config);
  auto labels = label_projection(form, derive_seed(seed, 1));
  auto table = phenomenon::run_frequency_experiment(labels, draws);
  auto divergence = phenomenon::compare_law(table, integration.law);
  return ComparisonReport{std::move(integration), std::move(table), std::move(divergence)};
}

}  // namespace fpl::integration
