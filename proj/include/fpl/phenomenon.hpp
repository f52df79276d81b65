#pragma once

// Random phenomena (procedure, universe) realised as seeded samplers, the
// probability game played on a painting, and the factual probability space
// read off the painting's label counts.

#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "fpl/error.hpp"
#include "fpl/painting.hpp"
#include "fpl/prob.hpp"
#include "fpl/random.hpp"
#include "fpl/rational.hpp"

namespace fpl::phenomenon {

struct Provenance {
  enum class Kind { None, Painting, HiddenForm };
  Kind kind = Kind::None;
  std::string id;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

/// A reproducible procedure over a fixed universe: each draw takes one ball
/// from an urn of element indices, with replacement. The urn is the stable
/// conditional distribution; the seed fixes the stream.
class RandomPhenomenon {
 public:
  RandomPhenomenon(std::string procedure_id, prob::Universe universe, std::vector<std::size_t> urn,
                   std::uint64_t seed, Provenance provenance = {})
      : procedure_id_(std::move(procedure_id)),
        universe_(std::move(universe)),
        urn_(std::move(urn)),
        seed_(seed),
        rng_(seed),
        provenance_(std::move(provenance)) {
    require(!urn_.empty(), ErrorCode::InvalidArgument, "the urn must not be empty");
    for (auto i : urn_) require(i < universe_.size(), ErrorCode::ForeignElement, "urn ball outside the universe");
  }

  const std::string& procedure_id() const noexcept { return procedure_id_; }
  const prob::Universe& universe() const noexcept { return universe_; }
  const std::vector<std::size_t>& urn() const noexcept { return urn_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const Provenance& provenance() const noexcept { return provenance_; }

  RandomPhenomenon reseeded(std::uint64_t seed) const {
    return RandomPhenomenon(procedure_id_, universe_, urn_, seed, provenance_);
  }

  /// Index into universe() of the next elementary event.
  std::size_t draw() { return urn_[uniform_below(rng_, urn_.size())]; }

  /// Ball counts per element: the distribution the sampler realises.
  std::vector<long> urn_counts() const {
    std::vector<long> counts(universe_.size(), 0);
    for (auto i : urn_) ++counts[i];
    return counts;
  }

 private:
  std::string procedure_id_;
  prob::Universe universe_;
  std::vector<std::size_t> urn_;
  std::uint64_t seed_;
  Rng rng_;
  Provenance provenance_;
};

static_assert(prob::Sampler<RandomPhenomenon>);

inline prob::Universe label_universe(int q) {
  std::vector<std::string> ids;
  for (int j = 1; j <= q; ++j) ids.push_back(std::to_string(j));
  return prob::Universe(std::move(ids));
}

inline std::string painting_id(const painting::Painting& p) {
  return "painting-" + std::to_string(p.width()) + "x" + std::to_string(p.height()) + "-q" + std::to_string(p.q());
}

/// Draw a square, look only at its approximate colour, put it back.
inline RandomPhenomenon probabilise_painting(const painting::Painting& p, std::uint64_t seed) {
  std::vector<std::size_t> urn;
  urn.reserve(p.size());
  for (const auto& t : p.tiles()) urn.push_back(static_cast<std::size_t>(t.approx_colour - 1));
  return RandomPhenomenon("probability-game", label_universe(p.q()), std::move(urn), seed,
                          {Provenance::Kind::Painting, painting_id(p)});
}

struct FrequencyTable {
  prob::Universe universe;
  std::uint64_t trials = 0;
  std::vector<std::uint64_t> counts;
  std::vector<std::size_t> history;  // per-draw element index, when requested

  double relative(std::size_t i) const {
    return trials == 0 ? 0.0 : static_cast<double>(counts.at(i)) / static_cast<double>(trials);
  }

  /// Additive merge of two tables over the same universe.
  FrequencyTable& operator+=(const FrequencyTable& other) {
    require(universe == other.universe, ErrorCode::UniverseMismatch, "cannot merge tables over different universes");
    trials += other.trials;
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
    history.insert(history.end(), other.history.begin(), other.history.end());
    return *this;
  }
};

inline FrequencyTable run_frequency_experiment(RandomPhenomenon& ph, std::uint64_t draws, bool keep_history = false) {
  FrequencyTable t{ph.universe(), 0, std::vector<std::uint64_t>(ph.universe().size(), 0), {}};
  if (keep_history) t.history.reserve(draws);
  for (std::uint64_t k = 0; k < draws; ++k) {
    const std::size_t i = ph.draw();
    ++t.counts[i];
    if (keep_history) t.history.push_back(i);
  }
  t.trials = draws;
  return t;
}

struct FactualSpace {
  prob::Universe universe;
  prob::EventAlgebra algebra;
  prob::Measure law;
};

/// [{Dj}, tau, {n_rho(j)/T}]: the law is the label histogram over T squares.
inline FactualSpace factual_space_from_painting(const painting::Painting& p,
                                                const std::vector<std::set<std::string>>& generators = {},
                                                bool complement_closure = false) {
  const auto universe = label_universe(p.q());
  std::vector<prob::Event> gens;
  for (const auto& g : generators) gens.push_back(prob::make_event(universe, g));
  auto algebra = prob::generate_algebra(universe, gens, complement_closure);

  const auto histogram = painting::label_histogram(p);
  std::vector<long> counts;
  for (int j = 1; j <= p.q(); ++j) counts.push_back(histogram.at(j));
  auto law = prob::measure_from_counts(universe, counts);

  const auto report = prob::validate_measure(law, algebra);
  require(report.passed(), ErrorCode::InvalidArgument, "factual law failed measure validation");
  return FactualSpace{universe, std::move(algebra), std::move(law)};
}

struct DivergenceRow {
  std::string label;
  std::uint64_t count = 0;
  double relative = 0;
  Rational law;
  double abs_diff = 0;
};

struct DivergenceReport {
  double sup_distance = 0;
  double total_variation = 0;
  std::vector<DivergenceRow> rows;
};

/// Sup and total-variation distance between observed frequencies and a law.
inline DivergenceReport compare_law(const FrequencyTable& t, const prob::Measure& m) {
  require(t.universe == m.universe, ErrorCode::UniverseMismatch, "frequency table and law use different universes");
  DivergenceReport r;
  double l1 = 0;
  for (std::size_t i = 0; i < m.atoms.size(); ++i) {
    DivergenceRow row{m.universe[i], t.counts[i], t.relative(i), m.atoms[i], 0};
    row.abs_diff = std::fabs(row.relative - to_double(row.law));
    r.sup_distance = std::max(r.sup_distance, row.abs_diff);
    l1 += row.abs_diff;
    r.rows.push_back(std::move(row));
  }
  r.total_variation = l1 / 2;
  return r;
}

}  // namespace fpl::phenomenon
