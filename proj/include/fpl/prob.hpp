#pragma once

// Finite probability spaces [U, tau, p(tau)] with exact rational measures, and
// the empirical law-of-large-numbers apparatus built on top of them.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "fpl/error.hpp"
#include "fpl/random.hpp"
#include "fpl/rational.hpp"

namespace fpl::prob {

using BigInt = boost::multiprecision::cpp_int;

/// Finite ordered set of elementary-event ids.
class Universe {
 public:
  Universe() = default;
  explicit Universe(std::vector<std::string> elements) : elements_(std::move(elements)) {
    require(!elements_.empty(), ErrorCode::InvalidUniverse, "a universe needs at least one element");
    std::vector<std::string> sorted = elements_;
    std::sort(sorted.begin(), sorted.end());
    require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(), ErrorCode::InvalidUniverse,
            "universe elements must be distinct");
  }

  const std::vector<std::string>& elements() const noexcept { return elements_; }
  std::size_t size() const noexcept { return elements_.size(); }
  const std::string& operator[](std::size_t i) const { return elements_.at(i); }

  std::optional<std::size_t> index_of(const std::string& id) const {
    auto it = std::find(elements_.begin(), elements_.end(), id);
    if (it == elements_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - elements_.begin());
  }

  friend bool operator==(const Universe&, const Universe&) = default;

 private:
  std::vector<std::string> elements_;
};

/// Subset of a universe of at most 64 elements; bit i stands for element i.
using Event = std::uint64_t;

inline constexpr std::size_t kMaxAlgebraUniverse = 64;

inline Event full_event(const Universe& u) {
  return u.size() >= 64 ? ~Event{0} : (Event{1} << u.size()) - 1;
}

inline Event make_event(const Universe& u, const std::set<std::string>& ids) {
  require(u.size() <= kMaxAlgebraUniverse, ErrorCode::InvalidUniverse, "event sets support at most 64 elements");
  Event e = 0;
  for (const auto& id : ids) {
    auto i = u.index_of(id);
    if (!i) fail(ErrorCode::ForeignElement, "'" + id + "' is not an element of the universe");
    e |= Event{1} << *i;
  }
  return e;
}

struct EventAlgebra {
  Universe universe;
  std::set<Event> events;

  bool contains(Event e) const { return events.contains(e); }
};

/// Smallest family containing the generators, U and the empty set that is
/// closed under pairwise union and intersection (optionally complement too).
inline EventAlgebra generate_algebra(const Universe& u, const std::vector<Event>& generators,
                                     bool complement_closure = false) {
  require(u.size() <= kMaxAlgebraUniverse, ErrorCode::InvalidUniverse, "algebras support at most 64 elements");
  const Event all = full_event(u);
  std::set<Event> events{Event{0}, all};
  for (Event g : generators) {
    require((g & ~all) == 0, ErrorCode::ForeignElement, "generator contains elements outside the universe");
    events.insert(g);
  }
  // Each round combines every pair; stops when a round adds nothing.
  for (;;) {
    std::vector<Event> current(events.begin(), events.end());
    const std::size_t before = events.size();
    for (std::size_t i = 0; i < current.size(); ++i) {
      if (complement_closure) events.insert(all & ~current[i]);
      for (std::size_t j = i + 1; j < current.size(); ++j) {
        events.insert(current[i] | current[j]);
        events.insert(current[i] & current[j]);
      }
    }
    if (events.size() == before) break;
  }
  return EventAlgebra{u, std::move(events)};
}

/// Atomic measure: one rational per universe element. Constructed unchecked so
/// that broken measures can be reported on; see validate_measure.
struct Measure {
  Universe universe;
  std::vector<Rational> atoms;

  Measure() = default;
  Measure(Universe u, std::vector<Rational> a) : universe(std::move(u)), atoms(std::move(a)) {
    require(atoms.size() == universe.size(), ErrorCode::InvalidArgument, "one atom probability per element");
  }

  const Rational& atom(const std::string& id) const {
    auto i = universe.index_of(id);
    if (!i) fail(ErrorCode::ForeignElement, "'" + id + "' is not an element of the universe");
    return atoms[*i];
  }

  Rational total() const { return std::accumulate(atoms.begin(), atoms.end(), Rational(0)); }

  friend bool operator==(const Measure&, const Measure&) = default;
};

/// Measure from integer counts, normalised by their sum.
inline Measure measure_from_counts(const Universe& u, const std::vector<long>& counts) {
  require(counts.size() == u.size(), ErrorCode::InvalidArgument, "one count per element");
  const long total = std::accumulate(counts.begin(), counts.end(), 0L);
  require(total > 0, ErrorCode::InvalidArgument, "counts must not all be zero");
  std::vector<Rational> atoms;
  atoms.reserve(counts.size());
  for (long c : counts) {
    require(c >= 0, ErrorCode::InvalidArgument, "counts must be non-negative");
    atoms.emplace_back(c, total);
  }
  return Measure(u, std::move(atoms));
}

inline Rational event_probability(const Measure& m, Event e) {
  require(m.universe.size() <= kMaxAlgebraUniverse, ErrorCode::InvalidUniverse, "event sets support at most 64 elements");
  require((e & ~full_event(m.universe)) == 0, ErrorCode::ForeignElement, "event contains elements outside the universe");
  Rational p(0);
  for (std::size_t i = 0; i < m.atoms.size(); ++i)
    if (e & (Event{1} << i)) p += m.atoms[i];
  return p;
}

inline Rational event_probability(const Measure& m, const std::set<std::string>& ids) {
  return event_probability(m, make_event(m.universe, ids));
}

struct Check {
  std::string name;
  bool passed = true;
  bool skipped = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<Check> checks;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
  }
  const Check* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

namespace detail {

inline std::string event_string(Event e, const Universe& u) {
  std::string s = "{";
  bool first = true;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!(e & (Event{1} << i))) continue;
    if (!first) s += ",";
    s += u[i];
    first = false;
  }
  return s + "}";
}

}  // namespace detail

/// Checks range, norm, p(empty) = 0, subadditivity on every pair, exact
/// additivity on disjoint pairs, and (for strictly positive measures only)
/// that equality in subadditivity forces disjointness.
inline ValidationReport validate_measure(const Measure& m, const EventAlgebra& alg) {
  require(m.universe == alg.universe, ErrorCode::UniverseMismatch, "measure and algebra use different universes");
  ValidationReport report;
  const std::vector<Event> events(alg.events.begin(), alg.events.end());
  std::map<Event, Rational> p;
  for (Event e : events) p[e] = event_probability(m, e);

  Check range{"range", true, false, ""};
  for (std::size_t i = 0; i < m.atoms.size() && range.passed; ++i)
    if (m.atoms[i] < 0 || m.atoms[i] > 1) {
      range.passed = false;
      range.detail = "atom " + m.universe[i] + " = " + to_string(m.atoms[i]);
    }
  for (Event e : events)
    if (range.passed && (p[e] < 0 || p[e] > 1)) {
      range.passed = false;
      range.detail = "p(" + detail::event_string(e, m.universe) + ") = " + to_string(p[e]);
    }
  report.checks.push_back(range);

  const Rational norm = event_probability(m, full_event(m.universe));
  report.checks.push_back({"norm", norm == Rational(1), false, norm == Rational(1) ? "" : "p(U) = " + to_string(norm)});
  report.checks.push_back({"empty", event_probability(m, 0) == Rational(0), false, ""});

  Check sub{"subadditivity", true, false, ""};
  Check add{"disjoint_additivity", true, false, ""};
  const bool positive = std::all_of(m.atoms.begin(), m.atoms.end(), [](const Rational& r) { return r > 0; });
  Check iff{"equality_implies_disjoint", true, !positive, positive ? "" : "skipped: measure has zero atoms"};
  for (std::size_t i = 0; i < events.size(); ++i) {
    for (std::size_t j = i; j < events.size(); ++j) {
      const Event a = events[i], b = events[j];
      const Rational lhs = event_probability(m, a | b);
      const Rational rhs = p[a] + p[b];
      const bool disjoint = (a & b) == 0;
      if (sub.passed && lhs > rhs) {
        sub.passed = false;
        sub.detail = detail::event_string(a, m.universe) + " u " + detail::event_string(b, m.universe);
      }
      if (add.passed && disjoint && lhs != rhs) {
        add.passed = false;
        add.detail = detail::event_string(a, m.universe) + " u " + detail::event_string(b, m.universe);
      }
      if (positive && iff.passed && lhs == rhs && !disjoint) {
        iff.passed = false;
        iff.detail = detail::event_string(a, m.universe) + " n " + detail::event_string(b, m.universe);
      }
    }
  }
  report.checks.push_back(sub);
  report.checks.push_back(add);
  report.checks.push_back(iff);
  return report;
}

// ---------------------------------------------------------------------------
// Frequency convergence

/// |count/N - p| <= eps, evaluated without rounding the left side.
inline bool within_tolerance(std::uint64_t count, std::uint64_t trials, const Rational& p, double eps) {
  const long double num = static_cast<long double>(p.numerator());
  const long double den = static_cast<long double>(p.denominator());
  const long double gap = std::fabs(static_cast<long double>(count) * den - num * static_cast<long double>(trials));
  const long double bound = static_cast<long double>(eps) * static_cast<long double>(trials) * den;
  return gap <= bound * (1.0L + 1e-12L);
}

/// Anything that can be re-seeded and asked for one elementary event index.
template <typename S>
concept Sampler = requires(S s, const S cs, std::uint64_t seed) {
  { cs.universe() } -> std::convertible_to<const Universe&>;
  { cs.reseeded(seed) } -> std::convertible_to<S>;
  { s.draw() } -> std::convertible_to<std::size_t>;
};

struct MetaOptions {
  unsigned jobs = 1;
};

/// Fraction of M independent length-N runs whose frequency of `label` lies
/// within epsilon of p_j. Repetition r uses seed derive_seed(seed, r), so the
/// result is independent of `jobs`.
template <Sampler S>
double meta_probability(const S& sampler, const std::string& label, const Rational& p_j, double epsilon,
                        std::uint64_t trials, std::uint64_t repetitions, std::uint64_t seed, MetaOptions opt = {}) {
  require(epsilon > 0, ErrorCode::InvalidArgument, "epsilon must be positive");
  require(trials >= 1 && repetitions >= 1, ErrorCode::InvalidArgument, "N and M must be at least 1");
  const auto target = sampler.universe().index_of(label);
  if (!target) fail(ErrorCode::UnknownLabel, "'" + label + "' is not in the phenomenon's universe");

  auto run = [&](std::uint64_t rep) {
    S local = sampler.reseeded(derive_seed(seed, rep));
    std::uint64_t hits = 0;
    for (std::uint64_t k = 0; k < trials; ++k)
      if (local.draw() == *target) ++hits;
    return within_tolerance(hits, trials, p_j, epsilon);
  };

  const unsigned jobs = std::max(1u, std::min<unsigned>(opt.jobs, static_cast<unsigned>(repetitions)));
  std::vector<std::uint64_t> good(jobs, 0);
  auto worker = [&](unsigned w) {
    for (std::uint64_t rep = w; rep < repetitions; rep += jobs)
      if (run(rep)) ++good[w];
  };
  if (jobs == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < jobs; ++w) pool.emplace_back(worker, w);
  }
  const auto total = std::accumulate(good.begin(), good.end(), std::uint64_t{0});
  return static_cast<double>(total) / static_cast<double>(repetitions);
}

struct N0Options {
  std::uint64_t start = 16;
  std::uint64_t cap = std::uint64_t{1} << 20;
  MetaOptions meta{};
};

struct N0Step {
  std::uint64_t trials;
  double estimate;
};

struct N0Result {
  std::uint64_t n0 = 0;
  std::vector<N0Step> steps;
};

/// Doubling search for the first N whose meta-probability estimate reaches
/// 1 - delta. Throws NotReached once N would exceed the cap.
template <Sampler S>
N0Result find_n0(const S& sampler, const std::string& label, const Rational& p_j, double epsilon, double delta,
                 std::uint64_t repetitions, std::uint64_t seed, N0Options opt = {}) {
  require(epsilon > 0 && epsilon <= 1, ErrorCode::InvalidArgument, "epsilon must lie in (0, 1]");
  require(delta > 0 && delta < 1, ErrorCode::InvalidArgument, "delta must lie in (0, 1)");
  require(opt.start >= 1 && opt.start <= opt.cap, ErrorCode::InvalidArgument, "need 1 <= start <= cap");
  N0Result result;
  for (std::uint64_t n = opt.start; n <= opt.cap; n *= 2) {
    // Each N gets its own seed stream so estimates at different N are independent.
    const double est = meta_probability(sampler, label, p_j, epsilon, n, repetitions, derive_seed(seed, n), opt.meta);
    result.steps.push_back({n, est});
    if (est >= 1.0 - delta) {
      result.n0 = n;
      return result;
    }
  }
  fail(ErrorCode::NotReached, "no N up to " + std::to_string(opt.cap) + " reached meta-probability " +
                                  std::to_string(1.0 - delta) + " (wrong p_j or cap too small)");
}

// ---------------------------------------------------------------------------
// Statistical structures {n(j)/N}

/// Number of compositions of N into q non-negative parts: C(N+q-1, q-1).
inline BigInt count_statistical_structures(std::uint64_t trials, std::uint64_t q) {
  require(q >= 1, ErrorCode::InvalidArgument, "q must be at least 1");
  const std::uint64_t k = q - 1;
  BigInt result = 1;
  // Running product stays integral: after step i it equals C(N+i, i).
  for (std::uint64_t i = 1; i <= k; ++i) {
    result *= BigInt(trials) + i;
    result /= i;
  }
  return result;
}

/// Composition of N into q parts with its canonical index omega: the rank of
/// the count vector in lexicographically decreasing order of (n(1), n(2), ...),
/// so (N, 0, ..., 0) is structure 0.
struct SequenceStatistics {
  std::uint64_t trials = 0;
  std::vector<std::uint64_t> counts;
  BigInt structure_index = 0;
};

inline BigInt structure_index(const std::vector<std::uint64_t>& counts) {
  require(!counts.empty(), ErrorCode::InvalidArgument, "need at least one part");
  std::uint64_t remaining = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  BigInt rank = 0;
  const std::size_t q = counts.size();
  for (std::size_t i = 0; i + 1 < q; ++i) {
    // Compositions that put more than counts[i] into part i come first.
    const std::uint64_t parts_after = q - i - 1;
    for (std::uint64_t v = remaining; v > counts[i]; --v)
      rank += count_statistical_structures(remaining - v, parts_after);
    remaining -= counts[i];
  }
  return rank;
}

inline SequenceStatistics make_sequence_statistics(std::vector<std::uint64_t> counts) {
  SequenceStatistics s;
  s.trials = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  s.structure_index = structure_index(counts);
  s.counts = std::move(counts);
  return s;
}

}  // namespace fpl::prob
