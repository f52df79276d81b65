#pragma once

// JSON and CSV encodings of the library's values. Objects use nlohmann::json,
// whose keys come out sorted, so every document has a stable byte layout.
// Rationals are "num/den" strings and BOUNDARY edges are "B".

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fpl/error.hpp"
#include "fpl/grid.hpp"
#include "fpl/integration.hpp"
#include "fpl/mrc.hpp"
#include "fpl/painting.hpp"
#include "fpl/phenomenon.hpp"
#include "fpl/prob.hpp"
#include "fpl/puzzle.hpp"
#include "fpl/rational.hpp"

namespace fpl::io {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Reading helpers

template <typename T>
T get(const json& j, const std::string& key) {
  if (!j.is_object() || !j.contains(key)) fail(ErrorCode::ParseError, "missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, "field '" + key + "': " + e.what());
  }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
  return get<T>(j, key);
}

inline json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ParseError, std::string("invalid JSON: ") + e.what());
  }
}

inline json read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::MissingInput, "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

/// Pretty-printed with a trailing newline.
inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline json rational(const Rational& r) { return to_string(r); }

inline Rational rational_from(const json& j) {
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  if (!j.is_string()) fail(ErrorCode::ParseError, "rationals are \"num/den\" strings");
  return parse_rational(j.get<std::string>());
}

inline json signature(EdgeSignature s) { return to_string(s); }

inline EdgeSignature signature_from(const json& j) {
  if (j.is_number_unsigned()) return j.get<std::uint32_t>() == 0 ? EdgeSignature::boundary() : EdgeSignature(j.get<std::uint32_t>());
  if (!j.is_string()) fail(ErrorCode::ParseError, "edge signatures are \"B\" or ids");
  return parse_signature(j.get<std::string>());
}

inline json edges(const EdgeSigs& e) {
  return json{{"n", signature(e[0])}, {"e", signature(e[1])}, {"s", signature(e[2])}, {"w", signature(e[3])}};
}

inline EdgeSigs edges_from(const json& j) {
  EdgeSigs e{};
  const char* keys[] = {"n", "e", "s", "w"};
  for (std::size_t i = 0; i < 4; ++i) {
    if (!j.contains(keys[i])) fail(ErrorCode::ParseError, std::string("edges lack side '") + keys[i] + "'");
    e[i] = signature_from(j.at(keys[i]));
  }
  return e;
}

// ---------------------------------------------------------------------------
// Views and descriptions

inline json view(const mrc::View& v) {
  json aspects = json::array();
  for (const auto& a : v.aspects()) aspects.push_back(json{{"aspect_id", a.aspect_id()}, {"values", a.values()}});
  json out{{"aspects", aspects}};
  out["grid_frame"] = v.grid() ? json(v.grid()->extents) : json(nullptr);
  return out;
}

inline mrc::View view_from(const json& j) {
  std::vector<mrc::AspectView> aspects;
  for (const auto& a : get<json>(j, "aspects"))
    aspects.emplace_back(get<std::string>(a, "aspect_id"), get<std::vector<std::string>>(a, "values"));
  std::optional<mrc::GridFrame> frame;
  if (j.contains("grid_frame") && !j.at("grid_frame").is_null())
    frame = mrc::GridFrame{get<std::vector<int>>(j, "grid_frame")};
  return mrc::View(std::move(aspects), std::move(frame));
}

inline json description(const mrc::Description& d) {
  json out{{"generator_id", d.generator_id}, {"entity_id", d.entity_id}, {"points", d.points}};
  out["grid_coords"] = d.grid_coords ? json(*d.grid_coords) : json(nullptr);
  return out;
}

inline mrc::Description description_from(const json& j) {
  mrc::Description d{get<std::string>(j, "generator_id"), get<std::string>(j, "entity_id"),
                     get<std::map<std::string, std::string>>(j, "points"), std::nullopt};
  if (j.contains("grid_coords") && !j.at("grid_coords").is_null()) d.grid_coords = get<std::vector<int>>(j, "grid_coords");
  return d;
}

// ---------------------------------------------------------------------------
// Paintings

inline std::string edge_mode_name(painting::EdgeMode m) {
  return m == painting::EdgeMode::UniqueInteriorEdges ? "unique-interior-edges" : "ambiguous-allowed";
}

inline painting::EdgeMode edge_mode_from(const std::string& s) {
  if (s == "unique-interior-edges") return painting::EdgeMode::UniqueInteriorEdges;
  if (s == "ambiguous-allowed") return painting::EdgeMode::AmbiguousAllowed;
  fail(ErrorCode::ParseError, "unknown uniqueness_mode '" + s + "'");
}

inline std::map<int, long> label_counts_from(const json& j) {
  std::map<int, long> out;
  if (!j.is_object()) fail(ErrorCode::ParseError, "label_counts must be an object {label: count}");
  for (const auto& [k, v] : j.items()) {
    int label = 0;
    try {
      std::size_t used = 0;
      label = std::stoi(k, &used);
      if (used != k.size()) throw std::invalid_argument(k);
    } catch (const std::exception&) {
      fail(ErrorCode::ParseError, "label '" + k + "' is not an integer");
    }
    if (!v.is_number_integer()) fail(ErrorCode::ParseError, "count for label '" + k + "' is not an integer");
    out[label] = v.get<long>();
  }
  return out;
}

inline json label_counts(const std::map<int, long>& m) {
  json out = json::object();
  for (const auto& [k, v] : m) out[std::to_string(k)] = v;
  return out;
}

inline json painting_spec(const painting::PaintingSpec& s) {
  return json{{"width", s.width},
              {"height", s.height},
              {"q", s.q},
              {"label_counts", label_counts(s.label_counts)},
              {"uniqueness_mode", edge_mode_name(s.uniqueness_mode)},
              {"seed", s.seed}};
}

/// The seed is optional here; callers supply it from the command line.
inline painting::PaintingSpec painting_spec_from(const json& j) {
  painting::PaintingSpec s;
  s.width = get<int>(j, "width");
  s.height = get<int>(j, "height");
  s.q = get<int>(j, "q");
  s.label_counts = label_counts_from(get<json>(j, "label_counts"));
  s.uniqueness_mode = edge_mode_from(get_or<std::string>(j, "uniqueness_mode", "unique-interior-edges"));
  s.seed = get_or<std::uint64_t>(j, "seed", 0);
  return s;
}

inline json painting(const painting::Painting& p) {
  json tiles = json::array();
  for (const auto& t : p.tiles())
    tiles.push_back(json{{"x", t.coords.x},
                         {"y", t.coords.y},
                         {"label", t.approx_colour},
                         {"form", t.colour_form_id},
                         {"edges", edges(t.edges)}});
  return json{{"width", p.width()}, {"height", p.height()}, {"q", p.q()}, {"tiles", tiles}};
}

inline painting::Painting painting_from(const json& j) {
  std::vector<painting::Tile> tiles;
  for (const auto& t : get<json>(j, "tiles"))
    tiles.push_back(painting::Tile{{get<int>(t, "x"), get<int>(t, "y")},
                                   get<std::string>(t, "form"),
                                   get<int>(t, "label"),
                                   edges_from(get<json>(t, "edges"))});
  return painting::Painting(get<int>(j, "width"), get<int>(j, "height"), get<int>(j, "q"), std::move(tiles));
}

// ---------------------------------------------------------------------------
// Hidden forms

inline json hidden_form(const integration::HiddenForm& f) {
  json tiles = json::array();
  for (const auto& t : f.tiles())
    tiles.push_back(json{{"x", t.coords.x},
                         {"y", t.coords.y},
                         {"label", t.label_r},
                         {"r_prime", t.r_prime},
                         {"edges", edges(t.edges)}});
  return json{{"width", f.width()}, {"height", f.height()}, {"s_prime", f.s_prime()}, {"tiles", tiles}};
}

/// Either an explicit form (with "tiles") or a generating spec: painting-spec
/// fields plus s_prime and a mandatory seed.
inline integration::HiddenForm hidden_form_from(const json& j) {
  if (j.contains("tiles")) {
    std::vector<integration::FormTile> tiles;
    for (const auto& t : get<json>(j, "tiles"))
      tiles.push_back(integration::FormTile{{get<int>(t, "x"), get<int>(t, "y")},
                                            get<int>(t, "label"),
                                            get<std::uint64_t>(t, "r_prime"),
                                            edges_from(get<json>(t, "edges"))});
    return integration::HiddenForm(get<int>(j, "width"), get<int>(j, "height"), get<std::uint64_t>(j, "s_prime"),
                                   std::move(tiles));
  }
  if (!j.contains("seed")) fail(ErrorCode::ConfigError, "a generated form needs an explicit seed");
  return integration::generate_hidden_form(painting_spec_from(j), get<std::uint64_t>(j, "s_prime"));
}

// ---------------------------------------------------------------------------
// Puzzle reports

inline std::string mode_name(puzzle::Mode m) { return m == puzzle::Mode::Location ? "location" : "border"; }

inline json completions(const std::vector<assembly::Completion>& log) {
  json out = json::array();
  for (const auto& c : log) out.push_back(json{{"board", c.board}, {"draw", c.draw}});
  return out;
}

inline json assembly_report(const puzzle::AssemblyReport& r, const puzzle::FragmentPool& pool) {
  json boards = json::array();
  for (const auto& b : r.boards) {
    json cells = json::array();
    for (const auto& [cell, i] : b)
      cells.push_back(json{{"x", cell.x}, {"y", cell.y}, {"entity_id", pool.fragment(i).description.entity_id}});
    boards.push_back(cells);
  }
  return json{{"mode", mode_name(pool.mode())},
              {"width", pool.width()},
              {"height", pool.height()},
              {"replicas", pool.replicas()},
              {"draws", r.draws},
              {"placements", r.placements},
              {"trials", r.trials},
              {"failed_trials", r.failed_trials()},
              {"completed_replicas", r.completed_replicas},
              {"merges", r.merges},
              {"ambiguous_draws", r.ambiguous_draws},
              {"peak_nascent_boards", r.peak_nascent_boards},
              {"completion_order", completions(r.completion_order)},
              {"boards", boards}};
}

// ---------------------------------------------------------------------------
// Probability

inline json measure(const prob::Measure& m) {
  json atoms = json::array();
  for (std::size_t i = 0; i < m.atoms.size(); ++i)
    atoms.push_back(json{{"element", m.universe[i]}, {"p", rational(m.atoms[i])}, {"decimal", to_double(m.atoms[i])}});
  return json{{"universe", m.universe.elements()}, {"atoms", atoms}};
}

struct SpaceFile {
  prob::Measure measure;
  prob::EventAlgebra algebra;
};

/// {universe: [ids], atoms: {id: "num/den"}, generators: [[ids]], complement_closure: bool}
inline SpaceFile space_from(const json& j) {
  prob::Universe u(get<std::vector<std::string>>(j, "universe"));
  const json atoms = get<json>(j, "atoms");
  if (!atoms.is_object()) fail(ErrorCode::ParseError, "atoms must map element ids to rationals");
  std::vector<Rational> values(u.size(), Rational(0));
  for (const auto& [k, v] : atoms.items()) {
    auto i = u.index_of(k);
    if (!i) fail(ErrorCode::ForeignElement, "atom '" + k + "' is not in the universe");
    values[*i] = rational_from(v);
  }
  std::vector<prob::Event> gens;
  for (const auto& g : get_or<json>(j, "generators", json::array()))
    gens.push_back(prob::make_event(u, g.get<std::set<std::string>>()));
  auto algebra = prob::generate_algebra(u, gens, get_or<bool>(j, "complement_closure", false));
  return SpaceFile{prob::Measure(u, std::move(values)), std::move(algebra)};
}

inline json event(prob::Event e, const prob::Universe& u) {
  json out = json::array();
  for (std::size_t i = 0; i < u.size(); ++i)
    if (e & (prob::Event{1} << i)) out.push_back(u[i]);
  return out;
}

inline json validation_report(const prob::ValidationReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks)
    checks.push_back(json{{"name", c.name}, {"passed", c.passed}, {"skipped", c.skipped}, {"detail", c.detail}});
  return json{{"passed", r.passed()}, {"checks", checks}};
}

inline json n0_result(const prob::N0Result& r) {
  json steps = json::array();
  for (const auto& s : r.steps) steps.push_back(json{{"trials", s.trials}, {"estimate", s.estimate}});
  return json{{"n0", r.n0}, {"steps", steps}};
}

// ---------------------------------------------------------------------------
// Frequencies

inline json divergence(const phenomenon::DivergenceReport& d) {
  json rows = json::array();
  for (const auto& r : d.rows)
    rows.push_back(json{{"label", r.label},
                        {"count", r.count},
                        {"rel_freq", r.relative},
                        {"law_prob", rational(r.law)},
                        {"law_decimal", to_double(r.law)},
                        {"abs_diff", r.abs_diff}});
  return json{{"sup_distance", d.sup_distance}, {"total_variation", d.total_variation}, {"rows", rows}};
}

inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

/// label,count,rel_freq,law_prob,abs_diff
inline std::string frequency_csv(const phenomenon::DivergenceReport& d) {
  std::string out = "label,count,rel_freq,law_prob,abs_diff\n";
  for (const auto& r : d.rows)
    out += r.label + "," + std::to_string(r.count) + "," + format_real(r.relative) + "," +
           format_real(to_double(r.law)) + "," + format_real(r.abs_diff) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Integration

inline json integration_result(const integration::IntegrationResult& r) {
  json per_label = json::object(), per_label_c = json::object(), law = json::object(), pairs = json::array();
  for (const auto& [k, v] : r.per_label) per_label[std::to_string(k)] = v;
  for (const auto& [k, v] : r.per_label_complexified) per_label_c[std::to_string(k)] = v;
  for (const auto& [pair, n] : r.per_pair_counts)
    pairs.push_back(json{{"label", pair.first}, {"r_prime", pair.second}, {"count", n}});
  for (std::size_t i = 0; i < r.law.atoms.size(); ++i)
    law[r.law.universe[i]] = json{{"p", rational(r.law.atoms[i])}, {"decimal", to_double(r.law.atoms[i])}};
  return json{{"n_phi_total", r.n_phi_total},
              {"total_labels", r.total_labels},
              {"per_label", per_label},
              {"per_label_complexified", per_label_c},
              {"per_pair_counts", pairs},
              {"law", law},
              {"replicas_used_for_confirmation", r.replicas_used_for_confirmation},
              {"events_consumed", r.events_consumed},
              {"completion_log", completions(r.completion_log)},
              {"peak_nascent_replicas", r.peak_nascent_replicas},
              {"merges", r.merges},
              {"ambiguous_events", r.ambiguous_events}};
}

inline json error_record(const Error& e) {
  return json{{"error", json{{"code", to_string(e.code())}, {"message", e.what()}}}};
}

}  // namespace fpl::io
