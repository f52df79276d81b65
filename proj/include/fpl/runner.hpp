#pragma once

// Experiment runner behind the `fpl` command line.
//
// A command is a pure function from resolved parameters to output file
// contents. run() validates parameters, executes the command, writes the
// outputs and a RunManifest next to the primary output. reproduce() replays a
// manifest into a temporary directory and compares digests.
//
// Exit codes: 0 success, 1 failed check or downstream error, 2 bad
// configuration (invalid JSON, missing field or seed, unreadable input).
//
// SHA-256 comes from OpenSSL; link OpenSSL::Crypto when including this header.

#include <openssl/evp.h>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "fpl/integration.hpp"
#include "fpl/json.hpp"
#include "fpl/painting.hpp"
#include "fpl/phenomenon.hpp"
#include "fpl/prob.hpp"
#include "fpl/puzzle.hpp"

namespace fpl::runner {

using io::json;
namespace fs = std::filesystem;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kArtifactVersion = "fpl-1.0.0";

inline std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    fail(ErrorCode::InvalidArgument, "sha256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

inline std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorCode::MissingInput, "cannot open '" + p.string() + "'");
  return std::string(std::istreambuf_iterator<char>(in), {});
}

inline void write_bytes(const fs::path& p, const std::string& bytes) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::MissingInput, "cannot write '" + p.string() + "'");
  out << bytes;
}

// ---------------------------------------------------------------------------
// Parameters

template <typename T>
T param(const json& p, const std::string& key) {
  if (!p.contains(key) || p.at(key).is_null()) fail(ErrorCode::ConfigError, "missing parameter '" + key + "'");
  try {
    return p.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::ConfigError, "parameter '" + key + "' has the wrong type");
  }
}

template <typename T>
T param_or(const json& p, const std::string& key, T fallback) {
  if (!p.contains(key) || p.at(key).is_null()) return fallback;
  return param<T>(p, key);
}

inline std::uint64_t seed_of(const json& p) {
  if (!p.contains("seed") || p.at("seed").is_null())
    fail(ErrorCode::ConfigError, "no seed given; every run needs an explicit --seed");
  if (!p.at("seed").is_number_unsigned() && !(p.at("seed").is_number_integer() && p.at("seed").get<std::int64_t>() >= 0))
    fail(ErrorCode::ConfigError, "seed must be an unsigned integer");
  return p.at("seed").get<std::uint64_t>();
}

/// What one execution of a command produced, before anything is written.
struct Produced {
  std::map<std::string, std::string> files;  // output parameter -> bytes
  bool passed = true;
  std::string summary;
};

struct CommandInfo {
  std::vector<std::string> inputs;   // parameters naming input files
  std::vector<std::string> outputs;  // parameters naming output files, primary first
  std::map<std::string, std::string> default_outputs;
  bool seeded = true;
  std::vector<std::string> formats{"json"};
  std::function<Produced(const json&, unsigned jobs)> run;
};

namespace detail {

inline json load_input(const json& p, const std::string& key) { return io::read_file(param<std::string>(p, key)); }

inline std::string format_of(const json& p, const std::string& fallback) { return param_or<std::string>(p, "format", fallback); }

inline Produced gen_painting(const json& p, unsigned) {
  auto spec = io::painting_spec_from(load_input(p, "spec"));
  spec.seed = seed_of(p);
  const auto painting = painting::generate_painting(spec);
  return {{{"out", io::dump(io::painting(painting))}},
          true,
          "painting " + std::to_string(painting.width()) + "x" + std::to_string(painting.height()) + ", q=" +
              std::to_string(painting.q())};
}

inline Produced play_puzzle(const json& p, unsigned) {
  const auto mode_name = param<std::string>(p, "mode");
  if (mode_name != "location" && mode_name != "border")
    fail(ErrorCode::ConfigError, "mode must be 'location' or 'border'");
  const auto mode = mode_name == "location" ? puzzle::Mode::Location : puzzle::Mode::Border;
  const int replicas = param_or<int>(p, "replicas", 1);
  if (replicas < 1) fail(ErrorCode::ConfigError, "replicas must be at least 1");
  const auto painting = io::painting_from(load_input(p, "painting"));
  const auto pool = puzzle::FragmentPool::from_painting(painting, mode, replicas, seed_of(p));
  const auto report = mode == puzzle::Mode::Location
                          ? puzzle::solve_by_location(pool)
                          : puzzle::solve_by_borders(pool, {param_or<std::size_t>(p, "trial_budget", 1'000'000)});
  const bool ok = report.completed_replicas == static_cast<std::size_t>(replicas);
  return {{{"report", io::dump(io::assembly_report(report, pool))}},
          ok,
          std::to_string(report.completed_replicas) + "/" + std::to_string(replicas) + " replicas, " +
              std::to_string(report.placements) + " placements, " + std::to_string(report.failed_trials()) +
              " failed trials"};
}

inline Produced play_prob_game(const json& p, unsigned) {
  const auto painting = io::painting_from(load_input(p, "painting"));
  const auto draws = param<std::uint64_t>(p, "draws");
  auto ph = phenomenon::probabilise_painting(painting, seed_of(p));
  const auto table = phenomenon::run_frequency_experiment(ph, draws);
  const auto law = phenomenon::factual_space_from_painting(painting).law;
  const auto d = phenomenon::compare_law(table, law);
  const bool ok = !p.contains("tolerance") || d.sup_distance <= param<double>(p, "tolerance");
  const std::string body =
      format_of(p, "csv") == "csv" ? io::frequency_csv(d) : io::dump(io::divergence(d));
  return {{{"out", body}}, ok, "sup distance " + io::format_real(d.sup_distance) + " after " + std::to_string(draws) + " draws"};
}

inline Produced validate_space(const json& p, unsigned) {
  const auto space = io::space_from(load_input(p, "space"));
  const auto report = prob::validate_measure(space.measure, space.algebra);
  json out = io::validation_report(report);
  out["measure"] = io::measure(space.measure);
  out["algebra_size"] = space.algebra.events.size();
  return {{{"out", io::dump(out)}}, report.passed(), report.passed() ? "all checks pass" : "measure check failed"};
}

inline phenomenon::RandomPhenomenon lln_phenomenon(const json& p, std::uint64_t seed, prob::Measure& law) {
  if (p.contains("painting")) {
    const auto painting = io::painting_from(load_input(p, "painting"));
    law = phenomenon::factual_space_from_painting(painting).law;
    return phenomenon::probabilise_painting(painting, seed);
  }
  const json spec = param<json>(p, "phenomenon");
  const auto ids = param<std::vector<std::string>>(spec, "universe");
  const auto weights = param<std::vector<long>>(spec, "weights");
  if (ids.size() != weights.size()) fail(ErrorCode::ConfigError, "one weight per universe element");
  prob::Universe u(ids);
  std::vector<std::size_t> urn;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] < 0) fail(ErrorCode::ConfigError, "weights must be non-negative");
    urn.insert(urn.end(), static_cast<std::size_t>(weights[i]), i);
  }
  law = prob::measure_from_counts(u, weights);
  return phenomenon::RandomPhenomenon(param_or<std::string>(spec, "procedure_id", "urn"), u, std::move(urn), seed);
}

inline Produced lln(const json& p, unsigned jobs) {
  const std::uint64_t seed = seed_of(p);
  prob::Measure law;
  const auto ph = lln_phenomenon(p, 0, law);
  const auto label = param<std::string>(p, "label");
  const auto idx = law.universe.index_of(label);
  if (!idx) fail(ErrorCode::UnknownLabel, "'" + label + "' is not in the phenomenon's universe");
  const Rational p_j = p.contains("p") ? io::rational_from(p.at("p")) : law.atoms[*idx];
  const double eps = param<double>(p, "epsilon");
  const auto reps = param<std::uint64_t>(p, "repetitions");
  const prob::MetaOptions meta{jobs};

  json out{{"label", label}, {"p", io::rational(p_j)}, {"epsilon", eps}, {"repetitions", reps}};
  std::string summary;
  if (p.contains("trials")) {
    const auto n = param<std::uint64_t>(p, "trials");
    const double est = prob::meta_probability(ph, label, p_j, eps, n, reps, derive_seed(seed, 0), meta);
    out["meta_probability"] = json{{"trials", n}, {"estimate", est}};
    summary += "meta-probability " + io::format_real(est) + " at N=" + std::to_string(n);
  }
  if (p.contains("delta")) {
    prob::N0Options opt;
    opt.start = param_or<std::uint64_t>(p, "start", opt.start);
    opt.cap = param_or<std::uint64_t>(p, "cap", opt.cap);
    opt.meta = meta;
    const auto r = prob::find_n0(ph, label, p_j, eps, param<double>(p, "delta"), reps, derive_seed(seed, 1), opt);
    out["find_n0"] = io::n0_result(r);
    out["delta"] = param<double>(p, "delta");
    summary += (summary.empty() ? "" : ", ") + std::string("N0=") + std::to_string(r.n0);
  }
  if (summary.empty()) fail(ErrorCode::ConfigError, "lln needs 'trials' (meta-probability) and/or 'delta' (N0 search)");
  return {{{"out", io::dump(out)}}, true, summary};
}

inline integration::IntegrationConfig integration_config(const json& p) {
  integration::IntegrationConfig c;
  c.confirmation_replicas = param_or<std::size_t>(p, "confirm", c.confirmation_replicas);
  c.max_events = param_or<std::uint64_t>(p, "max_events", c.max_events);
  c.ambiguity_budget = param_or<std::size_t>(p, "ambiguity_budget", c.ambiguity_budget);
  if (c.confirmation_replicas < 1) fail(ErrorCode::ConfigError, "confirm must be at least 1");
  return c;
}

inline Produced integrate(const json& p, unsigned) {
  const auto form = io::hidden_form_from(load_input(p, "form"));
  auto stream = integration::complexified_phenomenon(form, seed_of(p));
  const auto r = integration::integrate(stream, integration_config(p));
  std::string law;
  for (std::size_t i = 0; i < r.law.atoms.size(); ++i)
    law += (i ? " " : "") + r.law.universe[i] + ":" + to_string(r.law.atoms[i]);
  return {{{"out", io::dump(io::integration_result(r))}},
          true,
          "law {" + law + "} from " + std::to_string(r.events_consumed) + " events"};
}

inline Produced end_to_end(const json& p, unsigned) {
  const auto form = io::hidden_form_from(load_input(p, "form"));
  const auto draws = param<std::uint64_t>(p, "draws");
  const double tol = param_or<double>(p, "tolerance", 0.01);
  const auto r = integration::end_to_end_check(form, draws, seed_of(p), integration_config(p));
  const bool ok = r.divergence.sup_distance <= tol;
  std::string body;
  if (format_of(p, "json") == "csv") {
    body = io::frequency_csv(r.divergence);
  } else {
    json out = io::divergence(r.divergence);
    out["draws"] = draws;
    out["tolerance"] = tol;
    out["passed"] = ok;
    out["integration"] = io::integration_result(r.integration);
    body = io::dump(out);
  }
  return {{{"out", body}}, ok, "sup distance " + io::format_real(r.divergence.sup_distance) + " (tolerance " + io::format_real(tol) + ")"};
}

}  // namespace detail

inline const std::map<std::string, CommandInfo>& commands() {
  static const std::map<std::string, CommandInfo> table{
      {"gen-painting", {{"spec"}, {"out"}, {{"out", "painting.json"}}, true, {"json"}, detail::gen_painting}},
      {"play-puzzle", {{"painting"}, {"report"}, {{"report", "puzzle_report.json"}}, true, {"json"}, detail::play_puzzle}},
      {"play-prob-game", {{"painting"}, {"out"}, {{"out", "freq.csv"}}, true, {"csv", "json"}, detail::play_prob_game}},
      {"validate-space", {{"space"}, {"out"}, {{"out", "space_report.json"}}, false, {"json"}, detail::validate_space}},
      {"lln", {{"painting"}, {"out"}, {{"out", "lln.json"}}, true, {"json"}, detail::lln}},
      {"integrate", {{"form"}, {"out"}, {{"out", "integration.json"}}, true, {"json"}, detail::integrate}},
      {"end-to-end", {{"form"}, {"out"}, {{"out", "end_to_end.json"}}, true, {"json", "csv"}, detail::end_to_end}},
  };
  return table;
}

struct Invocation {
  std::string command;
  json params = json::object();
  unsigned jobs = 1;
};

/// Fills defaults, makes path parameters absolute and checks the seed and
/// format, so the manifest records exactly what ran.
inline json resolve(const std::string& command, json params) {
  const auto it = commands().find(command);
  if (it == commands().end()) fail(ErrorCode::ConfigError, "unknown command '" + command + "'");
  const auto& info = it->second;
  if (!params.is_object()) fail(ErrorCode::ConfigError, "parameters must form a JSON object");
  if (params.contains("command") && params.at("command") != command)
    fail(ErrorCode::ConfigError, "config is for command '" + params.at("command").dump() + "'");
  params.erase("command");
  if (params.contains("schema_version") && params.at("schema_version") != kSchemaVersion)
    fail(ErrorCode::ConfigError, "unsupported schema_version " + params.at("schema_version").dump());
  params.erase("schema_version");
  for (const auto& [key, value] : info.default_outputs)
    if (!params.contains(key) || params.at(key).is_null()) params[key] = value;
  for (const auto& key : info.inputs)
    if (params.contains(key) && !params.at(key).is_null())
      params[key] = fs::absolute(param<std::string>(params, key)).lexically_normal().string();
  for (const auto& key : info.outputs) params[key] = fs::absolute(param<std::string>(params, key)).lexically_normal().string();
  if (info.seeded) seed_of(params);
  if (params.contains("format")) {
    const auto f = param<std::string>(params, "format");
    if (std::find(info.formats.begin(), info.formats.end(), f) == info.formats.end())
      fail(ErrorCode::ConfigError, "format '" + f + "' is not available for " + command);
  }
  return params;
}

inline int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::ConfigError:
    case ErrorCode::ParseError:
    case ErrorCode::MissingInput: return 2;
    default: return 1;
  }
}

inline std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string manifest_path_for(const std::string& primary_output) { return primary_output + ".manifest.json"; }

/// Executes a resolved command and writes its outputs; returns the manifest.
inline json execute(const std::string& command, const json& params, unsigned jobs, Produced& produced) {
  const auto& info = commands().at(command);
  const auto started = std::chrono::steady_clock::now();
  const std::string started_utc = utc_now();
  produced = info.run(params, jobs);

  json outputs = json::array();
  for (const auto& key : info.outputs) {
    const auto path = param<std::string>(params, key);
    const auto& bytes = produced.files.at(key);
    write_bytes(path, bytes);
    outputs.push_back(json{{"role", key}, {"path", path}, {"sha256", sha256_hex(bytes)}});
  }
  json inputs = json::array();
  for (const auto& key : info.inputs)
    if (params.contains(key) && !params.at(key).is_null()) {
      const auto path = param<std::string>(params, key);
      inputs.push_back(json{{"role", key}, {"path", path}, {"sha256", sha256_hex(read_bytes(path))}});
    }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  json seeds = json::array();
  if (params.contains("seed")) seeds.push_back(params.at("seed"));
  return json{{"schema_version", kSchemaVersion},
              {"command", command},
              {"params", params},
              {"config_hash", sha256_hex(params.dump())},
              {"seeds", seeds},
              {"artifact_version", kArtifactVersion},
              {"inputs", inputs},
              {"outputs", outputs},
              {"passed", produced.passed},
              {"jobs", jobs},
              {"wall_clock", json{{"started_utc", started_utc}, {"seconds", seconds}}}};
}

/// Runs one command end to end. Writes outputs plus manifest on success or
/// check failure; on error writes nothing and prints an error record.
inline int run(const Invocation& inv, std::ostream& out, std::ostream& err) {
  try {
    const json params = resolve(inv.command, inv.params);
    Produced produced;
    const json manifest = execute(inv.command, params, std::max(1u, inv.jobs), produced);
    const auto& primary = manifest["outputs"][0]["path"].get<std::string>();
    write_bytes(manifest_path_for(primary), io::dump(manifest));
    out << inv.command << ": " << produced.summary << (produced.passed ? "" : " [CHECK FAILED]") << "\n";
    out << "wrote " << primary << " and " << manifest_path_for(primary) << "\n";
    return produced.passed ? 0 : 1;
  } catch (const Error& e) {
    err << io::error_record(e).dump() << "\n";
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    err << io::error_record(Error(ErrorCode::MissingInput, e.what())).dump() << "\n";
    return 2;
  }
}

/// Replays a manifest into a fresh temporary directory and compares every
/// output digest. Exit 0 when all match, 1 on any mismatch.
inline int reproduce(const std::string& manifest_path, std::ostream& out, std::ostream& err,
                     const std::string& report_path = "") {
  try {
    const json manifest = io::read_file(manifest_path);
    const auto command = io::get<std::string>(manifest, "command");
    json params = io::get<json>(manifest, "params");
    const auto it = commands().find(command);
    if (it == commands().end()) fail(ErrorCode::ConfigError, "manifest names unknown command '" + command + "'");
    for (const auto& in : io::get<json>(manifest, "inputs")) {
      const auto path = io::get<std::string>(in, "path");
      if (!fs::exists(path)) fail(ErrorCode::MissingInput, "input '" + path + "' recorded in the manifest is missing");
    }

    const std::string recorded_hash = sha256_hex(params.dump());
    std::string pattern = (fs::temp_directory_path() / "fpl-reproduce-XXXXXX").string();
    if (!mkdtemp(pattern.data())) fail(ErrorCode::MissingInput, "cannot create a temporary directory");
    const fs::path tmp(pattern);
    for (const auto& key : it->second.outputs)
      params[key] = (tmp / fs::path(param<std::string>(params, key)).filename()).string();

    Produced produced;
    const json rerun = execute(command, params, io::get_or<unsigned>(manifest, "jobs", 1u), produced);
    std::map<std::string, std::string> fresh;
    for (const auto& o : rerun["outputs"]) fresh[o["role"]] = o["sha256"];

    bool all = true;
    json rows = json::array();
    auto record = [&](const std::string& role, const json& expected, const json& actual) {
      const bool match = expected == actual;
      all = all && match;
      rows.push_back(json{{"role", role}, {"expected", expected}, {"actual", actual}, {"match", match}});
      if (!match) out << "MISMATCH " << role << "\n";
    };
    record("config_hash", io::get<std::string>(manifest, "config_hash"), recorded_hash);
    record("seeds", io::get<json>(manifest, "seeds"), rerun["seeds"]);
    for (const auto& o : io::get<json>(manifest, "outputs")) {
      const auto role = io::get<std::string>(o, "role");
      const auto expected = io::get<std::string>(o, "sha256");
      const auto actual = fresh.count(role) ? fresh[role] : std::string();
      const bool match = expected == actual;
      all = all && match;
      rows.push_back(json{{"role", role}, {"path", o["path"]}, {"expected", expected}, {"actual", actual}, {"match", match}});
      out << (match ? "MATCH    " : "MISMATCH ") << role << " " << o["path"].get<std::string>() << "\n";
    }
    std::error_code ec;
    fs::remove_all(tmp, ec);
    const json report{{"manifest", fs::absolute(manifest_path).string()}, {"outputs", rows}, {"passed", all}};
    if (!report_path.empty()) write_bytes(report_path, io::dump(report));
    out << "reproduce: " << (all ? "all digests match" : "digest mismatch") << "\n";
    return all ? 0 : 1;
  } catch (const Error& e) {
    err << io::error_record(e).dump() << "\n";
    return exit_code_for(e.code());
  }
}

}  // namespace fpl::runner
