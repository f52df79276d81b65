// fpl: command-line front end for the experiments.
//
// Parameters come from an optional --config JSON object, overridden by flags.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "fpl/runner.hpp"

namespace {

using fpl::ErrorCode;
using fpl::runner::json;

enum class Kind { Text, Unsigned, Integer, Real };

struct Flag {
  std::string name;  // without leading dashes
  Kind kind;
  std::string help;
};

std::string key_of(std::string name) {
  for (auto& c : name)
    if (c == '-') c = '_';
  return name;
}

json convert(const std::string& flag, const std::string& text, Kind kind) {
  try {
    std::size_t used = 0;
    switch (kind) {
      case Kind::Text: return text;
      case Kind::Unsigned: {
        if (text.empty() || text[0] == '-') break;
        const auto v = std::stoull(text, &used);
        if (used == text.size()) return v;
        break;
      }
      case Kind::Integer: {
        const auto v = std::stoll(text, &used);
        if (used == text.size()) return v;
        break;
      }
      case Kind::Real: {
        const auto v = std::stod(text, &used);
        if (used == text.size()) return v;
        break;
      }
    }
  } catch (const std::exception&) {
  }
  fpl::fail(ErrorCode::ConfigError, "--" + flag + ": cannot read '" + text + "'");
}

const std::vector<Flag> kCommon{
    {"seed", Kind::Unsigned, "root seed (required for every random command)"},
    {"out", Kind::Text, "primary output file"},
    {"format", Kind::Text, "csv or json, where the command offers both"},
};

const std::map<std::string, std::pair<std::string, std::vector<Flag>>> kCommands{
    {"gen-painting", {"generate a painting from a spec file", {{"spec", Kind::Text, "painting spec JSON"}}}},
    {"play-puzzle",
     {"assemble a painting's fragments",
      {{"mode", Kind::Text, "location or border"},
       {"replicas", Kind::Integer, "number of replicas R"},
       {"painting", Kind::Text, "painting JSON"},
       {"report", Kind::Text, "report file (same as --out)"},
       {"trial-budget", Kind::Unsigned, "border-mode trial budget"}}}},
    {"play-prob-game",
     {"draw tiles with replacement and tabulate label frequencies",
      {{"painting", Kind::Text, "painting JSON"},
       {"draws", Kind::Unsigned, "number of draws N"},
       {"tolerance", Kind::Real, "fail when the sup distance exceeds this"}}}},
    {"validate-space", {"check a finite probability space", {{"space", Kind::Text, "space JSON"}}}},
    {"lln",
     {"meta-probability and N0 search",
      {{"painting", Kind::Text, "painting JSON (instead of an urn in the config)"},
       {"label", Kind::Text, "target label"},
       {"p", Kind::Text, "target probability, e.g. 3/5"},
       {"epsilon", Kind::Real, "tolerance epsilon"},
       {"delta", Kind::Real, "N0 search: reach 1 - delta"},
       {"repetitions", Kind::Unsigned, "repetitions M"},
       {"trials", Kind::Unsigned, "trials N for a single meta-probability"},
       {"start", Kind::Unsigned, "N0 search start"},
       {"cap", Kind::Unsigned, "N0 search cap"}}}},
    {"integrate",
     {"integrate a complexified stream into a law",
      {{"form", Kind::Text, "hidden form JSON (explicit or generating spec)"},
       {"confirm", Kind::Unsigned, "confirmation replicas K"},
       {"max-events", Kind::Unsigned, "event budget M"},
       {"ambiguity-budget", Kind::Unsigned, "draws allowed to be ambiguous"}}}},
    {"end-to-end",
     {"integrate, then compare label frequencies with the law",
      {{"form", Kind::Text, "hidden form JSON"},
       {"draws", Kind::Unsigned, "number of label draws N"},
       {"confirm", Kind::Unsigned, "confirmation replicas K"},
       {"max-events", Kind::Unsigned, "event budget M"},
       {"ambiguity-budget", Kind::Unsigned, "draws allowed to be ambiguous"},
       {"tolerance", Kind::Real, "sup-distance bound, default 0.01"}}}},
};

unsigned jobs_from(const std::string& flag_value) {
  std::string text = flag_value;
  std::string source = "--jobs";
  if (text.empty()) {
    const char* env = std::getenv("FPL_JOBS");
    if (!env || !*env) return 1;
    text = env;
    source = "FPL_JOBS";
  }
  const auto v = convert(source, text, Kind::Unsigned).get<std::uint64_t>();
  if (v < 1 || v > 1024) fpl::fail(ErrorCode::ConfigError, source + " must lie in 1..1024");
  return static_cast<unsigned>(v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fpl: paintings, puzzles and probability experiments"};
  app.require_subcommand(1);

  struct Bound {
    CLI::App* sub;
    std::map<std::string, std::string> values;
    std::map<std::string, Kind> kinds;
    std::string config;
    std::string jobs;
  };
  std::map<std::string, Bound> bound;

  for (const auto& [name, entry] : kCommands) {
    auto& b = bound[name];
    b.sub = app.add_subcommand(name, entry.first);
    b.sub->add_option("--config", b.config, "JSON object of parameters; flags override it");
    b.sub->add_option("--jobs", b.jobs, "worker threads (fallback: FPL_JOBS)");
    for (const auto* list : {&kCommon, &entry.second})
      for (const auto& f : *list) {
        b.sub->add_option("--" + f.name, b.values[f.name], f.help);
        b.kinds[f.name] = f.kind;
      }
  }

  std::string manifest, reproduce_out;
  auto* rep = app.add_subcommand("reproduce", "rerun a manifest and compare output digests");
  rep->add_option("manifest", manifest, "RunManifest JSON")->required();
  rep->add_option("--out", reproduce_out, "write the comparison report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (rep->parsed()) return fpl::runner::reproduce(manifest, std::cout, std::cerr, reproduce_out);

  for (auto& [name, b] : bound) {
    if (!b.sub->parsed()) continue;
    fpl::runner::Invocation inv;
    inv.command = name;
    try {
      if (!b.config.empty()) {
        inv.params = fpl::io::read_file(b.config);
        if (!inv.params.is_object()) fpl::fail(ErrorCode::ConfigError, "config must be a JSON object");
        // Relative input paths in a config file are relative to that file.
        const auto base = std::filesystem::absolute(b.config).parent_path();
        for (const auto& key : fpl::runner::commands().at(name).inputs)
          if (inv.params.contains(key) && inv.params[key].is_string() &&
              std::filesystem::path(inv.params[key].get<std::string>()).is_relative())
            inv.params[key] = (base / inv.params[key].get<std::string>()).string();
      }
      for (const auto& [flag, text] : b.values) {
        if (b.sub->count("--" + flag) == 0) continue;
        std::string key = key_of(flag);
        if (key == "out") key = fpl::runner::commands().at(name).outputs.front();
        inv.params[key] = convert(flag, text, b.kinds.at(flag));
      }
      inv.jobs = jobs_from(b.jobs);
    } catch (const fpl::Error& e) {
      std::cerr << fpl::io::error_record(e).dump() << "\n";
      return fpl::runner::exit_code_for(e.code());
    }
    return fpl::runner::run(inv, std::cout, std::cerr);
  }
  return 2;
}
