#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fpl/runner.hpp"

namespace fs = std::filesystem;
using fpl::io::json;
using fpl::runner::sha256_hex;

namespace {

const std::string kCli = FPL_CLI_PATH;
const std::string kConfigs = FPL_CONFIG_DIR;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    std::string pattern = (fs::temp_directory_path() / "fpl-cli-test-XXXXXX").string();
    ASSERT_NE(mkdtemp(pattern.data()), nullptr);
    dir = pattern;
  }
  void TearDown() override { fs::remove_all(dir); }

  // Runs the CLI with cwd = dir; returns the exit status.
  int fpl(const std::string& args, const std::string& env = "") {
    const std::string cmd = "cd '" + dir.string() + "' && " + env + " '" + kCli + "' " + args + " >'" +
                            (dir / "stdout.txt").string() + "' 2>'" + (dir / "stderr.txt").string() + "'";
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  }

  std::string file(const std::string& name) const { return fpl::runner::read_bytes(dir / name); }
  json json_file(const std::string& name) const { return fpl::io::parse(file(name)); }
  std::string digest(const std::string& name) const { return sha256_hex(file(name)); }
  void write(const std::string& name, const std::string& text) const { std::ofstream(dir / name) << text; }
  bool exists(const std::string& name) const { return fs::exists(dir / name); }
  std::string stderr_code() const { return json_file("stderr.txt")["error"]["code"]; }

  std::string painting() {
    EXPECT_EQ(fpl("gen-painting --spec " + kConfigs + "/reference_painting_spec.json --seed 7 --out p.json"), 0);
    return "p.json";
  }

  fs::path dir;
};

}  // namespace

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Resolve, FillsDefaultsAndAbsolutisesPaths) {
  const auto p = fpl::runner::resolve("integrate", json{{"form", "f.json"}, {"seed", 1}});
  EXPECT_TRUE(fs::path(p["form"].get<std::string>()).is_absolute());
  EXPECT_EQ(fs::path(p["out"].get<std::string>()).filename(), "integration.json");
  EXPECT_NO_THROW(fpl::runner::resolve("validate-space", json{{"space", "s.json"}}));
}

TEST(Resolve, RejectsMissingSeedBadFormatAndWrongCommand) {
  auto code = [](auto&& fn) {
    try {
      fn();
    } catch (const fpl::Error& e) {
      return e.code();
    }
    return fpl::ErrorCode::InvalidArgument;
  };
  using fpl::ErrorCode;
  EXPECT_EQ(code([] { fpl::runner::resolve("integrate", json{{"form", "f"}}); }), ErrorCode::ConfigError);
  EXPECT_EQ(code([] { fpl::runner::resolve("integrate", json{{"form", "f"}, {"seed", -3}}); }), ErrorCode::ConfigError);
  EXPECT_EQ(code([] { fpl::runner::resolve("integrate", json{{"form", "f"}, {"seed", 1}, {"format", "csv"}}); }),
            ErrorCode::ConfigError);
  EXPECT_EQ(code([] { fpl::runner::resolve("lln", json{{"command", "integrate"}, {"seed", 1}}); }),
            ErrorCode::ConfigError);
  EXPECT_EQ(code([] { fpl::runner::resolve("paint", json::object()); }), ErrorCode::ConfigError);
  EXPECT_EQ(code([] { fpl::runner::resolve("validate-space", json{{"space", "s"}, {"schema_version", 9}}); }),
            ErrorCode::ConfigError);
  EXPECT_NO_THROW(fpl::runner::resolve("validate-space", json{{"space", "s"}, {"schema_version", 1}}));
}

TEST(Run, ErrorRecordGoesToTheErrorStream) {
  std::ostringstream out, err;
  const int rc = fpl::runner::run({"integrate", json{{"form", "/nonexistent/form.json"}, {"seed", 1}}, 1}, out, err);
  EXPECT_EQ(rc, 2);
  EXPECT_EQ(fpl::io::parse(err.str())["error"]["code"], "MissingInput");
  EXPECT_TRUE(out.str().empty());
}

TEST_F(Cli, GenPaintingWritesPaintingAndManifest) {
  painting();
  const auto p = fpl::io::painting_from(json_file("p.json"));
  EXPECT_EQ(p.width(), 10);
  const auto m = json_file("p.json.manifest.json");
  for (const char* key : {"schema_version", "command", "params", "config_hash", "seeds", "artifact_version", "inputs",
                          "outputs", "wall_clock"})
    EXPECT_TRUE(m.contains(key)) << key;
  EXPECT_EQ(m["command"], "gen-painting");
  EXPECT_EQ(m["seeds"], json::array({7}));
  EXPECT_EQ(m["outputs"][0]["sha256"], digest("p.json"));
  EXPECT_EQ(m["config_hash"], sha256_hex(m["params"].dump()));
  EXPECT_EQ(m["inputs"][0]["sha256"], sha256_hex(fpl::runner::read_bytes(kConfigs + "/reference_painting_spec.json")));
}

TEST_F(Cli, RerunsAreByteIdentical) {
  painting();
  const std::string form = kConfigs + "/reference_form.json";
  const std::vector<std::pair<std::string, std::string>> runs{
      {"play-puzzle --mode border --replicas 3 --painting p.json --seed 4 --report", "a.json"},
      {"play-prob-game --painting p.json --draws 5000 --seed 4 --out", "a.csv"},
      {"integrate --form " + form + " --seed 4 --out", "i.json"},
      {"end-to-end --form " + form + " --draws 20000 --seed 4 --out", "e.json"},
      {"lln --config " + kConfigs + "/lln_fair_coin.json --out", "l.json"},
  };
  for (const auto& [args, out] : runs) {
    ASSERT_EQ(fpl(args + " " + out), 0) << args;
    const auto first = digest(out);
    ASSERT_EQ(fpl(args + " second_" + out), 0) << args;
    EXPECT_EQ(digest("second_" + out), first) << args;
  }
}

TEST_F(Cli, SeedChangesOutput) {
  painting();
  ASSERT_EQ(fpl("play-prob-game --painting p.json --draws 5000 --seed 1 --out a.csv"), 0);
  ASSERT_EQ(fpl("play-prob-game --painting p.json --draws 5000 --seed 2 --out b.csv"), 0);
  EXPECT_NE(file("a.csv"), file("b.csv"));
  EXPECT_EQ(file("a.csv").substr(0, 37), "label,count,rel_freq,law_prob,abs_dif");
}

TEST_F(Cli, MissingSeedIsAConfigErrorWithNoOutputs) {
  painting();
  EXPECT_EQ(fpl("play-prob-game --painting p.json --draws 10 --out f.csv"), 2);
  EXPECT_EQ(stderr_code(), "ConfigError");
  EXPECT_FALSE(exists("f.csv"));
  EXPECT_FALSE(exists("f.csv.manifest.json"));
}

TEST_F(Cli, InvalidJsonConfigProducesNoOutputs) {
  write("bad.json", "{\"form\": ");
  EXPECT_EQ(fpl("integrate --config bad.json --seed 1 --out r.json"), 2);
  EXPECT_EQ(stderr_code(), "ParseError");
  EXPECT_FALSE(exists("r.json"));
  write("array.json", "[1, 2]");
  EXPECT_EQ(fpl("integrate --config array.json --seed 1 --out r.json"), 2);
  EXPECT_FALSE(exists("r.json"));
}

TEST_F(Cli, BadFlagsExitTwo) {
  EXPECT_EQ(fpl("integrate --seed minus-one"), 2);
  EXPECT_EQ(fpl("integrate --seed -1 --form x.json"), 2);
  EXPECT_EQ(fpl("no-such-command"), 2);
  EXPECT_EQ(fpl("play-puzzle --mode sideways --painting p.json --seed 1"), 2);
  EXPECT_EQ(fpl("integrate --form missing.json --seed 1"), 2);
  EXPECT_EQ(stderr_code(), "MissingInput");
  EXPECT_EQ(fpl("--help"), 0);
}

TEST_F(Cli, FailedCheckExitsOneButKeepsTheRecord) {
  EXPECT_EQ(fpl("validate-space --space " + kConfigs + "/space_broken.json --out v.json"), 1);
  EXPECT_EQ(json_file("v.json")["passed"], false);
  EXPECT_EQ(json_file("v.json.manifest.json")["passed"], false);
  EXPECT_EQ(fpl("validate-space --space " + kConfigs + "/space_three_labels.json --out w.json"), 0);
  EXPECT_EQ(json_file("w.json")["passed"], true);
}

TEST_F(Cli, DownstreamErrorsExitOneWithAStructuredRecord) {
  EXPECT_EQ(fpl("lln --config " + kConfigs + "/lln_fair_coin.json --cap 32 --out l.json"), 1);
  EXPECT_EQ(stderr_code(), "NotReached");
  EXPECT_FALSE(exists("l.json"));
  write("tight.json", R"({"width":4,"height":4,"q":2,"label_counts":{"1":15,"2":1},"s_prime":10,"seed":1})");
  EXPECT_EQ(fpl("integrate --form tight.json --seed 1"), 1);
  EXPECT_EQ(stderr_code(), "InfeasibleSpec");
  write("q.json", R"({"width":2,"height":2,"q":5,"label_counts":{"1":4}})");
  EXPECT_EQ(fpl("gen-painting --spec q.json --seed 1"), 1);
}

TEST_F(Cli, FlagsOverrideTheConfig) {
  painting();
  write("game.json", R"({"painting": "p.json", "draws": 10, "seed": 1, "out": "from_config.csv"})");
  ASSERT_EQ(fpl("play-prob-game --config game.json --draws 30"), 0);
  const auto m = json_file("from_config.csv.manifest.json");
  EXPECT_EQ(m["params"]["draws"], 30);
  EXPECT_EQ(m["params"]["seed"], 1);
}

TEST_F(Cli, JobsFlagAndEnvironmentDoNotChangeResults) {
  const std::string cfg = kConfigs + "/lln_meta.json --seed 3 --repetitions 40 --trials 2000";
  ASSERT_EQ(fpl("lln --config " + cfg + " --out one.json"), 0);
  ASSERT_EQ(fpl("lln --config " + cfg + " --jobs 3 --out three.json"), 0);
  ASSERT_EQ(fpl("lln --config " + cfg + " --out env.json", "FPL_JOBS=2"), 0);
  EXPECT_EQ(file("one.json"), file("three.json"));
  EXPECT_EQ(file("one.json"), file("env.json"));
  EXPECT_EQ(json_file("three.json.manifest.json")["jobs"], 3);
  EXPECT_EQ(json_file("env.json.manifest.json")["jobs"], 2);
  EXPECT_EQ(fpl("lln --config " + cfg + " --out bad.json", "FPL_JOBS=zero"), 2);
  EXPECT_EQ(fpl("lln --config " + cfg + " --jobs 0 --out bad.json"), 2);
}

TEST_F(Cli, EndToEndOnTheReferenceForm) {
  ASSERT_EQ(fpl("end-to-end --config " + kConfigs + "/end_to_end.json --seed 11 --out e.json"), 0);
  const auto r = json_file("e.json");
  EXPECT_LE(r["sup_distance"].get<double>(), 0.01);
  EXPECT_EQ(r["passed"], true);
  EXPECT_EQ(r["integration"]["law"]["1"]["p"], "3/5");
  EXPECT_EQ(fpl("end-to-end --config " + kConfigs + "/end_to_end.json --seed 11 --draws 50 --tolerance 0.0001"), 1);
}

TEST_F(Cli, PuzzleReportCarriesTheCounters) {
  painting();
  ASSERT_EQ(fpl("play-puzzle --mode location --painting p.json --seed 2 --out loc.json"), 0);
  const auto r = json_file("loc.json");
  EXPECT_EQ(r["placements"], 100);
  EXPECT_EQ(r["failed_trials"], 0);
  ASSERT_EQ(fpl("play-puzzle --mode border --replicas 2 --painting p.json --seed 2"), 0);
  EXPECT_EQ(json_file("puzzle_report.json")["completed_replicas"], 2);
}

TEST_F(Cli, ReproduceMatchesAnUntouchedManifest) {
  painting();
  ASSERT_EQ(fpl("play-prob-game --painting p.json --draws 3000 --seed 5 --format json --out g.json"), 0);
  EXPECT_EQ(fpl("reproduce g.json.manifest.json --out rep.json"), 0);
  EXPECT_EQ(json_file("rep.json")["passed"], true);
  EXPECT_EQ(fpl("reproduce p.json.manifest.json"), 0);
}

TEST_F(Cli, ReproduceReportsAnEditedSeed) {
  painting();
  ASSERT_EQ(fpl("play-prob-game --painting p.json --draws 3000 --seed 5 --out g.csv"), 0);
  auto m = json_file("g.csv.manifest.json");
  m["params"]["seed"] = 6;
  write("edited.json", m.dump());
  EXPECT_EQ(fpl("reproduce edited.json --out rep.json"), 1);
  const auto rep = json_file("rep.json");
  EXPECT_EQ(rep["passed"], false);
  bool output_mismatch = false;
  for (const auto& row : rep["outputs"])
    if (row["role"] == "out") output_mismatch = !row["match"].get<bool>();
  EXPECT_TRUE(output_mismatch);
}

TEST_F(Cli, ReproduceRaisesMissingInput) {
  painting();
  ASSERT_EQ(fpl("play-puzzle --mode location --painting p.json --seed 1 --out r.json"), 0);
  fs::remove(dir / "p.json");
  EXPECT_EQ(fpl("reproduce r.json.manifest.json"), 2);
  EXPECT_EQ(stderr_code(), "MissingInput");
  EXPECT_EQ(fpl("reproduce nowhere.json"), 2);
}
