#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "nnlr/cli.hpp"
#include "nnlr/serialization.hpp"

using namespace nnlr;
namespace fs = std::filesystem;

namespace {

struct Out {
  int code;
  std::string out, err;
};

Out cli(std::vector<std::string> args) {
  args.insert(args.begin(), "nnlr");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("nnlr_cli_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(cli({"--help"}).code == kExitOk);
  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"frobnicate"}).code == kExitUsage);
  CHECK(cli({"construct", "thm1-sym", "--n", "2", "--bogus"}).code == kExitUsage);
  CHECK(cli({"construct", "nope"}).code == kExitUsage);
}

TEST_CASE("construct reports the figure instance") {
  TempDir dir;
  const auto res = cli({"construct", "thm1-sym", "--n", "2", "--alpha", "0.5", "-o", dir.file("fig.json")});
  REQUIRE(res.code == kExitOk);
  CHECK(res.out.find("0.30618621784789724") != std::string::npos);
  const auto named = load_instance(dir.file("fig.json"));
  CHECK(named.candidate("U0").point(1, 0) == 0.5);

  const auto to_stdout = cli({"construct", "thm1-sym", "--n", "2", "--alpha", "0.5"});
  CHECK(to_stdout.code == kExitOk);
  CHECK(Json::parse(to_stdout.out)["variant"] == "symmetric");
  CHECK(to_stdout.err.find("admissible alpha interval") != std::string::npos);
}

TEST_CASE("construct rejects bad parameters with usage exit") {
  const auto high = cli({"construct", "thm1-sym", "--n", "2", "--alpha", "0.95"});
  CHECK(high.code == kExitUsage);
  CHECK(high.err.find("admissible interval") != std::string::npos);
  CHECK(cli({"construct", "spu2", "--m", "2", "--r", "2"}).code == kExitUsage);
  const auto warn = cli({"construct", "spu2", "--m", "4", "--k", "3", "--r", "2"});
  CHECK(warn.code == kExitOk);
  CHECK(warn.err.find("warning") != std::string::npos);
}

TEST_CASE("certify agrees with the construction") {
  TempDir dir;
  REQUIRE(cli({"construct", "thm1-sym", "--n", "3", "-o", dir.file("i.json")}).code == kExitOk);
  const auto u0 = cli({"certify", dir.file("i.json"), "--candidate", "U0", "--samples", "500", "-o",
                       dir.file("c.json")});
  CHECK(u0.code == kExitOk);
  const Json cert = Json::parse(read_file(dir.file("c.json")));
  CHECK(cert["classification"] == "SpuriousCandidate");
  CHECK(cli({"certify", dir.file("i.json"), "--candidate", "Ustar", "--samples", "200"}).code == kExitOk);
  CHECK(cli({"certify", dir.file("i.json"), "--candidate", "U9"}).code == kExitUsage);

  REQUIRE(cli({"construct", "spu2", "--m", "3", "--k", "1", "--r", "2", "-o", dir.file("s.json")}).code == kExitOk);
  CHECK(cli({"certify", dir.file("s.json"), "--candidate", "U0", "--samples", "200", "--ball-samples", "2000"})
            .code == kExitOk);
}

TEST_CASE("certify exits with mismatch when the expectation is wrong") {
  TempDir dir;
  REQUIRE(cli({"construct", "thm1-sym", "--n", "2", "-o", dir.file("i.json")}).code == kExitOk);
  Json j = Json::parse(read_file(dir.file("i.json")));
  for (auto& c : j["candidates"])
    if (c["name"] == "Ustar") c["expected"] = "Saddle";
  write_file(dir.file("i.json"), dump(j));
  CHECK(cli({"certify", dir.file("i.json"), "--candidate", "Ustar", "--samples", "100"}).code == kExitMismatch);
}

TEST_CASE("io and schema problems exit with code 3") {
  TempDir dir;
  CHECK(cli({"certify", dir.file("missing.json"), "--candidate", "U0"}).code == kExitIo);
  write_file(dir.file("bad.json"), "{\"variant\": 3}");
  CHECK(cli({"verify", dir.file("bad.json")}).code == kExitIo);
  write_file(dir.file("garbage.json"), "[[[");
  CHECK(cli({"contour", dir.file("garbage.json")}).code == kExitIo);
}

TEST_CASE("verify passes on kernel instances") {
  TempDir dir;
  REQUIRE(cli({"construct", "thm1-asym", "--n", "4", "--r", "2", "--lambda", "0.25", "-o", dir.file("a.json")})
              .code == kExitOk);
  const auto res = cli({"verify", dir.file("a.json"), "--samples", "20"});
  CHECK(res.code == kExitOk);
}

TEST_CASE("contour grid endpoints") {
  TempDir dir;
  REQUIRE(cli({"construct", "thm1-sym", "--n", "2", "--alpha", "0.5", "-o", dir.file("fig.json")}).code == kExitOk);
  const auto res = cli({"contour", dir.file("fig.json"), "--u1-max", "1", "--u2-max", "1", "--steps", "3"});
  REQUIRE(res.code == kExitOk);
  std::istringstream lines(res.out);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "u1,u2,f");
  int rows = 0;
  bool saw_u0 = false, saw_ustar = false;
  while (std::getline(lines, line)) {
    ++rows;
    double u1, u2, f;
    char c1, c2;
    std::istringstream(line) >> u1 >> c1 >> u2 >> c2 >> f;
    if (u1 == 0.0 && u2 == 0.5) saw_u0 = std::abs(f - 0.46875) <= 1e-12;
    if (u1 == 1.0 && u2 == 0.0) saw_ustar = std::abs(f) <= 1e-12;
  }
  CHECK(rows == 9);
  CHECK(saw_u0);
  CHECK(saw_ustar);

  REQUIRE(cli({"construct", "thm1-sym", "--n", "3", "-o", dir.file("big.json")}).code == kExitOk);
  CHECK(cli({"contour", dir.file("big.json")}).code == kExitUsage);
}

TEST_CASE("run writes a result and trajectory") {
  TempDir dir;
  REQUIRE(cli({"construct", "thm1-sym", "--n", "2", "--alpha", "0.5", "-o", dir.file("fig.json")}).code == kExitOk);
  const auto res = cli({"run", dir.file("fig.json"), "--init", "near:U0", "--seed", "4", "--no-timestamp", "-o",
                        dir.file("run.json"), "--trajectory", dir.file("traj.csv")});
  REQUIRE(res.code == kExitOk);
  const Json j = Json::parse(read_file(dir.file("run.json")));
  CHECK(j.dump().find("SpuriousCandidate") != std::string::npos);
  CHECK(read_file(dir.file("traj.csv")).rfind("iter,objective,residual\n", 0) == 0);
  CHECK(cli({"run", dir.file("fig.json"), "--init", "near:nothing"}).code == kExitUsage);
}

TEST_CASE("basins and sweep are byte-identical across repeats") {
  TempDir dir;
  REQUIRE(cli({"construct", "thm1-sym", "--n", "2", "--alpha", "0.5", "-o", dir.file("fig.json")}).code == kExitOk);
  for (const char* tag : {"a", "b"}) {
    const std::string t(tag);
    REQUIRE(cli({"basins", dir.file("fig.json"), "--init", "near:U0", "--trials", "6", "--seed", "9",
                 "--no-timestamp", "-o", dir.file("b" + t + ".jsonl"), "--summary", dir.file("bs" + t + ".json")})
                .code == kExitOk);
    REQUIRE(cli({"sweep", "--fractions", "0.3,0.6", "--samples", "300", "--probe-trials", "2", "--seed", "9",
                 "--no-timestamp", "-o", dir.file("s" + t + ".jsonl"), "--summary", dir.file("ss" + t + ".json")})
                .code == kExitOk);
  }
  for (const char* stem : {"b", "bs", "s", "ss"}) {
    const std::string ext = (std::string(stem).size() == 1) ? ".jsonl" : ".json";
    CHECK(read_file(dir.file(std::string(stem) + "a" + ext)) == read_file(dir.file(std::string(stem) + "b" + ext)));
  }
  const Json summary = Json::parse(read_file(dir.file("bsa.json")));
  CHECK(summary.dump().find("timestamp") == std::string::npos);
  CHECK(cli({"sweep", "--fractions", "1.5"}).code == kExitUsage);
}
