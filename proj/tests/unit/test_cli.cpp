#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(TREECRF_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("treecrf_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

nlohmann::json load(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

}  // namespace

TEST(Cli, HelpAndUsage) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run("segment --bogus"), 2);
  EXPECT_EQ(run(""), 2);
}

TEST(Cli, SynthSegmentEvaluate) {
  const auto dir = scratch("flow");
  const auto d = dir.string();
  ASSERT_EQ(run("synth --out " + d + "/scene --seed 3 --height 40 --width 40"), 0);
  ASSERT_EQ(run("segment --likelihoods " + d + "/scene/likelihoods.ftn --boundaries " + d +
                "/scene/boundaries.ftn --elevation " + d + "/scene/elevation.ftn --image " + d +
                "/scene/image.ftn --out " + d + "/seg --dump-tree --dump-energy"),
            0);
  for (const char* f : {"labels.ftn", "leaves.ftn", "leaves.json", "summary.json", "tree.json", "energy.json"}) {
    EXPECT_TRUE(fs::exists(dir / "seg" / f)) << f;
  }
  ASSERT_EQ(run("eval-seg --gt " + d + "/scene/gt.ftn --pred " + d + "/seg/labels.ftn --out " + d + "/m.json"), 0);
  const auto m = load(dir / "m.json");
  EXPECT_GE(m["oa"].get<double>(), 0.0);
  EXPECT_LE(m["oa"].get<double>(), 1.0);
  ASSERT_EQ(run("eval-boundary --gt " + d + "/scene/gt.ftn --pred " + d + "/scene/boundaries.ftn --out " + d +
                "/b.json"),
            0);
  EXPECT_TRUE(fs::exists(dir / "b.json"));
  ASSERT_EQ(run("cooc --gt " + d + "/scene/gt.ftn --boundaries " + d + "/scene/boundaries.ftn --classes 4 --out " +
                d + "/mu"),
            0);
  EXPECT_EQ(run("segment --mu " + d + "/mu/mu.ftn --likelihoods " + d + "/scene/likelihoods.ftn --boundaries " + d +
                "/scene/boundaries.ftn --elevation " + d + "/scene/elevation.ftn --out " + d + "/seg2"),
            0);
  EXPECT_EQ(run("tree-export --boundaries " + d + "/scene/boundaries.ftn --likelihoods " + d +
                "/scene/likelihoods.ftn --out " + d + "/tree"),
            0);
}

TEST(Cli, ValidationErrorsExitTwo) {
  const auto dir = scratch("validation");
  const auto d = dir.string();
  ASSERT_EQ(run("synth --out " + d + "/scene --seed 1 --height 24 --width 24"), 0);
  {
    std::ofstream cfg(dir / "bad.json");
    cfg << R"({"gamma": -1})";
  }
  EXPECT_EQ(run("segment --config " + d + "/bad.json --likelihoods " + d + "/scene/likelihoods.ftn --boundaries " +
                d + "/scene/boundaries.ftn --out " + d + "/out"),
            2);
  EXPECT_EQ(run("segment --mode nonsense --likelihoods " + d + "/scene/likelihoods.ftn --out " + d + "/out"), 2);
  // Elevation weight on without an elevation raster.
  EXPECT_EQ(run("segment --likelihoods " + d + "/scene/likelihoods.ftn --boundaries " + d +
                "/scene/boundaries.ftn --out " + d + "/out"),
            2);
  // Labels whose values exceed the class count.
  EXPECT_EQ(run("eval-seg --classes 2 --gt " + d + "/scene/gt.ftn --pred " + d + "/scene/gt.ftn"), 2);
}

TEST(Cli, IoErrorsExitThree) {
  const auto dir = scratch("io");
  EXPECT_EQ(run("eval-seg --gt " + (dir / "missing.ftn").string() + " --pred " + (dir / "missing2.ftn").string()), 3);
  EXPECT_EQ(run("segment --config " + (dir / "nope.json").string() + " --likelihoods x.ftn --out " + dir.string()),
            3);
  // A malformed tensor file is reported as an I/O failure.
  {
    std::ofstream junk(dir / "junk.ftn", std::ios::binary);
    junk << "FTNSR1";
  }
  EXPECT_EQ(run("eval-seg --gt " + (dir / "junk.ftn").string() + " --pred " + (dir / "junk.ftn").string()), 3);
}
