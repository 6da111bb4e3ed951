#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <sys/wait.h>

#include "mn2v/mn2v.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = MN2V_FIXTURES;

fs::path scratch_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("mn2v_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct Run {
  int status = -1;
  std::string err;
};

Run run(const std::string& args, const fs::path& dir) {
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string(MN2V_CLI) + " " + args + " > " + (dir / "stdout.txt").string() + " 2> " + err.string();
  const int raw = std::system(cmd.c_str());
  Run r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(err);
  std::ostringstream s;
  s << in.rdbuf();
  r.err = s.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::map<std::string, std::string> metadata(const fs::path& p) {
  std::map<std::string, std::string> m;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    auto c = line.find(": ");
    if (c != std::string::npos) m[line.substr(0, c)] = line.substr(c + 2);
  }
  return m;
}

}  // namespace

TEST(Cli, EmbedTriangle) {
  auto dir = scratch_dir("triangle");
  auto r = run("--seed 1 embed " + (kFixtures / "triangle.tsv").string() + " -o " + (dir / "f.tsv").string() +
                   " -p 1 -q 0.5 -l 4 -s 2 -D 2 -k 1 --dump-walks " + (dir / "walks.txt").string(),
               dir);
  ASSERT_EQ(r.status, 0) << r.err;
  auto table = mn2v::io::load_embedding(dir / "f.tsv");
  EXPECT_EQ(table.ids.size(), 3u);
  EXPECT_EQ(table.features.cols(), 2u);
  auto meta = metadata(dir / "f.tsv.meta");
  EXPECT_EQ(meta["walks"], "6");
  EXPECT_EQ(meta["tokens"], "24");
  EXPECT_EQ(meta["seed"], "1");
  EXPECT_EQ(meta["p"], "1");
  EXPECT_EQ(meta["q"], "0.5");
  EXPECT_TRUE(meta.count("finished_utc"));
  std::istringstream walks(slurp(dir / "walks.txt"));
  std::string line;
  std::size_t n = 0;
  while (std::getline(walks, line)) ++n;
  EXPECT_EQ(n, 6u);
}

TEST(Cli, EmbedIsDeterministic) {
  auto dir = scratch_dir("determinism");
  const std::string net = (kFixtures / "explicit.tsv").string();
  for (const char* name : {"a.tsv", "b.tsv"})
    ASSERT_EQ(run("--seed 7 --deterministic embed " + net + " -o " + (dir / name).string() + " -D 4 -l 10 -s 3", dir).status, 0);
  EXPECT_EQ(slurp(dir / "a.tsv"), slurp(dir / "b.tsv"));
  ASSERT_EQ(run("--seed 8 --deterministic embed " + net + " -o " + (dir / "c.tsv").string() + " -D 4 -l 10 -s 3", dir).status, 0);
  EXPECT_NE(slurp(dir / "a.tsv"), slurp(dir / "c.tsv"));
}

TEST(Cli, LayerDirectoryAndRSweep) {
  auto dir = scratch_dir("rsweep");
  auto r = run("--seed 2 embed " + (kFixtures / "two_layer").string() + " -o " + (dir / "f.tsv").string() +
                   " -D 2 -l 5 -s 2 --r-sweep",
               dir);
  ASSERT_EQ(r.status, 0) << r.err;
  for (const char* tag : {"0.25", "0.5", "0.75"}) {
    EXPECT_TRUE(fs::exists(dir / ("f_r" + std::string(tag) + ".tsv")));
    EXPECT_EQ(metadata(dir / ("f_r" + std::string(tag) + ".tsv.meta"))["r"], tag);
  }
}

TEST(Cli, InputErrorsExitTwo) {
  auto dir = scratch_dir("errors");
  auto r = run("--seed 1 embed " + (kFixtures / "negative.tsv").string() + " -o " + (dir / "f.tsv").string(), dir);
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.err.find("negative weight"), std::string::npos);
  EXPECT_NE(r.err.find("record 2"), std::string::npos);
  EXPECT_EQ(run("--seed 1 embed " + (dir / "missing.tsv").string() + " -o " + (dir / "f.tsv").string(), dir).status, 2);
  EXPECT_EQ(run("embed " + (kFixtures / "triangle.tsv").string() + " -o " + (dir / "f.tsv").string(), dir).status, 2);
  EXPECT_EQ(run("--seed 1 embed " + (kFixtures / "triangle.tsv").string() + " -o " + (dir / "f.tsv").string() + " -p 0", dir).status, 2);
  EXPECT_EQ(run("--seed 1 bogus", dir).status, 2);
}

TEST(Cli, DivergenceExitsThree) {
  auto dir = scratch_dir("diverge");
  auto r = run("--seed 1 embed " + (kFixtures / "triangle.tsv").string() + " -o " + (dir / "f.tsv").string() +
                   " --lr 1e300",
               dir);
  EXPECT_EQ(r.status, 3) << r.err;
}

TEST(Cli, OversizedOracleExitsFour) {
  auto dir = scratch_dir("oracle_big");
  ASSERT_EQ(run("--seed 1 simulate --model er -n 250 -m 1 --p-edge 0.1 -o " + (dir / "net").string(), dir).status, 0);
  auto r = run("--seed 1 oracle-check " + (dir / "net").string() + " --lengths 100", dir);
  EXPECT_EQ(r.status, 4) << r.err;
}

TEST(Cli, OracleCheckReport) {
  auto dir = scratch_dir("oracle");
  auto r = run("--seed 3 oracle-check " + (kFixtures / "explicit.tsv").string() + " -q 0.5 -k 2 --lengths 1000,200000 -o " +
                   (dir / "o.tsv").string(),
               dir);
  ASSERT_EQ(r.status, 0) << r.err;
  std::istringstream in(slurp(dir / "o.tsv"));
  std::string header, first, second;
  std::getline(in, header);
  std::getline(in, first);
  std::getline(in, second);
  EXPECT_EQ(header, "graph_id\tl\tmax_relative_error");
  EXPECT_TRUE(first.starts_with("explicit\t1000\t"));
  const double err = std::stod(second.substr(second.rfind('\t') + 1));
  EXPECT_LT(err, 0.1);
}

TEST(Cli, SimulateAndEvaluate) {
  auto dir = scratch_dir("simulate");
  const std::string net = (dir / "net").string();
  ASSERT_EQ(run("--seed 4 simulate -n 40 -m 3 -c 2 --p-in 0.6 --p-out 0.02 -o " + net, dir).status, 0);
  EXPECT_TRUE(fs::exists(dir / "net" / "layer_2.tsv"));
  EXPECT_TRUE(fs::exists(dir / "net" / "labels.csv"));
  EXPECT_TRUE(fs::exists(dir / "net" / "manifest.txt"));
  ASSERT_EQ(run("--seed 4 embed " + net + " -o " + (dir / "f.tsv").string() + " -D 8 -k 3 -r 10", dir).status, 0);
  auto r = run("--seed 4 evaluate --task cluster --embedding " + (dir / "f.tsv").string() + " --labels " +
                   (dir / "net" / "labels.csv").string() + " -o " + (dir / "eval.tsv").string(),
               dir);
  ASSERT_EQ(r.status, 0) << r.err;
  const std::string report = slurp(dir / "eval.tsv");
  EXPECT_TRUE(report.starts_with("task\tkey\tmetric\tvalue\n"));
  auto at = report.find("cluster\tall\tari\t");
  ASSERT_NE(at, std::string::npos);
  EXPECT_GT(std::stod(report.substr(at + 15)), 0.9);
  EXPECT_EQ(run("--seed 4 evaluate --task classify --embedding " + (dir / "f.tsv").string() + " --labels " +
                    (dir / "net" / "labels.csv").string(),
                dir)
                .status,
            0);
}

TEST(Cli, UnknownExperimentListsOptions) {
  auto dir = scratch_dir("sweep");
  auto r = run("--seed 1 sweep nonsense", dir);
  EXPECT_EQ(r.status, 2);
  for (const char* name : {"snr", "layers", "context", "scale"}) EXPECT_NE(r.err.find(name), std::string::npos);
}
