#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "srnn/cli.hpp"

namespace {

namespace fs = std::filesystem;
using srnn::run_cli;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("srnn_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  void make_corpus(const std::string& name, std::size_t count, std::uint64_t seed) {
    auto r = cli({"gen-data", "--count", std::to_string(count), "--labels", "2", "--durations", "1-2,3-3",
                  "--max-segments", "3", "--seed", std::to_string(seed), "--out", path(name)});
    ASSERT_EQ(r.code, 0) << r.err;
  }

  fs::path dir;
};

const std::string small_dims = "context=8,segment=6,potential=6,label=4,duration=3,tagger=8";

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(cli({}).code, 1);
  EXPECT_EQ(cli({"train", "--bogus"}).code, 1);
  auto r = cli({"train", "--train", path("missing.jsonl"), "--out", path("m.bin")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("missing.jsonl"), std::string::npos);
  EXPECT_EQ(cli({"train", "--mode", "sideways", "--train", "x", "--out", "y"}).code, 1);
  EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST_F(Cli, TrainDecodeEvalPipeline) {
  make_corpus("train.jsonl", 20, 1);
  auto r = cli({"train", "--mode", "full", "--train", path("train.jsonl"), "--out", path("m.bin"), "--epochs",
                "40", "--patience", "40", "--lr", "0.01", "--seed", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(path("m.bin")));
  EXPECT_TRUE(fs::exists(path("m.bin.log")));

  auto d1 = cli({"decode", "--model", path("m.bin"), "--test", path("train.jsonl"), "--out", path("p1.jsonl")});
  auto d2 = cli({"decode", "--model", path("m.bin"), "--test", path("train.jsonl"), "--out", path("p2.jsonl")});
  ASSERT_EQ(d1.code, 0) << d1.err;
  ASSERT_EQ(d2.code, 0);
  EXPECT_EQ(slurp(path("p1.jsonl")), slurp(path("p2.jsonl")));
  std::istringstream lines(slurp(path("p1.jsonl")));
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    EXPECT_NE(line.find("\"durations\""), std::string::npos);
    ++n;
  }
  EXPECT_EQ(n, 20u);

  auto e = cli({"eval", "--pred", path("p1.jsonl"), "--test", path("train.jsonl")});
  ASSERT_EQ(e.code, 0) << e.err;
  std::istringstream table(e.out);
  std::string header, row;
  std::getline(table, header);
  std::getline(table, row);
  EXPECT_EQ(header, "P_seg\tR_seg\tF_seg\tP_tag\tR_tag\tF_tag\tError");
  std::istringstream cells(row);
  double p, rr, f;
  cells >> p >> rr >> f;
  EXPECT_GT(f, 0.99) << e.out;

  auto e2 = cli({"eval", "--model", path("m.bin"), "--test", path("train.jsonl")});
  EXPECT_EQ(e2.code, 0);
  EXPECT_EQ(e2.out, e.out);
}

TEST_F(Cli, PartialModeIgnoresDurations) {
  make_corpus("train.jsonl", 6, 2);
  make_corpus("dev.jsonl", 4, 5);
  // the same instances with labels only
  {
    std::ifstream in(path("train.jsonl"));
    std::ofstream out(path("bare.jsonl"));
    std::string line;
    while (std::getline(in, line)) {
      const auto at = line.find("\"durations\"");
      const auto end = line.find(']', at);
      out << line.substr(0, at) << line.substr(end + 2) << '\n';
    }
  }
  for (const char* name : {"train.jsonl", "bare.jsonl"}) {
    auto r = cli({"train", "--mode", "partial", "--train", path(name), "--dev", path("dev.jsonl"), "--out",
                  path(std::string(name) + ".bin"), "--epochs", "3", "--dims", small_dims});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  EXPECT_EQ(slurp(path("train.jsonl.bin")), slurp(path("bare.jsonl.bin")));

  auto full = cli({"train", "--mode", "full", "--train", path("train.jsonl"), "--out", path("f.bin"),
                   "--epochs", "2", "--dims", small_dims, "--max-seg-len", "2"});
  EXPECT_EQ(full.code, 1);
  EXPECT_NE(full.err.find("longer than the maximum segment length"), std::string::npos) << full.err;
  auto bare_full = cli({"train", "--mode", "full", "--train", path("bare.jsonl"), "--out", path("g.bin"),
                        "--epochs", "1", "--dims", small_dims});
  EXPECT_EQ(bare_full.code, 1);
}

TEST_F(Cli, DeterministicModelFiles) {
  make_corpus("train.jsonl", 5, 3);
  for (const char* mode : {"full", "bio", "ctc"}) {
    for (const char* name : {"a.bin", "b.bin"}) {
      auto r = cli({"train", "--mode", mode, "--train", path("train.jsonl"), "--out", path(name), "--epochs",
                    "2", "--dims", small_dims, "--seed", "9"});
      ASSERT_EQ(r.code, 0) << r.err;
    }
    EXPECT_EQ(slurp(path("a.bin")), slurp(path("b.bin"))) << mode;
  }
}

TEST_F(Cli, DecodeErrors) {
  make_corpus("train.jsonl", 4, 4);
  ASSERT_EQ(cli({"train", "--train", path("train.jsonl"), "--out", path("m.bin"), "--epochs", "1", "--dims",
                 small_dims})
                .code,
            0);
  std::ofstream(path("empty.jsonl")).close();
  auto r = cli({"decode", "--model", path("m.bin"), "--test", path("empty.jsonl")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("empty corpus"), std::string::npos);
  std::ofstream(path("other.jsonl")) << R"({"tokens": [[0, 1], [1, 0]], "labels": ["ZZ"], "durations": [2]})"
                                     << '\n';
  auto bad = cli({"decode", "--model", path("m.bin"), "--test", path("other.jsonl")});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("ZZ"), std::string::npos);
  std::ofstream(path("wide.jsonl")) << R"({"tokens": [[0, 1, 2]]})" << '\n';
  EXPECT_EQ(cli({"decode", "--model", path("m.bin"), "--test", path("wide.jsonl")}).code, 1);
}

TEST_F(Cli, GradcheckAndNegativeControl) {
  auto ok = cli({"gradcheck", "--mode", "full", "--dims", small_dims, "--seed", "2"});
  EXPECT_EQ(ok.code, 0) << ok.out;
  EXPECT_NE(ok.out.find("max relative error"), std::string::npos);
  auto bad = cli({"gradcheck", "--mode", "full", "--dims", small_dims, "--seed", "2", "--corrupt-backward"});
  EXPECT_EQ(bad.code, 3) << bad.out;
  EXPECT_NE(bad.out.find("FAIL"), std::string::npos);
  EXPECT_EQ(cli({"gradcheck", "--mode", "ctc", "--dims", small_dims}).code, 0);
}

TEST_F(Cli, OracleSmall) {
  auto r = cli({"oracle", "--max-length", "3", "--max-labels", "2", "--seeds", "2", "--dims", small_dims});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("log Z(x,y)"), std::string::npos);
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
}

TEST_F(Cli, StrokeCorpusEndToEnd) {
  ASSERT_EQ(cli({"gen-data", "--kind", "strokes", "--count", "6", "--alphabet", "3", "--max-chars", "2", "--out",
                 path("s.jsonl")})
                .code,
            0);
  auto r = cli({"train", "--train", path("s.jsonl"), "--out", path("m.bin"), "--epochs", "1", "--dims",
                small_dims});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(cli({"eval", "--model", path("m.bin"), "--test", path("s.jsonl")}).code, 0);
}

}  // namespace
