#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "cli.hpp"

namespace fs = std::filesystem;
using fraclab::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("fraclab_cli_" + std::string(::testing::UnitTest::GetInstance()
                                             ->current_test_info()
                                             ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

const std::vector<std::string> kSmallGrid{"--mu-step", "0.25", "--nu-step", "0.3"};
const std::vector<std::string> kTinyNet{"--conv1", "3", "--conv2", "4", "--lstm-layers", "1",
                                        "--lstm-units", "4", "--dense", "5",
                                        "--epochs", "2", "--batch", "16"};

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_F(CliTest, TrajectoryHandValues) {
  const auto r = call({"trajectory", "--kind", "delayed", "--mu", "1.0", "--nu", "1.0",
                       "--x0", "0.3", "--steps", "3"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "0.3\n0.51\n0.867\n");
  EXPECT_NE(r.err.find("mu=1"), std::string::npos);
}

TEST_F(CliTest, UsageErrors) {
  auto r = call({"trajectory", "--mu", "1", "--nu", "1", "--x0", "0.3", "--bogus"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--bogus"), std::string::npos);
  r = call({"trajectory", "--nu", "1", "--x0", "0.3"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--mu"), std::string::npos);
  r = call({"trajectory", "--kind", "sine", "--mu", "1", "--nu", "1", "--x0", "0.3"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--kind"), std::string::npos);
  EXPECT_EQ(call({}).code, 1);
  EXPECT_EQ(call({"frobnicate"}).code, 1);
  EXPECT_EQ(call({"--help"}).code, 0);
}

TEST_F(CliTest, DomainErrorsAreDataErrors) {
  const auto r = call({"trajectory", "--mu", "1", "--nu", "1.5", "--x0", "0.3"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("nu"), std::string::npos);
}

TEST_F(CliTest, Feigenbaum) {
  const auto r = call({"feigenbaum", "--kind", "delayed", "--nu", "0.2", "--x0", "0.3",
                       "--mu-lo", "0", "--mu-hi", "2", "--mu-step", "0.05", "--out",
                       path("fig.csv"), "--svg", path("fig.svg")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = slurp(path("fig.csv"));
  EXPECT_EQ(csv.substr(0, 9), "mu,value\n");
  EXPECT_NE(slurp(path("fig.svg")).find("<svg"), std::string::npos);
}

TEST_F(CliTest, CorpusIsReproducible) {
  const auto a = call(concat({"corpus", "--preset", "desk", "--seed", "42", "--out", path("a")}, kSmallGrid));
  const auto b = call(concat({"corpus", "--preset", "desk", "--seed", "42", "--threads", "3",
                              "--out", path("b")}, kSmallGrid));
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(slurp(path("a/corpus.csv")), slurp(path("b/corpus.csv")));
  EXPECT_EQ(slurp(path("a/manifest.json")), slurp(path("b/manifest.json")));
  EXPECT_NE(slurp(path("a/manifest.json")).find("fraclab-corpus-1"), std::string::npos);
}

TEST_F(CliTest, MissingInputsNameTheFile) {
  const auto r = call({"evaluate", "--corpus", path("nowhere"), "--checkpoint", path("x.ckpt"),
                       "--out", path("p.csv")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("nowhere"), std::string::npos);
}

TEST_F(CliTest, RegressionPipeline) {
  ASSERT_EQ(call(concat({"corpus", "--out", path("c")}, kSmallGrid)).code, 0);
  const auto t = call(concat({"train", "--corpus", path("c"), "--target", "both", "--out",
                              path("m.ckpt"), "--report", path("train.json")}, kTinyNet));
  ASSERT_EQ(t.code, 0) << t.err;
  EXPECT_NE(slurp(path("train.json")).find("best_epoch"), std::string::npos);
  const auto e = call({"evaluate", "--corpus", path("c"), "--checkpoint", path("m.ckpt"),
                       "--out", path("pred.csv")});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_NE(e.out.find("MAE(nu)"), std::string::npos);
  const auto r = call({"report", "--corpus", path("c"), "--predictions", path("pred.csv"),
                       "--out", path("rep")});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"index.json", "mae_by_length.csv", "heatmap_mu.svg", "box_nu.csv",
                        "quartiles_nu.svg", "histograms_mu_len_gt15.csv", "density_mu.svg"}) {
    EXPECT_TRUE(fs::exists(dir_ / "rep" / f)) << f;
  }
}

TEST_F(CliTest, ClassificationPipeline) {
  const auto c = call(concat(concat({"classify-corpus", "--quota", "40,10,10", "--out",
                                     path("k")},
                                    {"--delayed-mu-step", "0.25", "--delayed-nu-step", "0.3"}),
                             {"--plain-mu-step", "0.2", "--plain-nu-step", "0.3"}));
  ASSERT_EQ(c.code, 0) << c.err;
  const auto t = call(concat({"train", "--corpus", path("k"), "--target", "delay", "--out",
                              path("d.ckpt")}, kTinyNet));
  ASSERT_EQ(t.code, 0) << t.err;
  ASSERT_EQ(call({"evaluate", "--corpus", path("k"), "--checkpoint", path("d.ckpt"),
                  "--out", path("d.csv")}).code, 0);
  const auto r = call({"roc", "--predictions", path("d.csv"), "--out", path("roc")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("AUC"), std::string::npos);
  EXPECT_NE(r.out.find("positives 10 negatives 10"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "roc" / "roc.svg"));
}

TEST_F(CliTest, QuotaTooLarge) {
  const auto r = call(concat(concat({"classify-corpus", "--quota", "100000,10,10", "--out",
                                     path("k")},
                                    {"--delayed-mu-step", "0.25", "--delayed-nu-step", "0.3"}),
                             {"--plain-mu-step", "0.2", "--plain-nu-step", "0.3"}));
  EXPECT_EQ(r.code, 2);
}
