#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int status = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("addtwist_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  CliResult run(const std::string& args) const {
    const auto out = dir_ / "stdout", err = dir_ / "stderr";
    const std::string cmd = std::string("'") + ADDTWIST_CLI_PATH + "' --cache-dir '" + (dir_ / "cache").string() +
                            "' " + args + " >'" + out.string() + "' 2>'" + err.string() + "'";
    const int raw = std::system(cmd.c_str());
    CliResult r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  fs::path dir_;
};

std::size_t lines(const std::string& s) { return std::count(s.begin(), s.end(), '\n'); }

}  // namespace

TEST_F(Cli, FormsListAndShow) {
  const auto list = run("forms list");
  EXPECT_EQ(list.status, 0);
  EXPECT_NE(list.out.find("delta 1 12 1^24"), std::string::npos);
  const auto show = run("forms show --form 11.2.a --coeffs 5");
  ASSERT_EQ(show.status, 0) << show.err;
  const auto j = nlohmann::json::parse(show.out);
  EXPECT_EQ(j["coefficients"], nlohmann::json({"1", "-2", "-1", "2", "1"}));
  EXPECT_EQ(j["q"], 11);
}

TEST_F(Cli, TwistsComputeSmallCutoff) {
  const auto r = run("twists compute --form delta --X 10");
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "form_id,q,k,orbit,a,c,c_r,re,im,err_bound,terms");
  EXPECT_EQ(lines(r.out), 32u);
  // the run populated the cache
  EXPECT_TRUE(fs::exists(dir_ / "cache" / "delta.inf.csv"));
  const auto again = run("twists compute --form delta --X 10");
  EXPECT_EQ(again.out, r.out);
}

TEST_F(Cli, TwistsComputeBelowTheFirstDenominator) {
  const auto r = run("twists compute --form delta --X 1");
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(lines(r.out), 1u);
  EXPECT_NE(r.err.find("warning"), std::string::npos);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run("twists compute --form 37.2.a --X 10").status, 2);
  EXPECT_EQ(run("twists compute --form delta --orbit zero --X 10").status, 2);
  EXPECT_EQ(run("twists compute --form delta --X 10 --cutoff sideways").status, 2);
  EXPECT_EQ(run("--tolerance 1e-2 twists compute --form delta --X 10").status, 2);
  EXPECT_EQ(run("frobnicate").status, 2);
  EXPECT_EQ(run("verify fe").status, 2);
}

TEST_F(Cli, VerifySuitesPass) {
  const auto fe = run("verify fe --form 11.2.a --orbit zero --trials 10 --cmax 40");
  ASSERT_EQ(fe.status, 0) << fe.out << fe.err;
  const auto j = nlohmann::json::parse(fe.out);
  EXPECT_EQ(j["suites"][0]["count"], 30);  // three values of s per point
  EXPECT_EQ(run("verify eta --form 5.4.a").status, 0);
  EXPECT_EQ(run("verify bs --form 11.2.a --cmax 12").status, 0);
}

TEST_F(Cli, CorruptCacheExitsWithFailure) {
  ASSERT_EQ(run("twists compute --form delta --X 6").status, 0);
  std::ofstream(dir_ / "cache" / "delta.inf.csv", std::ios::app) << "delta,1,12,inf,1,2\n";
  const auto r = run("twists compute --form delta --X 6");
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("corrupt cache"), std::string::npos);
  EXPECT_EQ(run("--no-cache twists compute --form delta --X 6").status, 0);
}

TEST_F(Cli, VerifyCacheRejectsTamperedRows) {
  ASSERT_EQ(run("twists compute --form 11.2.a --orbit zero --X 5").status, 0);
  const auto path = dir_ / "cache" / "11.2.a.zero.csv";
  auto text = slurp(path);
  // replace the real part of the first row by a different value
  const auto row = text.find('\n') + 1;
  std::size_t field = row;
  for (int i = 0; i < 7; ++i) field = text.find(',', field) + 1;
  text.replace(field, text.find(',', field) - field, "0.5");
  std::ofstream(path, std::ios::trunc) << text;
  EXPECT_EQ(run("twists compute --form 11.2.a --orbit zero --X 5").status, 0);
  const auto r = run("--verify-cache twists compute --form 11.2.a --orbit zero --X 5");
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("recomputation"), std::string::npos) << r.err;
}

TEST_F(Cli, ConfigSelectsForms) {
  const auto conf = dir_ / "run.conf";
  std::ofstream(conf) << "forms = 11.2.a\n";
  const auto list = run("--config '" + conf.string() + "' forms list");
  EXPECT_EQ(list.status, 0);
  EXPECT_EQ(list.out.find("delta"), std::string::npos);
  EXPECT_NE(list.out.find("11.2.a"), std::string::npos);
  EXPECT_EQ(run("--config '" + conf.string() + "' twists compute --form delta --X 5").status, 2);
  EXPECT_EQ(run("--config '" + conf.string() + "' twists compute --form 11.2.a --X 22").status, 0);
  std::ofstream(conf) << "forms = 37.2.a\n";
  EXPECT_EQ(run("--config '" + conf.string() + "' forms list").status, 2);
}

TEST_F(Cli, CacheExportPurgeImport) {
  ASSERT_EQ(run("twists compute --form 11.2.a --orbit zero --X 15").status, 0);
  ASSERT_EQ(run("twists compute --form 11.2.a --orbit inf --X 33").status, 0);
  const auto dump = (dir_ / "dump.csv").string();
  ASSERT_EQ(run("cache export --file '" + dump + "'").status, 0);
  const auto before = slurp(dump);
  EXPECT_EQ(run("cache purge").status, 0);
  EXPECT_FALSE(fs::exists(dir_ / "cache" / "11.2.a.zero.csv"));
  EXPECT_EQ(run("cache import --file '" + dump + "'").status, 0);
  ASSERT_EQ(run("cache export --file '" + dump + "'").status, 0);
  EXPECT_EQ(slurp(dump), before);
  const auto v = run("cache verify --form 11.2.a");
  EXPECT_EQ(v.status, 0) << v.err;
  EXPECT_EQ(nlohmann::json::parse(v.out)["mismatches"].size(), 0u);
}

TEST_F(Cli, WorkerCountDoesNotChangeOutput) {
  const auto one = run("--no-cache --workers 1 moments --form delta --Xgrid 40,60,80 --n 1");
  const auto many = run("--no-cache --workers 4 moments --form delta --Xgrid 40,60,80 --n 1");
  ASSERT_EQ(one.status, 0) << one.err;
  EXPECT_EQ(one.out, many.out);
}

TEST_F(Cli, ConfigFileAndOutputFile) {
  const auto conf = dir_ / "run.conf";
  std::ofstream(conf) << "workers = 2\nx_grid = 30, 50, 70\n";
  const auto out = dir_ / "report.json";
  const auto r = run("--config '" + conf.string() + "' --out '" + out.string() + "' moments --form delta --n 1");
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  const auto j = nlohmann::json::parse(slurp(out));
  EXPECT_FALSE(j.empty());
  std::ofstream(conf) << "workers = 0\n";
  EXPECT_EQ(run("--config '" + conf.string() + "' forms list").status, 2);
}

TEST_F(Cli, CutoffDemoDivisor) {
  const auto fixture = dir_ / "zeta2.txt";
  std::ofstream(fixture) << "name zeta2\ncoefficients divisor\nsigma0 1\na 0.5\nA 0.5\npole 1 0 2 1.1544313298030657 1\n";
  const auto r = run("cutoff-demo divisor --fixture '" + fixture.string() + "' --X 1000");
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("\"sharp_sum\""), std::string::npos) << r.out;
  std::ofstream(fixture) << "coefficients divisor\npole 1 0 2 1\n";
  EXPECT_EQ(run("cutoff-demo divisor --fixture '" + fixture.string() + "' --X 1000").status, 2);
}
