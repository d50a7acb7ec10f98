#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "alp/cli.hpp"

namespace alp {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "alp");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("alp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

const std::string kSample = std::string(ALP_DATA_DIR) + "/sample/alp_sample_12.csv";
const std::string kSmoke = std::string(ALP_DATA_DIR) + "/configs/smoke.cfg";

TEST_F(CliTest, MissingConfigIsUsageError) {
  const auto r = run({"train", "--data", kSample, "--config", (dir_ / "absent.cfg").string(), "--out",
                      (dir_ / "m.ckpt").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(r.err.empty());
}

TEST_F(CliTest, BinaryExitCodes) {
  const std::string cmd = std::string(ALP_CLI_PATH) + " train --data " + kSample + " --config " +
                          (dir_ / "absent.cfg").string() + " --out " + (dir_ / "m.ckpt").string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 2);
  const int bogus = std::system((std::string(ALP_CLI_PATH) + " frobnicate 2>/dev/null >/dev/null").c_str());
  EXPECT_EQ(WEXITSTATUS(bogus), 2);
}

TEST_F(CliTest, BadArgumentsAndMissingInputs) {
  EXPECT_EQ(run({"compare", "--instances", kSample, "--methods", "magic"}).code, 2);
  EXPECT_EQ(run({"compare", "--instances", kSample, "--methods", "drl"}).code, 2);
  EXPECT_EQ(run({"compare", "--instances", (dir_ / "none*.csv").string()}).code, 3);
}

TEST_F(CliTest, MalformedDataIsDataError) {
  std::ofstream(dir_ / "bad.csv") << "sr,mdl,cat,sta,ata,cost_300,cost_900,cost_1800,cost_3600\n1,A,Q,1,1,1,1,1,1\n";
  EXPECT_EQ(run({"compare", "--instances", (dir_ / "bad.csv").string()}).code, 3);
}

TEST_F(CliTest, CompareFcfsAndTabu) {
  const auto r = run({"compare", "--instances", kSample, "--methods", "fcfs,tabu", "--schedules", dir_.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = read_report(r.out, ReportFormat::Csv);
  ASSERT_EQ(report.rows.size(), 2u);
  const auto& fcfs = report.rows[0];
  const auto& tabu = report.rows[1];
  EXPECT_EQ(fcfs.method, "fcfs");
  EXPECT_EQ(fcfs.status, "ok");
  EXPECT_EQ(fcfs.violations, 0u);
  EXPECT_EQ(fcfs.n, 12u);
  EXPECT_LE(tabu.total_cost, fcfs.total_cost);
  EXPECT_TRUE(fs::exists(dir_ / "alp_sample_12.fcfs.csv"));
  EXPECT_EQ(read_schedule_rows(slurp(dir_ / "alp_sample_12.tabu.csv")).size(), 12u);
}

TEST_F(CliTest, OracleTooLargeIsSkipped) {
  const auto r = run({"compare", "--instances", kSample, "--methods", "oracle,cps", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = read_report(r.out, ReportFormat::Json);
  ASSERT_EQ(report.rows.size(), 2u);
  EXPECT_EQ(report.rows[0].status.rfind("skipped:", 0), 0u) << report.rows[0].status;
  EXPECT_EQ(report.rows[1].status, "ok");
}

TEST_F(CliTest, OverloadedTrafficExitsInfeasible) {
  const auto r = run({"compare", "--instances", "synth:n=40,rate=400,seed=2", "--methods", "fcfs,tabu"});
  EXPECT_EQ(r.code, 4) << r.err;
  const auto report = read_report(r.out, ReportFormat::Csv);
  ASSERT_EQ(report.rows.size(), 2u);
  EXPECT_GT(report.rows[0].violations, 0u);
  EXPECT_EQ(report.rows[0].status.rfind("infeasible", 0), 0u) << report.rows[0].status;
}

TEST_F(CliTest, CompareIsDeterministicWithoutTiming) {
  const std::vector<std::string> args{"compare", "--instances", "synth:n=15,count=3,seed=4", "--methods",
                                      "fcfs,tabu,cps", "--omit-timing"};
  const auto a = run(args), b = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  for (const auto& row : read_report(a.out, ReportFormat::Csv).rows) EXPECT_EQ(row.wall_ms, 0.0);
}

TEST_F(CliTest, TrainThenCompareDrl) {
  const auto ckpt = (dir_ / "m.ckpt").string();
  const auto t = run({"train", "--data", "synth:n=5,seed=1", "--config", kSmoke, "--out", ckpt, "--seed", "3"});
  ASSERT_EQ(t.code, 0) << t.err;
  EXPECT_TRUE(fs::exists(ckpt));
  const auto log = trainer::read_train_log(slurp(cli::default_log_path(ckpt)));
  EXPECT_EQ(log.size(), 20u);
  const auto c = run({"compare", "--instances", kSample, "--methods", "drl,fcfs", "--checkpoint", ckpt, "--config",
                      kSmoke});
  ASSERT_EQ(c.code, 0) << c.err;
  const auto report = read_report(c.out, ReportFormat::Csv);
  EXPECT_EQ(report.rows[0].method, "drl");
  EXPECT_EQ(report.rows[0].violations, 0u);

  const auto curves = (dir_ / "curves.csv").string();
  ASSERT_EQ(run({"plotdata", "--in", cli::default_log_path(ckpt).string(), "--kind", "training_curves", "--out",
                 curves})
                .code,
            0);
  const auto text = slurp(curves);
  EXPECT_EQ(text.substr(0, text.find('\n')), "episode,reward,cost,avg_delay_s,reward_ma100,cost_ma100");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 21);
}

TEST_F(CliTest, TrainIsReproducible) {
  auto train = [&](const std::string& name) {
    const auto ckpt = (dir_ / name).string();
    EXPECT_EQ(run({"train", "--data", "synth:n=5,seed=1", "--config", kSmoke, "--out", ckpt, "--seed", "9"}).code, 0);
    return slurp(ckpt) + slurp(cli::default_log_path(ckpt));
  };
  EXPECT_EQ(train("a.ckpt"), train("b.ckpt"));
}

TEST_F(CliTest, PlotDataKinds) {
  const auto report = (dir_ / "report.csv").string();
  ASSERT_EQ(run({"compare", "--instances", kSample, "--methods", "fcfs,tabu", "--out", report, "--schedules",
                 dir_.string()})
                .code,
            0);
  const auto schedule = (dir_ / "alp_sample_12.fcfs.csv").string();
  const std::map<std::string, std::pair<std::string, std::string>> expected{
      {"delay_hist", {schedule, "bin_start_s,count"}},
      {"sequence", {schedule, "id,wake,landing_time_s"}},
      {"throughput_bars", {report, "instance,method,rt"}},
      {"quadrant", {report, "method,mean_rt,mean_wall_ms"}}};
  for (const auto& [kind, io] : expected) {
    const auto r = run({"plotdata", "--in", io.first, "--kind", kind});
    ASSERT_EQ(r.code, 0) << kind << ": " << r.err;
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')), io.second);
  }
  const auto sequence = run({"plotdata", "--in", schedule, "--kind", "sequence"}).out;
  EXPECT_EQ(std::count(sequence.begin(), sequence.end(), '\n'), 13);
  EXPECT_EQ(run({"plotdata", "--in", report, "--kind", "nonsense"}).code, 2);
  EXPECT_EQ(run({"plotdata", "--in", (dir_ / "missing.csv").string(), "--kind", "sequence"}).code, 3);
}

TEST(PlotData, DelayHistogramFillsGaps) {
  const std::string schedule = std::string(kScheduleCsvHeader) + "\nA,H,0,0,0\nB,M,0,130,130\n";
  const auto text = cli::plot_data(schedule, "delay_hist", 60);
  EXPECT_EQ(text, "bin_start_s,count\n0,1\n60,0\n120,1\n");
}

TEST(SynthSpec, Parses) {
  const auto s = cli::parse_synth("synth:n=12,count=3,rate=30,seed=5");
  EXPECT_EQ(s.n, 12u);
  EXPECT_EQ(s.count, 3u);
  const auto inst = cli::synth_instances(s);
  ASSERT_EQ(inst.size(), 3u);
  EXPECT_EQ(inst[0].size(), 12u);
  EXPECT_NE(inst[0].name(), inst[1].name());
  EXPECT_THROW(cli::parse_synth("synth:n=abc"), cli::UsageError);
  EXPECT_THROW(cli::parse_synth("synth:bogus=1"), cli::UsageError);
}

TEST(Percentile, NearestRank) {
  EXPECT_EQ(cli::percentile95({}), 0.0);
  std::vector<double> v;
  for (int k = 1; k <= 20; ++k) v.push_back(k);
  EXPECT_EQ(cli::percentile95(v), 19.0);
  EXPECT_EQ(cli::percentile95({7}), 7.0);
}

}  // namespace
}  // namespace alp
