#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "mcdist/pipeline.hpp"

using namespace mcdist;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("mcdist_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const char* name) const { return (path / name).string(); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

int simulate_small(const TempDir& tmp, const char* signals, const char* labels,
                   const char* noise = "0") {
  return run_cli({"simulate", "--signals", tmp.file(signals), "--labels", tmp.file(labels),
                  "--distances", "100", "--distances", "120", "--distances", "140",
                  "--distances", "160", "--distances", "180", "--distances", "200",
                  "--emission-times", "0.25", "--emission-times", "0.5", "--emission-times",
                  "0.75", "--replications", "2", "--record-duration", "30", "--noise-std",
                  noise, "--seed", "11"});
}

// Noise keeps the extracted c_low column away from the constant offset, so
// the regression design stays full rank; extra replications compensate for
// trials the extractor rejects under noise.
int simulate_noisy(const TempDir& tmp, const char* signals, const char* labels) {
  return run_cli({"simulate", "--signals", tmp.file(signals), "--labels", tmp.file(labels),
                  "--distances", "100", "--distances", "110", "--distances", "120",
                  "--distances", "130", "--distances", "140", "--distances", "150",
                  "--distances", "160", "--distances", "170", "--distances", "180",
                  "--distances", "190", "--distances", "200", "--emission-times", "0.25",
                  "--emission-times", "0.5", "--emission-times", "0.75", "--replications", "5",
                  "--record-duration", "30", "--noise-std", "0.02", "--seed", "11"});
}

}  // namespace

TEST_CASE("unknown subcommands and bad flags exit with status 2") {
  CHECK(run_cli({"frobnicate"}) == 2);
  CHECK(run_cli({}) == 2);
  CHECK(run_cli({"simulate", "--no-such-flag"}) == 2);
}

TEST_CASE("runtime failures exit with status 1") {
  TempDir tmp;
  CHECK(run_cli({"extract", "--signals", tmp.file("missing.csv"), "--labels",
                 tmp.file("missing2.csv"), "--features", tmp.file("f.csv"), "--exclusions",
                 tmp.file("x.csv")}) == 1);
}

TEST_CASE("simulate, extract, fit, estimate and evaluate chain together") {
  TempDir tmp;
  REQUIRE(simulate_small(tmp, "signals.csv", "labels.csv") == 0);
  REQUIRE(fs::exists(tmp.file("signals.csv")));
  REQUIRE(fs::exists(tmp.file("labels.csv")));

  REQUIRE(run_cli({"extract", "--signals", tmp.file("signals.csv"), "--labels",
                   tmp.file("labels.csv"), "--features", tmp.file("features.csv"),
                   "--exclusions", tmp.file("excluded.csv")}) == 0);
  const std::string features = slurp(tmp.file("features.csv"));
  CHECK(features.find("trial_id,t_low_s,c_low_v,r_s,delta_c_v,g_v_per_s,t_peak_s,c_peak_v,"
                      "e_r_v2,emission_time_s,distance_cm") == 0);
  CHECK(features.find("d100_te0.50_r00") != std::string::npos);

  REQUIRE(run_cli({"fit-curves", "--features", tmp.file("features.csv"), "--params",
                   tmp.file("params.csv")}) == 0);
  const std::string params = slurp(tmp.file("params.csv"));
  CHECK(params.find("model_name,emission_time_s,a,b,rmse") == 0);
  CHECK(params.find("power,0.5") != std::string::npos);
  CHECK(params.find("peaktime,0.5") != std::string::npos);
  CHECK(params.find("transmit_power,0.5") != std::string::npos);

  REQUIRE(run_cli({"estimate", "--features", tmp.file("features.csv"), "--method", "peaktime",
                   "--params", tmp.file("params.csv"), "--predictions",
                   tmp.file("pred.csv")}) == 0);
  const std::string pred = slurp(tmp.file("pred.csv"));
  CHECK(pred.find("trial_id,method,distance_cm,estimate_cm") == 0);
  CHECK(pred.find(",peaktime,") != std::string::npos);

  REQUIRE(run_cli({"evaluate", "--features", tmp.file("features.csv"), "--method", "peaktime",
                   "--params", tmp.file("params.csv"), "--report", tmp.file("report.csv"),
                   "--summary", tmp.file("summary.csv")}) == 0);
  CHECK(slurp(tmp.file("summary.csv")).find("peaktime,") != std::string::npos);
}

TEST_CASE("train and estimate with the closed-form regressor") {
  TempDir tmp;
  REQUIRE(simulate_noisy(tmp, "signals.csv", "labels.csv") == 0);
  REQUIRE(run_cli({"extract", "--signals", tmp.file("signals.csv"), "--labels",
                   tmp.file("labels.csv"), "--features", tmp.file("features.csv"),
                   "--exclusions", tmp.file("excluded.csv")}) == 0);

  REQUIRE(run_cli({"train", "--features", tmp.file("features.csv"), "--method", "mlr",
                   "--model-out", tmp.file("mlr.model")}) == 0);
  REQUIRE(fs::exists(tmp.file("mlr.model")));
  CHECK(slurp(tmp.file("mlr.model")).find("mcdist-model v1") == 0);

  REQUIRE(run_cli({"estimate", "--features", tmp.file("features.csv"), "--method", "mlr",
                   "--model", tmp.file("mlr.model"), "--predictions",
                   tmp.file("pred.csv")}) == 0);
  CHECK(slurp(tmp.file("pred.csv")).find(",mlr,") != std::string::npos);
}

TEST_CASE("monte carlo evaluation is byte-identical across reruns") {
  TempDir tmp;
  REQUIRE(simulate_noisy(tmp, "signals.csv", "labels.csv") == 0);
  REQUIRE(run_cli({"extract", "--signals", tmp.file("signals.csv"), "--labels",
                   tmp.file("labels.csv"), "--features", tmp.file("features.csv"),
                   "--exclusions", tmp.file("excluded.csv")}) == 0);

  auto evaluate = [&](const char* report, const char* summary) {
    return run_cli({"evaluate", "--features", tmp.file("features.csv"), "--method", "mlr",
                    "--trials", "5", "--seed", "9", "--report", tmp.file(report), "--summary",
                    tmp.file(summary)});
  };
  REQUIRE(evaluate("report_a.csv", "summary_a.csv") == 0);
  REQUIRE(evaluate("report_b.csv", "summary_b.csv") == 0);
  CHECK(slurp(tmp.file("report_a.csv")) == slurp(tmp.file("report_b.csv")));
  CHECK(slurp(tmp.file("summary_a.csv")) == slurp(tmp.file("summary_b.csv")));
}

TEST_CASE("simulate twice with one seed produces identical files") {
  TempDir tmp;
  REQUIRE(simulate_small(tmp, "a_signals.csv", "a_labels.csv", "0.01") == 0);
  REQUIRE(simulate_small(tmp, "b_signals.csv", "b_labels.csv", "0.01") == 0);
  CHECK(slurp(tmp.file("a_signals.csv")) == slurp(tmp.file("b_signals.csv")));
  CHECK(slurp(tmp.file("a_labels.csv")) == slurp(tmp.file("b_labels.csv")));
}

TEST_CASE("velocity profile subcommand") {
  TempDir tmp;
  REQUIRE(simulate_small(tmp, "signals.csv", "labels.csv") == 0);
  REQUIRE(run_cli({"extract", "--signals", tmp.file("signals.csv"), "--labels",
                   tmp.file("labels.csv"), "--features", tmp.file("features.csv"),
                   "--exclusions", tmp.file("excluded.csv")}) == 0);
  REQUIRE(run_cli({"velocity-profile", "--features", tmp.file("features.csv"), "--out",
                   tmp.file("velocity.csv")}) == 0);
  const std::string vel = slurp(tmp.file("velocity.csv"));
  CHECK(vel.find("distance_cm,emission_time_s,mean_velocity_cm_s,count") == 0);
  CHECK(vel.find("100,-1,") != std::string::npos);  // cross-T_e mean row
}

TEST_CASE("config files feed default flag values") {
  TempDir tmp;
  {
    std::ofstream cfg(tmp.file("sim.toml"));
    cfg << "[simulate]\n"
        << "signals = \"" << tmp.file("signals.csv") << "\"\n"
        << "labels = \"" << tmp.file("labels.csv") << "\"\n"
        << "distances = [100]\n"
        << "emission-times = [0.5]\n"
        << "replications = 1\n"
        << "record-duration = 10\n";
  }
  CHECK(run_cli({"--config", tmp.file("sim.toml"), "simulate"}) == 0);
  CHECK(fs::exists(tmp.file("signals.csv")));
}
