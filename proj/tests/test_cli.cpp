// End-to-end tests that drive the installed binary the way a user would:
// golden-file contracts, exit codes, stderr prefixes, and flag/config
// precedence.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "zport/lcr.hpp"
#include "zport/sweep_io.hpp"
#include "zport/transfer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int exit_code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

fs::path temp_dir() {
  static int counter = 0;
  fs::path dir = fs::temp_directory_path() /
                 ("zport_cli_test_" + std::to_string(::getpid()) + "_" +
                  std::to_string(counter++));
  fs::create_directories(dir);
  return dir;
}

RunResult run_cli(const std::string& args) {
  const fs::path dir = temp_dir();
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string(ZPORT_CLI_PATH) + " " + args + " >" + out.string() +
                          " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = slurp(out);
  result.err = slurp(err);
  fs::remove_all(dir);
  return result;
}

std::string data(const std::string& name) {
  return (fs::path(ZPORT_DATA_DIR) / name).string();
}

}  // namespace

TEST(CliConvert, GoldenFlatFileIsByteIdentical) {
  auto first = run_cli("convert " + data("golden_flat.s2p"));
  ASSERT_EQ(first.exit_code, 0) << first.err;
  EXPECT_EQ(first.out, slurp(data("golden_flat_z.csv")));
  auto second = run_cli("convert " + data("golden_flat.s2p"));
  EXPECT_EQ(first.out, second.out);
}

TEST(CliConvert, GoldenModeFileIsByteIdentical) {
  auto r = run_cli("convert " + data("golden_mode.s2p"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(r.out, slurp(data("golden_mode_z.csv")));
}

TEST(CliConvert, JsonMirror) {
  auto r = run_cli("convert " + data("golden_flat.s2p") + " --format json");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  json doc = json::parse(r.out);
  ASSERT_TRUE(doc.is_array());
  ASSERT_EQ(doc.size(), 3u);
  EXPECT_EQ(doc[0]["freq_hz"], 100000.0);
  EXPECT_EQ(doc[0]["z11"]["re"], 50.0);
  EXPECT_EQ(doc[2]["z22"]["re"], 50.0);
}

TEST(CliConvert, TotalReflectionExitsThree) {
  auto r = run_cli("convert " + data("reflect.s2p"));
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_EQ(r.err.rfind("ERROR 3:", 0), 0u) << r.err;
  EXPECT_NE(r.err.find("2000"), std::string::npos) << r.err;  // offending frequency
}

TEST(CliConvert, MalformedLineCitesLineNumber) {
  auto r = run_cli("convert " + data("malformed.s2p"));
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_EQ(r.err.rfind("ERROR 2:", 0), 0u) << r.err;
  EXPECT_NE(r.err.find("line 4"), std::string::npos) << r.err;
}

TEST(CliConvert, TouchstoneV2Rejected) {
  auto r = run_cli("convert " + data("v2.s2p"));
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("v1"), std::string::npos) << r.err;
}

TEST(CliConvert, MissingFileExitsTwo) {
  auto r = run_cli("convert /nonexistent/input.s2p");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_EQ(r.err.rfind("ERROR 2:", 0), 0u) << r.err;
}

TEST(CliConvert, DirectoryBatchMatchesSingleRuns) {
  const fs::path dir = temp_dir();
  fs::create_directories(dir / "in");
  fs::copy_file(data("golden_flat.s2p"), dir / "in" / "a.s2p");
  fs::copy_file(data("golden_mode.s2p"), dir / "in" / "b.s2p");
  auto r = run_cli("convert " + (dir / "in").string() + " -o " + (dir / "out").string());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(slurp(dir / "out" / "a.csv"), slurp(data("golden_flat_z.csv")));
  EXPECT_EQ(slurp(dir / "out" / "b.csv"), slurp(data("golden_mode_z.csv")));
  fs::remove_all(dir);
}

TEST(CliConvert, ZRefPrecedenceConfigThenFlag) {
  // config z_ref=25 overrides the file's R 50
  auto with_config =
      run_cli("--config " + data("config.json") + " convert " + data("golden_flat.s2p"));
  ASSERT_EQ(with_config.exit_code, 0) << with_config.err;
  EXPECT_NE(with_config.out.find("100000,25,0,"), std::string::npos) << with_config.out;
  // flag beats config
  auto with_flag = run_cli("--config " + data("config.json") + " convert " +
                           data("golden_flat.s2p") + " --z-ref 100");
  ASSERT_EQ(with_flag.exit_code, 0) << with_flag.err;
  EXPECT_NE(with_flag.out.find("100000,100,0,"), std::string::npos) << with_flag.out;
}

namespace {

// Z-sweep whose open-circuit response is one synthetic mode.
std::string single_mode_z_csv() {
  using namespace zport;
  const double f_r = 448e3, q = 100.0;
  const double b1 = kTwoPi * f_r / q;
  std::vector<double> freqs;
  std::vector<Matrix2c> mats;
  for (double f = 400e3; f <= 500e3; f += 50.0) {
    const Complex s(0.0, kTwoPi * f);
    const double wr = kTwoPi * f_r;
    const Complex h = (b1 * s) / (s * s + (wr / q) * s + wr * wr);
    freqs.push_back(f);
    mats.push_back(Matrix2c{Complex(1000.0, 0.0), Complex(0.0, 0.0), 1000.0 * h,
                            Complex(20.0, 0.0)});
  }
  return export_z_csv(
      TwoPortNetwork(ParamKind::Z, FrequencyGrid(std::move(freqs)), std::move(mats)));
}

}  // namespace

TEST(CliTf, SingleModePipeline) {
  const fs::path dir = temp_dir();
  spit(dir / "mode.csv", single_mode_z_csv());
  auto r = run_cli("tf " + (dir / "mode.csv").string() + " --tf-csv " +
                   (dir / "tf.csv").string() + " --sidebands 448000,10");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  json doc = json::parse(r.out);
  ASSERT_EQ(doc["modes"].size(), 1u);
  EXPECT_NEAR(doc["modes"][0]["f_r_hz"].get<double>(), 448e3, 448e3 * 0.01);
  EXPECT_NEAR(doc["modes"][0]["q"].get<double>(), 100.0, 5.0);
  ASSERT_TRUE(doc.contains("am_response"));
  EXPECT_EQ(doc["am_response"]["source"], "fitted");
  EXPECT_NEAR(doc["am_response"]["carrier"]["re"].get<double>(), 1.0, 1e-2);

  const std::string tf_csv = slurp(dir / "tf.csv");
  EXPECT_EQ(tf_csv.rfind("freq_hz,h_re,h_im,h_mag_db,h_phase_deg", 0), 0u);
  fs::remove_all(dir);
}

TEST(CliTf, FlatNetworkGivesEmptyModeTable) {
  const fs::path dir = temp_dir();
  std::string csv = "freq_hz,z11_re,z11_im,z12_re,z12_im,z21_re,z21_im,z22_re,z22_im\n";
  for (int k = 1; k <= 6; ++k)
    csv += std::to_string(k * 1000) + ",1000,0,0,0,50,0,20,0\n";
  spit(dir / "flat.csv", csv);
  auto r = run_cli("tf " + (dir / "flat.csv").string());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  json doc = json::parse(r.out);
  EXPECT_TRUE(doc["modes"].empty());
  fs::remove_all(dir);
}

TEST(CliTf, VanishingZ11ExitsFour) {
  const fs::path dir = temp_dir();
  spit(dir / "zero.csv",
       "freq_hz,z11_re,z11_im,z12_re,z12_im,z21_re,z21_im,z22_re,z22_im\n"
       "1000,0,0,0,0,1,0,1,0\n");
  auto r = run_cli("tf " + (dir / "zero.csv").string());
  EXPECT_EQ(r.exit_code, 4);
  EXPECT_EQ(r.err.rfind("ERROR 4:", 0), 0u) << r.err;
  fs::remove_all(dir);
}

TEST(CliFitLcr, RecoversPaperValues) {
  using namespace zport;
  const LcrModel truth{998.0, 998e-6, 82e-12};
  std::vector<double> freqs;
  std::vector<Complex> z;
  for (int k = 0; k < 400; ++k) {
    const double f = 100e3 + (500e3 - 100e3) * k / 399.0;
    freqs.push_back(f);
    z.push_back(lcr_impedance(truth, f));
  }
  const fs::path dir = temp_dir();
  spit(dir / "sweep.csv", export_impedance_csv(ImpedanceSweep(FrequencyGrid(freqs), z)));
  auto r = run_cli("fit-lcr " + (dir / "sweep.csv").string());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  json doc = json::parse(r.out);
  EXPECT_NEAR(doc["r_ohm"].get<double>(), 998.0, 998.0 * 0.01);
  EXPECT_NEAR(doc["l_h"].get<double>(), 998e-6, 998e-6 * 0.01);
  EXPECT_NEAR(doc["c_f"].get<double>(), 82e-12, 82e-12 * 0.01);
  EXPECT_TRUE(doc["converged"].get<bool>());
  fs::remove_all(dir);
}

TEST(CliFitLcr, FiveRowFileExitsTwo) {
  auto r = run_cli("fit-lcr " + data("five_rows.csv"));
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_EQ(r.err.rfind("ERROR 2:", 0), 0u) << r.err;
  EXPECT_NE(r.err.find("at least 10"), std::string::npos) << r.err;
}

TEST(CliFitLcr, ConstantSweepExitsFive) {
  auto r = run_cli("fit-lcr " + data("const_z.csv"));
  EXPECT_EQ(r.exit_code, 5);
  EXPECT_EQ(r.err.rfind("ERROR 5:", 0), 0u) << r.err;
}

TEST(CliNoise, PaperOperatingPoint) {
  auto r = run_cli("noise --opamp LT1363 --r1 16 --r2 300 --zsen-mag 15.8e3 --freq 448010");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  json doc = json::parse(r.out);
  EXPECT_EQ(doc["gain_av"], 19.75);
  EXPECT_TRUE(doc["thermal_lower_bound"].get<bool>());
  ASSERT_EQ(doc["budget"].size(), 2u);
  EXPECT_EQ(doc["budget"][1]["referral"], "in");
  EXPECT_NEAR(doc["budget"][1]["asd"]["current"].get<double>(), 15.8e-9, 15.8e-9 * 1e-3);
  EXPECT_NEAR(doc["budget"][1]["asd"]["voltage"].get<double>(), 9e-9, 9e-9 * 1e-9);
  EXPECT_EQ(doc["dominance"]["dominant"], "current");
}

TEST(CliNoise, QuadratureContrib) {
  auto r = run_cli("noise --contrib 8e-9,15e-9,9e-9");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  json doc = json::parse(r.out);
  EXPECT_NEAR(doc["quadrature_total_v_rthz"].get<double>(), 19.24e-9, 19.24e-9 * 1e-3);
}

TEST(CliNoise, VoltageOnlyCase) {
  auto r = run_cli("noise --opamp LT1363 --r1 16 --r2 0 --zsen-mag 0");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  json doc = json::parse(r.out);
  EXPECT_DOUBLE_EQ(doc["budget"][0]["asd"]["total"].get<double>(), 9e-9);
  EXPECT_DOUBLE_EQ(doc["budget"][1]["asd"]["total"].get<double>(), 9e-9);
}

TEST(CliNoise, EmptyPresetSlotNeedsValues) {
  auto r = run_cli("noise --opamp ADA4898 --r1 16 --r2 300 --zsen-mag 15.8e3");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("no noise densities"), std::string::npos) << r.err;

  auto with_file = run_cli("noise --opamp ADA4898 --presets " + data("presets.json") +
                           " --r1 16 --r2 300 --zsen-mag 15.8e3");
  ASSERT_EQ(with_file.exit_code, 0) << with_file.err;
  json doc = json::parse(with_file.out);
  EXPECT_EQ(doc["opamp"], "ADA4898");
}

TEST(CliNoise, UnknownPresetExitsTwo) {
  auto r = run_cli("noise --opamp OP07 --r1 16 --r2 300 --zsen-mag 1e3");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("unknown op-amp preset"), std::string::npos) << r.err;
}

TEST(CliNoise, MissingParametersExitTwo) {
  auto r = run_cli("noise --opamp LT1363 --zsen-mag 1e3");
  EXPECT_EQ(r.exit_code, 2);
  auto r2 = run_cli("noise --opamp LT1363 --r1 16 --r2 300");
  EXPECT_EQ(r2.exit_code, 2);
}

TEST(CliNoise, ConfigSuppliesCircuitAndFlagsOverride) {
  auto from_config =
      run_cli("--config " + data("config.json") + " noise --zsen-mag 15.8e3");
  ASSERT_EQ(from_config.exit_code, 0) << from_config.err;
  EXPECT_EQ(json::parse(from_config.out)["gain_av"], 19.75);

  auto overridden =
      run_cli("--config " + data("config.json") + " noise --zsen-mag 15.8e3 --r2 0");
  ASSERT_EQ(overridden.exit_code, 0) << overridden.err;
  EXPECT_EQ(json::parse(overridden.out)["gain_av"], 1.0);
}

TEST(CliConfig, UnknownKeyRejected) {
  const fs::path dir = temp_dir();
  spit(dir / "bad.json", "{\"z_reff\": 50}\n");
  auto r = run_cli("--config " + (dir / "bad.json").string() + " noise --contrib 1e-9");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("unknown key"), std::string::npos) << r.err;
  fs::remove_all(dir);
}

TEST(CliGeneral, BadFlagUsesErrorPrefix) {
  auto r = run_cli("convert --no-such-flag");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_EQ(r.err.rfind("ERROR 2:", 0), 0u) << r.err;
}
