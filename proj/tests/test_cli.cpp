#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "auxgrip/csv.hpp"
#include "helpers.hpp"

namespace fs = std::filesystem;
using testing_helpers::data_path;
using testing_helpers::test_out_dir;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(AUXGRIP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string run_cli_capture(const std::string& args, int* exit_code = nullptr) {
  const std::string out_file = test_out_dir("cli") + "/stdout.txt";
  const std::string cmd =
      std::string(AUXGRIP_CLI_PATH) + " " + args + " >" + out_file + " 2>/dev/null";
  const int rc = std::system(cmd.c_str());
  if (exit_code) *exit_code = WEXITSTATUS(rc);
  std::ifstream in(out_file);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string tiny_study_config(const std::string& dir, const std::string& out_dir) {
  const std::string path = dir + "/study.json";
  std::ofstream out(path);
  out << R"({
  "lattice": {"rows": 1, "cols": 4, "backbone_arch_radius_mm": 40.0},
  "indenter": {"radius_mm": 26.5, "total_travel_mm": 0.8},
  "inclinations_deg": [0],
  "contact_steps": 4,
  "output_dir": ")" << out_dir << R"("
})";
  return path;
}

}  // namespace

TEST(Cli, GenerateWritesModelFile) {
  const std::string dir = test_out_dir("cli_generate");
  const std::string cfg = tiny_study_config(dir, dir);
  ASSERT_EQ(run_cli("generate --config " + cfg + " --inclination 30 --out " + dir + "/m.txt"), 0);
  const std::string content = slurp(dir + "/m.txt");
  EXPECT_NE(content.find("# nodes"), std::string::npos);
  EXPECT_NE(content.find("# elements"), std::string::npos);
}

TEST(Cli, IndentWritesHistoryAndProfiles) {
  const std::string dir = test_out_dir("cli_indent");
  const std::string cfg = tiny_study_config(dir, dir);
  ASSERT_EQ(run_cli("indent --config " + cfg + " --out " + dir + "/h.csv --face-out " + dir +
                    "/face.csv --nodal-out " + dir + "/nodal.csv --faces-dir " + dir + "/faces"),
            0);
  EXPECT_TRUE(fs::exists(dir + "/faces/face_000.csv"));
  EXPECT_TRUE(fs::exists(dir + "/faces/face_004.csv"));
  EXPECT_EQ(slurp(dir + "/h.csv").substr(0, 38), "travel_mm,F_contact_N,P1_N,P2_N,P3_N\n0");
  EXPECT_EQ(slurp(dir + "/face.csv").substr(0, 10), "x_mm,y_mm\n");
  EXPECT_EQ(slurp(dir + "/nodal.csv").substr(0, 43), "substep,node,load_factor,ux_mm,uy_mm,rz_rad");
}

TEST(Cli, MetricsSummarizesProfile) {
  int rc = 0;
  const std::string out = run_cli_capture(
      "metrics --profile " + data_path("profiles/aux00.csv") + " --r1 26.5", &rc);
  ASSERT_EQ(rc, 0);
  const auto j = nlohmann::json::parse(out);
  EXPECT_NEAR(j.at("average_curvature_per_mm").get<double>(), 1.013, 0.01);
  EXPECT_GT(j.at("curvature_ratio").get<double>(), 0.0);
}

TEST(Cli, MetricsForceStats) {
  int rc = 0;
  const std::string out =
      run_cli_capture("metrics --force " + data_path("force_series/aux00.csv"), &rc);
  ASSERT_EQ(rc, 0);
  const auto j = nlohmann::json::parse(out);
  EXPECT_NEAR(j.at("force").at("mean_n").get<double>(), 8.51, 0.05);
  EXPECT_NEAR(j.at("force").at("peak_n").get<double>(), 9.59, 0.01);
}

TEST(Cli, TorqueSweepWritesGrid) {
  const std::string dir = test_out_dir("cli_torque");
  ASSERT_EQ(run_cli("torque --grasp-min 0.2 --grasp-max 0.8 --points 13 --out " + dir +
                    "/torque.csv"),
            0);
  std::istringstream is(slurp(dir + "/torque.csv"));
  const auto table = auxgrip::csv::read_table(is);
  EXPECT_EQ(table.header[0], "grasp_N");
  EXPECT_EQ(table.rows.size(), 13u);
  EXPECT_DOUBLE_EQ(table.rows.front()[0], 0.2);
  EXPECT_DOUBLE_EQ(table.rows.back()[0], 0.8);
}

TEST(Cli, IngestProducesTableFourStyleSummary) {
  const std::string dir = test_out_dir("cli_ingest");
  ASSERT_EQ(run_cli("ingest --files " + data_path("reactions/aux00.csv") + " --degree 9 " +
                    "--out-dir " + dir),
            0);
  const auto j = nlohmann::json::parse(slurp(dir + "/summary.json"));
  ASSERT_EQ(j.size(), 3u);
  for (const auto& row : j) {
    EXPECT_EQ(row.at("n").get<int>(), 44);
    EXPECT_EQ(row.at("dof").get<int>(), 34);
  }
  EXPECT_TRUE(fs::exists(fs::path(dir) / "aux00_P1_fit.csv"));
}

TEST(Cli, IngestErrorsAreSurfaced) {
  EXPECT_NE(run_cli("ingest --files /does/not/exist.csv"), 0);
  // degree too high for the point count
  const std::string dir = test_out_dir("cli_ingest_err");
  std::ofstream f(dir + "/short.csv");
  f << "t_s,eps1_ue,eps2_ue,eps3_ue,fsr_N\n0,1,1,1,1\n1,2,2,2,2\n";
  f.close();
  EXPECT_NE(run_cli("ingest --files " + dir + "/short.csv --degree 9 --out-dir " + dir), 0);
  EXPECT_NE(run_cli("ingest"), 0);  // missing required --files
}

TEST(Cli, StudyRunsAndIsByteDeterministic) {
  const std::string dir = test_out_dir("cli_study");
  const std::string cfg = tiny_study_config(dir, dir + "/out1");
  ASSERT_EQ(run_cli("study --config " + cfg), 0);
  ASSERT_EQ(run_cli("study --config " + cfg + " --out " + dir + "/out2"), 0);
  const std::string r1 = slurp(dir + "/out1/report.json");
  const std::string r2 = slurp(dir + "/out2/report.json");
  ASSERT_FALSE(r1.empty());
  EXPECT_EQ(r1, r2);
  EXPECT_TRUE(fs::exists(dir + "/out1/manifest.json"));
}

TEST(Cli, UnknownSubcommandFails) {
  EXPECT_NE(run_cli("frobnicate"), 0);
}
