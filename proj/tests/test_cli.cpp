#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fracspec/config.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = FRACSPEC_CLI;
const fs::path kConfigs = FRACSPEC_CONFIG_DIR;

struct Result {
  int status;
  std::string err;
};

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("fracspec_cli_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir.parent_path());
  return dir;
}

Result run(const std::string& args, const std::string& env = {}) {
  const auto err = fs::temp_directory_path() / ("fracspec_cli_err_" + std::to_string(::getpid()));
  const std::string cmd = env + " " + kCli + " " + args + " > /dev/null 2> " + err.string();
  const int raw = std::system(cmd.c_str());
  std::ifstream in(err);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const std::string& name, const std::string& text) {
  const auto p = scratch("configs") / name;
  fs::create_directories(p.parent_path());
  std::ofstream(p) << text;
  return p;
}

void expect_identical_dirs(const fs::path& a, const fs::path& b) {
  std::size_t count = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    const auto other = b / entry.path().filename();
    ASSERT_TRUE(fs::exists(other)) << other;
    EXPECT_EQ(slurp(entry.path()), slurp(other)) << entry.path().filename();
    ++count;
  }
  EXPECT_GT(count, 0u);
  for (const auto& entry : fs::directory_iterator(b)) {
    EXPECT_TRUE(fs::exists(a / entry.path().filename())) << entry.path();
  }
}

}  // namespace

TEST(Config, MinimalConfigFillsDefaults) {
  const auto s = fracspec::parse_config_text(
      "[model]\nkind = constant\nc = 0.159155\n[experiment]\nalpha = 0.25\nn_list = 1024\n"
      "replications = 100\n");
  EXPECT_EQ(s.mc.model.kind(), fracspec::ModelKind::constant);
  EXPECT_EQ(s.mc.n_list, std::vector<std::size_t>{1024});
  EXPECT_EQ(s.mc.replications, 100u);
  EXPECT_NEAR(s.mc.resolved_holder_delta(), 0.2, 1e-15);
  EXPECT_EQ(s.mc.delta_confidence, 0.05);
  EXPECT_EQ(s.mc.probe_lambdas.size(), 2u);
}

TEST(Config, PiFormsAndLists) {
  const auto s = fracspec::parse_config_text(
      "[model]\nkind = ar1\nrho = -0.3\n[experiment]\nprobe_lambdas = pi/4, 0.5*pi, pi, 3*pi/2, 2*pi\n");
  EXPECT_NEAR(s.mc.probe_lambdas[0], M_PI / 4, 1e-15);
  EXPECT_NEAR(s.mc.probe_lambdas[1], M_PI / 2, 1e-15);
  EXPECT_NEAR(s.mc.probe_lambdas[3], 1.5 * M_PI, 1e-15);
  EXPECT_EQ(s.mc.model.rho(), -0.3);
}

TEST(Config, ErrorsNameTheKey) {
  auto key_of = [](const std::string& text) -> std::string {
    try {
      fracspec::parse_config_text(text);
    } catch (const fracspec::config_error& e) {
      return e.key();
    }
    return "<none>";
  };
  const std::string model = "[model]\nkind = constant\nc = 1\n";
  EXPECT_EQ(key_of(model + "[experiment]\nalpha = 0.6\n"), "alpha");
  EXPECT_EQ(key_of(model + "[experiment]\nalpha = 0.25\nholder_delta = 0.3\n"), "holder_delta");
  EXPECT_EQ(key_of(model + "[experiment]\nreplications = 0\n"), "replications");
  EXPECT_EQ(key_of(model + "[experiment]\nbogus = 1\n"), "bogus");
  EXPECT_EQ(key_of(model + "[experiment]\nn_list = 10, x\n"), "n_list");
  EXPECT_EQ(key_of(model + "[experiment]\nseed = -1\n"), "seed");
  EXPECT_EQ(key_of("[model]\nkind = ar1\nrho = 1.5\n"), "rho");
  EXPECT_EQ(key_of("[model]\nkind = ar1\n"), "rho");
  EXPECT_EQ(key_of("[model]\nkind = ar1\nrho = 0.1\nc = 1\n"), "c");
  EXPECT_EQ(key_of("[model]\nkind = wavelet\n"), "kind");
  EXPECT_EQ(key_of("[experiment]\nalpha = 0.1\n"), "kind");
  EXPECT_EQ(key_of("[elsewhere]\n"), "elsewhere");
}

TEST(Config, ResolvedConfigRoundTrips) {
  const auto s = fracspec::parse_config(kConfigs / "ar1.ini");
  const auto again = fracspec::parse_config_text(fracspec::resolved_config(s));
  EXPECT_EQ(fracspec::resolved_config(again), fracspec::resolved_config(s));
}

TEST(Cli, EveryVerbIsByteIdenticalAcrossRuns) {
  const auto cfg = write_config("small.ini",
                                "[model]\nkind = ar1\nrho = 0.5\n[experiment]\nn_list = 128, 256\n"
                                "replications = 20\nseed = 99\ncalibration_draws = 1000\n"
                                "confidence_probes = 16\n[simulate]\npaths = 2\n[truth]\npoints = 257\n"
                                "[fejer]\nn_list = 16, 64\n");
  for (const std::string verb : {"simulate", "truth", "mc", "confidence", "fejer"}) {
    const auto a = scratch(verb + std::string("_a"));
    const auto b = scratch(verb + std::string("_b"));
    ASSERT_EQ(run(verb + " --config " + cfg.string() + " --out " + a.string()).status, 0) << verb;
    ASSERT_EQ(run(verb + " --config " + cfg.string() + " --out " + b.string() + " --threads 3").status, 0) << verb;
    expect_identical_dirs(a, b);
  }
  const auto sim = scratch("simulate_a");
  const auto a = scratch("estimate_a");
  const auto b = scratch("estimate_b");
  const std::string paths = (sim / "path_n128_0.csv").string() + " " + (sim / "path_n256_1.csv").string();
  ASSERT_EQ(run("simulate --config " + cfg.string() + " --out " + sim.string()).status, 0);
  ASSERT_EQ(run("estimate --config " + cfg.string() + " --out " + a.string() + " " + paths).status, 0);
  ASSERT_EQ(run("estimate --config " + cfg.string() + " --out " + b.string() + " " + paths).status, 0);
  expect_identical_dirs(a, b);
  EXPECT_TRUE(fs::exists(a / "path_n256_1_estimate.csv"));
}

TEST(Cli, HeadersRecordVersionConfigAndSeed) {
  const auto out = scratch("headers");
  ASSERT_EQ(run("simulate --config " + (kConfigs / "constant.ini").string() + " --out " + out.string() +
                " --seed 77").status,
            0);
  const auto text = slurp(out / "path_n1024_0.csv");
  EXPECT_EQ(text.rfind("# fracspec ", 0), 0u);
  EXPECT_NE(text.find("# config: kind = constant"), std::string::npos);
  EXPECT_NE(text.find("# config: seed = 77"), std::string::npos);
  EXPECT_NE(text.find("# seed = 77"), std::string::npos);
  EXPECT_NE(text.find("\neta\n"), std::string::npos);
}

TEST(Cli, TruthEmitsClosedFormFractionalDerivative) {
  const auto out = scratch("truth");
  ASSERT_EQ(run("truth --config " + (kConfigs / "constant.ini").string() + " --out " + out.string()).status, 0);
  std::ifstream in(out / "truth.csv");
  std::string line;
  double f_alpha_pi = 0.0;
  while (std::getline(in, line)) {
    if (line.rfind("3.14159", 0) == 0) f_alpha_pi = std::stod(line.substr(line.find(',', line.find(',') + 1) + 1));
  }
  EXPECT_NEAR(f_alpha_pi, 0.408637, 1e-6);
}

TEST(Cli, ExitStatuses) {
  const std::string constant = (kConfigs / "constant.ini").string();
  const auto out = scratch("status");
  auto r = run("mc --config " + write_config("r0.ini", "[model]\nkind = constant\nc = 1\n[experiment]\n"
                                                        "replications = 0\n").string() +
               " --out " + out.string());
  EXPECT_EQ(r.status, 64);
  EXPECT_NE(r.err.find("replications"), std::string::npos);
  EXPECT_FALSE(fs::exists(out));
  EXPECT_EQ(run("frobnicate --config " + constant + " --out " + out.string()).status, 64);
  EXPECT_EQ(run("mc --out " + out.string()).status, 64);
  EXPECT_EQ(run("truth --config /nonexistent/x.ini --out " + out.string()).status, 3);
  EXPECT_EQ(run("estimate --config " + constant + " --out " + out.string() + " /nonexistent/p.csv").status, 3);
  EXPECT_EQ(run("estimate --config " + constant + " --out " + out.string()).status, 64);
  EXPECT_EQ(run("mc --config " + constant + " --out " + out.string(), "FRACSPEC_THREADS=abc").status, 64);
  const auto grid = write_config("uneven.csv", "lambda,value\n0,1\n3.14159,2\n6.283185307179586,1\n");
  std::ofstream(grid.parent_path() / "bad_model.ini")
      << "[model]\nkind = custom_grid\ngrid_csv_path = uneven.csv\n";
  r = run("truth --config " + (grid.parent_path() / "bad_model.ini").string() + " --out " + out.string());
  EXPECT_EQ(r.status, 64);
  EXPECT_NE(r.err.find("grid_csv_path"), std::string::npos);
  EXPECT_EQ(run("--version --config x --out y").status, 0);
  EXPECT_EQ(run("--help").status, 0);
}

TEST(Cli, RefusesToOverwriteWithoutForce) {
  const std::string cfg = (kConfigs / "constant.ini").string();
  const auto out = scratch("force");
  ASSERT_EQ(run("fejer --config " + cfg + " --out " + out.string()).status, 0);
  const auto before = slurp(out / "fejer.csv");
  EXPECT_EQ(run("fejer --config " + cfg + " --out " + out.string()).status, 3);
  EXPECT_EQ(slurp(out / "fejer.csv"), before);
  EXPECT_EQ(run("fejer --config " + cfg + " --out " + out.string() + " --force").status, 0);
  for (const auto& entry : fs::directory_iterator(out)) {
    EXPECT_EQ(entry.path().filename().string().find(".tmp."), std::string::npos);
  }
}

TEST(Cli, CustomGridConfigRuns) {
  const auto out = scratch("custom");
  ASSERT_EQ(run("simulate --config " + (kConfigs / "custom_grid.ini").string() + " --out " + out.string()).status, 0);
  const auto text = slurp(out / "path_n256_2.csv");
  EXPECT_NE(text.find("# centered = 1"), std::string::npos);
  EXPECT_NE(text.find("# added_mean = 5"), std::string::npos);
}
