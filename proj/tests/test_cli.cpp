#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "lcns/cli.hpp"
#include "lcns/errors.hpp"
#include "lcns/io.hpp"

using namespace lcns;
namespace fs = std::filesystem;

namespace {

const char* kUnitSpectrum = R"(# unit barotropic spectrum
[system]
kind = barotropic

[params]
rho_bar = 1
u_bar = 1
mu0 = 1
b = 1

[command]
name = spectrum
N = 4
)";

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("lcns_cli_test_" + name);
  fs::remove_all(d);
  return d;
}

cli::RunResult run_text(const std::string& text, const fs::path& out, bool verify = false, int threads = 1) {
  cli::RunOptions opt;
  opt.out_dir = out.string();
  opt.verify = verify;
  opt.threads = threads;
  std::ostringstream o, e;
  return cli::run_config(cli::parse_config(text), opt, o, e);
}

std::string expect_config_error(const std::string& text) {
  try {
    cli::parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  ADD_FAILURE() << "no ConfigError";
  return "";
}

std::string header(const std::string& command) {
  return "[system]\nkind = barotropic\n[params]\nrho_bar = 1\nu_bar = 0.9\nmu0 = 1\nb = 1.3\n[command]\nname = " + command +
         "\n";
}

}  // namespace

TEST(Config, DefaultsFilledIn) {
  const auto cfg = cli::parse_config(kUnitSpectrum);
  EXPECT_EQ(cfg.command, "spectrum");
  EXPECT_EQ(cfg.integer("N"), 4);
  EXPECT_EQ(cfg.real("clustering_tol"), 1e-8);
  EXPECT_EQ(cfg.out_dir, "out");
  EXPECT_EQ(cfg.seed(), 0u);
}

TEST(Config, MissingRequiredKnobNamed) {
  const auto msg = expect_config_error(header("observe"));
  EXPECT_NE(msg.find("'T'"), std::string::npos) << msg;
}

TEST(Config, UnknownKnobReportsLine) {
  const auto msg = expect_config_error(header("spectrum") + "bogus = 3\n");
  EXPECT_NE(msg.find("line 10"), std::string::npos) << msg;
  EXPECT_NE(msg.find("bogus"), std::string::npos) << msg;
}

TEST(Config, OutOfRangeValue) {
  const auto msg = expect_config_error(header("observe") + "T = -1\n");
  EXPECT_NE(msg.find("key 'T'"), std::string::npos) << msg;
  EXPECT_NE(expect_config_error(header("spectrum") + "N = 2.5\n").find("'N'"), std::string::npos);
  EXPECT_NE(expect_config_error(header("observe") + "T = 8\nchannel = pressure\n").find("channel"), std::string::npos);
}

TEST(Config, MissingParameter) {
  const auto msg = expect_config_error("[system]\nkind = barotropic\n[params]\nrho_bar = 1\nu_bar = 1\nmu0 = 1\n[command]\nname = spectrum\n");
  EXPECT_NE(msg.find("'b'"), std::string::npos) << msg;
}

TEST(Config, InvalidParameterValue) {
  const auto msg = expect_config_error("[system]\nkind = barotropic\n[params]\nrho_bar = 1\nu_bar = 1\nmu0 = -1\nb = 1\n[command]\nname = spectrum\n");
  EXPECT_NE(msg.find("mu0"), std::string::npos) << msg;
}

TEST(Config, UnknownCommandAndSection) {
  EXPECT_NE(expect_config_error(header("dance")).find("dance"), std::string::npos);
  EXPECT_NE(expect_config_error(header("spectrum") + "[extra]\nx = 1\n").find("extra"), std::string::npos);
}

TEST(Config, PhysicalBarotropicParameters) {
  const auto cfg = cli::parse_config(
      "[system]\nkind = barotropic\n[params]\nrho_bar = 2\nu_bar = 1\na = 1\ngamma = 2\nlambda = 1\nmu = 1\n[command]\nname = spectrum\n");
  const auto& q = barotropic(cfg.params);
  EXPECT_NEAR(q.mu0, 1.5, 1e-15);
  EXPECT_NEAR(q.b, 2.0, 1e-15);
}

TEST(Config, NonBarotropic) {
  const auto cfg = cli::parse_config(
      "[system]\nkind = nonbarotropic\n[params]\nrho_bar = 1\nu_bar = 1\ntheta_bar = 0.5\nlambda0 = 1\nkappa0 = 2\nR = 1\nc0 = 1\n"
      "[command]\nname = witness-degenerate\n");
  EXPECT_EQ(dim(cfg.params), 3);
}

TEST(Run, SpectrumRowForDoubleRoot) {
  const auto out = scratch("spectrum");
  const auto r = run_text(kUnitSpectrum, out);
  ASSERT_EQ(r.exit_code, 0);
  const auto csv = io::read_file(out / "spectrum.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "n,branch,re,im,alg_mult,residual");
  EXPECT_NE(csv.find("\n2,h,-2.0,2.0,2,"), std::string::npos) << csv;
}

TEST(Run, NotDegenerateExitsTwo) {
  const auto r = run_text(header("witness-degenerate"), scratch("notdeg"));
  EXPECT_EQ(r.exit_code, 2);
}

TEST(Run, ManifestListsEveryOutputWithHash) {
  const auto out = scratch("manifest");
  const auto r = run_text(kUnitSpectrum, out, true);
  ASSERT_EQ(r.exit_code, 0);
  const auto m = io::Json::parse(io::read_file(out / "manifest.json"));
  EXPECT_EQ(m["version"], cli::kVersion);
  EXPECT_EQ(m["config_sha256"], io::sha256_hex(kUnitSpectrum));
  EXPECT_EQ(m["knobs"]["N"], 4);
  std::set<std::string> listed;
  for (const auto& e : m["outputs"]) {
    const std::string f = e["file"];
    listed.insert(f);
    EXPECT_EQ(e["sha256"], io::sha256_hex(io::read_file(out / f))) << f;
  }
  for (const auto& entry : fs::directory_iterator(out)) {
    const auto name = entry.path().filename().string();
    if (name != "manifest.json") EXPECT_TRUE(listed.count(name)) << name;
  }
  const auto v = io::Json::parse(io::read_file(out / "verify.json"));
  EXPECT_TRUE(v["pass"].get<bool>());
}

TEST(Run, DeterministicBytes) {
  const std::string text = header("observe") + "T = 8\nN = 8\ntrials = 6\nseed = 42\n";
  const auto a = scratch("det_a"), b = scratch("det_b");
  ASSERT_EQ(run_text(text, a, false, 1).exit_code, 0);
  ASSERT_EQ(run_text(text, b, false, 3).exit_code, 0);
  for (const auto& entry : fs::directory_iterator(a)) {
    const auto name = entry.path().filename();
    EXPECT_EQ(io::read_file(a / name), io::read_file(b / name)) << name;
  }
}

TEST(Run, ObserveReportFields) {
  const auto out = scratch("observe");
  ASSERT_EQ(run_text(header("observe") + "T = 8\nN = 6\ntrials = 3\nseed = 7\n", out, true).exit_code, 0);
  const auto j = io::Json::parse(io::read_file(out / "report.json"));
  for (const char* k : {"channel", "T", "N", "energy", "energy_err", "norm", "quotient", "hypotheses", "seed"})
    EXPECT_TRUE(j.contains(k)) << k;
  EXPECT_EQ(j["seed"], 7);
  EXPECT_GT(j["quotient"].get<double>(), 0.0);
  EXPECT_EQ(io::read_file(out / "signal.csv").substr(0, 11), "t,re_y,im_y");
}

TEST(Run, SynthesizeArtifacts) {
  const auto out = scratch("synth");
  ASSERT_EQ(run_text(header("synthesize") + "T = 8\nN = 3\n", out, true).exit_code, 0);
  const auto j = io::Json::parse(io::read_file(out / "verification.json"));
  for (const char* k : {"in_trunc_residual", "spillover", "control_norm", "rank", "discarded_svals"})
    EXPECT_TRUE(j.contains(k)) << k;
  const auto m = io::Json::parse(io::read_file(out / "manifest.json"));
  EXPECT_EQ(m["knobs"]["N_verify"], 6);
}

TEST(Run, WitnessJsonShape) {
  const auto out = scratch("regularity");
  ASSERT_EQ(run_text(header("witness-regularity"), out).exit_code, 0);
  const auto j = io::Json::parse(io::read_file(out / "witness.json"));
  for (const char* k : {"type", "params", "channel", "table", "slope", "seed"}) EXPECT_TRUE(j.contains(k)) << k;
  EXPECT_EQ(j["table"].size(), 4u);
}

TEST(Run, FdmTrajectoryGated) {
  const auto out = scratch("fdm");
  ASSERT_EQ(run_text(header("validate-fdm") + "T = 0.01\nM = 128\ndt = 1e-3\nN = 4\nconvergence = false\n", out).exit_code, 0);
  EXPECT_TRUE(fs::exists(out / "fdm.json"));
  EXPECT_FALSE(fs::exists(out / "trajectory.csv"));
  const auto out2 = scratch("fdm_traj");
  ASSERT_EQ(run_text(header("validate-fdm") + "T = 0.01\nM = 128\ndt = 1e-3\nN = 4\ntrajectory = true\nrecord_every = 5\n", out2).exit_code, 0);
  EXPECT_TRUE(fs::exists(out2 / "trajectory.csv"));
}

TEST(Binary, ExitCodes) {
  const char* exe = std::getenv("LCNS_CLI");
  if (!exe) GTEST_SKIP() << "LCNS_CLI not set";
  const auto dir = scratch("binary");
  fs::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return (dir / name).string();
  };
  auto status = [&](const std::string& args) {
    const int s = std::system((std::string(exe) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(status("run " + write("ok.ini", kUnitSpectrum) + " --out " + (dir / "ok").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "ok" / "manifest.json"));
  EXPECT_EQ(status("run " + write("bad.ini", header("observe")) + " --out " + (dir / "bad").string()), 1);
  EXPECT_EQ(status("run " + (dir / "missing.ini").string()), 1);
  EXPECT_EQ(status("run " + write("nd.ini", header("witness-degenerate")) + " --out " + (dir / "nd").string()), 2);
  EXPECT_EQ(status("run " + write("v.ini", kUnitSpectrum) + " --verify --threads 2 --out " + (dir / "v").string()), 0);
  EXPECT_EQ(status("--version"), 0);
  EXPECT_EQ(status("run"), 1);
}
