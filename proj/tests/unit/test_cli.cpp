#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "kslab/config.hpp"
#include "kslab/experiment.hpp"
#include "kslab/report.hpp"

using namespace kslab;
namespace fs = std::filesystem;

namespace {

const fs::path& scratch() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / ("kslab_cli_test_" + std::to_string(getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string l1_config(const std::string& out) {
  return "[experiment]\nkind = l1_stability\nseed = 7\n\n"
         "[grid]\nn_x = 32\nn_v = 32\nlength_x = 16\nv_max = 6\n\n"
         "[kernel]\ntype = regularized_coulomb\nepsilon = 0.5\n\n"
         "[initial]\nfamily = maxwellian\nmass = 1\ntemperature = 1\n\n"
         "[perturbation]\nmode = 1\namplitude = 0.05\n\n"
         "[time]\nt_end = 0.5\ndt = 0.05\n\n"
         "[output]\ndir = " + out + "\n";
}

std::vector<ConfigIssue> issues_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.issues();
  }
  FAIL("config was accepted");
  return {};
}

bool mentions(const std::vector<ConfigIssue>& issues, const std::string& needle) {
  return std::any_of(issues.begin(), issues.end(), [&](const ConfigIssue& i) { return i.message.find(needle) != std::string::npos; });
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(KSLAB_CLI) + " " + args + " > /dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("config: empty file lists every missing key") {
  const auto issues = issues_of("");
  for (const char* k : {"experiment.kind", "experiment.seed", "grid.length_x", "kernel.type", "initial.family",
                        "time.t_end", "time.dt", "output.dir"}) {
    CHECK(mentions(issues, std::string("'") + k + "'"));
  }
  for (const auto& i : issues) CHECK(i.line == 0);
}

TEST_CASE("config: canonical text round-trips byte for byte") {
  const std::string text = l1_config("/tmp/x");
  const ExperimentConfig c = parse_config(text);
  CHECK(serialize(c) == text);
  CHECK(c.kind == "l1_stability");
  CHECK(c.n_x == 32);
  CHECK(c.perturbation_mode == 1);

  // Comments, spacing and section order do not matter; the echo is canonical.
  std::string messy = "# a comment\n[output]\ndir=/tmp/x\n" + l1_config("/tmp/x").substr(0, l1_config("/tmp/x").find("[output]"));
  messy.replace(messy.find("seed = 7"), 8, "seed   =   7   # trailing");
  const ExperimentConfig m = parse_config(messy);
  CHECK(serialize(m) == text);
  CHECK(serialize(parse_config(serialize(m))) == serialize(m));
}

TEST_CASE("config: unknown keys and bad values carry line numbers") {
  std::string text = l1_config("/tmp/x");
  text.replace(text.find("n_x = 32"), 8, "n_x = abc");
  text.replace(text.find("temperature = 1"), 15, "temperatur = 1");
  const auto issues = issues_of(text);
  REQUIRE(issues.size() >= 2);
  bool unknown = false, type = false;
  for (const auto& i : issues) {
    if (i.code == Errc::unknown_key) {
      unknown = true;
      CHECK(i.line == 18);
    }
    if (i.code == Errc::type_error && i.line == 6) type = true;
  }
  CHECK(unknown);
  CHECK(type);
}

TEST_CASE("config: quantum grids must satisfy the pairing") {
  const std::string base =
      "[experiment]\nkind = simulate_hartree\nseed = 1\n[grid]\nn_x = 64\nlength_x = 16\n"
      "[kernel]\ntype = gaussian\n[quantum]\nhbar = 0.2\n[initial]\nfamily = gaussian_bump\n"
      "[time]\nt_end = 0.1\ndt = 0.01\n[output]\ndir = /tmp/x\n";
  const ExperimentConfig ok = parse_config(base);
  CHECK(ok.n_v == 64);
  CHECK(ok.v_max == doctest::Approx(3.14159265358979 * 0.2 * 64 / 16));

  std::string bad = base;
  bad.replace(bad.find("length_x = 16"), 13, "length_x = 16\nn_v = 32\nv_max = 3");
  const auto issues = issues_of(bad);
  int compat = 0;
  for (const auto& i : issues) compat += i.code == Errc::compatibility_error;
  CHECK(compat == 2);
  CHECK(mentions(issues, "v_max = pi*hbar*n_x/L"));

  std::string classical = l1_config("/tmp/x");
  classical.replace(classical.find("[kernel]"), 8, "[quantum]\nhbar = 0.1\n[kernel]");
  CHECK(mentions(issues_of(classical), "classical experiments take no hbar"));
}

TEST_CASE("plots") {
  const std::string one = emit_plot({{"p", {1.0}, {2.0}}}, {});
  CHECK(one.find("<svg") != std::string::npos);
  CHECK(one.find("</svg>") != std::string::npos);
  CHECK(one.find("href") == std::string::npos);
  std::size_t markers = 0;
  for (std::size_t at = one.find("<circle"); at != std::string::npos; at = one.find("<circle", at + 1)) ++markers;
  CHECK(markers == 1);

  PlotStyle st;
  st.logx = st.logy = st.fit_guide = true;
  const std::string rate = emit_plot({{"d", {0.4, 0.2, 0.1, 0.05}, {0.8, 0.4, 0.2, 0.1}}}, st);
  CHECK(rate.find("slope=1.00") != std::string::npos);

  try {
    emit_plot({{"empty", {}, {}}}, {});
    FAIL("empty plot accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::empty_series);
  }
}

TEST_CASE("csv tables") {
  const CsvTable t{{"t [time]", "x [1]"}, {{0.1, 1.0 / 3.0}, {0.2, -2.5e-17}}};
  const std::string text = to_csv(t);
  CHECK(text.rfind("# format_version = 1\n", 0) == 0);
  const fs::path p = scratch() / "t.csv";
  write_csv(p.string(), t);
  const CsvTable back = read_csv(p.string());
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);
  CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("run_experiment: artifacts, determinism, verdicts") {
  const fs::path a = scratch() / "l1a", b = scratch() / "l1b";
  const ExperimentConfig c = parse_config(l1_config(a.string()));
  const RunOutcome r1 = run_experiment(c);
  CHECK(r1.exit_code == 0);
  CHECK(r1.verdict == "PASS");
  for (const char* f : {"result.csv", "summary.txt", "meta.txt", "plot.svg"}) CHECK(fs::exists(a / f));
  CHECK_FALSE(fs::exists(a / "FAILED"));
  CHECK(slurp(a / "summary.txt").rfind("PASS, ", 0) == 0);
  CHECK(slurp(a / "meta.txt").find(serialize(c)) != std::string::npos);

  const RunOutcome r2 = run_experiment(c, {b.string(), 1});
  CHECK(r2.out_dir == b.string());
  CHECK(slurp(a / "result.csv") == slurp(b / "result.csv"));

  // Envelope table: every header names its unit and the bound sits above the metric.
  const CsvTable t = read_csv((a / "result.csv").string());
  for (const auto& h : t.header) CHECK(h.find('[') != std::string::npos);
  for (const auto& row : t.rows) CHECK(row[1] <= row[2] * 1.1);

  // A declared constant of 0 with no slack cannot absorb any growth.
  std::string strict = l1_config((scratch() / "strict").string());
  strict.replace(strict.find("type = regularized_coulomb\nepsilon = 0.5"), 40, "type = gaussian\nsigma = 1\nsign = -1");
  strict.replace(strict.find("temperature = 1"), 15, "temperature = 0.2");
  strict.replace(strict.find("t_end = 0.5"), 11, "t_end = 1");
  strict += "\n[stability]\nslack = 0\nconstant = 0\n";
  const RunOutcome f = run_experiment(parse_config(strict));
  CHECK(f.exit_code == 1);
  CHECK(f.verdict == "FAIL");
  CHECK(fs::exists(scratch() / "strict" / "FAILED"));
  CHECK(slurp(scratch() / "strict" / "summary.txt").rfind("FAIL, ", 0) == 0);
}

TEST_CASE("run_experiment: rate study and W_hbar summary") {
  const std::string rate =
      "[experiment]\nkind = rate_study\nseed = 1\n[grid]\nlength_x = 16\nv_required = 2\nn_min = 32\n"
      "[kernel]\ntype = gaussian\n[quantum]\nhbar_sweep = 0.4, 0.2, 0.1, 0.05\n"
      "[initial]\nfamily = gaussian_bump\nvar_v = 0.25\n[time]\nt_end = 0.02\ndt = 0.01\n[output]\ndir = " +
      (scratch() / "rate").string() + "\n";
  const RunOutcome r = run_experiment(parse_config(rate));
  CHECK(r.exit_code != 2);
  const CsvTable t = read_csv((scratch() / "rate" / "result.csv").string());
  CHECK(t.rows.size() == 4);
  CHECK(slurp(scratch() / "rate" / "plot.svg").find("slope=") != std::string::npos);

  const std::string wh =
      "[experiment]\nkind = wh_stability\nseed = 1\n[grid]\nn_x = 32\nlength_x = 16\n"
      "[kernel]\ntype = regularized_coulomb\nepsilon = 0.5\n[quantum]\nhbar = 0.4\n"
      "[initial]\nfamily = gaussian_bump\nvar_v = 0.15\n[time]\nt_end = 0.04\ndt = 0.02\nrecord_every = 1\n[output]\ndir = " +
      (scratch() / "wh").string() + "\n";
  const RunOutcome w = run_experiment(parse_config(wh));
  CHECK(w.exit_code != 2);
  const std::string summary = slurp(scratch() / "wh" / "summary.txt");
  CHECK(summary.find("lower<=upper, ") != std::string::npos);
  CHECK((w.exit_code == 0) == (summary.rfind("PASS", 0) == 0));
}

TEST_CASE("command line") {
  const fs::path cfg = scratch() / "cli.cfg";
  write_file(cfg, l1_config((scratch() / "cli_out").string()));
  CHECK(run_cli("validate --config " + cfg.string()) == 0);
  CHECK(run_cli("l1_stability --config " + cfg.string() + " --out " + (scratch() / "cli_alt").string()) == 0);
  CHECK(fs::exists(scratch() / "cli_alt" / "result.csv"));
  CHECK_FALSE(fs::exists(scratch() / "cli_out"));
  // Subcommand and config kind must agree.
  CHECK(run_cli("l2_stability --config " + cfg.string()) == 2);
  CHECK(run_cli("plot --csv " + (scratch() / "cli_alt" / "result.csv").string() + " --out " +
                (scratch() / "p.svg").string()) == 0);
  CHECK(slurp(scratch() / "p.svg").find("<svg") != std::string::npos);

  const fs::path broken = scratch() / "broken.cfg";
  write_file(broken, "[experiment]\nkind = l1_stability\nbogus = 1\n");
  CHECK(run_cli("validate --config " + broken.string()) == 2);
  CHECK(run_cli("l1_stability --config /nonexistent.cfg") != 0);
  fs::remove_all(scratch());
}
