#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <iostream>

#include "kslab/config.hpp"
#include "kslab/experiment.hpp"
#include "kslab/report.hpp"

using namespace kslab;

namespace {

void print_issues(const ConfigError& e) {
  for (const auto& i : e.issues()) {
    if (i.line > 0)
      std::cerr << "line " << i.line << ": ";
    else
      std::cerr << "missing: ";
    std::cerr << errc_name(i.code) << ": " << i.message << "\n";
  }
}

int plot_csv(const std::string& csv, const std::string& out, bool logx, bool logy) {
  const CsvTable t = read_csv(csv);
  if (t.header.size() < 2) fail(Errc::empty_series, "plot: need at least two columns in " + csv);
  std::vector<PlotSeries> series;
  std::vector<double> x;
  for (const auto& r : t.rows) x.push_back(r[0]);
  for (std::size_t c = 1; c < t.header.size(); ++c) {
    PlotSeries s{t.header[c], x, {}};
    for (const auto& r : t.rows) s.y.push_back(r[c]);
    series.push_back(std::move(s));
  }
  PlotStyle st;
  st.title = csv;
  st.xlabel = t.header[0];
  st.logx = logx;
  st.logy = logy;
  write_text(out, emit_plot(series, st));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kinetic stability lab"};
  app.require_subcommand(1);
  spdlog::set_level(spdlog::level::warn);

  std::string config_path, out_dir;
  int jobs = 1;
  std::vector<CLI::App*> runs;
  for (const auto& kind : experiment_kinds) {
    auto* sub = app.add_subcommand(kind, "run a " + kind + " experiment");
    sub->add_option("--config", config_path, "config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--jobs", jobs, "parallel sweep points")->check(CLI::PositiveNumber);
    sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
    runs.push_back(sub);
  }
  auto* validate = app.add_subcommand("validate", "check a config without running it");
  validate->add_option("--config", config_path, "config file")->required()->check(CLI::ExistingFile);

  std::string csv, svg;
  bool logx = false, logy = false;
  auto* plot = app.add_subcommand("plot", "render a CSV as SVG");
  plot->add_option("--csv", csv, "input table")->required()->check(CLI::ExistingFile);
  plot->add_option("--out", svg, "output svg")->required();
  plot->add_flag("--logx", logx);
  plot->add_flag("--logy", logy);

  CLI11_PARSE(app, argc, argv);

  try {
    if (plot->parsed()) return plot_csv(csv, svg, logx, logy);
    const ExperimentConfig cfg = load_config(config_path);
    if (validate->parsed()) {
      std::cout << "ok " << cfg.kind << "\n";
      return 0;
    }
    for (auto* sub : runs) {
      if (!sub->parsed()) continue;
      if (sub->get_name() != cfg.kind) {
        std::cerr << "config kind '" << cfg.kind << "' does not match subcommand '" << sub->get_name() << "'\n";
        return 2;
      }
      const RunOutcome r = run_experiment(cfg, {out_dir, jobs});
      std::cout << r.verdict << " " << r.out_dir << "\n";
      return r.exit_code;
    }
  } catch (const ConfigError& e) {
    print_issues(e);
    return 2;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  return 0;
}
