#pragma once

#include <string>
#include <vector>

#include "kslab/config.hpp"
#include "kslab/phase_space.hpp"

namespace kslab {

inline constexpr const char* kslab_version = "0.1.0";

struct RunOptions {
  std::string out_dir;  // overrides output.dir when non-empty
  int jobs = 1;
};

struct RunOutcome {
  int exit_code = 0;  // 0 PASS or completed simulation, 1 FAIL, 2 error
  std::string verdict;
  std::string out_dir;
};

// Caps the requested parallelism by KSLAB_THREADS when set.
int effective_jobs(int requested);

PhaseGrid config_grid(const ExperimentConfig& c);
InteractionKernel config_kernel(const ExperimentConfig& c, const PhaseGrid& grid);
// Named family; with_perturbation applies [perturbation] when present.
KineticDensity config_initial(const ExperimentConfig& c, const PhaseGrid& grid, bool with_perturbation);
// Deterministic probe positions in [-L/4, L/4) from the experiment seed.
std::vector<double> probe_points(std::uint64_t seed, int count, double length_x);

// Writes result.csv, summary.txt, meta.txt and plot.svg (plus per-kind extras) into the output
// directory; on failure or error also a FAILED marker.
RunOutcome run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

}  // namespace kslab
