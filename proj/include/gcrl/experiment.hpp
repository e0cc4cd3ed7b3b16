// End-to-end experiment runner: fit -> code affinity -> normalized cut ->
// metrics, repeated over seeds, plus Cartesian hyperparameter sweeps.

#ifndef GCRL_EXPERIMENT_HPP
#define GCRL_EXPERIMENT_HPP

#include "gcrl/clustering.hpp"
#include "gcrl/core.hpp"
#include "gcrl/eval.hpp"
#include "gcrl/optim.hpp"
#include "gcrl/synthdata.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace gcrl {

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "GCRL_OUTPUT_DIR";

struct SweepGrid {
  std::vector<double> lambda0;
  std::vector<double> lambda1;
  std::vector<double> lambda2;
  std::vector<double> h;

  bool empty() const { return lambda0.empty() && lambda1.empty() && lambda2.empty() && h.empty(); }
};

struct ExperimentConfig {
  std::optional<std::filesystem::path> input;
  std::optional<std::filesystem::path> labels;
  std::optional<SynthSpec> synth;
  SolverConfig solver;
  // dictionary size; 2 * k when unset
  std::optional<int> r;
  // cluster count; taken from the number of distinct labels when unset
  std::optional<int> k;
  std::filesystem::path output_dir;
  SweepGrid grid;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};

  void validate() const;
};

/// Output directory from GCRL_OUTPUT_DIR, else "gcrl-out".
std::filesystem::path default_output_dir();

/// Parses a JSON experiment description (see README for the keys).
ExperimentConfig config_from_json_text(const std::string& text);
ExperimentConfig load_config_file(const std::filesystem::path& path);

FeatureSequence load_sequence(const ExperimentConfig& cfg);
int resolve_k(const ExperimentConfig& cfg, const FeatureSequence& seq);

struct RunOutcome {
  std::uint64_t seed = 0;
  FitResult fit;
  Segmentation segmentation;
  std::optional<MetricReport> metrics;
};

/// One fit + segmentation (+ metrics when labels are present). The seed
/// drives both the solver initialization and the k-means restarts.
RunOutcome run_once(const FeatureSequence& seq, SolverConfig solver, int k, std::uint64_t seed);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1)
};

MeanStd mean_std(const std::vector<double>& values);

struct ExperimentResult {
  std::string sequence_name;
  int k = 0;
  std::vector<RunOutcome> runs;
  MeanStd acc;
  MeanStd nmi;
  bool has_metrics = false;
  std::vector<std::filesystem::path> artifacts;
};

/// Runs every seed on the configured sequence. When output_dir is non-empty,
/// writes metrics.csv, summary.csv, diagnostics.csv, labels.csv and
/// segments.svg under it.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Same, on an already-loaded sequence.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const FeatureSequence& seq);

struct SweepRow {
  double lambda0 = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double h = 0.0;
  MeanStd acc;
  MeanStd nmi;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // sorted by (lambda0, lambda1, lambda2, h)
  std::vector<std::string> warnings;
  std::optional<std::filesystem::path> table;
};

/// Cartesian grid over the configured axes; axes left empty use the base
/// solver value. Duplicate grid values are dropped with a warning. Writes
/// sweep.csv under output_dir when it is non-empty.
SweepResult run_sweep(const ExperimentConfig& cfg);
SweepResult run_sweep(const ExperimentConfig& cfg, const FeatureSequence& seq);

/// Two-row (plus one per seed) strip chart of ground-truth and predicted
/// labels over time.
std::string render_segment_svg(const std::optional<Labels>& truth,
                               const std::vector<std::pair<std::string, Labels>>& predictions);

}  // namespace gcrl

#endif  // GCRL_EXPERIMENT_HPP
