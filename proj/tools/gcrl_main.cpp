// gcrl: command line front end.
//
//   gcrl run     fit + segment + score over seeds, write artifacts
//   gcrl sweep   Cartesian grid over lambda0, lambda1, lambda2, h
//   gcrl synth   write a synthetic sequence
//   gcrl convert CSV <-> binary feature files
//
// Exit codes: 0 success, 1 numerical failure, 2 I/O or configuration error.

#include "gcrl/experiment.hpp"
#include "gcrl/io.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace gcrl;
namespace fs = std::filesystem;

constexpr int kExitNumerical = 1;
constexpr int kExitConfig = 2;

struct SolverFlags {
  std::optional<double> lambda0, lambda1, lambda2, rho, h, inner_gd_step, tol;
  std::optional<int> s, max_outer_iters, inner_gd_iters;
  std::optional<std::string> mode;

  void add(CLI::App& app) {
    app.add_option("--lambda0", lambda0, "reconstruction weight");
    app.add_option("--lambda1", lambda1, "code ridge weight");
    app.add_option("--lambda2", lambda2, "temporal smoothness weight");
    app.add_option("--rho", rho, "ADMM penalty");
    app.add_option("--h", h, "similarity kernel bandwidth");
    app.add_option("--s", s, "temporal window half-width");
    app.add_option("--max-outer-iters", max_outer_iters);
    app.add_option("--inner-gd-iters", inner_gd_iters);
    app.add_option("--inner-gd-step", inner_gd_step);
    app.add_option("--tol", tol, "stopping tolerance on the primal residuals");
    app.add_option("--mode", mode, "full or tsc")->check(CLI::IsMember({"full", "tsc"}));
  }

  void apply(SolverConfig& c) const {
    if (lambda0) c.lambda0 = *lambda0;
    if (lambda1) c.lambda1 = *lambda1;
    if (lambda2) c.lambda2 = *lambda2;
    if (rho) c.rho = *rho;
    if (h) c.h = *h;
    if (s) c.s = *s;
    if (max_outer_iters) c.max_outer_iters = *max_outer_iters;
    if (inner_gd_iters) c.inner_gd_iters = *inner_gd_iters;
    if (inner_gd_step) c.inner_gd_step = *inner_gd_step;
    if (tol) c.tol = *tol;
    if (mode) c.mode = solver_mode_from_string(*mode);
  }
};

struct SynthFlags {
  std::optional<int> n, subspaces, dim, segment_length, repeats;
  std::optional<double> noise_sigma;
  std::optional<std::string> noise_mode;
  std::optional<std::uint64_t> seed;

  void add(CLI::App& app) {
    app.add_option("--synth-n", n, "ambient dimension");
    app.add_option("--synth-subspaces", subspaces, "number of subspaces");
    app.add_option("--synth-dim", dim, "dimension of every subspace");
    app.add_option("--synth-segment-length", segment_length, "frames per segment");
    app.add_option("--synth-repeats", repeats, "passes over the subspaces");
    app.add_option("--synth-noise-sigma", noise_sigma);
    app.add_option("--synth-noise-mode", noise_mode, "none, iid, piecewise-fixed, piecewise-random")
        ->check(CLI::IsMember({"none", "iid", "piecewise-fixed", "piecewise-random"}));
    app.add_option("--synth-seed", seed, "data seed");
  }

  bool any() const {
    return n || subspaces || dim || segment_length || repeats || noise_sigma || noise_mode || seed;
  }

  // Starts from `base` (a config-file spec) when present.
  SynthSpec build(const std::optional<SynthSpec>& base) const {
    SynthSpec spec = base.value_or(cyclic_spec(50, 2, 3, 30, 1, 0));
    const bool reshape = n || subspaces || dim || segment_length || repeats;
    if (reshape) {
      const int seg_len = segment_length.value_or(
          spec.segments.empty() ? 30 : spec.segments.front().length);
      const int m = subspaces.value_or(spec.M);
      const int reps = repeats.value_or(
          std::max<int>(1, static_cast<int>(spec.segments.size()) / std::max(1, spec.M)));
      const int d = dim.value_or(spec.dims.empty() ? 3 : spec.dims.front());
      SynthSpec shaped = cyclic_spec(n.value_or(spec.n), m, d, seg_len, reps, spec.seed);
      shaped.noise_sigma = spec.noise_sigma;
      shaped.noise_mode = spec.noise_mode;
      spec = shaped;
    }
    if (seed) spec.seed = *seed;
    if (noise_sigma) spec.noise_sigma = *noise_sigma;
    if (noise_mode) spec.noise_mode = noise_mode_from_string(*noise_mode);
    spec.validate();
    return spec;
  }
};

struct ExperimentFlags {
  std::optional<std::string> config, input, labels, output_dir;
  std::optional<int> k, r;
  std::optional<std::vector<std::uint64_t>> seeds;
  SolverFlags solver;
  SynthFlags synth;

  void add(CLI::App& app) {
    app.add_option("--config", config, "JSON experiment file; flags override its values");
    app.add_option("--input", input, "feature file (CSV or binary)");
    app.add_option("--labels", labels, "ground-truth label CSV");
    app.add_option("--output-dir", output_dir,
                   std::string("artifact directory (default $") + kOutputDirEnv + " or gcrl-out)");
    app.add_option("--k", k, "cluster count (default: distinct labels)");
    app.add_option("--r", r, "dictionary atoms (default: 2k)");
    app.add_option("--seeds", seeds, "repeat seeds")->delimiter(',');
    solver.add(app);
    synth.add(app);
  }

  ExperimentConfig build() const {
    ExperimentConfig cfg;
    if (config) {
      cfg = load_config_file(*config);
    } else {
      cfg.output_dir = default_output_dir();
    }
    if (input) {
      cfg.input = *input;
      cfg.synth.reset();
    }
    if (labels) cfg.labels = *labels;
    if (synth.any()) {
      cfg.synth = synth.build(cfg.synth);
      cfg.input.reset();
      cfg.labels.reset();
    }
    if (output_dir) cfg.output_dir = *output_dir;
    if (k) cfg.k = *k;
    if (r) cfg.r = *r;
    if (seeds) cfg.seeds = *seeds;
    solver.apply(cfg.solver);
    cfg.validate();
    return cfg;
  }
};

std::string pm(const MeanStd& m) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f +- %.4f", m.mean, m.std);
  return buf;
}

int cmd_run(const ExperimentFlags& flags) {
  const ExperimentConfig cfg = flags.build();
  const ExperimentResult res = run_experiment(cfg);
  std::cout << "sequence " << res.sequence_name << ", k=" << res.k << ", mode "
            << to_string(cfg.solver.mode) << ", " << res.runs.size() << " seeds\n";
  for (const auto& run : res.runs) {
    std::cout << "  seed " << run.seed << ": " << run.fit.iterations_run << " iterations"
              << (run.fit.converged ? " (converged)" : "");
    if (run.metrics) std::cout << ", acc " << run.metrics->acc << ", nmi " << run.metrics->nmi;
    std::cout << '\n';
    for (const auto& w : run.fit.warnings) std::cerr << "warning: seed " << run.seed << ": " << w << '\n';
  }
  if (res.has_metrics) std::cout << "ACC " << pm(res.acc) << "\nNMI " << pm(res.nmi) << '\n';
  for (const auto& p : res.artifacts) std::cout << "wrote " << p.string() << '\n';
  return 0;
}

int cmd_sweep(const ExperimentFlags& flags, const SweepGrid& grid) {
  ExperimentConfig cfg = flags.build();
  if (!grid.lambda0.empty()) cfg.grid.lambda0 = grid.lambda0;
  if (!grid.lambda1.empty()) cfg.grid.lambda1 = grid.lambda1;
  if (!grid.lambda2.empty()) cfg.grid.lambda2 = grid.lambda2;
  if (!grid.h.empty()) cfg.grid.h = grid.h;
  const SweepResult res = run_sweep(cfg);
  for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << "lambda0 lambda1 lambda2 h : ACC | NMI\n";
  for (const auto& row : res.rows) {
    std::cout << row.lambda0 << ' ' << row.lambda1 << ' ' << row.lambda2 << ' ' << row.h << " : "
              << pm(row.acc) << " | " << pm(row.nmi) << '\n';
  }
  if (res.table) std::cout << "wrote " << res.table->string() << '\n';
  return 0;
}

bool is_binary_path(const fs::path& p) { return p.extension() == ".gcrl" || p.extension() == ".bin"; }

fs::path sibling_labels(const fs::path& p) {
  return p.parent_path() / (p.stem().string() + ".labels.csv");
}

void write_sequence(const FeatureSequence& seq, const fs::path& out,
                    const std::optional<std::string>& labels_out) {
  if (is_binary_path(out)) {
    write_binary(out, seq);
    std::cout << "wrote " << out.string() << '\n';
    return;
  }
  write_csv_matrix(out, seq.features);
  std::cout << "wrote " << out.string() << '\n';
  if (seq.labels) {
    const fs::path lp = labels_out ? fs::path(*labels_out) : sibling_labels(out);
    write_labels_csv(lp, *seq.labels);
    std::cout << "wrote " << lp.string() << '\n';
  }
}

int cmd_synth(const SynthFlags& flags, const std::optional<std::string>& config,
              const std::string& out, const std::optional<std::string>& labels_out) {
  std::optional<SynthSpec> base;
  if (config) base = load_config_file(*config).synth;
  const SynthSpec spec = flags.build(base);
  write_sequence(generate_noisy(spec), out, labels_out);
  return 0;
}

int cmd_convert(const std::string& in, const std::string& out,
                const std::optional<std::string>& labels,
                const std::optional<std::string>& labels_out) {
  // raw conversion: values are copied without normalization
  FeatureSequence seq;
  if (is_binary_features(in)) {
    seq = read_binary(in);
  } else {
    seq.features = read_csv_matrix(in);
  }
  if (labels) seq.labels = read_labels_csv(*labels);
  if (seq.labels && static_cast<Eigen::Index>(seq.labels->size()) != seq.features.cols()) {
    throw IoError("dimension mismatch: " + std::to_string(seq.labels->size()) + " labels for " +
                  std::to_string(seq.features.cols()) + " frames");
  }
  write_sequence(seq, out, labels_out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph-constrained temporal subspace clustering"};
  app.set_help_flag("--help", "print help and exit");
  app.require_subcommand(1);

  ExperimentFlags run_flags;
  CLI::App* run = app.add_subcommand("run", "fit, segment and score a sequence over seeds");
  run_flags.add(*run);

  ExperimentFlags sweep_flags;
  SweepGrid grid;
  CLI::App* sweep = app.add_subcommand("sweep", "grid search over lambda0, lambda1, lambda2, h");
  sweep_flags.add(*sweep);
  sweep->add_option("--grid-lambda0", grid.lambda0)->delimiter(',');
  sweep->add_option("--grid-lambda1", grid.lambda1)->delimiter(',');
  sweep->add_option("--grid-lambda2", grid.lambda2)->delimiter(',');
  sweep->add_option("--grid-h", grid.h)->delimiter(',');

  SynthFlags synth_flags;
  std::optional<std::string> synth_config, synth_labels_out;
  std::string synth_out;
  CLI::App* synth = app.add_subcommand("synth", "write a synthetic union-of-subspaces sequence");
  synth_flags.add(*synth);
  synth->add_option("--config", synth_config, "JSON file whose synth section is the base spec");
  synth->add_option("--out", synth_out, "output file (.gcrl/.bin for binary, else CSV)")->required();
  synth->add_option("--labels-out", synth_labels_out, "label CSV (default <out stem>.labels.csv)");

  std::string convert_in, convert_out;
  std::optional<std::string> convert_labels, convert_labels_out;
  CLI::App* convert = app.add_subcommand("convert", "convert feature files between CSV and binary");
  convert->add_option("input", convert_in, "source file (format detected)")->required();
  convert->add_option("output", convert_out, "destination (.gcrl/.bin for binary, else CSV)")->required();
  convert->add_option("--labels", convert_labels, "label CSV to attach");
  convert->add_option("--labels-out", convert_labels_out, "label CSV written next to a CSV output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (run->parsed()) return cmd_run(run_flags);
    if (sweep->parsed()) return cmd_sweep(sweep_flags, grid);
    if (synth->parsed()) return cmd_synth(synth_flags, synth_config, synth_out, synth_labels_out);
    if (convert->parsed()) return cmd_convert(convert_in, convert_out, convert_labels, convert_labels_out);
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}
