#include "gcrl/experiment.hpp"
#include "gcrl/io.hpp"

#include "json.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

namespace gcrl {
namespace {

using nlohmann::json;

std::string num(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& known, const std::string& where) {
  for (const auto& item : obj.items()) {
    if (!known.count(item.key())) {
      throw InvalidArgument("config: unknown key '" + item.key() + "' in " + where);
    }
  }
}

template <typename T>
void read_if(const json& obj, const char* key, T& dst) {
  if (obj.contains(key)) dst = obj.at(key).get<T>();
}

SolverConfig solver_from_json(const json& j, SolverConfig base) {
  reject_unknown_keys(j,
                      {"lambda0", "lambda1", "lambda2", "rho", "h", "r", "s", "max_outer_iters",
                       "inner_gd_iters", "inner_gd_step", "tol", "mode", "epsilon_log"},
                      "solver");
  read_if(j, "lambda0", base.lambda0);
  read_if(j, "lambda1", base.lambda1);
  read_if(j, "lambda2", base.lambda2);
  read_if(j, "rho", base.rho);
  read_if(j, "h", base.h);
  read_if(j, "r", base.r);
  read_if(j, "s", base.s);
  read_if(j, "max_outer_iters", base.max_outer_iters);
  read_if(j, "inner_gd_iters", base.inner_gd_iters);
  read_if(j, "inner_gd_step", base.inner_gd_step);
  read_if(j, "tol", base.tol);
  read_if(j, "epsilon_log", base.epsilon_log);
  if (j.contains("mode")) base.mode = solver_mode_from_string(j.at("mode").get<std::string>());
  return base;
}

SynthSpec synth_from_json(const json& j) {
  reject_unknown_keys(j,
                      {"n", "subspaces", "dim", "dims", "segment_length", "repeats", "segments",
                       "noise_sigma", "noise_mode", "seed"},
                      "synth");
  const int n = j.value("n", 50);
  const int subspaces = j.value("subspaces", 2);
  const int dim = j.value("dim", 3);
  const int segment_length = j.value("segment_length", 30);
  const int repeats = j.value("repeats", 1);
  SynthSpec spec = cyclic_spec(n, subspaces, dim, segment_length, repeats, j.value("seed", 0ULL));
  if (j.contains("dims")) spec.dims = j.at("dims").get<std::vector<int>>();
  if (j.contains("segments")) {
    spec.segments.clear();
    for (const auto& seg : j.at("segments")) {
      const auto pair = seg.get<std::vector<int>>();
      if (pair.size() != 2) throw InvalidArgument("config: synth segments are [subspace, length] pairs");
      spec.segments.push_back({pair[0], pair[1]});
    }
  }
  read_if(j, "noise_sigma", spec.noise_sigma);
  if (j.contains("noise_mode")) {
    spec.noise_mode = noise_mode_from_string(j.at("noise_mode").get<std::string>());
  }
  spec.validate();
  return spec;
}

std::vector<double> dedupe_axis(std::vector<double> values, const char* name,
                                std::vector<std::string>& warnings) {
  std::sort(values.begin(), values.end());
  const auto before = values.size();
  values.erase(std::unique(values.begin(), values.end()), values.end());
  if (values.size() != before) {
    warnings.push_back(std::string("duplicate ") + name + " grid values removed (" +
                       std::to_string(before - values.size()) + ")");
  }
  return values;
}

std::filesystem::path artifact(const ExperimentConfig& cfg, const char* name) {
  return cfg.output_dir / name;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

void write_artifacts(const ExperimentConfig& cfg, const FeatureSequence& seq,
                     ExperimentResult& result) {
  std::ostringstream metrics;
  metrics << "seed,acc,nmi,iterations,converged\n";
  for (const auto& run : result.runs) {
    metrics << run.seed << ',' << (run.metrics ? num(run.metrics->acc) : "") << ','
            << (run.metrics ? num(run.metrics->nmi) : "") << ',' << run.fit.iterations_run << ','
            << (run.fit.converged ? 1 : 0) << '\n';
  }
  const auto metrics_path = artifact(cfg, "metrics.csv");
  write_text(metrics_path, metrics.str());

  std::ostringstream summary;
  summary << "metric,mean,std,seeds\n";
  if (result.has_metrics) {
    summary << "acc," << num(result.acc.mean) << ',' << num(result.acc.std) << ','
            << result.runs.size() << '\n';
    summary << "nmi," << num(result.nmi.mean) << ',' << num(result.nmi.std) << ','
            << result.runs.size() << '\n';
  }
  const auto summary_path = artifact(cfg, "summary.csv");
  write_text(summary_path, summary.str());

  std::ostringstream diag;
  diag << "seed,iteration,objective,graph_loss,y_xtilde_fro,y_xtilde_max,u_d_fro,v_z_fro,"
          "sylvester_residual,descent_stalled\n";
  for (const auto& run : result.runs) {
    for (const auto& d : run.fit.diagnostics) {
      diag << run.seed << ',' << d.iteration << ',' << num(d.objective) << ','
           << num(d.graph_loss) << ',' << num(d.primal_y_xtilde_fro) << ','
           << num(d.primal_y_xtilde_max) << ',' << num(d.primal_u_d_fro) << ','
           << num(d.primal_v_z_fro) << ',' << num(d.sylvester_residual) << ','
           << (d.descent_stalled ? 1 : 0) << '\n';
    }
  }
  const auto diag_path = artifact(cfg, "diagnostics.csv");
  write_text(diag_path, diag.str());

  std::ostringstream labels;
  labels << "frame";
  if (seq.labels) labels << ",truth";
  for (const auto& run : result.runs) labels << ",pred_seed" << run.seed;
  labels << '\n';
  for (Eigen::Index t = 0; t < seq.length(); ++t) {
    const auto ti = static_cast<std::size_t>(t);
    labels << t;
    if (seq.labels) labels << ',' << (*seq.labels)[ti];
    for (const auto& run : result.runs) labels << ',' << run.segmentation.labels[ti];
    labels << '\n';
  }
  const auto labels_path = artifact(cfg, "labels.csv");
  write_text(labels_path, labels.str());

  std::vector<std::pair<std::string, Labels>> preds;
  for (const auto& run : result.runs) {
    preds.emplace_back("seed " + std::to_string(run.seed), run.segmentation.labels);
  }
  const auto svg_path = artifact(cfg, "segments.svg");
  write_text(svg_path, render_segment_svg(seq.labels, preds));

  result.artifacts = {metrics_path, summary_path, diag_path, labels_path, svg_path};
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!input && !synth) throw InvalidArgument("experiment: no input file or synthetic spec given");
  if (input && synth) throw InvalidArgument("experiment: give either an input file or a synthetic spec");
  if (labels && !input) throw InvalidArgument("experiment: a label file needs an input file");
  if (seeds.empty()) throw InvalidArgument("experiment: at least one seed is required");
  if (k && *k < 2) throw InvalidArgument("experiment: k must be at least 2");
  if (r && *r < 1) throw InvalidArgument("experiment: r must be at least 1");
  SolverConfig probe = solver;
  if (r) probe.r = *r;
  probe.validate();
}

std::filesystem::path default_output_dir() {
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') {
    return std::filesystem::path(env);
  }
  return std::filesystem::path("gcrl-out");
}

ExperimentConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw InvalidArgument("config: top level must be an object");
  reject_unknown_keys(j, {"input", "labels", "synth", "solver", "r", "k", "output_dir", "seeds", "grid"},
                      "top level");
  ExperimentConfig cfg;
  cfg.output_dir = default_output_dir();
  try {
    if (j.contains("input")) cfg.input = j.at("input").get<std::string>();
    if (j.contains("labels")) cfg.labels = j.at("labels").get<std::string>();
    if (j.contains("synth")) cfg.synth = synth_from_json(j.at("synth"));
    if (j.contains("solver")) cfg.solver = solver_from_json(j.at("solver"), cfg.solver);
    if (j.contains("r")) cfg.r = j.at("r").get<int>();
    if (j.contains("k")) cfg.k = j.at("k").get<int>();
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("grid")) {
      const json& g = j.at("grid");
      reject_unknown_keys(g, {"lambda0", "lambda1", "lambda2", "h"}, "grid");
      read_if(g, "lambda0", cfg.grid.lambda0);
      read_if(g, "lambda1", cfg.grid.lambda1);
      read_if(g, "lambda2", cfg.grid.lambda2);
      read_if(g, "h", cfg.grid.h);
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("config file not found: " + path.string());
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return config_from_json_text(buf.str());
}

FeatureSequence load_sequence(const ExperimentConfig& cfg) {
  if (cfg.input) return ingest(*cfg.input, cfg.labels);
  if (cfg.synth) return generate_noisy(*cfg.synth);
  throw InvalidArgument("experiment: no input file or synthetic spec given");
}

int resolve_k(const ExperimentConfig& cfg, const FeatureSequence& seq) {
  int k = 0;
  if (cfg.k) {
    k = *cfg.k;
  } else if (seq.labels) {
    k = static_cast<int>(std::set<int>(seq.labels->begin(), seq.labels->end()).size());
  } else {
    throw InvalidArgument("experiment: k not given and the sequence has no labels");
  }
  if (k < 2 || k > seq.length()) {
    std::ostringstream msg;
    msg << "experiment: cluster count k=" << k << " must lie in [2, " << seq.length() << "]";
    throw InvalidArgument(msg.str());
  }
  return k;
}

RunOutcome run_once(const FeatureSequence& seq, SolverConfig solver, int k, std::uint64_t seed) {
  solver.seed = seed;
  RunOutcome out;
  out.seed = seed;
  out.fit = fit(seq, solver);
  const CodeAffinity affinity = code_affinity(out.fit.Z);
  if (affinity.floored_columns > 0) {
    out.fit.warnings.push_back(std::to_string(affinity.floored_columns) +
                               " all-zero code columns floored before clustering");
  }
  out.segmentation = normalized_cut(affinity, k, seed);
  if (seq.labels) out.metrics = evaluate(out.segmentation.labels, *seq.labels);
  return out;
}

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  return run_experiment(cfg, load_sequence(cfg));
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const FeatureSequence& seq) {
  if (cfg.seeds.empty()) throw InvalidArgument("experiment: at least one seed is required");
  ExperimentResult result;
  result.sequence_name = seq.name;
  result.k = resolve_k(cfg, seq);
  SolverConfig solver = cfg.solver;
  solver.r = cfg.r.value_or(2 * result.k);

  std::vector<double> accs, nmis;
  for (std::uint64_t seed : cfg.seeds) {
    RunOutcome run = run_once(seq, solver, result.k, seed);
    if (run.metrics) {
      accs.push_back(run.metrics->acc);
      nmis.push_back(run.metrics->nmi);
    }
    result.runs.push_back(std::move(run));
  }
  result.has_metrics = !accs.empty();
  result.acc = mean_std(accs);
  result.nmi = mean_std(nmis);
  if (!cfg.output_dir.empty()) write_artifacts(cfg, seq, result);
  return result;
}

SweepResult run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  return run_sweep(cfg, load_sequence(cfg));
}

SweepResult run_sweep(const ExperimentConfig& cfg, const FeatureSequence& seq) {
  if (cfg.grid.empty()) throw InvalidArgument("sweep: no grid axes given");
  if (!seq.labels) throw InvalidArgument("sweep: the sequence needs ground-truth labels");
  SweepResult out;
  auto axis = [&](const std::vector<double>& values, double base, const char* name) {
    return values.empty() ? std::vector<double>{base} : dedupe_axis(values, name, out.warnings);
  };
  const auto l0 = axis(cfg.grid.lambda0, cfg.solver.lambda0, "lambda0");
  const auto l1 = axis(cfg.grid.lambda1, cfg.solver.lambda1, "lambda1");
  const auto l2 = axis(cfg.grid.lambda2, cfg.solver.lambda2, "lambda2");
  const auto hs = axis(cfg.grid.h, cfg.solver.h, "h");

  ExperimentConfig point = cfg;
  point.output_dir.clear();
  for (double a : l0) {
    for (double b : l1) {
      for (double c : l2) {
        for (double h : hs) {
          point.solver.lambda0 = a;
          point.solver.lambda1 = b;
          point.solver.lambda2 = c;
          point.solver.h = h;
          point.solver.validate();
          const ExperimentResult res = run_experiment(point, seq);
          out.rows.push_back({a, b, c, h, res.acc, res.nmi});
        }
      }
    }
  }
  std::sort(out.rows.begin(), out.rows.end(), [](const SweepRow& x, const SweepRow& y) {
    return std::tie(x.lambda0, x.lambda1, x.lambda2, x.h) <
           std::tie(y.lambda0, y.lambda1, y.lambda2, y.h);
  });

  if (!cfg.output_dir.empty()) {
    std::ostringstream table;
    table << "lambda0,lambda1,lambda2,h,acc_mean,acc_std,nmi_mean,nmi_std\n";
    for (const auto& row : out.rows) {
      table << num(row.lambda0) << ',' << num(row.lambda1) << ',' << num(row.lambda2) << ','
            << num(row.h) << ',' << num(row.acc.mean) << ',' << num(row.acc.std) << ','
            << num(row.nmi.mean) << ',' << num(row.nmi.std) << '\n';
    }
    out.table = cfg.output_dir / "sweep.csv";
    write_text(*out.table, table.str());
  }
  return out;
}

std::string render_segment_svg(const std::optional<Labels>& truth,
                                const std::vector<std::pair<std::string, Labels>>& predictions) {
  static constexpr std::array<const char*, 12> kPalette = {
      "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
      "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939"};
  std::vector<std::pair<std::string, Labels>> rows;
  if (truth) rows.emplace_back("GT", *truth);
  for (const auto& p : predictions) rows.push_back(p);

  const std::size_t frames = rows.empty() ? 0 : rows.front().second.size();
  const double label_width = 80.0;
  const double strip_width = 800.0;
  const double row_height = 18.0;
  const double gap = 6.0;
  const double cell = frames ? strip_width / static_cast<double>(frames) : 0.0;
  const double height = static_cast<double>(rows.size()) * (row_height + gap) + gap;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(label_width + strip_width + 10)
      << "\" height=\"" << num(height) << "\">\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double y = gap + static_cast<double>(r) * (row_height + gap);
    svg << "  <text x=\"4\" y=\"" << num(y + row_height - 4) << "\" font-size=\"12\">"
        << rows[r].first << "</text>\n";
    for (const auto& seg : segments_from_labels(rows[r].second)) {
      const auto color = kPalette[static_cast<std::size_t>(std::abs(seg.cluster)) % kPalette.size()];
      svg << "  <rect x=\"" << num(label_width + cell * static_cast<double>(seg.start))
          << "\" y=\"" << num(y) << "\" width=\""
          << num(cell * static_cast<double>(seg.end - seg.start + 1)) << "\" height=\""
          << num(row_height) << "\" fill=\"" << color << "\"/>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace gcrl
