// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Criterion 11 needs externally supplied features and is reported
// as SKIPPED otherwise.
//
// Synthetic acceptance instance: 5 subspaces of dimension 3 in n = 50,
// segments of 30 frames cycling twice through the subspaces (N = 300), data
// seed 100, solver seeds 0..4. Solver: defaults except lambda2 = 0.1,
// 40 outer iterations and 10 inner descent steps.

#include "gcrl/clustering.hpp"
#include "gcrl/eval.hpp"
#include "gcrl/experiment.hpp"
#include "gcrl/graph.hpp"
#include "gcrl/io.hpp"
#include "gcrl/optim.hpp"
#include "gcrl/random.hpp"
#include "gcrl/synthdata.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace gcrl;

namespace {

constexpr int kSubspaces = 5;
constexpr std::uint64_t kDataSeed = 100;
const std::vector<std::uint64_t> kSeeds = {0, 1, 2, 3, 4};

struct Outcome {
  std::string status;  // PASS, FAIL or SKIPPED
  std::string detail;
};

std::map<int, Outcome> results;
std::map<int, std::string> titles = {
    {1, "gradient correctness"},
    {2, "stable-form equivalence"},
    {3, "Sylvester residual"},
    {4, "constraint invariants"},
    {5, "convergence trend"},
    {6, "end-to-end synthetic recovery"},
    {7, "ablation ordering"},
    {8, "noise robustness ordering"},
    {9, "h-insensitivity"},
    {10, "metric oracles"},
    {11, "Weizmann reproduction (optional)"},
};

void record(int id, bool pass, const std::string& detail) {
  results[id] = {pass ? "PASS" : "FAIL", detail};
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

Matrix uniform_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double lo, double hi) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.uniform(lo, hi);
  }
  return m;
}

// Constraint checks applied after every outer iteration of every fit below.
struct InvariantAudit {
  long iterations = 0;
  long violations = 0;
  std::string first;

  FitOptions options() {
    FitOptions opt;
    opt.observer = [this](const SolverState& s) { check(s); };
    return opt;
  }

  void check(const SolverState& s) {
    ++iterations;
    std::string bad;
    if (s.Z.minCoeff() < 0.0) bad = "Z < 0";
    if (s.D.minCoeff() < 0.0) bad = "D < 0";
    if (s.D.colwise().squaredNorm().maxCoeff() > 1.0 + 1e-12) bad = "|d_i|^2 > 1";
    if (s.Xtilde.minCoeff() < 0.0 || s.Xtilde.maxCoeff() > 1.0) bad = "Xtilde outside [0,1]";
    if (s.Y.minCoeff() < 0.0 || s.Y.maxCoeff() > 1.0) bad = "Y outside [0,1]";
    if (!bad.empty()) {
      if (violations == 0) first = bad + " at iteration " + std::to_string(s.iteration);
      ++violations;
    }
  }
} audit;

SolverConfig acceptance_solver(SolverMode mode) {
  SolverConfig cfg;
  cfg.mode = mode;
  cfg.lambda2 = 0.1;
  cfg.max_outer_iters = 40;
  cfg.inner_gd_iters = 10;
  cfg.r = 2 * kSubspaces;
  return cfg;
}

SynthSpec acceptance_spec(double sigma) {
  SynthSpec spec = cyclic_spec(50, kSubspaces, 3, 30, 2, kDataSeed);
  if (sigma > 0.0) {
    spec.noise_mode = NoiseMode::PiecewiseRandom;
    spec.noise_sigma = sigma;
  }
  return spec;
}

struct SeedScores {
  std::vector<double> nmi;
  std::vector<double> acc;
  std::vector<FitResult> fits;
  double mean_nmi() const { return std::accumulate(nmi.begin(), nmi.end(), 0.0) / nmi.size(); }
  double mean_acc() const { return std::accumulate(acc.begin(), acc.end(), 0.0) / acc.size(); }
};

SeedScores run_seeds(const FeatureSequence& seq, SolverConfig cfg) {
  SeedScores out;
  const FitOptions opt = audit.options();
  for (std::uint64_t seed : kSeeds) {
    cfg.seed = seed;
    FitResult fit_result = fit(seq, cfg, opt);
    const Segmentation seg = normalized_cut(code_affinity(fit_result.Z), kSubspaces, seed);
    const MetricReport m = evaluate(seg.labels, *seq.labels);
    out.nmi.push_back(m.nmi);
    out.acc.push_back(m.acc);
    out.fits.push_back(std::move(fit_result));
  }
  return out;
}

std::string list(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : " ") + fmt(x, 3);
  return s;
}

void criteria_1_2() {
  Rng rng(2024);
  double worst_grad = 0.0, worst_forms = 0.0;
  const int instances = 25;
  for (int trial = 0; trial < instances; ++trial) {
    const Eigen::Index n = 3 + static_cast<Eigen::Index>(rng.uniform_index(8));
    const Eigen::Index frames = 4 + static_cast<Eigen::Index>(rng.uniform_index(12));
    const double h = std::pow(10.0, rng.uniform(-3.0, -1.0));
    const AffinityGraph g0 = build_affinity(uniform_matrix(rng, n, frames, 0.05, 1.0), h);
    const Matrix x = uniform_matrix(rng, n, frames, 0.05, 1.0);

    const Matrix grad = graph_loss_grad(g0, x, h);
    Matrix fd(n, frames);
    const double step = 1e-6 * h;
    for (Eigen::Index j = 0; j < frames; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        Matrix plus = x, minus = x;
        plus(i, j) += step;
        minus(i, j) -= step;
        fd(i, j) = (graph_loss(g0, plus, h).value - graph_loss(g0, minus, h).value) / (2.0 * step);
      }
    }
    worst_grad = std::max(worst_grad, (grad - fd).norm() / std::max(fd.norm(), 1e-300));

    const double stable = graph_loss(g0, x, h).value;
    const double direct = graph_loss_direct(g0, x, h).value;
    worst_forms = std::max(worst_forms, std::abs(stable - direct));
  }
  record(1, worst_grad < 1e-5,
         std::to_string(instances) + " instances, worst relative error " + fmt(worst_grad, 3) +
             " (< 1e-5)");
  record(2, worst_forms < 1e-10,
         "worst |stable - direct| " + fmt(worst_forms, 3) + " (< 1e-10)");
}

void criterion_3() {
  const FeatureSequence seq = generate(cyclic_spec(50, kSubspaces, 3, 20, 2, kDataSeed));
  SolverConfig cfg;
  cfg.r = 10;
  cfg.max_outer_iters = 100;
  cfg.tol = 1e-300;
  const FitResult r = fit(seq, cfg, audit.options());
  double worst = 0.0;
  for (const auto& d : r.diagnostics) worst = std::max(worst, d.sylvester_residual);
  const bool ok = r.diagnostics.size() == 100 && seq.length() == 200 && worst < 1e-8;
  record(3, ok,
         std::to_string(r.diagnostics.size()) + " iterations, r=10, N=" +
             std::to_string(seq.length()) + ", worst residual " + fmt(worst, 3) + " (< 1e-8)");
}

void criterion_5(const FeatureSequence& seq) {
  const auto start = std::chrono::steady_clock::now();
  SolverConfig cfg = acceptance_solver(SolverMode::Full);
  const FitResult r = fit(seq, cfg, audit.options());
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::vector<double> trace;
  for (const auto& d : r.diagnostics) trace.push_back(d.primal_y_xtilde_fro);
  const double ratio = trace.back() / trace.front();
  // every value in the second half stays within 5% of the running minimum
  bool monotone = true;
  double running = trace[trace.size() / 2];
  for (std::size_t i = trace.size() / 2; i < trace.size(); ++i) {
    if (trace[i] > 1.05 * running) monotone = false;
    running = std::min(running, trace[i]);
  }
  record(5, ratio <= 0.1 && monotone && secs < 60.0,
         "|Y-X~|_F " + fmt(trace.front()) + " -> " + fmt(trace.back()) + " (ratio " +
             fmt(ratio, 3) + " <= 0.1), second half non-increasing within 5%: " +
             (monotone ? "yes" : "no") + ", " + fmt(secs, 3) + " s");
}

void criterion_6(const FeatureSequence& seq) {
  // Separability oracle: each segment spans exactly its subspace and the
  // subspaces are independent, so the clean data admit a perfect clustering.
  bool separable = true;
  std::ostringstream ranks;
  for (int m = 0; m < kSubspaces; ++m) {
    std::vector<Eigen::Index> cols;
    for (Eigen::Index t = 0; t < seq.length(); ++t) {
      if ((*seq.labels)[static_cast<std::size_t>(t)] == m) cols.push_back(t);
    }
    Matrix block(seq.dim(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) block.col(static_cast<Eigen::Index>(c)) = seq.features.col(cols[c]);
    const Vector sv = Eigen::JacobiSVD<Matrix>(block).singularValues();
    const int rank = static_cast<int>((sv.array() > 1e-10 * sv(0)).count());
    ranks << (m ? "," : "") << rank;
    separable = separable && rank == 3;
  }
  const Vector sv_all = Eigen::JacobiSVD<Matrix>(seq.features).singularValues();
  const int union_rank = static_cast<int>((sv_all.array() > 1e-10 * sv_all(0)).count());
  separable = separable && union_rank == 3 * kSubspaces;

  const SeedScores s = run_seeds(seq, acceptance_solver(SolverMode::Full));
  record(6, separable && s.mean_nmi() >= 0.95 && s.mean_acc() >= 0.90,
         "segment ranks {" + ranks.str() + "}, union rank " + std::to_string(union_rank) +
             "; mean NMI " + fmt(s.mean_nmi()) + " (>= 0.95), mean ACC " + fmt(s.mean_acc()) +
             " (>= 0.90)");
}

void criteria_7_8() {
  const std::vector<double> sigmas = {0.4, 0.5, 0.6};
  const double ablation_sigma = 0.5;
  std::vector<double> full_means, tsc_means;
  std::ostringstream detail8;
  for (double sigma : sigmas) {
    const FeatureSequence seq = generate_noisy(acceptance_spec(sigma));
    const SeedScores full = run_seeds(seq, acceptance_solver(SolverMode::Full));
    const SeedScores tsc = run_seeds(seq, acceptance_solver(SolverMode::TscAblation));
    full_means.push_back(full.mean_nmi());
    tsc_means.push_back(tsc.mean_nmi());
    detail8 << (detail8.tellp() > 0 ? "; " : "") << "sigma " << sigma << ": full "
            << fmt(full.mean_nmi()) << " vs ablation " << fmt(tsc.mean_nmi());
    if (sigma == ablation_sigma) {
      const bool in_band = full.mean_nmi() >= 0.6 && full.mean_nmi() <= 0.9;
      record(7, in_band && full.mean_nmi() > tsc.mean_nmi(),
             "sigma " + fmt(sigma) + ", full NMI [" + list(full.nmi) + "] mean " +
                 fmt(full.mean_nmi()) + " (in [0.6, 0.9]) > ablation [" + list(tsc.nmi) +
                 "] mean " + fmt(tsc.mean_nmi()));
    }
  }
  bool ok = true;
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    if (full_means[i] < tsc_means[i]) ok = false;
    if (i > 0 && full_means[i] > full_means[i - 1]) ok = false;
  }
  record(8, ok, detail8.str());
}

void criterion_9(const FeatureSequence& seq) {
  std::vector<double> means;
  std::ostringstream detail;
  for (double h : {1.5e-4, 1.5e-3, 1.5e-2}) {
    SolverConfig cfg = acceptance_solver(SolverMode::Full);
    cfg.h = h;
    const double m = run_seeds(seq, cfg).mean_nmi();
    means.push_back(m);
    detail << (detail.tellp() > 0 ? ", " : "") << "h=" << h << ": " << fmt(m);
  }
  const double spread = *std::max_element(means.begin(), means.end()) -
                        *std::min_element(means.begin(), means.end());
  record(9, spread < 0.1, detail.str() + "; spread " + fmt(spread, 3) + " (< 0.1)");
}

// Exhaustive oracles over every pair of labelings with N <= 8 frames and at
// most 3 clusters. Labelings are enumerated as restricted growth strings;
// the inputs handed to the implementation are then renamed with arbitrary
// integers, which the metrics must ignore.
double brute_accuracy(const Labels& pred, const Labels& gt, int kp, int kg) {
  std::vector<int> target(static_cast<std::size_t>(std::max(kp, kg)));
  std::iota(target.begin(), target.end(), 0);
  int best = 0;
  do {
    int hit = 0;
    for (std::size_t t = 0; t < pred.size(); ++t) {
      hit += target[static_cast<std::size_t>(pred[t])] == gt[t];
    }
    best = std::max(best, hit);
  } while (std::next_permutation(target.begin(), target.end()));
  return static_cast<double>(best) / static_cast<double>(pred.size());
}

double brute_nmi(const Labels& a, const Labels& b, int ka, int kb) {
  const double n = static_cast<double>(a.size());
  std::vector<double> pa(static_cast<std::size_t>(ka)), pb(static_cast<std::size_t>(kb));
  std::vector<double> pab(static_cast<std::size_t>(ka * kb));
  for (std::size_t t = 0; t < a.size(); ++t) {
    pa[static_cast<std::size_t>(a[t])] += 1.0 / n;
    pb[static_cast<std::size_t>(b[t])] += 1.0 / n;
    pab[static_cast<std::size_t>(a[t] * kb + b[t])] += 1.0 / n;
  }
  if (ka == 1 && kb == 1) return 1.0;
  double ha = 0.0, hb = 0.0, mi = 0.0;
  for (double p : pa) ha -= p * std::log(p);
  for (double p : pb) hb -= p * std::log(p);
  for (int i = 0; i < ka; ++i) {
    for (int j = 0; j < kb; ++j) {
      const double p = pab[static_cast<std::size_t>(i * kb + j)];
      if (p > 0.0) mi += p * std::log(p / (pa[static_cast<std::size_t>(i)] * pb[static_cast<std::size_t>(j)]));
    }
  }
  return mi / ((ha + hb) / 2.0);
}

void criterion_10() {
  long pairs = 0, mismatches = 0;
  double worst = 0.0;
  Rng rng(10);
  for (std::size_t n = 1; n <= 8; ++n) {
    std::vector<std::pair<Labels, int>> canon;
    Labels cur(n, 0);
    // enumerate restricted growth strings with values < 3
    std::function<void(std::size_t, int)> grow = [&](std::size_t pos, int used) {
      if (pos == n) {
        canon.emplace_back(cur, used);
        return;
      }
      for (int v = 0; v <= std::min(used, 2); ++v) {
        cur[pos] = v;
        grow(pos + 1, std::max(used, v + 1));
      }
    };
    grow(0, 0);
    for (const auto& [p, kp] : canon) {
      for (const auto& [g, kg] : canon) {
        // rename both labelings
        const int offset_p = static_cast<int>(rng.uniform_index(20)) - 10;
        const int offset_g = static_cast<int>(rng.uniform_index(20)) + 3;
        Labels pr = p, gr = g;
        for (auto& v : pr) v = 7 * (2 - v) + offset_p;
        for (auto& v : gr) v = -5 * v + offset_g;
        const double da = std::abs(accuracy(pr, gr) - brute_accuracy(p, g, kp, kg));
        const double dn = std::abs(nmi(pr, gr) - brute_nmi(p, g, kp, kg));
        worst = std::max({worst, da, dn});
        mismatches += (da > 1e-12 || dn > 1e-12);
        ++pairs;
      }
    }
  }
  record(10, mismatches == 0,
         std::to_string(pairs) + " labeling pairs, worst deviation " + fmt(worst, 3) +
             ", mismatches " + std::to_string(mismatches));
}

void criterion_11() {
  const char* features = std::getenv("GCRL_WEIZMANN_FEATURES");
  if (features == nullptr || *features == '\0') {
    results[11] = {"SKIPPED", "set GCRL_WEIZMANN_FEATURES (and GCRL_WEIZMANN_LABELS) to run"};
    return;
  }
  std::optional<std::filesystem::path> labels;
  if (const char* l = std::getenv("GCRL_WEIZMANN_LABELS"); l != nullptr && *l != '\0') labels = l;
  ExperimentConfig cfg;
  cfg.input = features;
  cfg.labels = labels;
  cfg.grid.lambda0 = {0.1, 0.25, 0.5, 1.0};
  cfg.grid.lambda2 = {5.0, 10.0, 20.0};
  const SweepResult sweep = run_sweep(cfg);
  double best = 0.0;
  for (const auto& row : sweep.rows) best = std::max(best, row.nmi.mean);
  record(11, std::abs(best - 0.9053) <= 0.05,
         "best grid NMI " + fmt(best) + " (target 0.9053 +- 0.05)");
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  try {
    criteria_1_2();
    criterion_3();
    const FeatureSequence clean = generate(acceptance_spec(0.0));
    criterion_5(clean);
    criterion_6(clean);
    criteria_7_8();
    criterion_9(clean);
    criterion_10();
    criterion_11();
    record(4, audit.violations == 0 && audit.iterations > 0,
           std::to_string(audit.iterations) + " outer iterations audited across all fits, " +
               std::to_string(audit.violations) + " violations" +
               (audit.first.empty() ? "" : " (first: " + audit.first + ")"));
  } catch (const std::exception& e) {
    std::printf("acceptance suite aborted: %s\n", e.what());
    return 1;
  }

  int failures = 0;
  for (const auto& [id, title] : titles) {
    const auto it = results.find(id);
    const Outcome o = it == results.end() ? Outcome{"FAIL", "not evaluated"} : it->second;
    failures += o.status == "FAIL";
    std::printf("[%s] AC%-2d %s: %s\n", o.status.c_str(), id, title.c_str(), o.detail.c_str());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%d failed, %.1f s total\n", failures, secs);
  return failures == 0 ? 0 : 1;
}
