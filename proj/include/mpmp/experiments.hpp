#pragma once

#include <filesystem>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "mpmp/baseline.hpp"
#include "mpmp/io.hpp"
#include "mpmp/stage1.hpp"
#include "mpmp/stage2.hpp"

namespace mpmp {

// Stage 2 parameters as quoted in the published tables (gradient without the
// factor 2 and without the cell area on the TV term) mapped to the exact
// objective used here. Both produce the same iterates.
Stage2Config paper_stage2_config(const Grid &g, double mu_p, double beta_p, double gamma_p = 1e-3);
double paper_landweber_gamma(double gamma_p);

// lo, lo + step, ... up to hi (inclusive, with a little slack for rounding).
std::vector<double> linear_range(double lo, double hi, double step);
// 10^lo_exp, ..., 10^hi_exp.
std::vector<double> decades(int lo_exp, int hi_exp);
// t 10^(e-1) for t in {2.5, 5, 7.5} and s 10^e for s in {2, 3, 4, 5}.
std::vector<double> refine_around(double decade);

struct SweepPoint {
  double param = 0.0;
  double psnr = 0.0;
  double ssim = 0.0;
};

struct SweepResult {
  std::vector<SweepPoint> points;  // in evaluation order
  std::size_t best_index = 0;      // highest PSNR, first one on ties
  DenseField best_field;

  const SweepPoint &best() const { return points.at(best_index); }
};

using FieldSolver = std::function<DenseField(double)>;

// Scores solve(v) against the reference for every v.
SweepResult sweep(std::span<const double> values, const FieldSolver &solve,
                  const DenseField &reference);
// Coarse pass over `coarse` (powers of ten), then refine_around the winner.
SweepResult sweep_decade_refine(std::span<const double> coarse, const FieldSolver &solve,
                                const DenseField &reference);

struct ScaleConfig {
  std::string name;
  int grid_n = 64;                 // Experiments 1 to 5
  int samples_per_period = 408;
  std::vector<int> patch_sets;     // k for the k x k plans of Experiment 1
  int random_patches = 143;
  std::vector<double> lambdas;
  int stage2_max_iters = 20000;
  int exp6_grid_n = 64;
  int exp6_periods = 250;
  int exp7_grid_n = 40;
  double tikhonov7_step = 100.0;   // in units of the L = 1632 range
  double tikhonov8_step = 1000.0;
  std::vector<double> lasso_mu;    // exp8, published convention at L = 1632
  int lasso_max_iters = 20000;
};

ScaleConfig desk_scale();
ScaleConfig paper_scale();
ScaleConfig scale_by_name(const std::string &name);

struct ExperimentOptions {
  ScaleConfig scale = desk_scale();
  std::uint64_t seed = 42;
  double noise = 0.1;
  double h = 0.01;
  std::filesystem::path out;  // empty: nothing is written
  bool verbose = false;
};

// One line of the summary table. Regularization parameters are in published
// convention; NaN marks a column that does not apply.
struct TableRow {
  static constexpr double none = std::numeric_limits<double>::quiet_NaN();
  std::string experiment;
  std::string phantom;
  std::string scan;
  std::string method;
  std::size_t samples = 0;
  double lambda = none, mu = none, beta = none;
  double psnr_u = none, ssim_u = none;
  double psnr = none, ssim = none;
};

struct ExperimentResult {
  std::string name;
  std::vector<TableRow> table;
  std::vector<io::ReportRow> report;  // every sweep point
};

const std::vector<std::string> &experiment_names();
ExperimentResult run_experiment(const std::string &name, const ExperimentOptions &opt);

void write_table(const std::filesystem::path &path, std::span<const TableRow> rows);

// Building blocks shared by the experiments and the CLI.
struct TwoStageOutcome {
  SweepResult stage1;  // lambda sweep scored against the trace reference
  SweepResult stage2;  // mu sweep (published convention) scored against the ground truth
  DenseField trace_reference;
  Stage1Diagnostics stage1_diagnostics;
  Stage2Diagnostics stage2_diagnostics;
};

TwoStageOutcome run_two_stage(const DenseField &gt, std::span<const ScanSample> samples,
                              std::span<const double> lambdas, std::span<const double> mu_coarse,
                              double beta_p, int max_iters, double h);

}  // namespace mpmp
