#include <fftw3.h>
#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <map>
#include <regex>
#include <string>

#include <CLI11.hpp>

#include "mpmp/experiments.hpp"
#include "mpmp/io.hpp"
#include "mpmp/metrics.hpp"
#include "mpmp/phantoms.hpp"

namespace fs = std::filesystem;
using namespace mpmp;
using io::json;

namespace {

constexpr const char *kVersion = "0.1.0";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  int threads = 1;
  std::uint64_t seed = 42;
  std::string out;
};

fs::path output_dir(const Common &c) {
  if (const char *env = std::getenv("MPMP_OUT"); env && *env) return env;
  if (c.out.empty()) throw UsageError("--out is required");
  return c.out;
}

Rect parse_rect(const std::vector<double> &v) {
  if (v.size() != 4) throw UsageError("--domain expects a,b,c,d");
  Rect r{v[0], v[1], v[2], v[3]};
  if (!r.valid()) throw UsageError("--domain must satisfy a < b and c < d");
  return r;
}

ScanPlan parse_plan(const std::string &text, const Rect &dom, const LissajousParams &lp,
                    std::uint64_t seed) {
  std::smatch m;
  if (std::regex_match(text, m, std::regex(R"(grid:(\d+)x(\d+))")))
    return make_grid_plan(dom, lp, std::stoi(m[1]), std::stoi(m[2]));
  if (std::regex_match(text, m, std::regex(R"(random:(\d+))")))
    return make_random_plan(dom, lp, std::stoi(m[1]), seed);
  if (std::regex_match(text, m, std::regex(R"(sweep:(\d+))")))
    return make_sweep_plan(dom, lp, std::stoi(m[1]));
  throw UsageError("--plan must be grid:IxJ, random:N or sweep:P");
}

PhantomSpec parse_phantom(const std::string &text, const Grid &grid) {
  if (fs::exists(text)) return io::phantom_spec_from_json(io::read_json(text), grid);
  try {
    return make_phantom_spec(phantom_kind_from_string(text), grid);
  } catch (const std::invalid_argument &) {
    throw UsageError("--phantom must be a phantom name or a JSON spec file: " + text);
  }
}

// "lo:hi[:step]" or a single value.
std::vector<double> parse_triplet(const std::string &text, const char *flag) {
  std::vector<double> v;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(':', start);
    v.push_back(std::stod(text.substr(start, pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  if (v.empty() || v.size() > 3) throw UsageError(std::string(flag) + " expects lo:hi[:step]");
  return v;
}

void write_manifest(const fs::path &dir, const std::string &command, const json &flags,
                    const Common &c, double seconds) {
  json m{{"command", command},
         {"flags", flags},
         {"version", kVersion},
         {"seed", c.seed},
         {"threads", c.threads},
         {"fftw", std::string(fftw_version)},
         {"wall_time_seconds", seconds}};
  io::write_json(dir / "run.json", m);
}

void save_preview(const fs::path &dir, const std::string &name, const DenseField &f) {
  io::save_field(dir / name, f);
  io::write_pgm(dir / (name + ".pgm"), f);
}

void require_finite(const DenseField &f, const char *what) {
  for (double v : f.values)
    if (!std::isfinite(v)) throw SolverDivergence(std::string(what) + " contains non-finite values");
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Two-stage multi-patch MPI reconstruction"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--threads", common.threads, "OpenMP threads")->check(CLI::PositiveNumber);
  app.set_version_flag("--version", kVersion);

  // simulate
  auto *sim = app.add_subcommand("simulate", "simulate a scan bundle");
  sim->set_help_flag("--help", "print this help");  // frees -h for --h
  std::string phantom = "vessel", plan_text = "grid:10x10";
  std::vector<double> domain{-2, 2, -2, 2}, amp{1, 1};
  int grid_n = 200, samples = 1632, oversample = 1;
  double h = 0.01, noise = 0.1;
  sim->add_option("--phantom", phantom, "phantom name or JSON spec");
  sim->add_option("--plan", plan_text, "grid:IxJ | random:N | sweep:P");
  sim->add_option("--domain", domain, "a,b,c,d")->delimiter(',')->expected(4);
  sim->add_option("--amp", amp, "Lissajous amplitudes")->delimiter(',')->expected(2);
  sim->add_option("--grid", grid_n, "phantom grid size N (N x N)")->check(CLI::PositiveNumber);
  sim->add_option("--samples", samples, "samples per period")->check(CLI::PositiveNumber);
  sim->add_option("--oversample", oversample, "bicubic phantom upsampling")->check(CLI::PositiveNumber);
  sim->add_option("--h", h, "resolution parameter")->check(CLI::PositiveNumber);
  sim->add_option("--noise", noise, "relative noise level")->check(CLI::NonNegativeNumber);
  sim->add_option("--seed", common.seed, "seed");
  sim->add_option("--out", common.out, "output directory");

  // reconstruct
  auto *rec = app.add_subcommand("reconstruct", "run both stages on a scan bundle");
  std::string scan_dir, gt_base, stage2 = "gfb";
  int rec_grid = 200, iters = 100000, cg_iters = 1000;
  double lambda = 5, mu = 1e-4, beta = 1, gamma = 1e-3, delta = 1e-16, tol = 5e-6;
  rec->add_option("--scan", scan_dir, "scan bundle directory")->required();
  rec->add_option("--grid", rec_grid, "reconstruction grid N")->check(CLI::PositiveNumber);
  rec->add_option("--lambda", lambda, "stage 1 weight")->check(CLI::PositiveNumber);
  rec->add_option("--mu", mu, "stage 2 TV weight (published convention)")->check(CLI::NonNegativeNumber);
  rec->add_option("--beta", beta, "stage 2 l1 weight (published convention)")->check(CLI::NonNegativeNumber);
  rec->add_option("--gamma", gamma, "step size (published convention)")->check(CLI::PositiveNumber);
  rec->add_option("--delta", delta, "TV smoothing")->check(CLI::PositiveNumber);
  rec->add_option("--tol", tol, "relative change tolerance")->check(CLI::NonNegativeNumber);
  rec->add_option("--iters", iters, "stage 2 iteration cap")->check(CLI::NonNegativeNumber);
  rec->add_option("--cg-iters", cg_iters, "stage 1 CG cap")->check(CLI::PositiveNumber);
  rec->add_option("--stage2", stage2, "gfb | landweber")->check(CLI::IsMember({"gfb", "landweber"}));
  rec->add_option("--gt", gt_base, "ground-truth field (base path) for metrics");
  rec->add_option("--out", common.out, "output directory");

  // sweep
  auto *swp = app.add_subcommand("sweep", "parameter sweeps scored by PSNR");
  std::string lambda_range = "1:50:1", mu_decades = "-7:-3", which = "both";
  int sweep_grid = 200, sweep_iters = 100000;
  double sweep_beta = 1;
  swp->add_option("--scan", scan_dir, "scan bundle directory")->required();
  swp->add_option("--gt", gt_base, "ground-truth field (base path)")->required();
  swp->add_option("--grid", sweep_grid, "reconstruction grid N")->check(CLI::PositiveNumber);
  swp->add_option("--lambda-range", lambda_range, "lo:hi:step");
  swp->add_option("--mu-decades", mu_decades, "lo:hi exponents of the coarse mu pass");
  swp->add_option("--lambda", lambda, "fixed stage 1 weight for --stage 2");
  swp->add_option("--beta", sweep_beta, "stage 2 l1 weight (published convention)");
  swp->add_option("--iters", sweep_iters, "stage 2 iteration cap")->check(CLI::PositiveNumber);
  swp->add_option("--stage", which, "1 | 2 | both")->check(CLI::IsMember({"1", "2", "both"}));
  swp->add_option("--out", common.out, "output directory");

  // experiment
  auto *exp = app.add_subcommand("experiment", "reproduce one experiment");
  std::string exp_name, scale = "desk";
  exp->add_option("name", exp_name, "exp1 .. exp8")->required()->check(CLI::IsMember(experiment_names()));
  exp->add_option("--scale", scale, "desk | paper")->check(CLI::IsMember({"desk", "paper"}));
  exp->add_option("--seed", common.seed, "seed");
  exp->add_option("--out", common.out, "output directory");
  bool verbose = false;
  exp->add_flag("--verbose", verbose, "progress on stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    // Help and version exit 0; every usage error is 2.
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  omp_set_num_threads(common.threads);
  const auto t0 = std::chrono::steady_clock::now();
  auto seconds = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  try {
    if (*sim) {
      const fs::path out = output_dir(common);
      const Rect dom = parse_rect(domain);
      const Grid grid(grid_n, grid_n, dom);
      LissajousParams lp;
      lp.amplitude = {amp[0], amp[1]};
      lp.samples_per_period = samples;
      const ScanPlan plan = parse_plan(plan_text, dom, lp, common.seed);
      const PhantomSpec spec = parse_phantom(phantom, grid);
      const DenseField gt = render(spec);
      SimulationOptions so;
      so.oversample = oversample;
      const NoiseModel nm{noise, common.seed};
      SimulatedScan scan = simulate_scan(gt, plan, ResolutionParam(h), nm, so);
      io::ScanBundle b{plan, dom, h, nm, scan.epsilon, scan.generated, std::move(scan.samples)};
      io::write_scan_bundle(out, b);
      save_preview(out, "gt", gt);
      io::write_json(out / "phantom.json", io::to_json(spec));
      std::map<int, std::size_t> per_patch;
      for (const ScanSample &s : b.samples) ++per_patch[s.patch];
      std::cout << "patches " << plan.patch_count() << ", generated " << b.generated
                << ", retained " << b.samples.size() << ", epsilon "
                << io::format_double(b.epsilon) << "\n";
      for (const auto &[p, n] : per_patch) std::cout << "  patch " << p << ": " << n << "\n";
      write_manifest(out, "simulate",
                     {{"phantom", phantom}, {"plan", plan_text}, {"domain", domain}, {"amp", amp},
                      {"grid", grid_n}, {"samples", samples}, {"oversample", oversample},
                      {"h", h}, {"noise", noise}},
                     common, seconds());
    } else if (*rec) {
      const fs::path out = output_dir(common);
      fs::create_directories(out);
      const io::ScanBundle b = io::read_scan_bundle(scan_dir);
      const Grid grid(rec_grid, rec_grid, b.domain);
      Stage1Config c1;
      c1.lambda = lambda;
      c1.cg_max_iters = cg_iters;
      const Stage1Result r1 = solve_stage1(b.samples, grid, c1);
      require_finite(r1.trace, "trace");
      save_preview(out, "u", r1.trace);
      io::write_json(out / "stage1.json", io::to_json(r1.diagnostics));
      io::write_residual_csv(out / "stage1_residuals.csv", r1.diagnostics.residual_history);
      const ConvolutionOperator K(grid, ResolutionParam(b.h));
      Stage2Config c2 = paper_stage2_config(grid, mu, beta, gamma);
      c2.delta = delta;
      c2.tolerance = tol;
      c2.max_iters = iters;
      const Stage2Result r2 =
          stage2 == "gfb"
              ? solve_stage2(r1.trace, c2, K)
              : solve_landweber(r1.trace, c2.mu, delta, paper_landweber_gamma(gamma), K, iters, tol);
      require_finite(r2.rho, "reconstruction");
      save_preview(out, "rho", r2.rho);
      io::write_json(out / "stage2.json", io::to_json(r2.diagnostics));
      io::write_objective_csv(out / "stage2_objective.csv", r2.diagnostics.objective_trace);
      if (!gt_base.empty()) {
        const DenseField gt = io::load_field(gt_base);
        const DenseField gt_r = gt.grid == grid ? gt : resample(gt, grid.nx, grid.ny);
        const DenseField ref = trace_reference(gt_r, ResolutionParam(b.h));
        std::vector<io::ReportRow> rows{
            {"reconstruct", "u", "lambda=" + io::format_double(lambda), psnr(ref, r1.trace),
             ssim(ref, r1.trace)},
            {"reconstruct", stage2, "mu=" + io::format_double(mu), psnr(gt_r, r2.rho),
             ssim(gt_r, r2.rho)}};
        io::write_report(out / "report.csv", rows);
        for (const auto &r : rows)
          std::cout << r.stage << " " << r.param << " psnr " << io::format_double(r.psnr)
                    << " ssim " << io::format_double(r.ssim) << "\n";
      }
      write_manifest(out, "reconstruct",
                     {{"scan", scan_dir}, {"grid", rec_grid}, {"lambda", lambda}, {"mu", mu},
                      {"beta", beta}, {"gamma", gamma}, {"delta", delta}, {"tol", tol},
                      {"iters", iters}, {"cg_iters", cg_iters}, {"stage2", stage2}, {"gt", gt_base}},
                     common, seconds());
    } else if (*swp) {
      const fs::path out = output_dir(common);
      fs::create_directories(out);
      const io::ScanBundle b = io::read_scan_bundle(scan_dir);
      const Grid grid(sweep_grid, sweep_grid, b.domain);
      const DenseField gt0 = io::load_field(gt_base);
      const DenseField gt = gt0.grid == grid ? gt0 : resample(gt0, grid.nx, grid.ny);
      std::vector<double> lambdas, coarse;
      try {
        const auto lr = parse_triplet(lambda_range, "--lambda-range");
        lambdas = lr.size() == 1 ? lr : linear_range(lr[0], lr[1], lr.size() == 3 ? lr[2] : 1.0);
        const auto md = parse_triplet(mu_decades, "--mu-decades");
        if (md.size() != 2) throw UsageError("--mu-decades expects lo:hi");
        coarse = decades(static_cast<int>(md[0]), static_cast<int>(md[1]));
      } catch (const std::invalid_argument &e) {
        throw UsageError(e.what());
      }
      std::vector<io::ReportRow> rows;
      if (which == "1") {
        const DenseField ref = trace_reference(gt, ResolutionParam(b.h));
        const SampleCache cache(grid, b.samples);
        const SweepResult s = sweep(
            lambdas,
            [&](double l) {
              Stage1Config c;
              c.lambda = l;
              return solve_stage1(cache, c).trace;
            },
            ref);
        for (const auto &p : s.points)
          rows.push_back({"sweep", "u", "lambda=" + io::format_double(p.param), p.psnr, p.ssim});
        save_preview(out, "u", s.best_field);
        std::cout << "best lambda " << io::format_double(s.best().param) << " psnr "
                  << io::format_double(s.best().psnr) << "\n";
      } else {
        const TwoStageOutcome o = run_two_stage(gt, b.samples,
                                                which == "2" ? std::vector<double>{lambda} : lambdas,
                                                coarse, sweep_beta, sweep_iters, b.h);
        for (const auto &p : o.stage1.points)
          rows.push_back({"sweep", "u", "lambda=" + io::format_double(p.param), p.psnr, p.ssim});
        for (const auto &p : o.stage2.points)
          rows.push_back({"sweep", "rho", "mu=" + io::format_double(p.param), p.psnr, p.ssim});
        save_preview(out, "u", o.stage1.best_field);
        save_preview(out, "rho", o.stage2.best_field);
        std::cout << "best lambda " << io::format_double(o.stage1.best().param) << " psnr "
                  << io::format_double(o.stage1.best().psnr) << "\n"
                  << "best mu " << io::format_double(o.stage2.best().param) << " psnr "
                  << io::format_double(o.stage2.best().psnr) << "\n";
      }
      io::write_report(out / "report.csv", rows);
      write_manifest(out, "sweep",
                     {{"scan", scan_dir}, {"gt", gt_base}, {"grid", sweep_grid},
                      {"lambda_range", lambda_range}, {"mu_decades", mu_decades},
                      {"beta", sweep_beta}, {"iters", sweep_iters}, {"stage", which},
                      {"lambda", lambda}},
                     common, seconds());
    } else if (*exp) {
      ExperimentOptions eo;
      eo.scale = scale_by_name(scale);
      eo.seed = common.seed;
      eo.out = output_dir(common);
      eo.verbose = verbose;
      const ExperimentResult r = run_experiment(exp_name, eo);
      for (const TableRow &t : r.table)
        std::cout << t.phantom << " " << t.scan << " " << t.method << ": psnr "
                  << io::format_double(t.psnr) << " ssim " << io::format_double(t.ssim) << "\n";
      write_manifest(eo.out / exp_name, "experiment " + exp_name, {{"scale", scale}}, common,
                     seconds());
    }
  } catch (const UsageError &e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const io::FileError &e) {
    std::cerr << "file error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
