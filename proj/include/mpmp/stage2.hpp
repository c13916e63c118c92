#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mpmp/physics.hpp"
#include "mpmp/types.hpp"

namespace mpmp {

// Real linear map R^cols -> R^rows with its adjoint.
class LinearMap {
 public:
  virtual ~LinearMap() = default;
  virtual std::size_t rows() const = 0;
  virtual std::size_t cols() const = 0;
  virtual void apply(std::span<const double> x, std::span<double> y) const = 0;
  virtual void apply_adjoint(std::span<const double> y, std::span<double> x) const = 0;
};

// Midpoint-rule convolution with kappa_h restricted to the grid, evaluated by
// zero-padded FFTs. Self-adjoint.
class ConvolutionOperator final : public LinearMap {
 public:
  ConvolutionOperator(const Grid &grid, ResolutionParam h);
  ~ConvolutionOperator() override;
  ConvolutionOperator(const ConvolutionOperator &) = delete;
  ConvolutionOperator &operator=(const ConvolutionOperator &) = delete;

  const Grid &grid() const { return grid_; }
  double h() const { return h_; }
  int padded_size() const { return pad_; }
  // Kernel sample at offset (di, dj) cells, already scaled by the cell area.
  double kernel(int di, int dj) const;
  // Sum of |kernel| over all offsets: an upper bound for ||K||_2.
  double kernel_l1() const;

  std::size_t rows() const override { return grid_.size(); }
  std::size_t cols() const override { return grid_.size(); }
  void apply(std::span<const double> x, std::span<double> y) const override;
  void apply_adjoint(std::span<const double> y, std::span<double> x) const override {
    apply(y, x);
  }

  DenseField convolve(const DenseField &rho) const;

 private:
  Grid grid_;
  double h_;
  int pad_;
  std::vector<double> kernel_;  // (2nx-1) x (2ny-1), offset-major like the grid
  struct Plans;
  std::unique_ptr<Plans> plans_;
  std::vector<std::complex<double>> kernel_hat_;
};

DenseField convolve(const ConvolutionOperator &K, const DenseField &rho);
// O(N^2) double sum of the same quadrature, for testing.
DenseField convolve_direct(const ConvolutionOperator &K, const DenseField &rho);

// R_delta = hx hy sum sqrt(W + delta) with zero padding outside the grid.
double tv_functional(const DenseField &rho, double delta);
std::vector<double> tv_values_gradient(const Grid &g, std::span<const double> rho, double delta);
DenseField tv_gradient(const DenseField &rho, double delta);

// Gradient of ||A rho - y||^2 + mu R_delta[rho] (writes into grad).
void data_tv_gradient(const LinearMap &A, const Grid &g, std::span<const double> rho,
                      std::span<const double> y, double mu, double delta, std::span<double> grad);
DenseField grad_F(const DenseField &rho, const DenseField &u, const ConvolutionOperator &K,
                  double mu, double delta);
double smooth_objective(const LinearMap &A, const Grid &g, std::span<const double> rho,
                        std::span<const double> y, double mu, double delta);

DenseField prox_l1(const DenseField &v, double threshold);
DenseField prox_nonneg(const DenseField &v);

struct Stage2Config {
  double mu = 1e-4;
  double beta = 1.0;
  double delta = 1e-16;
  double gamma = 1e-3;
  double relaxation = 1.0;
  double tolerance = 5e-6;
  int max_iters = 100000;
  int objective_every = 100;

  void validate() const;
};

struct ObjectivePoint {
  int iteration;
  double value;
};

struct Stage2Diagnostics {
  int iterations = 0;
  double final_residual = 0.0;
  bool converged = false;
  double initial_objective = 0.0;
  double final_objective = 0.0;
  std::vector<ObjectivePoint> objective_trace;
};

struct Stage2Result {
  DenseField rho;
  Stage2Diagnostics diagnostics;
};

// Full objective ||A rho - y||^2 + mu R_delta + beta ||rho||_1.
double stage2_objective(const LinearMap &A, const Grid &g, std::span<const double> rho,
                        std::span<const double> y, const Stage2Config &cfg);

// Generalized forward-backward splitting with an l1 prox and the projection
// onto rho >= 0. Iterates start at `init`.
Stage2Result solve_gfb(const LinearMap &A, const Grid &g, std::span<const double> y,
                       const DenseField &init, const Stage2Config &cfg);

// ||A rho - y||^2 = rho^T G rho - 2 rhs^T rho + yy with G = A^T A (row-major n x n).
struct NormalEquations {
  std::size_t n = 0;
  std::vector<double> gram;
  std::vector<double> rhs;
  double yy = 0.0;

  void apply_gram(std::span<const double> x, std::span<double> out) const;
};

// Same splitting with the data term given by its normal equations.
Stage2Result solve_gfb(const NormalEquations &ne, const Grid &g, const DenseField &init,
                       const Stage2Config &cfg);

// Deconvolution of the trace u, started from u.
Stage2Result solve_stage2(const DenseField &u, const Stage2Config &cfg,
                          const ConvolutionOperator &K);

// Gradient descent on ||K rho - u||^2 + mu R_delta from rho = u.
Stage2Result solve_landweber(const DenseField &u, double mu, double delta, double gamma,
                             const ConvolutionOperator &K, int iters, double tolerance = 0.0);

// ||A^T A||_2 by power iteration from a seeded random start.
struct PowerIterationResult {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};
PowerIterationResult normal_operator_norm(const LinearMap &A, int max_iters = 100,
                                          double rel_tol = 1e-8, std::uint64_t seed = 12345);

struct LipschitzBound {
  double C1 = 0.0;
  double tv_constant = 0.0;     // 2 N (1/hx + 1/hy)(sqrt2 + C1)
  double normal_norm = 0.0;     // ||A^T A||_2 estimate
  double value = 0.0;           // mu hx hy tv_constant + 2 ||A^T A|| (scaling used here)
  double unscaled_value = 0.0;  // mu tv_constant + ||A^T A|| (without the hx hy and 2 factors)
};
double tv_lipschitz_c1(const Grid &g, double delta);
LipschitzBound lipschitz_bound(const Grid &g, double mu, double delta, const LinearMap &A);

struct ConvergenceCheck {
  double eta = 0.0;
  bool gamma_ok = false;
  bool relaxation_ok = false;
  bool certified = false;
  std::string message;
};
ConvergenceCheck check_convergence_params(const Stage2Config &cfg, double lipschitz);

}  // namespace mpmp
