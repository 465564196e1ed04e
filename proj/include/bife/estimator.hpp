#pragma once

#include <cstdint>
#include <vector>

#include "bife/core_types.hpp"
#include "bife/likelihood.hpp"
#include "bife/link.hpp"
#include "bife/parallel.hpp"

namespace bife {

struct NewtonOptions {
  int max_steps = 50;
  int max_halvings = 30;
  double grad_tol = 1e-8;
  HessianForm hessian = HessianForm::Full;
};

struct FitConfig {
  int d_f = 0;
  /// Stop when (1/sqrt(N)) ||B_j - B_{j-1}|| <= epsilon (Gamma when d_beta = 0).
  double epsilon = 1e-6;
  int max_outer_iters = 500;
  NewtonOptions newton{};
  int n_starts = 5;
  std::uint64_t seed = 0;
  IndexBounds bounds{};
  Exec exec = Exec::Parallel;

  void validate() const;
};

struct FitResult {
  ParameterSet params;
  double loglik = 0.0;
  int outer_iters = 0;
  bool converged = false;
  /// Log-likelihood at the start and after every half-step (unit update,
  /// period update, factor normalisation) of the winning run.
  std::vector<double> loglik_trace;
  int start_index = 0;
  std::vector<double> start_logliks;
  /// Units whose responses never vary; their coefficients stop at the
  /// trimming boundary.
  std::vector<int> separated_units;
  double final_distance = 0.0;
};

/// Result of maximising sum_r l(y_r, offset_r + design_r' coef).
struct SubproblemResult {
  VectorXd coef;
  double loglik_before = 0.0;
  double loglik_after = 0.0;
  int steps = 0;
  bool ridge_used = false;
};

/// Damped Newton with step halving on one unit's or one period's likelihood.
/// When `limits` has one entry per column, each coefficient is kept inside
/// [-limits_j, limits_j] (widened to the start value if that lies outside).
SubproblemResult maximize_index_likelihood(const VectorXd& y, const VectorXd& offset, const MatrixXd& design,
                                           VectorXd start, const LinkFamily& link, IndexBounds bounds,
                                           const NewtonOptions& opt, const VectorXd& limits = VectorXd());

/// Per-column coefficient caps: the magnitude at which that column alone
/// would carry the index to the edge of the clamp interval.
VectorXd coefficient_limits(const MatrixXd& design, IndexBounds bounds);

/// Maximises unit i's likelihood over theta_i = (beta_i, gamma_i) with F fixed.
SubproblemResult unit_update(const PanelData& data, const ParameterSet& params, const LinkFamily& link, int i,
                             const FitConfig& cfg);
/// Maximises period t's likelihood over f_t with B and Gamma fixed.
SubproblemResult time_update(const PanelData& data, const ParameterSet& params, const LinkFamily& link, int t,
                             const FitConfig& cfg);

/// Runs unit_update for every unit and writes the results into params.
/// Returns the total log-likelihood afterwards (unit sums added in order).
double unit_half_step(const PanelData& data, ParameterSet& params, const LinkFamily& link, const FitConfig& cfg,
                      Exec exec);
double time_half_step(const PanelData& data, ParameterSet& params, const LinkFamily& link, const FitConfig& cfg,
                      Exec exec);

struct NormalizedFactors {
  MatrixXd F;  ///< F * R, with (1/T) F'F = I
  MatrixXd R;
};

/// Rescales F to (1/T) F'F = I through the polar factor of its SVD, then
/// flips column signs so each column's largest-magnitude entry is positive.
/// Throws SingularError naming the first dependent column when F is rank
/// deficient.
NormalizedFactors normalize_factors(const MatrixXd& F);

/// Start `start` of the multi-start ladder: zero B and Gamma, F drawn i.i.d.
/// N(0,1) (one stream per period) and normalised.
ParameterSet initial_parameters(const PanelData& data, const FitConfig& cfg, int start);

/// One alternating-maximisation run from `start`.
FitResult fit_from(const PanelData& data, const LinkFamily& link, const FitConfig& cfg, ParameterSet start);

/// Best of cfg.n_starts runs by final log-likelihood (ties: lowest start).
FitResult fit(const PanelData& data, const LinkFamily& link, const FitConfig& cfg);

}  // namespace bife
