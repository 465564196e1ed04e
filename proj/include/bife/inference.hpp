#pragma once

#include <cstdint>
#include <vector>

#include "bife/core_types.hpp"
#include "bife/estimator.hpp"
#include "bife/link.hpp"

namespace bife {

struct CovarianceSet {
  std::vector<MatrixXd> sigma_theta;  ///< per unit, (1/T) sum g_it^2 u u'
  std::vector<MatrixXd> sigma_u;      ///< per unit, (1/T) sum frak-g u u'
  std::vector<MatrixXd> sigma_f;      ///< per period, (1/N) sum g_it^2 gamma gamma'
  std::vector<MatrixXd> sigma_gamma;  ///< per period, (1/N) sum frak-g gamma gamma'
  std::vector<MatrixXd> var_theta;    ///< sigma_u^-1 sigma_theta sigma_u^-1 / T
  std::vector<MatrixXd> var_f;        ///< sigma_gamma^-1 sigma_f sigma_gamma^-1 / N
  /// Units and periods whose bread matrix was singular (pseudo-inverse used).
  std::vector<int> singular_units;
  std::vector<int> singular_periods;
};

/// Moore-Penrose inverse of a symmetric matrix. Sets `singular` when any
/// eigenvalue falls below the relative cutoff.
MatrixXd symmetric_pinv(const MatrixXd& a, bool* singular = nullptr, double rel_tol = 1e-12);

CovarianceSet covariances(const PanelData& data, const FitResult& fit, const LinkFamily& link,
                          IndexBounds bounds = {});
/// Same, with the responses taken from `y` (may be fractional).
CovarianceSet covariances(const MatrixXd& y, const PanelData& data, const FitResult& fit, const LinkFamily& link,
                          IndexBounds bounds = {});

/// Column means of B.
VectorXd mean_group(const FitResult& fit);
VectorXd mean_group(const MatrixXd& b);

/// (1/NT) sum_i sum_t g_it^2 S_i u_it u_it' S_i', where S_i holds the first
/// d_beta rows of sigma_u_i^-1 and u_it is built from the estimated factors.
MatrixXd sigma1_hat(const PanelData& data, const FitResult& fit, const LinkFamily& link,
                    IndexBounds bounds = {});
MatrixXd sigma1_hat(const MatrixXd& y, const PanelData& data, const FitResult& fit, const LinkFamily& link,
                    IndexBounds bounds = {});

/// 3 * full - (s1 + s2 + odd + even) / 2.
VectorXd jackknife_combine(const VectorXd& full, const VectorXd& s1, const VectorXd& s2, const VectorXd& odd,
                           const VectorXd& even);

struct JackknifeResult {
  VectorXd beta_bc;
  VectorXd beta_full;
  VectorXd beta_s1;
  VectorXd beta_s2;
  VectorXd beta_odd;   ///< periods 1, 3, 5, ... counted from one
  VectorXd beta_even;  ///< periods 2, 4, 6, ... counted from one
  std::vector<int> units_s1;
  std::vector<int> units_s2;
  /// Set when N is odd and the last unit was left out of the unit halves.
  bool dropped_last_unit = false;
};

/// Half-panel jackknife on the mean-group slope. The unit halves are a random
/// split drawn from `split_seed`.
JackknifeResult jackknife_bc(const PanelData& data, const LinkFamily& link, const FitConfig& cfg,
                             std::uint64_t split_seed);

struct MeanGroupResult {
  VectorXd beta_bar;
  MatrixXd sigma1_hat;
  VectorXd beta_bc;
};

struct ApeResult {
  MatrixXd delta;  ///< N x d_beta
};

/// Delta_i = (1/T) sum_t g(z_it) beta_i.
ApeResult ape(const PanelData& data, const FitResult& fit, const LinkFamily& link, IndexBounds bounds = {});

}  // namespace bife
