#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <string>
#include <vector>

namespace bife {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Trimming interval applied to the linear index before any link evaluation.
struct IndexBounds {
  double lo = -30.0;
  double hi = 30.0;
};

inline double clamp_index(double z, IndexBounds b) { return std::min(std::max(z, b.lo), b.hi); }

/// Derivative of clamp_index with respect to z (1 strictly inside, 0 outside).
inline bool index_inside(double z, IndexBounds b) { return z > b.lo && z < b.hi; }

/// Orders time labels numerically when both parse as numbers, otherwise
/// lexicographically (ISO dates sort correctly either way).
bool time_label_less(const std::string& a, const std::string& b);

/// Balanced binary-response panel: y is N x T, regressors are stored
/// unit-major so that rows [i*T, (i+1)*T) hold x_i1..x_iT.
class PanelData {
 public:
  PanelData() = default;

  /// `x` has N*T rows (row i*T+t is x_it) and d_beta columns. Labels default
  /// to "0".."N-1" and "0".."T-1".
  PanelData(MatrixXd y, RowMatrix x, std::vector<std::string> unit_ids = {},
            std::vector<std::string> time_ids = {});

  /// Builds from one N x T matrix per regressor.
  static PanelData from_slices(MatrixXd y, const std::vector<MatrixXd>& slices,
                               std::vector<std::string> unit_ids = {},
                               std::vector<std::string> time_ids = {});

  int n_units() const { return static_cast<int>(y_.rows()); }
  int n_periods() const { return static_cast<int>(y_.cols()); }
  int d_beta() const { return static_cast<int>(x_.cols()); }

  const MatrixXd& y() const { return y_; }
  double y(int i, int t) const { return y_(i, t); }
  const RowMatrix& x() const { return x_; }
  auto x(int i, int t) const { return x_.row(static_cast<Eigen::Index>(i) * n_periods() + t); }
  /// T x d_beta block of unit i's regressors.
  auto unit_regressors(int i) const {
    return x_.middleRows(static_cast<Eigen::Index>(i) * n_periods(), n_periods());
  }
  /// N x T slice of regressor k.
  MatrixXd regressor_slice(int k) const;

  const std::vector<std::string>& unit_ids() const { return unit_ids_; }
  const std::vector<std::string>& time_ids() const { return time_ids_; }

  PanelData subset_units(const std::vector<int>& units) const;
  PanelData subset_periods(const std::vector<int>& periods) const;

 private:
  MatrixXd y_;
  RowMatrix x_;
  std::vector<std::string> unit_ids_;
  std::vector<std::string> time_ids_;
};

/// Heterogeneous slopes B (N x d_beta), loadings Gamma (N x d_f) and
/// factors F (T x d_f). d_f = 0 is legal (Gamma and F have zero columns).
struct ParameterSet {
  MatrixXd B;
  MatrixXd Gamma;
  MatrixXd F;

  int d_f() const { return static_cast<int>(F.cols()); }
  int d_beta() const { return static_cast<int>(B.cols()); }

  static ParameterSet zeros(int n_units, int n_periods, int d_beta, int d_f);

  /// theta_i = (beta_i', gamma_i')'.
  VectorXd theta(int i) const;
  void set_theta(int i, const VectorXd& theta);

  /// Throws DimensionError when the shapes disagree with `data`.
  void check_shape(const PanelData& data) const;
  bool all_finite() const;
  /// (1/T) F'F == I within tol.
  bool is_normalized(double tol = 1e-8) const;
};

/// z_it = x_it' beta_i + gamma_i' f_t, N x T.
using LinearIndex = MatrixXd;

LinearIndex linear_index(const PanelData& data, const ParameterSet& params);

}  // namespace bife
