#pragma once

#include <vector>

#include "bife/core_types.hpp"
#include "bife/link.hpp"
#include "bife/parallel.hpp"

namespace bife {

/// Full keeps both second-derivative terms; Expected drops the
/// residual-weighted one (Fisher scoring).
enum class HessianForm { Full, Expected };

struct LikelihoodOptions {
  IndexBounds bounds{};
  HessianForm hessian = HessianForm::Full;
  Exec exec = Exec::Parallel;
};

/// Per-cell pieces of l(y, z) = (1-y) log(1-G(z)) + y log G(z), all taken
/// with respect to z and evaluated at the clamped index. Derivatives are those
/// of the clamped objective, so they vanish outside the trimming interval.
struct CellTerms {
  double loglik = 0.0;
  double weight = 0.0;     ///< dl/dz = (y - G) g / ((1 - G) G)
  double info = 0.0;       ///< g^2 / ((1 - G) G)
  double curvature = 0.0;  ///< d2l/dz2 (form-dependent)
};

CellTerms cell_terms(double y, double z, const LinkFamily& link, IndexBounds bounds,
                     HessianForm form = HessianForm::Full);

/// Score weight g_it(w) and information weight frak-g(w) evaluated directly
/// at w (no trimming indicator); used by the covariance estimators.
double residual_weight(double y, double w, const LinkFamily& link);
double information_weight(double w, const LinkFamily& link);

struct ScoreBlocks {
  MatrixXd d_theta;  ///< N x (d_beta + d_f)
  MatrixXd d_f_t;    ///< T x d_f
};

struct HessianBlocks {
  std::vector<MatrixXd> theta_blocks;  ///< N blocks, (d_beta+d_f)^2
  std::vector<MatrixXd> f_blocks;      ///< T blocks, d_f^2
};

// Every kernel has two entry points: one reading responses from the panel and
// one taking an explicit N x T response matrix. The latter accepts y in
// [0, 1], in which case loglik is the expected log-likelihood under
// Bernoulli(y) responses.

double loglik(const PanelData& data, const ParameterSet& params, const LinkFamily& link,
              const LikelihoodOptions& opt = {});
double loglik(const MatrixXd& y, const PanelData& data, const ParameterSet& params,
              const LinkFamily& link, const LikelihoodOptions& opt = {});

/// N x T matrix of per-cell log-likelihood contributions.
MatrixXd cell_loglik(const MatrixXd& y, const PanelData& data, const ParameterSet& params,
                     const LinkFamily& link, const LikelihoodOptions& opt = {});

MatrixXd score_theta(const PanelData& data, const ParameterSet& params, const LinkFamily& link,
                     const LikelihoodOptions& opt = {});
MatrixXd score_theta(const MatrixXd& y, const PanelData& data, const ParameterSet& params,
                     const LinkFamily& link, const LikelihoodOptions& opt = {});

MatrixXd score_f(const PanelData& data, const ParameterSet& params, const LinkFamily& link,
                 const LikelihoodOptions& opt = {});
MatrixXd score_f(const MatrixXd& y, const PanelData& data, const ParameterSet& params,
                 const LinkFamily& link, const LikelihoodOptions& opt = {});

std::vector<MatrixXd> hessian_theta(const PanelData& data, const ParameterSet& params,
                                    const LinkFamily& link, const LikelihoodOptions& opt = {});
std::vector<MatrixXd> hessian_theta(const MatrixXd& y, const PanelData& data, const ParameterSet& params,
                                    const LinkFamily& link, const LikelihoodOptions& opt = {});

std::vector<MatrixXd> hessian_f(const PanelData& data, const ParameterSet& params, const LinkFamily& link,
                                const LikelihoodOptions& opt = {});
std::vector<MatrixXd> hessian_f(const MatrixXd& y, const PanelData& data, const ParameterSet& params,
                                const LinkFamily& link, const LikelihoodOptions& opt = {});

ScoreBlocks scores(const PanelData& data, const ParameterSet& params, const LinkFamily& link,
                   const LikelihoodOptions& opt = {});
HessianBlocks hessians(const PanelData& data, const ParameterSet& params, const LinkFamily& link,
                       const LikelihoodOptions& opt = {});

/// u_it = (x_it', f_t')'.
VectorXd regressor_vector(const PanelData& data, const ParameterSet& params, int i, int t);

}  // namespace bife
