#include "bife/likelihood.hpp"

#include <cmath>
#include <string>

#include "bife/error.hpp"

namespace bife {

namespace {

constexpr double kLogFloor = 1e-300;

struct CellGrid {
  MatrixXd loglik;
  MatrixXd weight;
  MatrixXd curvature;
};

void check_response(const MatrixXd& y, const PanelData& data) {
  if (y.rows() != data.n_units()) throw DimensionError("units", "response rows != N");
  if (y.cols() != data.n_periods()) throw DimensionError("periods", "response columns != T");
}

void throw_if_nonfinite(const MatrixXd& m, const char* what) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index t = 0; t < m.cols(); ++t) {
      if (!std::isfinite(m(i, t))) {
        throw NumericalError(static_cast<int>(i), static_cast<int>(t),
                             std::string("non-finite ") + what + " at cell (" + std::to_string(i) + ", " +
                                 std::to_string(t) + ")");
      }
    }
  }
}

CellGrid compute_cells(const MatrixXd& y, const PanelData& data, const ParameterSet& params,
                       const LinkFamily& link, const LikelihoodOptions& opt, bool second) {
  check_response(y, data);
  const LinearIndex z = linear_index(data, params);
  const int n = data.n_units(), t_n = data.n_periods();
  CellGrid g{MatrixXd(n, t_n), MatrixXd(n, t_n), second ? MatrixXd(n, t_n) : MatrixXd()};
#pragma omp parallel for schedule(static) if (run_parallel(opt.exec))
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < t_n; ++t) {
      const CellTerms c = cell_terms(y(i, t), z(i, t), link, opt.bounds, opt.hessian);
      g.loglik(i, t) = c.loglik;
      g.weight(i, t) = c.weight;
      if (second) g.curvature(i, t) = c.curvature;
    }
  }
  throw_if_nonfinite(g.loglik, "log-likelihood");
  throw_if_nonfinite(g.weight, "score weight");
  if (second) throw_if_nonfinite(g.curvature, "curvature");
  return g;
}

}  // namespace

CellTerms cell_terms(double y, double z, const LinkFamily& link, IndexBounds bounds, HessianForm form) {
  const double zc = clamp_index(z, bounds);
  const double G = link.cdf(zc);
  const double Gc = link.ccdf(zc);
  const double Gf = std::max(G, kLogFloor);
  const double Gcf = std::max(Gc, kLogFloor);

  CellTerms c;
  if (y > 0.0) c.loglik += y * std::log(Gf);
  if (y < 1.0) c.loglik += (1.0 - y) * std::log(Gcf);
  if (!index_inside(z, bounds)) return c;

  const double g = link.pdf(zc);
  const double denom = Gf * Gcf;
  const double g_over = g / denom;
  // y - G written so that y = 1 uses the accurate upper-tail complement
  const double resid = y * Gc - (1.0 - y) * G;
  c.weight = resid * g_over;
  c.info = g * g_over;
  c.curvature = -c.info;
  if (form == HessianForm::Full) {
    c.curvature += (resid / denom) * link.pdf_deriv(zc) - resid * g_over * g_over * (Gc - G);
  }
  return c;
}

double residual_weight(double y, double w, const LinkFamily& link) {
  const double G = std::max(link.cdf(w), kLogFloor);
  const double Gc = std::max(link.ccdf(w), kLogFloor);
  return (y * Gc - (1.0 - y) * G) * link.pdf(w) / (G * Gc);
}

double information_weight(double w, const LinkFamily& link) {
  const double G = std::max(link.cdf(w), kLogFloor);
  const double Gc = std::max(link.ccdf(w), kLogFloor);
  const double g = link.pdf(w);
  return g * (g / (G * Gc));
}

VectorXd regressor_vector(const PanelData& data, const ParameterSet& params, int i, int t) {
  VectorXd u(data.d_beta() + params.d_f());
  u << data.x(i, t).transpose(), params.F.row(t).transpose();
  return u;
}

double loglik(const PanelData& data, const ParameterSet& params, const LinkFamily& link,
              const LikelihoodOptions& opt) {
  return loglik(data.y(), data, params, link, opt);
}

double loglik(const MatrixXd& y, const PanelData& data, const ParameterSet& params, const LinkFamily& link,
              const LikelihoodOptions& opt) {
  const MatrixXd cells = cell_loglik(y, data, params, link, opt);
  // Row sums first, then in unit order: identical under any worker count.
  const VectorXd rows = cells.rowwise().sum();
  double total = 0.0;
  for (Eigen::Index i = 0; i < rows.size(); ++i) total += rows(i);
  return total;
}

MatrixXd cell_loglik(const MatrixXd& y, const PanelData& data, const ParameterSet& params,
                     const LinkFamily& link, const LikelihoodOptions& opt) {
  check_response(y, data);
  const LinearIndex z = linear_index(data, params);
  const int n = data.n_units(), t_n = data.n_periods();
  MatrixXd cells(n, t_n);
#pragma omp parallel for schedule(static) if (run_parallel(opt.exec))
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < t_n; ++t) cells(i, t) = cell_terms(y(i, t), z(i, t), link, opt.bounds).loglik;
  throw_if_nonfinite(cells, "log-likelihood");
  return cells;
}

MatrixXd score_theta(const PanelData& data, const ParameterSet& params, const LinkFamily& link,
                     const LikelihoodOptions& opt) {
  return score_theta(data.y(), data, params, link, opt);
}

MatrixXd score_theta(const MatrixXd& y, const PanelData& data, const ParameterSet& params,
                     const LinkFamily& link, const LikelihoodOptions& opt) {
  const CellGrid cells = compute_cells(y, data, params, link, opt, false);
  const int n = data.n_units();
  const int d_beta = data.d_beta(), d_f = params.d_f();
  MatrixXd out = MatrixXd::Zero(n, d_beta + d_f);
#pragma omp parallel for schedule(static) if (run_parallel(opt.exec))
  for (int i = 0; i < n; ++i) {
    const VectorXd w = cells.weight.row(i).transpose();
    if (d_beta > 0) out.row(i).head(d_beta) = (data.unit_regressors(i).transpose() * w).transpose();
    if (d_f > 0) out.row(i).tail(d_f) = (params.F.transpose() * w).transpose();
  }
  return out;
}

MatrixXd score_f(const PanelData& data, const ParameterSet& params, const LinkFamily& link,
                 const LikelihoodOptions& opt) {
  return score_f(data.y(), data, params, link, opt);
}

MatrixXd score_f(const MatrixXd& y, const PanelData& data, const ParameterSet& params, const LinkFamily& link,
                 const LikelihoodOptions& opt) {
  const CellGrid cells = compute_cells(y, data, params, link, opt, false);
  // column t of Gamma' W is sum_i w_it gamma_i
  return (params.Gamma.transpose() * cells.weight).transpose();
}

std::vector<MatrixXd> hessian_theta(const PanelData& data, const ParameterSet& params, const LinkFamily& link,
                                    const LikelihoodOptions& opt) {
  return hessian_theta(data.y(), data, params, link, opt);
}

std::vector<MatrixXd> hessian_theta(const MatrixXd& y, const PanelData& data, const ParameterSet& params,
                                    const LinkFamily& link, const LikelihoodOptions& opt) {
  const CellGrid cells = compute_cells(y, data, params, link, opt, true);
  const int n = data.n_units(), t_n = data.n_periods();
  const int k = data.d_beta() + params.d_f();
  std::vector<MatrixXd> blocks(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static) if (run_parallel(opt.exec))
  for (int i = 0; i < n; ++i) {
    MatrixXd u(t_n, k);
    u << data.unit_regressors(i), params.F;
    const VectorXd c = cells.curvature.row(i).transpose();
    blocks[static_cast<std::size_t>(i)] = u.transpose() * c.asDiagonal() * u;
  }
  return blocks;
}

std::vector<MatrixXd> hessian_f(const PanelData& data, const ParameterSet& params, const LinkFamily& link,
                                const LikelihoodOptions& opt) {
  return hessian_f(data.y(), data, params, link, opt);
}

std::vector<MatrixXd> hessian_f(const MatrixXd& y, const PanelData& data, const ParameterSet& params,
                                const LinkFamily& link, const LikelihoodOptions& opt) {
  const CellGrid cells = compute_cells(y, data, params, link, opt, true);
  const int t_n = data.n_periods();
  std::vector<MatrixXd> blocks(static_cast<std::size_t>(t_n));
#pragma omp parallel for schedule(static) if (run_parallel(opt.exec))
  for (int t = 0; t < t_n; ++t) {
    const VectorXd c = cells.curvature.col(t);
    blocks[static_cast<std::size_t>(t)] = params.Gamma.transpose() * c.asDiagonal() * params.Gamma;
  }
  return blocks;
}

ScoreBlocks scores(const PanelData& data, const ParameterSet& params, const LinkFamily& link,
                   const LikelihoodOptions& opt) {
  return ScoreBlocks{score_theta(data, params, link, opt), score_f(data, params, link, opt)};
}

HessianBlocks hessians(const PanelData& data, const ParameterSet& params, const LinkFamily& link,
                       const LikelihoodOptions& opt) {
  return HessianBlocks{hessian_theta(data, params, link, opt), hessian_f(data, params, link, opt)};
}

}  // namespace bife
