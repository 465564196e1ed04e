#include "bife/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "bife/error.hpp"

namespace bife {

namespace {

double cell_value(double y, double z, const LinkFamily& link, IndexBounds bounds) {
  const double zc = clamp_index(z, bounds);
  double v = 0.0;
  if (y > 0.0) v += y * std::log(std::max(link.cdf(zc), 1e-300));
  if (y < 1.0) v += (1.0 - y) * std::log(std::max(link.ccdf(zc), 1e-300));
  return v;
}

double subproblem_loglik(const VectorXd& y, const VectorXd& z, const LinkFamily& link, IndexBounds bounds) {
  double s = 0.0;
  for (Eigen::Index r = 0; r < y.size(); ++r) s += cell_value(y(r), z(r), link, bounds);
  return s;
}

struct LocalModel {
  double loglik;
  VectorXd grad;
  MatrixXd hess;
};

LocalModel local_model(const VectorXd& y, const VectorXd& z, const MatrixXd& design, const LinkFamily& link,
                       IndexBounds bounds, HessianForm form) {
  const Eigen::Index rows = y.size();
  VectorXd w(rows), c(rows);
  double ll = 0.0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const CellTerms t = cell_terms(y(r), z(r), link, bounds, form);
    ll += t.loglik;
    w(r) = t.weight;
    c(r) = t.curvature;
  }
  return LocalModel{ll, design.transpose() * w, design.transpose() * c.asDiagonal() * design};
}

std::vector<int> constant_response_units(const PanelData& data) {
  std::vector<int> out;
  for (int i = 0; i < data.n_units(); ++i) {
    const double first = data.y(i, 0);
    if ((data.y().row(i).array() == first).all()) out.push_back(i);
  }
  return out;
}

}  // namespace

void FitConfig::validate() const {
  if (d_f < 0) throw Error("d_f must be >= 0");
  if (!(epsilon > 0.0)) throw Error("epsilon must be > 0");
  if (n_starts < 1) throw Error("n_starts must be >= 1");
  if (max_outer_iters < 1) throw Error("max_outer_iters must be >= 1");
  if (!(bounds.lo < bounds.hi)) throw Error("index bounds need lo < hi");
}

SubproblemResult maximize_index_likelihood(const VectorXd& y, const VectorXd& offset, const MatrixXd& design,
                                           VectorXd start, const LinkFamily& link, IndexBounds bounds,
                                           const NewtonOptions& opt, const VectorXd& limits) {
  SubproblemResult res;
  res.coef = std::move(start);
  const Eigen::Index k = design.cols();
  VectorXd z = offset + design * res.coef;
  if (k == 0) {
    res.loglik_before = res.loglik_after = subproblem_loglik(y, z, link, bounds);
    return res;
  }

  // Box |coef_j| <= lim_j. A start outside the box widens it to the start so
  // the update never has to move downhill to become feasible.
  VectorXd lim = VectorXd::Constant(k, std::numeric_limits<double>::infinity());
  if (limits.size() == k) lim = limits.cwiseMax(res.coef.cwiseAbs());
  auto project = [&lim](VectorXd v) {
    for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = std::clamp(v(j), -lim(j), lim(j));
    return v;
  };

  LocalModel m = local_model(y, z, design, link, bounds, opt.hessian);
  res.loglik_before = m.loglik;
  double ll = m.loglik;

  for (int step = 0; step < opt.max_steps; ++step) {
    // Coordinates pinned at the box with the gradient pushing outward stay put.
    std::vector<Eigen::Index> free;
    VectorXd pgrad = m.grad;
    for (Eigen::Index j = 0; j < k; ++j) {
      const bool at_hi = res.coef(j) >= lim(j) && m.grad(j) > 0.0;
      const bool at_lo = res.coef(j) <= -lim(j) && m.grad(j) < 0.0;
      if (at_hi || at_lo) pgrad(j) = 0.0;
      else free.push_back(j);
    }
    if (free.empty() || pgrad.lpNorm<Eigen::Infinity>() <= opt.grad_tol) break;

    const auto kf = static_cast<Eigen::Index>(free.size());
    MatrixXd neg_h(kf, kf);
    VectorXd g(kf);
    for (Eigen::Index a = 0; a < kf; ++a) {
      g(a) = m.grad(free[a]);
      for (Eigen::Index b = 0; b < kf; ++b) neg_h(a, b) = -m.hess(free[a], free[b]);
    }
    Eigen::LLT<MatrixXd> llt(neg_h);
    if (llt.info() != Eigen::Success) {
      const MatrixXd eye = MatrixXd::Identity(kf, kf);
      double lambda = std::max(neg_h.norm() * 1e-8, std::numeric_limits<double>::min());
      for (int tries = 0; tries < 200; ++tries) {
        llt.compute(neg_h + lambda * eye);
        if (llt.info() == Eigen::Success) break;
        lambda *= 2.0;
      }
      if (llt.info() != Eigen::Success) break;
      res.ridge_used = true;
    }
    const VectorXd dir_free = llt.solve(g);
    if (!dir_free.allFinite()) break;
    VectorXd dir = VectorXd::Zero(k);
    for (Eigen::Index a = 0; a < kf; ++a) dir(free[a]) = dir_free(a);

    // Near the optimum the gain of a full step falls below the resolution of
    // the log-likelihood sum; such steps are taken if they lose nothing
    // beyond roundoff.
    const double noise = 1e-12 * (1.0 + std::abs(ll));
    const bool tiny = g.dot(dir_free) <= noise;

    double scale = 1.0;
    bool accepted = false;
    VectorXd cand;
    VectorXd z_cand;
    double ll_cand = ll;
    for (int h = 0; h <= opt.max_halvings; ++h) {
      cand = project(res.coef + scale * dir);
      z_cand = offset + design * cand;
      ll_cand = subproblem_loglik(y, z_cand, link, bounds);
      if (std::isfinite(ll_cand) && (ll_cand > ll || (h == 0 && tiny && ll_cand >= ll - noise))) {
        accepted = true;
        break;
      }
      scale *= 0.5;
    }
    if (!accepted) break;

    const double moved = (cand - res.coef).lpNorm<Eigen::Infinity>();
    res.coef = std::move(cand);
    z = std::move(z_cand);
    ll = ll_cand;
    ++res.steps;
    if (moved <= 1e-14 * (1.0 + res.coef.lpNorm<Eigen::Infinity>())) break;
    m = local_model(y, z, design, link, bounds, opt.hessian);
  }
  res.loglik_after = ll;
  return res;
}

double index_radius(IndexBounds bounds) { return std::max(std::abs(bounds.lo), std::abs(bounds.hi)); }

VectorXd coefficient_limits(const MatrixXd& design, IndexBounds bounds) {
  const double radius = index_radius(bounds);
  VectorXd lim(design.cols());
  for (Eigen::Index j = 0; j < design.cols(); ++j) {
    const double scale = design.col(j).cwiseAbs().maxCoeff();
    lim(j) = scale > 0.0 ? radius / scale : std::numeric_limits<double>::infinity();
  }
  return lim;
}

SubproblemResult unit_update(const PanelData& data, const ParameterSet& params, const LinkFamily& link, int i,
                             const FitConfig& cfg) {
  const int t_n = data.n_periods(), d_beta = data.d_beta(), d_f = params.d_f();
  MatrixXd design(t_n, d_beta + d_f);
  design.leftCols(d_beta) = data.unit_regressors(i);
  design.rightCols(d_f) = params.F;
  const VectorXd y = data.y().row(i).transpose();
  return maximize_index_likelihood(y, VectorXd::Zero(t_n), design, params.theta(i), link, cfg.bounds,
                                   cfg.newton, coefficient_limits(design, cfg.bounds));
}

SubproblemResult time_update(const PanelData& data, const ParameterSet& params, const LinkFamily& link, int t,
                             const FitConfig& cfg) {
  const int n = data.n_units();
  VectorXd offset(n);
  for (int i = 0; i < n; ++i) offset(i) = data.d_beta() > 0 ? data.x(i, t).dot(params.B.row(i)) : 0.0;
  const VectorXd y = data.y().col(t);
  return maximize_index_likelihood(y, offset, params.Gamma, params.F.row(t).transpose(), link, cfg.bounds,
                                   cfg.newton, coefficient_limits(params.Gamma, cfg.bounds));
}

double unit_half_step(const PanelData& data, ParameterSet& params, const LinkFamily& link, const FitConfig& cfg,
                      Exec exec) {
  const int n = data.n_units();
  std::vector<double> ll(static_cast<std::size_t>(n));
  std::vector<VectorXd> theta(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic, 4) if (run_parallel(exec))
  for (int i = 0; i < n; ++i) {
    SubproblemResult r = unit_update(data, params, link, i, cfg);
    ll[static_cast<std::size_t>(i)] = r.loglik_after;
    theta[static_cast<std::size_t>(i)] = std::move(r.coef);
  }
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    params.set_theta(i, theta[static_cast<std::size_t>(i)]);
    total += ll[static_cast<std::size_t>(i)];
  }
  return total;
}

double time_half_step(const PanelData& data, ParameterSet& params, const LinkFamily& link, const FitConfig& cfg,
                      Exec exec) {
  const int t_n = data.n_periods();
  std::vector<double> ll(static_cast<std::size_t>(t_n));
  MatrixXd f_new(params.F.rows(), params.F.cols());
#pragma omp parallel for schedule(dynamic, 4) if (run_parallel(exec))
  for (int t = 0; t < t_n; ++t) {
    SubproblemResult r = time_update(data, params, link, t, cfg);
    ll[static_cast<std::size_t>(t)] = r.loglik_after;
    f_new.row(t) = r.coef.transpose();
  }
  params.F = std::move(f_new);
  double total = 0.0;
  for (double v : ll) total += v;
  return total;
}

NormalizedFactors normalize_factors(const MatrixXd& F) {
  const Eigen::Index d = F.cols();
  const double t_n = static_cast<double>(F.rows());
  if (d == 0) return NormalizedFactors{F, MatrixXd(0, 0)};
  if (F.rows() < d) throw SingularError("factor matrix has fewer rows than columns");

  Eigen::ColPivHouseholderQR<MatrixXd> qr(F);
  qr.setThreshold(1e-12);
  if (qr.rank() < d) {
    const auto col = qr.colsPermutation().indices()(qr.rank());
    throw SingularError("factor matrix is rank deficient: column " + std::to_string(col) +
                        " is linearly dependent on the others");
  }

  // Polar factor: F (F'F/T)^{-1/2} = sqrt(T) U V'.
  Eigen::JacobiSVD<MatrixXd> svd(F, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd& s = svd.singularValues();
  const MatrixXd& v = svd.matrixV();
  MatrixXd r = v * (std::sqrt(t_n) * s.cwiseInverse()).asDiagonal() * v.transpose();
  MatrixXd fn = F * r;
  for (Eigen::Index j = 0; j < d; ++j) {
    Eigen::Index arg = 0;
    fn.col(j).cwiseAbs().maxCoeff(&arg);
    if (fn(arg, j) < 0.0) {
      fn.col(j) = -fn.col(j);
      r.col(j) = -r.col(j);
    }
  }
  return NormalizedFactors{std::move(fn), std::move(r)};
}

ParameterSet initial_parameters(const PanelData& data, const FitConfig& cfg, int start) {
  ParameterSet p = ParameterSet::zeros(data.n_units(), data.n_periods(), data.d_beta(), cfg.d_f);
  for (int t = 0; t < data.n_periods(); ++t) {
    std::mt19937_64 rng(stream_seed(cfg.seed, start, t));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int r = 0; r < cfg.d_f; ++r) p.F(t, r) = normal(rng);
  }
  if (cfg.d_f > 0) p.F = normalize_factors(p.F).F;
  return p;
}

FitResult fit_from(const PanelData& data, const LinkFamily& link, const FitConfig& cfg, ParameterSet start) {
  cfg.validate();
  start.check_shape(data);
  const int n = data.n_units();
  const bool track_gamma = data.d_beta() == 0;
  const double root_n = std::sqrt(static_cast<double>(std::max(n, 1)));
  LikelihoodOptions lopt{cfg.bounds, cfg.newton.hessian, cfg.exec};

  FitResult res;
  res.params = std::move(start);
  res.separated_units = constant_response_units(data);
  res.loglik_trace.push_back(loglik(data, res.params, link, lopt));

  MatrixXd prev = track_gamma ? res.params.Gamma : res.params.B;
  for (int iter = 1; iter <= cfg.max_outer_iters; ++iter) {
    res.loglik_trace.push_back(unit_half_step(data, res.params, link, cfg, cfg.exec));
    if (cfg.d_f > 0) {
      res.loglik_trace.push_back(time_half_step(data, res.params, link, cfg, cfg.exec));
      const NormalizedFactors nf = normalize_factors(res.params.F);
      res.params.F = nf.F;
      res.params.Gamma = res.params.Gamma * nf.R.inverse().transpose();
      res.loglik_trace.push_back(loglik(data, res.params, link, lopt));
    }
    const MatrixXd& cur = track_gamma ? res.params.Gamma : res.params.B;
    res.final_distance = (cur - prev).norm() / root_n;
    prev = cur;
    res.outer_iters = iter;
    if (res.final_distance <= cfg.epsilon) {
      res.converged = true;
      break;
    }
  }
  if (!res.params.all_finite()) throw NumericalError(-1, -1, "estimator produced non-finite parameters");
  res.loglik = res.loglik_trace.back();
  return res;
}

FitResult fit(const PanelData& data, const LinkFamily& link, const FitConfig& cfg) {
  cfg.validate();
  if (cfg.d_f > 0 && (data.n_periods() <= cfg.d_f || data.n_units() <= cfg.d_f)) {
    throw DimensionError("factors", "d_f = " + std::to_string(cfg.d_f) + " needs N > d_f and T > d_f");
  }
  FitResult best;
  std::vector<double> start_ll;
  bool have_best = false;
  std::string last_error;
  for (int s = 0; s < cfg.n_starts; ++s) {
    try {
      FitResult r = fit_from(data, link, cfg, initial_parameters(data, cfg, s));
      r.start_index = s;
      start_ll.push_back(r.loglik);
      if (!have_best || r.loglik > best.loglik) {
        best = std::move(r);
        have_best = true;
      }
    } catch (const SingularError& e) {
      start_ll.push_back(-std::numeric_limits<double>::infinity());
      last_error = e.what();
    }
  }
  if (!have_best) throw Error("every start failed: " + last_error);
  best.start_logliks = std::move(start_ll);
  return best;
}

}  // namespace bife
