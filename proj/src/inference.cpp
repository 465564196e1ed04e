#include "bife/inference.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <string>

#include "bife/error.hpp"
#include "bife/likelihood.hpp"

namespace bife {

MatrixXd symmetric_pinv(const MatrixXd& a, bool* singular, double rel_tol) {
  const MatrixXd sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym);
  const VectorXd& ev = es.eigenvalues();
  const double top = ev.size() > 0 ? ev.cwiseAbs().maxCoeff() : 0.0;
  const double cutoff = rel_tol * std::max(top, 1e-300);
  bool deficient = false;
  VectorXd inv(ev.size());
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (ev(k) > cutoff) {
      inv(k) = 1.0 / ev(k);
    } else {
      inv(k) = 0.0;
      deficient = true;
    }
  }
  if (singular) *singular = deficient;
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

namespace {

MatrixXd sandwich(const MatrixXd& bread_inv, const MatrixXd& meat, double n) {
  const MatrixXd v = bread_inv * meat * bread_inv / n;
  return 0.5 * (v + v.transpose());
}

}  // namespace

CovarianceSet covariances(const PanelData& data, const FitResult& fit, const LinkFamily& link, IndexBounds bounds) {
  return covariances(data.y(), data, fit, link, bounds);
}

CovarianceSet covariances(const MatrixXd& y, const PanelData& data, const FitResult& fit, const LinkFamily& link,
                          IndexBounds bounds) {
  const ParameterSet& p = fit.params;
  p.check_shape(data);
  if (y.rows() != data.n_units() || y.cols() != data.n_periods())
    throw DimensionError("units", "response matrix does not match the panel");
  const int n = data.n_units(), t_n = data.n_periods();
  const int k = data.d_beta() + p.d_f(), d_f = p.d_f();
  const LinearIndex z = linear_index(data, p);

  MatrixXd g(n, t_n), info(n, t_n);
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < t_n; ++t) {
      const double w = clamp_index(z(i, t), bounds);
      g(i, t) = residual_weight(y(i, t), w, link);
      info(i, t) = information_weight(w, link);
    }
  }

  CovarianceSet out;
  out.sigma_theta.assign(static_cast<std::size_t>(n), MatrixXd::Zero(k, k));
  out.sigma_u.assign(static_cast<std::size_t>(n), MatrixXd::Zero(k, k));
  out.var_theta.assign(static_cast<std::size_t>(n), MatrixXd::Zero(k, k));
  std::vector<char> unit_flag(static_cast<std::size_t>(n), 0);
#pragma omp parallel for schedule(static) if (run_parallel(Exec::Parallel))
  for (int i = 0; i < n; ++i) {
    const auto s = static_cast<std::size_t>(i);
    MatrixXd st = MatrixXd::Zero(k, k), su = MatrixXd::Zero(k, k);
    for (int t = 0; t < t_n; ++t) {
      const VectorXd u = regressor_vector(data, p, i, t);
      st.noalias() += (g(i, t) * g(i, t)) * u * u.transpose();
      su.noalias() += info(i, t) * u * u.transpose();
    }
    st /= t_n;
    su /= t_n;
    bool singular = false;
    const MatrixXd su_inv = symmetric_pinv(su, &singular);
    out.sigma_theta[s] = st;
    out.sigma_u[s] = su;
    out.var_theta[s] = sandwich(su_inv, st, t_n);
    unit_flag[s] = singular ? 1 : 0;
  }

  out.sigma_f.assign(static_cast<std::size_t>(t_n), MatrixXd::Zero(d_f, d_f));
  out.sigma_gamma.assign(static_cast<std::size_t>(t_n), MatrixXd::Zero(d_f, d_f));
  out.var_f.assign(static_cast<std::size_t>(t_n), MatrixXd::Zero(d_f, d_f));
  std::vector<char> period_flag(static_cast<std::size_t>(t_n), 0);
  if (d_f > 0) {
#pragma omp parallel for schedule(static) if (run_parallel(Exec::Parallel))
    for (int t = 0; t < t_n; ++t) {
      const auto s = static_cast<std::size_t>(t);
      MatrixXd sf = MatrixXd::Zero(d_f, d_f), sg = MatrixXd::Zero(d_f, d_f);
      for (int i = 0; i < n; ++i) {
        const VectorXd gam = p.Gamma.row(i).transpose();
        sf.noalias() += (g(i, t) * g(i, t)) * gam * gam.transpose();
        sg.noalias() += info(i, t) * gam * gam.transpose();
      }
      sf /= n;
      sg /= n;
      bool singular = false;
      const MatrixXd sg_inv = symmetric_pinv(sg, &singular);
      out.sigma_f[s] = sf;
      out.sigma_gamma[s] = sg;
      out.var_f[s] = sandwich(sg_inv, sf, n);
      period_flag[s] = singular ? 1 : 0;
    }
  }
  for (int i = 0; i < n; ++i)
    if (unit_flag[static_cast<std::size_t>(i)]) out.singular_units.push_back(i);
  for (int t = 0; t < t_n; ++t)
    if (period_flag[static_cast<std::size_t>(t)]) out.singular_periods.push_back(t);
  return out;
}

VectorXd mean_group(const MatrixXd& b) {
  if (b.cols() == 0) throw Error("mean-group estimator needs d_beta >= 1");
  if (b.rows() == 0) throw Error("mean-group estimator needs at least one unit");
  return b.colwise().mean().transpose();
}

VectorXd mean_group(const FitResult& fit) { return mean_group(fit.params.B); }

MatrixXd sigma1_hat(const PanelData& data, const FitResult& fit, const LinkFamily& link, IndexBounds bounds) {
  return sigma1_hat(data.y(), data, fit, link, bounds);
}

MatrixXd sigma1_hat(const MatrixXd& y, const PanelData& data, const FitResult& fit, const LinkFamily& link,
                    IndexBounds bounds) {
  const ParameterSet& p = fit.params;
  p.check_shape(data);
  if (y.rows() != data.n_units() || y.cols() != data.n_periods())
    throw DimensionError("units", "response matrix does not match the panel");
  const int n = data.n_units(), t_n = data.n_periods(), d_beta = data.d_beta();
  if (d_beta == 0) throw Error("sigma1_hat needs d_beta >= 1");
  const int k = d_beta + p.d_f();
  const LinearIndex z = linear_index(data, p);

  std::vector<MatrixXd> per_unit(static_cast<std::size_t>(n), MatrixXd::Zero(d_beta, d_beta));
#pragma omp parallel for schedule(static) if (run_parallel(Exec::Parallel))
  for (int i = 0; i < n; ++i) {
    MatrixXd su = MatrixXd::Zero(k, k);
    std::vector<VectorXd> u(static_cast<std::size_t>(t_n));
    VectorXd g(t_n);
    for (int t = 0; t < t_n; ++t) {
      u[static_cast<std::size_t>(t)] = regressor_vector(data, p, i, t);
      const double w = clamp_index(z(i, t), bounds);
      g(t) = residual_weight(y(i, t), w, link);
      su.noalias() += information_weight(w, link) * u[static_cast<std::size_t>(t)] *
                      u[static_cast<std::size_t>(t)].transpose();
    }
    su /= t_n;
    const MatrixXd rows = symmetric_pinv(su).topRows(d_beta);
    MatrixXd acc = MatrixXd::Zero(d_beta, d_beta);
    for (int t = 0; t < t_n; ++t) {
      const VectorXd v = rows * u[static_cast<std::size_t>(t)];
      acc.noalias() += (g(t) * g(t)) * v * v.transpose();
    }
    per_unit[static_cast<std::size_t>(i)] = acc;
  }
  MatrixXd total = MatrixXd::Zero(d_beta, d_beta);
  for (const MatrixXd& m : per_unit) total += m;
  total /= static_cast<double>(n) * t_n;
  return 0.5 * (total + total.transpose());
}

VectorXd jackknife_combine(const VectorXd& full, const VectorXd& s1, const VectorXd& s2, const VectorXd& odd,
                           const VectorXd& even) {
  const Eigen::Index d = full.size();
  if (s1.size() != d || s2.size() != d || odd.size() != d || even.size() != d)
    throw DimensionError("regressors", "jackknife subestimates differ in length");
  // Same value as 3 full - (s1 + s2 + odd + even) / 2, written as a correction
  // to `full` so that equal subestimates return `full` bit for bit.
  return full + (((full - s1) + (full - s2)) + ((full - odd) + (full - even))) / 2.0;
}

JackknifeResult jackknife_bc(const PanelData& data, const LinkFamily& link, const FitConfig& cfg,
                             std::uint64_t split_seed) {
  if (data.d_beta() == 0) throw Error("jackknife needs d_beta >= 1");
  if (data.n_periods() < 4) throw DimensionError("periods", "jackknife needs T >= 4");
  const int n = data.n_units(), t_n = data.n_periods();
  if (n < 2) throw DimensionError("units", "jackknife needs N >= 2");

  JackknifeResult out;
  const int usable = (n % 2 == 0) ? n : n - 1;
  out.dropped_last_unit = usable != n;
  std::vector<int> order(static_cast<std::size_t>(usable));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(stream_seed(split_seed, 0x5b17ULL));
  std::shuffle(order.begin(), order.end(), rng);
  out.units_s1.assign(order.begin(), order.begin() + usable / 2);
  out.units_s2.assign(order.begin() + usable / 2, order.end());
  std::sort(out.units_s1.begin(), out.units_s1.end());
  std::sort(out.units_s2.begin(), out.units_s2.end());

  std::vector<int> odd, even;
  for (int t = 0; t < t_n; ++t) (t % 2 == 0 ? odd : even).push_back(t);

  const PanelData subsets[4] = {data.subset_units(out.units_s1), data.subset_units(out.units_s2),
                                data.subset_periods(odd), data.subset_periods(even)};
  const char* names[5] = {"full panel", "unit half S1", "unit half S2", "odd periods", "even periods"};
  VectorXd betas[5];
  std::string errors[5];
#pragma omp parallel for schedule(dynamic, 1) if (run_parallel(cfg.exec))
  for (int s = 0; s < 5; ++s) {
    try {
      const PanelData& d = s == 0 ? data : subsets[s - 1];
      betas[s] = mean_group(fit(d, link, cfg));
    } catch (const std::exception& e) {
      errors[s] = e.what();
    }
  }
  for (int s = 0; s < 5; ++s)
    if (!errors[s].empty()) throw Error(std::string("jackknife fit on ") + names[s] + " failed: " + errors[s]);

  out.beta_full = betas[0];
  out.beta_s1 = betas[1];
  out.beta_s2 = betas[2];
  out.beta_odd = betas[3];
  out.beta_even = betas[4];
  out.beta_bc = jackknife_combine(betas[0], betas[1], betas[2], betas[3], betas[4]);
  return out;
}

ApeResult ape(const PanelData& data, const FitResult& fit, const LinkFamily& link, IndexBounds bounds) {
  const ParameterSet& p = fit.params;
  p.check_shape(data);
  const LinearIndex z = linear_index(data, p);
  ApeResult out;
  out.delta.resize(data.n_units(), data.d_beta());
  for (int i = 0; i < data.n_units(); ++i) {
    double s = 0.0;
    for (int t = 0; t < data.n_periods(); ++t) s += link.pdf(clamp_index(z(i, t), bounds));
    out.delta.row(i) = (s / data.n_periods()) * p.B.row(i);
  }
  return out;
}

}  // namespace bife
