#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "bife/core_types.hpp"
#include "bife/likelihood.hpp"
#include "bife/link.hpp"
#include "bife/portfolio.hpp"

namespace testing {

using bife::LinkFamily;
using bife::MarketData;
using bife::MatrixXd;
using bife::PanelData;
using bife::ParameterSet;
using bife::RowMatrix;
using bife::VectorXd;

inline PanelData random_panel(int n, int t, int d_beta, std::uint64_t seed, double x_scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, x_scale);
  std::bernoulli_distribution coin(0.5);
  MatrixXd y(n, t);
  RowMatrix x(static_cast<Eigen::Index>(n) * t, d_beta);
  for (int i = 0; i < n; ++i)
    for (int s = 0; s < t; ++s) y(i, s) = coin(rng) ? 1.0 : 0.0;
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    for (int k = 0; k < d_beta; ++k) x(r, k) = normal(rng);
  return PanelData(std::move(y), std::move(x));
}

inline ParameterSet random_params(int n, int t, int d_beta, int d_f, std::uint64_t seed, double scale = 0.7) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  ParameterSet p = ParameterSet::zeros(n, t, d_beta, d_f);
  for (Eigen::Index k = 0; k < p.B.size(); ++k) p.B.data()[k] = normal(rng);
  for (Eigen::Index k = 0; k < p.Gamma.size(); ++k) p.Gamma.data()[k] = normal(rng);
  for (Eigen::Index k = 0; k < p.F.size(); ++k) p.F.data()[k] = normal(rng);
  return p;
}

/// Responses equal to G(z): the expected-response matrix at `params`.
inline MatrixXd expected_response(const PanelData& data, const ParameterSet& params, const LinkFamily& link) {
  const MatrixXd z = bife::linear_index(data, params);
  return z.unaryExpr([&](double v) { return link.cdf(bife::clamp_index(v, {})); });
}

/// Panel whose responses are drawn from the model at `truth`.
inline PanelData draw_from_model(const PanelData& shell, const ParameterSet& truth, const LinkFamily& link,
                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const MatrixXd p = expected_response(shell, truth, link);
  MatrixXd y(p.rows(), p.cols());
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    for (Eigen::Index t = 0; t < p.cols(); ++t) y(i, t) = unif(rng) < p(i, t) ? 1.0 : 0.0;
  return PanelData(std::move(y), shell.x());
}

/// Central-difference derivative of a scalar function of one parameter entry.
template <typename Fn>
double central_difference(Fn&& fn, double& slot, double h) {
  const double keep = slot;
  slot = keep + h;
  const double up = fn();
  slot = keep - h;
  const double down = fn();
  slot = keep;
  return (up - down) / (2.0 * h);
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

/// Textbook probit maximum likelihood for one unit: Newton on the observed
/// information written out from scratch, with step halving.
inline VectorXd probit_mle(const VectorXd& y, const MatrixXd& x, int max_iter = 200) {
  const auto Phi = [](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); };
  const auto phi = [](double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); };
  const auto ll = [&](const VectorXd& b) {
    double s = 0.0;
    for (Eigen::Index t = 0; t < y.size(); ++t) {
      const double z = x.row(t).dot(b);
      s += y(t) > 0.5 ? std::log(Phi(z)) : std::log(Phi(-z));
    }
    return s;
  };
  VectorXd b = VectorXd::Zero(x.cols());
  for (int it = 0; it < max_iter; ++it) {
    VectorXd g = VectorXd::Zero(x.cols());
    MatrixXd h = MatrixXd::Zero(x.cols(), x.cols());
    for (Eigen::Index t = 0; t < y.size(); ++t) {
      const double z = x.row(t).dot(b);
      // d/dz log Phi(qz) with q = +-1, via the inverse Mills ratio.
      const double q = y(t) > 0.5 ? 1.0 : -1.0;
      const double lam = q * phi(z) / Phi(q * z);
      g += lam * x.row(t).transpose();
      h -= lam * (z + lam) * x.row(t).transpose() * x.row(t);
    }
    if (g.norm() < 1e-13) break;
    const VectorXd step = (-h).ldlt().solve(g);
    double s = 1.0;
    const double base = ll(b);
    while (s > 1e-12 && !(ll(b + s * step) >= base)) s *= 0.5;
    b += s * step;
    if ((s * step).norm() < 1e-15) break;
  }
  return b;
}

/// Market whose next-day return signs follow a persistent +-1 regime through
/// signed stock loadings: r_i,t+1 = signal * gamma_i * f_t + noise * e.
/// Half the loadings are negative, so the equal-weight portfolio carries no
/// signal while a factor forecast can pick the right side.
inline MarketData planted_market(int n_stocks, int n_days, std::uint64_t seed, double signal = 0.004,
                                 double noise = 0.01, double switch_prob = 0.03) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  VectorXd gamma(n_stocks);
  for (int i = 0; i < n_stocks; ++i) gamma(i) = (i % 2 == 0 ? 1.0 : -1.0) * (0.5 + unif(rng));
  VectorXd f(n_days);
  f(0) = unif(rng) < 0.5 ? 1.0 : -1.0;
  for (int t = 1; t < n_days; ++t) f(t) = unif(rng) < switch_prob ? -f(t - 1) : f(t - 1);
  MarketData m;
  m.returns = MatrixXd::Zero(n_stocks, n_days);
  for (int t = 1; t < n_days; ++t)
    for (int i = 0; i < n_stocks; ++i) m.returns(i, t) = signal * gamma(i) * f(t - 1) + noise * normal(rng);
  m.vix.resize(n_days);
  double lv = std::log(20.0);
  for (int t = 0; t < n_days; ++t) {
    lv += 0.05 * normal(rng);
    m.vix(t) = lv;
  }
  m.rfi = VectorXd::Constant(n_days, 0.0001);
  return m;
}

}  // namespace testing
