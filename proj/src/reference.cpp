#include "bife/reference.hpp"

#include <algorithm>
#include <cmath>

namespace bife::reference {

namespace {

struct Pieces {
  bool inside;
  double G, Gc, g, dg;
};

Pieces pieces(double z, const LinkFamily& link, IndexBounds b) {
  const double zc = std::min(std::max(z, b.lo), b.hi);
  return Pieces{z > b.lo && z < b.hi, link.cdf(zc), link.ccdf(zc), link.pdf(zc), link.pdf_deriv(zc)};
}

double first(double y, const Pieces& p) {
  if (!p.inside) return 0.0;
  // y - G written as y (1 - G) - (1 - y) G so the tails do not cancel.
  return (y * p.Gc - (1.0 - y) * p.G) * p.g / (p.Gc * p.G);
}

double second(double y, const Pieces& p, HessianForm form) {
  if (!p.inside) return 0.0;
  const double h = p.Gc * p.G;
  double v = -p.g * p.g / h;
  if (form == HessianForm::Full)
    v += (y * p.Gc - (1.0 - y) * p.G) * (p.dg * h - p.g * p.g * (p.Gc - p.G)) / (h * h);
  return v;
}

}  // namespace

MatrixXd linear_index(const PanelData& data, const ParameterSet& params) {
  MatrixXd z(data.n_units(), data.n_periods());
  for (int i = 0; i < data.n_units(); ++i) {
    for (int t = 0; t < data.n_periods(); ++t) {
      double s = 0.0;
      for (int k = 0; k < data.d_beta(); ++k) s += data.x(i, t)(k) * params.B(i, k);
      for (int r = 0; r < params.d_f(); ++r) s += params.Gamma(i, r) * params.F(t, r);
      z(i, t) = s;
    }
  }
  return z;
}

double loglik(const MatrixXd& y, const PanelData& data, const ParameterSet& params, const LinkFamily& link,
              IndexBounds bounds) {
  const MatrixXd z = reference::linear_index(data, params);
  double total = 0.0;
  for (int i = 0; i < data.n_units(); ++i) {
    for (int t = 0; t < data.n_periods(); ++t) {
      const double zc = std::min(std::max(z(i, t), bounds.lo), bounds.hi);
      const double G = std::max(link.cdf(zc), 1e-300);
      const double Gc = std::max(link.ccdf(zc), 1e-300);
      total += (1.0 - y(i, t)) * std::log(Gc) + y(i, t) * std::log(G);
    }
  }
  return total;
}

MatrixXd score_theta(const MatrixXd& y, const PanelData& data, const ParameterSet& params,
                     const LinkFamily& link, IndexBounds bounds) {
  const MatrixXd z = reference::linear_index(data, params);
  const int d_beta = data.d_beta(), d_f = params.d_f();
  MatrixXd out = MatrixXd::Zero(data.n_units(), d_beta + d_f);
  for (int i = 0; i < data.n_units(); ++i) {
    for (int t = 0; t < data.n_periods(); ++t) {
      const double w = first(y(i, t), pieces(z(i, t), link, bounds));
      for (int k = 0; k < d_beta; ++k) out(i, k) += w * data.x(i, t)(k);
      for (int r = 0; r < d_f; ++r) out(i, d_beta + r) += w * params.F(t, r);
    }
  }
  return out;
}

MatrixXd score_f(const MatrixXd& y, const PanelData& data, const ParameterSet& params, const LinkFamily& link,
                 IndexBounds bounds) {
  const MatrixXd z = reference::linear_index(data, params);
  MatrixXd out = MatrixXd::Zero(data.n_periods(), params.d_f());
  for (int t = 0; t < data.n_periods(); ++t) {
    for (int i = 0; i < data.n_units(); ++i) {
      const double w = first(y(i, t), pieces(z(i, t), link, bounds));
      for (int r = 0; r < params.d_f(); ++r) out(t, r) += w * params.Gamma(i, r);
    }
  }
  return out;
}

std::vector<MatrixXd> hessian_theta(const MatrixXd& y, const PanelData& data, const ParameterSet& params,
                                    const LinkFamily& link, IndexBounds bounds, HessianForm form) {
  const MatrixXd z = reference::linear_index(data, params);
  const int d_beta = data.d_beta(), d_f = params.d_f(), k = d_beta + d_f;
  std::vector<MatrixXd> out;
  for (int i = 0; i < data.n_units(); ++i) {
    MatrixXd h = MatrixXd::Zero(k, k);
    for (int t = 0; t < data.n_periods(); ++t) {
      const double c = second(y(i, t), pieces(z(i, t), link, bounds), form);
      VectorXd u(k);
      for (int a = 0; a < d_beta; ++a) u(a) = data.x(i, t)(a);
      for (int r = 0; r < d_f; ++r) u(d_beta + r) = params.F(t, r);
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) h(a, b) += c * u(a) * u(b);
    }
    out.push_back(h);
  }
  return out;
}

std::vector<MatrixXd> hessian_f(const MatrixXd& y, const PanelData& data, const ParameterSet& params,
                                const LinkFamily& link, IndexBounds bounds, HessianForm form) {
  const MatrixXd z = reference::linear_index(data, params);
  const int d_f = params.d_f();
  std::vector<MatrixXd> out;
  for (int t = 0; t < data.n_periods(); ++t) {
    MatrixXd h = MatrixXd::Zero(d_f, d_f);
    for (int i = 0; i < data.n_units(); ++i) {
      const double c = second(y(i, t), pieces(z(i, t), link, bounds), form);
      for (int a = 0; a < d_f; ++a)
        for (int b = 0; b < d_f; ++b) h(a, b) += c * params.Gamma(i, a) * params.Gamma(i, b);
    }
    out.push_back(h);
  }
  return out;
}

}  // namespace bife::reference
