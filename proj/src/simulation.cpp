#include "bife/simulation.hpp"

#include <cmath>
#include <random>
#include <string>

#include "bife/error.hpp"
#include "bife/selector.hpp"

namespace bife {

namespace {

enum Stream : std::uint64_t { kFactors = 1, kLoadings = 2, kRegressors = 3, kErrors = 4 };

double draw_noise(std::mt19937_64& rng, TailCase tail) {
  if (tail == TailCase::LightTail) {
    std::normal_distribution<double> normal(0.0, 1.0);
    return normal(rng);
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(rng);
  while (u <= 0.0) u = unif(rng);
  return std::log(u / (1.0 - u));
}

/// Symmetric square root of {rho^|i-j|}.
MatrixXd toeplitz_sqrt(int n, double base) {
  MatrixXd s(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s(i, j) = std::pow(base, std::abs(i - j));
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(s);
  const VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

MatrixXd orthonormal_basis(const MatrixXd& f, const char* which) {
  if (f.cols() == 0) return MatrixXd(f.rows(), 0);
  Eigen::ColPivHouseholderQR<MatrixXd> qr(f);
  qr.setThreshold(1e-12);
  if (qr.rank() < f.cols())
    throw SingularError(std::string(which) + " factor matrix is rank deficient");
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(f.rows(), f.cols());
  return q;
}

}  // namespace

void DgpSpec::validate() const {
  if (n_units < 2 || n_periods < 2) throw Error("DGP needs N, T >= 2");
  if (d_beta < 0 || d_f < 0) throw Error("DGP dimensions must be non-negative");
  if (dgp != DgpKind::DGP1 && burn_in < 100) throw Error("AR(1) error DGPs need burn_in >= 100");
}

double DgpSpec::rho() const {
  switch (dgp) {
    case DgpKind::DGP1:
      return 0.0;
    case DgpKind::DGP2:
      return 0.3;
    case DgpKind::DGP3:
      return 0.7;
  }
  return 0.0;
}

LinkFamily DgpSpec::link() const { return tail == TailCase::LightTail ? LinkFamily::probit() : LinkFamily::logit(); }

MatrixXd draw_errors(const DgpSpec& spec) {
  spec.validate();
  const int n = spec.n_units, t_n = spec.n_periods;
  MatrixXd eps(n, t_n);
  std::mt19937_64 rng(stream_seed(spec.seed, kErrors));
  if (spec.dgp == DgpKind::DGP1) {
    for (int i = 0; i < n; ++i)
      for (int t = 0; t < t_n; ++t) eps(i, t) = draw_noise(rng, spec.tail);
  } else {
    const double rho = spec.rho();
    const MatrixXd root = toeplitz_sqrt(n, 0.3);
    VectorXd state = VectorXd::Zero(n);
    VectorXd nu(n);
    for (int s = -spec.burn_in; s < t_n; ++s) {
      for (int i = 0; i < n; ++i) nu(i) = draw_noise(rng, spec.tail);
      state = rho * state + root * nu;
      if (s >= 0) eps.col(s) = state;
    }
  }
  return eps;
}

SimulatedPanel gen_dgp(const DgpSpec& spec) {
  spec.validate();
  const int n = spec.n_units, t_n = spec.n_periods;

  ParameterSet truth = ParameterSet::zeros(n, t_n, spec.d_beta, spec.d_f);
  {
    std::mt19937_64 rng(stream_seed(spec.seed, kFactors));
    std::uniform_real_distribution<double> unif(-2.5, 2.5);
    for (int t = 0; t < t_n; ++t)
      for (int r = 0; r < spec.d_f; ++r) truth.F(t, r) = unif(rng);
  }
  {
    std::mt19937_64 rng(stream_seed(spec.seed, kLoadings));
    std::uniform_real_distribution<double> unif(0.0, 6.0);
    for (int i = 0; i < n; ++i)
      for (int r = 0; r < spec.d_f; ++r) truth.Gamma(i, r) = unif(rng);
  }
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < spec.d_beta; ++k) truth.B(i, k) = static_cast<double>(i + 1) / n;

  RowMatrix x(static_cast<Eigen::Index>(n) * t_n, spec.d_beta);
  {
    std::mt19937_64 rng(stream_seed(spec.seed, kRegressors));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int i = 0; i < n; ++i) {
      for (int t = 0; t < t_n; ++t) {
        const double shift =
            spec.d_f > 0 ? 0.5 * (std::abs(truth.Gamma(i, 0)) + std::abs(truth.F(t, 0))) : 0.0;
        for (int k = 0; k < spec.d_beta; ++k) x(static_cast<Eigen::Index>(i) * t_n + t, k) = normal(rng) + shift;
      }
    }
  }

  const MatrixXd eps = draw_errors(spec);

  PanelData shell(MatrixXd::Zero(n, t_n), x);
  const LinearIndex z0 = linear_index(shell, truth);
  MatrixXd y(n, t_n);
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < t_n; ++t) y(i, t) = (z0(i, t) - eps(i, t) >= 0.0) ? 1.0 : 0.0;

  return SimulatedPanel{PanelData(std::move(y), std::move(x)), std::move(truth)};
}

double projection_distance(const MatrixXd& f_hat, const MatrixXd& f_true) {
  if (f_hat.rows() != f_true.rows()) throw DimensionError("periods", "factor matrices differ in T");
  const MatrixXd qa = orthonormal_basis(f_hat, "estimated");
  const MatrixXd qb = orthonormal_basis(f_true, "true");
  const double cross = (qa.cols() > 0 && qb.cols() > 0) ? (qa.transpose() * qb).squaredNorm() : 0.0;
  const double sq = static_cast<double>(qa.cols() + qb.cols()) - 2.0 * cross;
  return std::sqrt(std::max(sq, 0.0));
}

McReport summarize_replications(const std::vector<Replication>& reps, int true_d_f) {
  McReport out;
  const int m = static_cast<int>(reps.size());
  out.replications = m;
  if (m == 0) throw Error("no successful replications");
  int correct = 0, under = 0, over = 0;
  double sum_b = 0.0, sum_f = 0.0;
  const Eigen::Index n = reps.front().b_true.rows(), d_beta = reps.front().b_true.cols();
  MatrixXd sq_err = MatrixXd::Zero(n, d_beta);
  for (const Replication& r : reps) {
    out.chosen_d.push_back(r.chosen_d);
    if (r.chosen_d == true_d_f) ++correct;
    else if (r.chosen_d < true_d_f) ++under;
    else ++over;
    const MatrixXd diff = r.b_hat - r.b_true;
    sum_b += diff.squaredNorm() / static_cast<double>(n);
    sum_f += r.f_distance * r.f_distance;
    sq_err += diff.cwiseAbs2();
  }
  out.pc = static_cast<double>(correct) / m;
  if (over == 0) {
    out.pu = 1.0 - out.pc;
    out.po = 0.0;
  } else {
    out.pu = static_cast<double>(under) / m;
    out.po = 1.0 - (out.pc + out.pu);
  }
  out.rmse_b = std::sqrt(sum_b / m);
  out.rmse_f = std::sqrt(sum_f / m);
  out.std_beta = (sq_err / m).cwiseSqrt().colwise().mean().transpose();
  return out;
}

Replication run_replication(const DgpSpec& spec, int rep, const MonteCarloConfig& cfg) {
  DgpSpec s = spec;
  s.seed = stream_seed(spec.seed, 0x5eedULL, rep);
  const SimulatedPanel sim = gen_dgp(s);
  FitConfig fc = cfg.fit;
  fc.seed = stream_seed(cfg.fit.seed, rep);
  const SelectionResult sel = select_num_factors(sim.data, s.link(), fc, cfg.d_max);
  const FitResult& best = sel.fits.at(sel.chosen_d);
  return Replication{sel.chosen_d, best.params.B, sim.truth.B, projection_distance(best.params.F, sim.truth.F)};
}

McReport run_monte_carlo(const DgpSpec& spec, const MonteCarloConfig& cfg) {
  spec.validate();
  if (cfg.replications < 1) throw Error("need at least one replication");
  const int m = cfg.replications;
  std::vector<Replication> reps(static_cast<std::size_t>(m));
  std::vector<char> ok(static_cast<std::size_t>(m), 0);
#pragma omp parallel for schedule(dynamic, 1) if (run_parallel(cfg.exec))
  for (int r = 0; r < m; ++r) {
    try {
      reps[static_cast<std::size_t>(r)] = run_replication(spec, r, cfg);
      ok[static_cast<std::size_t>(r)] = 1;
    } catch (const std::exception&) {
      ok[static_cast<std::size_t>(r)] = 0;
    }
  }
  std::vector<Replication> good;
  for (int r = 0; r < m; ++r)
    if (ok[static_cast<std::size_t>(r)]) good.push_back(std::move(reps[static_cast<std::size_t>(r)]));
  const int failed = m - static_cast<int>(good.size());
  if (failed * 20 >= m && failed > 0)
    throw Error(std::to_string(failed) + " of " + std::to_string(m) + " replications failed (limit is < 5%)");
  McReport out = summarize_replications(good, spec.d_f);
  out.failed = failed;
  return out;
}

}  // namespace bife
