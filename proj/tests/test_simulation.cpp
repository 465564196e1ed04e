#include <doctest.h>

#include <cmath>
#include <random>

#include "bife/error.hpp"
#include "bife/simulation.hpp"
#include "support.hpp"

using namespace bife;

namespace {

MatrixXd random_orthonormal(int d, std::uint64_t seed) {
  const MatrixXd a = testing::random_params(1, d, 0, d, seed, 1.0).F;
  Eigen::HouseholderQR<MatrixXd> qr(a);
  return qr.householderQ() * MatrixXd::Identity(d, d);
}

double lag_correlation(const MatrixXd& e) {
  double sxy = 0.0, sxx = 0.0, syy = 0.0, mx = 0.0, my = 0.0;
  const Eigen::Index n = e.rows(), t_n = e.cols();
  const double m = static_cast<double>(n * (t_n - 1));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index t = 1; t < t_n; ++t) {
      mx += e(i, t);
      my += e(i, t - 1);
    }
  mx /= m;
  my /= m;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index t = 1; t < t_n; ++t) {
      sxy += (e(i, t) - mx) * (e(i, t - 1) - my);
      sxx += (e(i, t) - mx) * (e(i, t) - mx);
      syy += (e(i, t - 1) - my) * (e(i, t - 1) - my);
    }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST_CASE("slopes are i/N") {
  DgpSpec s;
  s.n_units = 4;
  s.n_periods = 3;
  const SimulatedPanel p = gen_dgp(s);
  for (int k = 0; k < 2; ++k) {
    CHECK(p.truth.B(0, k) == 0.25);
    CHECK(p.truth.B(1, k) == 0.50);
    CHECK(p.truth.B(2, k) == 0.75);
    CHECK(p.truth.B(3, k) == 1.00);
  }
}

TEST_CASE("factor and loading ranges and panel shapes") {
  DgpSpec s;
  s.n_units = 30;
  s.n_periods = 40;
  s.d_beta = 3;
  s.d_f = 2;
  s.seed = 9;
  const SimulatedPanel p = gen_dgp(s);
  CHECK(p.data.n_units() == 30);
  CHECK(p.data.n_periods() == 40);
  CHECK(p.data.d_beta() == 3);
  CHECK(p.truth.F.cols() == 2);
  CHECK(p.truth.F.minCoeff() >= -2.5);
  CHECK(p.truth.F.maxCoeff() <= 2.5);
  CHECK(p.truth.Gamma.minCoeff() >= 0.0);
  CHECK(p.truth.Gamma.maxCoeff() <= 6.0);
  const MatrixXd eps = draw_errors(s);
  const MatrixXd z = linear_index(p.data, p.truth);
  for (int i = 0; i < 30; ++i)
    for (int t = 0; t < 40; ++t) CHECK(p.data.y(i, t) == (z(i, t) >= eps(i, t) ? 1.0 : 0.0));
}

TEST_CASE("regressor mean matches the uniform-moment value") {
  // 4000 independent 16 x 16 panels: 1,024,000 draws of x.
  double sum = 0.0;
  long count = 0;
  for (int r = 0; r < 4000; ++r) {
    DgpSpec s;
    s.n_units = 16;
    s.n_periods = 16;
    s.d_beta = 1;
    s.d_f = 1;
    s.seed = static_cast<std::uint64_t>(r);
    const SimulatedPanel p = gen_dgp(s);
    sum += p.data.x().sum();
    count += p.data.x().size();
  }
  CHECK(std::abs(sum / count - 2.125) < 0.01);
}

TEST_CASE("error serial correlation by DGP") {
  DgpSpec s;
  s.n_units = 2;
  s.n_periods = 100000;
  s.seed = 5;
  CHECK(std::abs(lag_correlation(draw_errors(s))) < 0.01);
  s.tail = TailCase::HeavyTail;
  CHECK(std::abs(lag_correlation(draw_errors(s))) < 0.01);
  s.tail = TailCase::LightTail;
  s.dgp = DgpKind::DGP2;
  CHECK(std::abs(lag_correlation(draw_errors(s)) - 0.3) < 0.02);
  s.dgp = DgpKind::DGP3;
  CHECK(std::abs(lag_correlation(draw_errors(s)) - 0.7) < 0.02);
}

TEST_CASE("DGP2 cross-sectional error correlation follows 0.3^|i-j|") {
  DgpSpec s;
  s.n_units = 3;
  s.n_periods = 60000;
  s.dgp = DgpKind::DGP2;
  s.seed = 8;
  const MatrixXd e = draw_errors(s);
  const auto corr = [&](int a, int b) {
    const VectorXd u = e.row(a).transpose().array() - e.row(a).mean();
    const VectorXd v = e.row(b).transpose().array() - e.row(b).mean();
    return u.dot(v) / std::sqrt(u.squaredNorm() * v.squaredNorm());
  };
  CHECK(std::abs(corr(0, 1) - 0.3) < 0.02);
  CHECK(std::abs(corr(0, 2) - 0.09) < 0.02);
}

TEST_CASE("gen_dgp is deterministic in its seed") {
  DgpSpec s;
  s.n_units = 12;
  s.n_periods = 15;
  s.dgp = DgpKind::DGP3;
  s.tail = TailCase::HeavyTail;
  s.seed = 42;
  const SimulatedPanel a = gen_dgp(s), b = gen_dgp(s);
  CHECK(a.data.y() == b.data.y());
  CHECK(a.data.x() == b.data.x());
  CHECK(a.truth.F == b.truth.F);
  s.seed = 43;
  CHECK(gen_dgp(s).data.x() != a.data.x());
  s.burn_in = 50;
  CHECK_THROWS_AS(gen_dgp(s), Error);
}

TEST_CASE("projection distance examples") {
  const MatrixXd f = testing::random_params(1, 20, 0, 3, 1, 1.0).F;
  CHECK(projection_distance(f, f) < 1e-7);
  MatrixXd e1(2, 1), e2(2, 1);
  e1 << 1.0, 0.0;
  e2 << 0.0, 1.0;
  CHECK(projection_distance(e1, e2) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(projection_distance(MatrixXd(20, 0), f) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
  MatrixXd dep = f;
  dep.col(2) = dep.col(0) + dep.col(1);
  CHECK_THROWS_AS(projection_distance(dep, f), SingularError);
  CHECK_THROWS_AS(projection_distance(f.topRows(10), f), DimensionError);
}

TEST_CASE("projection distance is invariant to orthonormal rotations") {
  for (int s = 0; s < 50; ++s) {
    const MatrixXd a = testing::random_params(1, 25, 0, 2, 100 + s, 1.0).F;
    const MatrixXd b = testing::random_params(1, 25, 0, 3, 200 + s, 1.0).F;
    const double base = projection_distance(a, b);
    CHECK(std::abs(projection_distance(a * random_orthonormal(2, 300 + s), b) - base) < 1e-10);
    CHECK(std::abs(projection_distance(a, b * random_orthonormal(3, 400 + s)) - base) < 1e-10);
    CHECK(projection_distance(a * random_orthonormal(2, 500 + s), a) < 1e-7);
  }
}

TEST_CASE("summarize_replications arithmetic") {
  const MatrixXd b0 = MatrixXd::Constant(3, 2, 0.5);
  std::vector<Replication> reps;
  for (int d : {2, 2, 1, 3}) reps.push_back(Replication{d, b0, b0, 0.0});
  McReport r = summarize_replications(reps, 2);
  CHECK(r.pc == 0.5);
  CHECK(r.pu == 0.25);
  CHECK(r.po == 0.25);
  CHECK(r.pc + r.pu + r.po == 1.0);
  CHECK(r.rmse_b == 0.0);
  CHECK(r.std_beta.cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.replications == 4);

  std::vector<Replication> noisy;
  MatrixXd b1 = b0;
  b1(0, 0) += 0.3;
  b1(2, 1) -= 0.6;
  noisy.push_back(Replication{2, b1, b0, 0.4});
  noisy.push_back(Replication{2, b0, b0, 0.2});
  noisy.push_back(Replication{3, b0, b0, 0.0});
  r = summarize_replications(noisy, 2);
  CHECK(r.pc + r.pu + r.po == 1.0);
  CHECK(r.rmse_b == doctest::Approx(std::sqrt((0.09 + 0.36) / 3.0 / 3.0)).epsilon(1e-14));
  CHECK(r.rmse_f == doctest::Approx(std::sqrt((0.16 + 0.04) / 3.0)).epsilon(1e-14));
  CHECK(r.std_beta(0) == doctest::Approx(std::sqrt(0.09 / 3.0) / 3.0).epsilon(1e-14));
  CHECK(r.std_beta(1) == doctest::Approx(std::sqrt(0.36 / 3.0) / 3.0).epsilon(1e-14));
  CHECK_THROWS_AS(summarize_replications({}, 2), Error);
}

TEST_CASE("proportions always sum to one") {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> pick(0, 4);
  const MatrixXd b0 = MatrixXd::Zero(2, 1);
  for (int s = 0; s < 200; ++s) {
    std::vector<Replication> reps;
    const int m = 1 + s % 37;
    for (int k = 0; k < m; ++k) reps.push_back(Replication{pick(rng), b0, b0, 0.0});
    const McReport r = summarize_replications(reps, 2);
    CHECK(r.pc + r.pu + r.po == 1.0);
    CHECK(r.pu >= 0.0);
    CHECK(r.po >= 0.0);
  }
}

TEST_CASE("small Monte Carlo run is reproducible and scheduling independent") {
  DgpSpec s;
  s.n_units = 15;
  s.n_periods = 15;
  s.d_beta = 1;
  s.d_f = 1;
  s.seed = 3;
  MonteCarloConfig cfg;
  cfg.replications = 3;
  cfg.d_max = 2;
  cfg.fit.n_starts = 1;
  cfg.fit.max_outer_iters = 20;
  cfg.exec = Exec::Serial;
  const McReport a = run_monte_carlo(s, cfg);
  cfg.exec = Exec::Parallel;
  const McReport b = run_monte_carlo(s, cfg);
  CHECK(a.replications == 3);
  CHECK(a.chosen_d == b.chosen_d);
  CHECK(a.rmse_b == b.rmse_b);
  CHECK(a.rmse_f == b.rmse_f);
  CHECK(a.pc + a.pu + a.po == 1.0);
}

TEST_CASE("slope error shrinks from T = 50 to T = 150 in paired replications") {
  DgpSpec s;
  s.n_units = 50;
  s.seed = 31;
  MonteCarloConfig cfg;
  cfg.d_max = 4;
  cfg.fit.n_starts = 1;
  cfg.fit.max_outer_iters = 100;
  const auto rmse = [](const Replication& r) { return std::sqrt((r.b_hat - r.b_true).array().square().mean()); };
  int better = 0;
  const int pairs = 20;
  for (int rep = 0; rep < pairs; ++rep) {
    s.n_periods = 50;
    const double short_panel = rmse(run_replication(s, rep, cfg));
    s.n_periods = 150;
    const double long_panel = rmse(run_replication(s, rep, cfg));
    if (long_panel < short_panel) ++better;
  }
  CHECK(better * 10 >= pairs * 9);
}
