#include <doctest.h>

#include <cmath>
#include <random>

#include "bife/error.hpp"
#include "bife/portfolio.hpp"
#include "support.hpp"

using namespace bife;

namespace {

MatrixXd random_psd(int k, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  MatrixXd a(k, k + 3);
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c) a(r, c) = normal(rng);
  return a * a.transpose() / static_cast<double>(k + 3) + 1e-3 * MatrixXd::Identity(k, k);
}

MarketData tiny_market(const MatrixXd& returns) {
  MarketData m;
  m.returns = returns;
  m.vix = VectorXd::LinSpaced(returns.cols(), 2.5, 3.0);
  m.rfi = VectorXd::Zero(returns.cols());
  return m;
}

}  // namespace

TEST_CASE("performance arithmetic") {
  CHECK(std::round(information_ratio(16.11, 12.33) * 100.0) / 100.0 == 1.31);
  CHECK(std::round(information_ratio(13.35, 15.36) * 100.0) / 100.0 == 0.87);
  CHECK(std::round(annualized_mean_pct(VectorXd::Constant(30, 0.000639)) * 100.0) / 100.0 == 16.10);
  CHECK_THROWS_AS(information_ratio(1.0, 0.0), Error);
  CHECK_THROWS_AS(performance_stats(VectorXd::Constant(5, 0.001), VectorXd::Zero(5)), Error);

  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal(0.0005, 0.01);
  VectorXd r(200);
  for (Eigen::Index t = 0; t < r.size(); ++t) r(t) = normal(rng);
  const PerformanceStats same = performance_stats(r, r);
  CHECK(std::abs(same.sr) < 1e-12);
  const PerformanceStats s = performance_stats(r, VectorXd::Constant(200, 0.0001));
  CHECK(std::abs(s.ir - s.mean / s.std) < 1e-12);
  CHECK(s.mean == doctest::Approx(252.0 * r.mean() * 100.0).epsilon(1e-14));
  const double sd = std::sqrt((r.array() - r.mean()).square().sum() / 199.0);
  CHECK(s.std == doctest::Approx(std::sqrt(252.0) * sd * 100.0).epsilon(1e-14));
  CHECK(s.sr == doctest::Approx(252.0 * (r.mean() - 0.0001) * 100.0 / s.std).epsilon(1e-14));
}

TEST_CASE("select_stocks threshold") {
  CHECK(select_stocks((VectorXd(3) << 0.6, 0.4, 0.5).finished()) == std::vector<int>{0, 2});
  CHECK(select_stocks(VectorXd::Constant(4, 0.49)).empty());
  CHECK(select_stocks(VectorXd::Constant(4, 0.5)) == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("forecast_probs examples") {
  FitResult f;
  f.params = ParameterSet::zeros(3, 5, 1, 1);
  CHECK((forecast_probs(f, MatrixXd::Ones(3, 1), LinkFamily::probit()).array() == 0.5).all());
  CHECK((forecast_probs(f, MatrixXd::Ones(3, 1), LinkFamily::logit()).array() == 0.5).all());

  f.params = testing::random_params(4, 6, 2, 2, 11, 1.0);
  const MatrixXd x = testing::random_params(4, 1, 2, 0, 12, 1.0).B;
  const VectorXd p = forecast_probs(f, x, LinkFamily::logit());
  for (int i = 0; i < 4; ++i) {
    const double z = x.row(i).dot(f.params.B.row(i)) + f.params.Gamma.row(i).dot(f.params.F.row(5));
    CHECK(std::abs(p(i) - 1.0 / (1.0 + std::exp(-z))) < 1e-12);
  }
  CHECK_THROWS_AS(forecast_probs(f, MatrixXd::Ones(4, 1), LinkFamily::logit()), DimensionError);
}

TEST_CASE("min_var_weights examples") {
  const VectorXd w3 = min_var_weights(MatrixXd::Identity(3, 3));
  for (int k = 0; k < 3; ++k) CHECK(w3(k) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  const VectorXd w2 = min_var_weights((VectorXd(2) << 1.0, 4.0).finished().asDiagonal().toDenseMatrix());
  CHECK(w2(0) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(w2(1) == doctest::Approx(0.2).epsilon(1e-15));
  for (double c : {1e-6, 0.3, 1.0, 1e4}) {
    const VectorXd w = min_var_weights(c * MatrixXd::Identity(5, 5));
    CHECK((w.array() - 0.2).abs().maxCoeff() < 1e-14);
  }
  MatrixXd sing(2, 2);
  sing << 1.0, -1.0, -1.0, 1.0;
  CHECK_THROWS_AS(min_var_weights(sing), SingularError);
}

TEST_CASE("min_var_weights matches the KKT system and is optimal") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  for (int s = 0; s < 30; ++s) {
    const int k = 2 + s % 5;
    const MatrixXd sigma = random_psd(k, rng);
    const VectorXd w = min_var_weights(sigma);
    CHECK(std::abs(w.sum() - 1.0) < 1e-10);

    MatrixXd kkt = MatrixXd::Zero(k + 1, k + 1);
    kkt.topLeftCorner(k, k) = 2.0 * sigma;
    kkt.block(0, k, k, 1).setOnes();
    kkt.block(k, 0, 1, k).setOnes();
    VectorXd rhs = VectorXd::Zero(k + 1);
    rhs(k) = 1.0;
    const VectorXd sol = kkt.partialPivLu().solve(rhs);
    CHECK((sol.head(k) - w).cwiseAbs().maxCoeff() < 1e-10);

    const VectorXd sw = sigma * w;
    CHECK((sw.array() - sw(0)).abs().maxCoeff() < 1e-10 * (1.0 + std::abs(sw(0))));

    const double best = w.dot(sigma * w);
    for (int v_i = 0; v_i < 200; ++v_i) {
      VectorXd v(k);
      for (int j = 0; j < k; ++j) v(j) = normal(rng);
      v(k - 1) = 1.0 - v.head(k - 1).sum();
      CHECK(best <= v.dot(sigma * v) + 1e-12);
    }
  }
}

TEST_CASE("sample covariance and correlation") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  MatrixXd rows(3, 40);
  for (Eigen::Index r = 0; r < 3; ++r)
    for (Eigen::Index c = 0; c < 40; ++c) rows(r, c) = normal(rng) * (r + 1);
  const MatrixXd s0 = sample_covariance(rows, 0.0);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      double acc = 0.0;
      for (int c = 0; c < 40; ++c) acc += (rows(a, c) - rows.row(a).mean()) * (rows(b, c) - rows.row(b).mean());
      CHECK(std::abs(s0(a, b) - acc / 39.0) < 1e-14);
    }
  const MatrixXd s1 = sample_covariance(rows, 1e-6);
  CHECK(((s1 - s0) - 1e-6 * s0.trace() / 3.0 * MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-14);
  const MatrixXd c = sample_correlation(rows);
  CHECK((c.diagonal().array() - 1.0).abs().maxCoeff() < 1e-14);
  CHECK(std::abs(c(0, 1) - s0(0, 1) / std::sqrt(s0(0, 0) * s0(1, 1))) < 1e-14);
}

TEST_CASE("window_panel alignment") {
  const MarketData m = testing::planted_market(4, 30, 5);
  const PanelData p = window_panel(m, 7, 10, false);
  CHECK(p.n_units() == 4);
  CHECK(p.n_periods() == 9);
  for (int i = 0; i < 4; ++i)
    for (int t = 0; t < 9; ++t) CHECK(p.y(i, t) == (m.returns(i, 7 + t + 1) > 0.0 ? 1.0 : 0.0));
  const VectorXd lv = m.vix.segment(7, 10);
  const double sd = std::sqrt((lv.array() - lv.mean()).square().sum() / 9.0);
  for (int t = 0; t < 9; ++t) CHECK(std::abs(p.x(2, t)(0) - (lv(t) - lv.mean()) / sd) < 1e-12);
  const PanelData fe = window_panel(m, 7, 10, true);
  CHECK(fe.d_beta() == 2);
  CHECK(fe.x(1, 3)(0) == 1.0);
}

TEST_CASE("EW strategy averages the day's returns") {
  MatrixXd r = MatrixXd::Zero(3, 7);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> normal(0.0, 0.01);
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index t = 0; t < 5; ++t) r(i, t) = normal(rng);
  r.col(5) << 0.01, 0.02, 0.03;
  r.col(6) << -0.01, 0.0, 0.04;
  BacktestConfig cfg;
  cfg.strategy = Strategy::EW;
  cfg.window = 5;
  const BacktestReport rep = rolling_backtest(tiny_market(r), cfg);
  REQUIRE(rep.daily_returns.size() == 2);
  CHECK(rep.daily_returns(0) == doctest::Approx(0.02).epsilon(1e-15));
  CHECK(rep.daily_returns(1) == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(rep.strategy == "EW");
}

TEST_CASE("a day with no stock at p >= 0.5 holds nothing") {
  // Every training return is negative, so the fixed-effects forecast is below one half.
  MatrixXd r = MatrixXd::Constant(3, 12, -0.01);
  r.col(11) << 0.01, 0.02, 0.01;
  BacktestConfig cfg;
  cfg.strategy = Strategy::FE;
  cfg.window = 10;
  cfg.fit.n_starts = 1;
  const MarketData m = tiny_market(r);
  const DayDecision d = decide_day(m, 10, cfg);
  CHECK(d.no_trade);
  CHECK(d.selected.empty());
  CHECK(d.weights.cwiseAbs().maxCoeff() == 0.0);
  const BacktestReport rep = rolling_backtest(m, cfg);
  CHECK(rep.n_no_trade_days == 2);
  CHECK(rep.daily_returns(0) == 0.0);
  CHECK(rep.stats.std == 0.0);
  CHECK(std::isnan(rep.stats.ir));
}

TEST_CASE("CM baseline weights are the min-variance weights of the full correlation matrix") {
  const MarketData m = testing::planted_market(5, 50, 8);
  BacktestConfig cfg;
  cfg.strategy = Strategy::CM;
  cfg.window = 40;
  const DayDecision d = decide_day(m, 45, cfg);
  const VectorXd expect = min_var_weights(sample_correlation(m.returns.middleCols(6, 39)));
  CHECK((d.weights - expect).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("decisions only use data strictly before the day") {
  const MarketData m = testing::planted_market(8, 70, 9);
  for (Strategy s : {Strategy::IFE, Strategy::FE, Strategy::CM}) {
    BacktestConfig cfg;
    cfg.strategy = s;
    cfg.d_f = 1;
    cfg.window = 50;
    cfg.fit.n_starts = 1;
    cfg.fit.max_outer_iters = 30;
    const int tau = 60;
    const DayDecision a = decide_day(m, tau, cfg);
    MarketData future = m;
    std::mt19937_64 rng(10);
    std::normal_distribution<double> normal(0.0, 0.05);
    for (int t = tau; t < m.n_days(); ++t) {
      for (int i = 0; i < m.n_stocks(); ++i) future.returns(i, t) = normal(rng);
      future.vix(t) += normal(rng);
      future.rfi(t) = 0.01;
    }
    const DayDecision b = decide_day(future, tau, cfg);
    CHECK(a.weights == b.weights);
    CHECK(a.selected == b.selected);
  }
}

TEST_CASE("IFE beats EW on a planted-signal market") {
  for (int s = 0; s < 2; ++s) {
    const MarketData m = testing::planted_market(12, 110, 100 + s);
    BacktestConfig cfg;
    cfg.window = 80;
    cfg.d_f = 1;
    cfg.fit.n_starts = 1;
    cfg.fit.max_outer_iters = 50;
    const BacktestReport ife = rolling_backtest(m, cfg);
    cfg.strategy = Strategy::EW;
    const BacktestReport ew = rolling_backtest(m, cfg);
    CHECK(ife.stats.ir > ew.stats.ir);
    CHECK(ife.daily_returns.size() == 30);
  }
}

TEST_CASE("optimal-d backtest records the chosen d and matches the serial run") {
  const MarketData m = testing::planted_market(6, 48, 12);
  BacktestConfig cfg;
  cfg.window = 40;
  cfg.d_f = -1;
  cfg.d_max = 2;
  cfg.fit.n_starts = 1;
  cfg.fit.max_outer_iters = 20;
  cfg.exec = Exec::Serial;
  const BacktestReport a = rolling_backtest(m, cfg);
  cfg.exec = Exec::Parallel;
  const BacktestReport b = rolling_backtest(m, cfg);
  CHECK(a.daily_returns == b.daily_returns);
  CHECK(a.chosen_d == b.chosen_d);
  CHECK(a.strategy == "IFE(optimal)");
  for (int d : a.chosen_d) CHECK((d >= 0 && d <= 2));
}

TEST_CASE("backtest input validation") {
  const MarketData m = testing::planted_market(4, 20, 13);
  BacktestConfig cfg;
  cfg.window = 20;
  CHECK_THROWS_AS(rolling_backtest(m, cfg), DimensionError);
  MarketData bad = m;
  bad.vix.conservativeResize(19);
  cfg.window = 10;
  CHECK_THROWS_AS(rolling_backtest(bad, cfg), DimensionError);
  bad = m;
  bad.returns(1, 3) = std::nan("");
  CHECK_THROWS_AS(rolling_backtest(bad, cfg), DataError);
}
