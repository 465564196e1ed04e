#include "bife/portfolio.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "bife/error.hpp"
#include "bife/selector.hpp"

namespace bife {

namespace {

constexpr double kDaysPerYear = 252.0;

double sample_sd(const VectorXd& v) {
  if (v.size() < 2) return 0.0;
  const double m = v.mean();
  return std::sqrt((v.array() - m).square().sum() / static_cast<double>(v.size() - 1));
}

}  // namespace

void MarketData::validate() const {
  const Eigen::Index t_n = returns.cols();
  if (vix.size() != t_n) throw DimensionError("periods", "VIX series length differs from the return panel");
  if (rfi.size() != t_n) throw DimensionError("periods", "risk-free series length differs from the return panel");
  if (!returns.allFinite() || !vix.allFinite() || !rfi.allFinite()) throw DataError("market data has missing values");
  if (!stocks.empty() && static_cast<Eigen::Index>(stocks.size()) != returns.rows())
    throw DimensionError("units", "stock labels differ from the return panel");
  if (!dates.empty() && static_cast<Eigen::Index>(dates.size()) != t_n)
    throw DimensionError("periods", "date labels differ from the return panel");
}

std::string strategy_name(Strategy s, int d_f) {
  switch (s) {
    case Strategy::IFE:
      return d_f < 0 ? "IFE(optimal)" : "IFE(" + std::to_string(d_f) + ")";
    case Strategy::FE:
      return "FE";
    case Strategy::EW:
      return "EW";
    case Strategy::CM:
      return "CM";
  }
  return "?";
}

double annualized_mean_pct(const VectorXd& daily) {
  if (daily.size() == 0) throw Error("empty return series");
  return kDaysPerYear * daily.mean() * 100.0;
}

double annualized_std_pct(const VectorXd& daily) {
  if (daily.size() == 0) throw Error("empty return series");
  return std::sqrt(kDaysPerYear) * sample_sd(daily) * 100.0;
}

double information_ratio(double mean_pct, double std_pct) {
  if (!(std_pct > 0.0)) throw Error("zero standard deviation: ratio undefined");
  return mean_pct / std_pct;
}

PerformanceStats performance_stats(const VectorXd& daily_returns, const VectorXd& daily_rfi) {
  if (daily_returns.size() == 0) throw Error("empty return series");
  if (daily_rfi.size() != daily_returns.size()) throw DimensionError("periods", "risk-free series length differs");
  PerformanceStats s;
  s.mean = annualized_mean_pct(daily_returns);
  s.std = annualized_std_pct(daily_returns);
  s.ir = information_ratio(s.mean, s.std);
  s.sr = kDaysPerYear * (daily_returns.mean() - daily_rfi.mean()) * 100.0 / s.std;
  return s;
}

VectorXd forecast_probs(const FitResult& fit, const MatrixXd& x_next, const LinkFamily& link, IndexBounds bounds) {
  const ParameterSet& p = fit.params;
  const Eigen::Index n = p.B.rows();
  if (x_next.rows() != n || x_next.cols() != p.B.cols())
    throw DimensionError("regressors", "forecast regressors must be N x d_beta");
  VectorXd z = (x_next.cwiseProduct(p.B)).rowwise().sum();
  if (p.d_f() > 0) {
    if (p.F.rows() == 0) throw DimensionError("periods", "no factor estimate to carry forward");
    z += p.Gamma * p.F.row(p.F.rows() - 1).transpose();
  }
  VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = link.cdf(clamp_index(z(i), bounds));
  return out;
}

std::vector<int> select_stocks(const VectorXd& probs) {
  std::vector<int> out;
  for (Eigen::Index i = 0; i < probs.size(); ++i)
    if (probs(i) >= 0.5) out.push_back(static_cast<int>(i));
  return out;
}

VectorXd min_var_weights(const MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() == 0) throw DimensionError("units", "sigma must be square");
  const VectorXd ones = VectorXd::Ones(sigma.rows());
  Eigen::LDLT<MatrixXd> ldlt(sigma);
  VectorXd s_inv_one;
  if (ldlt.info() == Eigen::Success && ldlt.isPositive()) s_inv_one = ldlt.solve(ones);
  // LDLT silently returns a non-solution when a pivot vanishes.
  const auto solved = [&](const VectorXd& v) {
    return v.size() > 0 && v.allFinite() &&
           (sigma * v - ones).norm() <= 1e-8 * (sigma.norm() * v.norm() + ones.norm());
  };
  if (!solved(s_inv_one))
    s_inv_one = sigma.completeOrthogonalDecomposition().solve(ones);
  const double denom = ones.dot(s_inv_one);
  if (!(denom > 1e-12) || !std::isfinite(denom))
    throw SingularError("1' sigma^-1 1 is not positive: covariance is singular");
  return s_inv_one / denom;
}

MatrixXd sample_covariance(const MatrixXd& rows, double ridge) {
  const Eigen::Index k = rows.rows(), m = rows.cols();
  if (m < 2) throw Error("covariance needs at least two observations");
  const MatrixXd centred = rows.colwise() - rows.rowwise().mean();
  MatrixXd s = centred * centred.transpose() / static_cast<double>(m - 1);
  if (k > 0 && ridge > 0.0) s.diagonal().array() += ridge * s.trace() / static_cast<double>(k);
  return s;
}

MatrixXd sample_correlation(const MatrixXd& rows) {
  const MatrixXd s = sample_covariance(rows, 0.0);
  VectorXd sd = s.diagonal().cwiseSqrt();
  for (Eigen::Index i = 0; i < sd.size(); ++i)
    if (!(sd(i) > 0.0)) throw DataError("a stock has constant returns in the window");
  const VectorXd inv = sd.cwiseInverse();
  return inv.asDiagonal() * s * inv.asDiagonal();
}

void BacktestConfig::validate() const {
  if (window < 4) throw Error("backtest window must hold at least four days");
  if (strategy == Strategy::IFE && d_f < 0 && d_max < 0) throw Error("d_max must be >= 0");
  if (!(ridge >= 0.0)) throw Error("ridge must be non-negative");
  fit.validate();
}

PanelData window_panel(const MarketData& market, int start, int window, bool with_intercept) {
  const int n = market.n_stocks();
  const int t_n = window - 1;
  // log VIX standardised over the days the window can see.
  const VectorXd lv = market.vix.segment(start, window);
  const double mu = lv.mean();
  double sd = sample_sd(lv);
  if (!(sd > 0.0)) sd = 1.0;
  const VectorXd xs = (lv.array() - mu) / sd;

  MatrixXd y(n, t_n);
  const int d_beta = with_intercept ? 2 : 1;
  RowMatrix x(static_cast<Eigen::Index>(n) * t_n, d_beta);
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < t_n; ++t) {
      y(i, t) = market.returns(i, start + t + 1) > 0.0 ? 1.0 : 0.0;
      const Eigen::Index row = static_cast<Eigen::Index>(i) * t_n + t;
      if (with_intercept) {
        x(row, 0) = 1.0;
        x(row, 1) = xs(t);
      } else {
        x(row, 0) = xs(t);
      }
    }
  }
  return PanelData(std::move(y), std::move(x));
}

DayDecision decide_day(const MarketData& market, int tau, const BacktestConfig& cfg) {
  const int n = market.n_stocks();
  const int start = tau - cfg.window;
  if (start < 0 || tau >= market.n_days()) throw Error("day " + std::to_string(tau) + " has no full training window");
  DayDecision out;
  out.weights = VectorXd::Zero(n);

  // Returns observed strictly before tau, aligned with the training span.
  const MatrixXd hist = market.returns.middleCols(start + 1, cfg.window - 1);

  if (cfg.strategy == Strategy::EW) {
    out.weights.setConstant(1.0 / n);
    for (int i = 0; i < n; ++i) out.selected.push_back(i);
    return out;
  }
  if (cfg.strategy == Strategy::CM) {
    out.weights = min_var_weights(sample_correlation(hist));
    for (int i = 0; i < n; ++i) out.selected.push_back(i);
    return out;
  }

  const bool fe = cfg.strategy == Strategy::FE;
  const PanelData panel = window_panel(market, start, cfg.window, fe);
  FitConfig fc = cfg.fit;
  fc.exec = Exec::Serial;
  fc.seed = stream_seed(cfg.fit.seed, static_cast<std::uint64_t>(tau));
  FitResult f;
  if (fe) {
    fc.d_f = 0;
    f = fit(panel, cfg.link, fc);
    out.chosen_d = 0;
  } else if (cfg.d_f >= 0) {
    fc.d_f = cfg.d_f;
    f = fit(panel, cfg.link, fc);
    out.chosen_d = cfg.d_f;
  } else {
    SelectionResult sel = select_num_factors(panel, cfg.link, fc, cfg.d_max);
    out.chosen_d = sel.chosen_d;
    f = std::move(sel.fits.at(sel.chosen_d));
  }

  // The regressor of the last visible day forecasts day tau.
  const int last = panel.n_periods();
  const VectorXd lv = market.vix.segment(start, cfg.window);
  double sd = sample_sd(lv);
  if (!(sd > 0.0)) sd = 1.0;
  const double x_last = (lv(last) - lv.mean()) / sd;
  MatrixXd x_next(n, fe ? 2 : 1);
  for (int i = 0; i < n; ++i) {
    if (fe) {
      x_next(i, 0) = 1.0;
      x_next(i, 1) = x_last;
    } else {
      x_next(i, 0) = x_last;
    }
  }
  const VectorXd probs = forecast_probs(f, x_next, cfg.link, fc.bounds);
  out.selected = select_stocks(probs);
  if (out.selected.size() < 2) {
    out.no_trade = true;
    return out;
  }
  MatrixXd sub(static_cast<Eigen::Index>(out.selected.size()), hist.cols());
  for (std::size_t k = 0; k < out.selected.size(); ++k) sub.row(static_cast<Eigen::Index>(k)) = hist.row(out.selected[k]);
  try {
    const VectorXd w = min_var_weights(sample_covariance(sub, cfg.ridge));
    for (std::size_t k = 0; k < out.selected.size(); ++k) out.weights(out.selected[k]) = w(static_cast<Eigen::Index>(k));
  } catch (const SingularError&) {
    out.no_trade = true;
  }
  return out;
}

BacktestReport rolling_backtest(const MarketData& market, const BacktestConfig& cfg) {
  market.validate();
  cfg.validate();
  if (market.n_days() < cfg.window + 1)
    throw DimensionError("periods", "backtest needs at least " + std::to_string(cfg.window + 1) + " days");
  const int first = cfg.window, n_days = market.n_days() - cfg.window;

  std::vector<DayDecision> days(static_cast<std::size_t>(n_days));
  std::vector<std::string> errors(static_cast<std::size_t>(n_days));
#pragma omp parallel for schedule(dynamic, 1) if (run_parallel(cfg.exec))
  for (int k = 0; k < n_days; ++k) {
    try {
      days[static_cast<std::size_t>(k)] = decide_day(market, first + k, cfg);
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(k)] = e.what();
    }
  }

  BacktestReport rep;
  rep.strategy = strategy_name(cfg.strategy, cfg.d_f);
  rep.daily_returns.resize(n_days);
  rep.daily_rfi.resize(n_days);
  for (int k = 0; k < n_days; ++k) {
    const auto s = static_cast<std::size_t>(k);
    const int tau = first + k;
    if (!errors[s].empty()) throw Error("backtest day " + std::to_string(tau) + ": " + errors[s]);
    const DayDecision& d = days[s];
    rep.daily_returns(k) = d.no_trade ? 0.0 : d.weights.dot(market.returns.col(tau));
    rep.daily_rfi(k) = market.rfi(tau);
    if (d.no_trade) ++rep.n_no_trade_days;
    rep.chosen_d.push_back(d.chosen_d);
    rep.dates.push_back(market.dates.empty() ? std::to_string(tau) : market.dates[static_cast<std::size_t>(tau)]);
  }
  if (annualized_std_pct(rep.daily_returns) > 0.0) {
    rep.stats = performance_stats(rep.daily_returns, rep.daily_rfi);
  } else {
    // A flat series (for instance no trade on any day) leaves the ratios undefined.
    rep.stats.mean = annualized_mean_pct(rep.daily_returns);
    rep.stats.std = 0.0;
    rep.stats.ir = rep.stats.sr = std::numeric_limits<double>::quiet_NaN();
  }
  return rep;
}

}  // namespace bife
