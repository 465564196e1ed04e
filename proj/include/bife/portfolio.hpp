#pragma once

#include <string>
#include <vector>

#include "bife/core_types.hpp"
#include "bife/estimator.hpp"
#include "bife/link.hpp"

namespace bife {

/// Aligned daily market panel. The per-window standardisation of the log VIX
/// is applied inside the backtest.
struct MarketData {
  MatrixXd returns;  ///< N_stocks x T_days simple returns
  VectorXd vix;      ///< T_days natural log of the index level
  VectorXd rfi;      ///< T_days daily risk-free rates (decimal)
  std::vector<std::string> stocks;
  std::vector<std::string> dates;

  int n_stocks() const { return static_cast<int>(returns.rows()); }
  int n_days() const { return static_cast<int>(returns.cols()); }
  void validate() const;
};

enum class Strategy { IFE, FE, EW, CM };

std::string strategy_name(Strategy s, int d_f);

struct PerformanceStats {
  double mean = 0.0;  ///< annualised mean, percent
  double std = 0.0;   ///< annualised standard deviation, percent
  double ir = 0.0;
  double sr = 0.0;
};

double annualized_mean_pct(const VectorXd& daily);
double annualized_std_pct(const VectorXd& daily);
double information_ratio(double mean_pct, double std_pct);

/// Mean = 252 mean(r) 100, Std = sqrt(252) sd(r) 100 (sample sd),
/// IR = Mean / Std, SR = 252 (mean(r) - mean(rfi)) 100 / Std.
PerformanceStats performance_stats(const VectorXd& daily_returns, const VectorXd& daily_rfi);

/// p_i = G(x_next_i' beta_i + gamma_i' f_last), f_last the last row of F.
/// `x_next` is N x d_beta.
VectorXd forecast_probs(const FitResult& fit, const MatrixXd& x_next, const LinkFamily& link,
                        IndexBounds bounds = {});

/// Indices with p_i >= 0.5, ascending.
std::vector<int> select_stocks(const VectorXd& probs);

/// w = S^-1 1 / (1' S^-1 1).
VectorXd min_var_weights(const MatrixXd& sigma);

/// Sample covariance (rows are variables, columns observations) plus
/// ridge * tr / k on the diagonal.
MatrixXd sample_covariance(const MatrixXd& rows, double ridge = 1e-6);
MatrixXd sample_correlation(const MatrixXd& rows);

struct BacktestConfig {
  Strategy strategy = Strategy::IFE;
  /// Number of factors for IFE; negative selects it per window by the IC.
  int d_f = -1;
  int d_max = 5;
  int window = 505;
  double ridge = 1e-6;
  LinkFamily link = LinkFamily::probit();
  FitConfig fit{};
  Exec exec = Exec::Parallel;

  void validate() const;
};

/// Portfolio held on day `tau`: trained on days tau-window .. tau-1 only.
struct DayDecision {
  VectorXd weights;  ///< N_stocks, zero outside the selection
  std::vector<int> selected;
  int chosen_d = -1;
  bool no_trade = false;
};

DayDecision decide_day(const MarketData& market, int tau, const BacktestConfig& cfg);

struct BacktestReport {
  std::string strategy;
  std::vector<std::string> dates;
  VectorXd daily_returns;
  VectorXd daily_rfi;
  PerformanceStats stats;
  int n_no_trade_days = 0;
  std::vector<int> chosen_d;
};

/// When the daily series is flat the ratios in `stats` are NaN.
BacktestReport rolling_backtest(const MarketData& market, const BacktestConfig& cfg);

/// Daily binary panel of one training window starting at `start`:
/// y_it = 1{r_i,t+1 > 0} and x_t = standardised log VIX, for t in
/// [start, start + window - 1).
PanelData window_panel(const MarketData& market, int start, int window, bool with_intercept);

}  // namespace bife
