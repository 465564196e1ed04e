#include "bife/report.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <sstream>

namespace bife {

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

Json matrix_json(const MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json vector_json(const VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
  return out;
}

Json to_json(const FitResult& fit) {
  Json j;
  j["B"] = matrix_json(fit.params.B);
  j["Gamma"] = matrix_json(fit.params.Gamma);
  j["F"] = matrix_json(fit.params.F);
  j["d_f"] = fit.params.d_f();
  j["loglik"] = fit.loglik;
  j["outer_iters"] = fit.outer_iters;
  j["converged"] = fit.converged;
  j["final_distance"] = fit.final_distance;
  j["start_index"] = fit.start_index;
  j["start_logliks"] = fit.start_logliks;
  j["separated_units"] = fit.separated_units;
  return j;
}

Json to_json(const SelectionResult& sel) {
  Json j;
  Json ic = Json::object();
  for (const auto& [d, v] : sel.ic_values) ic[std::to_string(d)] = v;
  Json ex = Json::object();
  for (const auto& [d, why] : sel.excluded) ex[std::to_string(d)] = why;
  j["ic_values"] = ic;
  j["excluded"] = ex;
  j["chosen_d"] = sel.chosen_d;
  j["penalty_xi"] = sel.penalty_xi;
  return j;
}

Json to_json(const McReport& rep) {
  Json j;
  j["Pc"] = rep.pc;
  j["Pu"] = rep.pu;
  j["Po"] = rep.po;
  j["RMSE_B"] = rep.rmse_b;
  j["RMSE_F"] = rep.rmse_f;
  j["Std_beta"] = vector_json(rep.std_beta);
  j["replications"] = rep.replications;
  j["failed"] = rep.failed;
  j["chosen_d"] = rep.chosen_d;
  return j;
}

Json to_json(const BacktestReport& rep) {
  Json j;
  j["strategy"] = rep.strategy;
  j["Mean"] = rep.stats.mean;
  j["Std"] = rep.stats.std;
  j["IR"] = rep.stats.ir;
  j["SR"] = rep.stats.sr;
  j["units"] = {{"Mean", "percent per annum"}, {"Std", "percent per annum"}};
  j["n_no_trade_days"] = rep.n_no_trade_days;
  j["dates"] = rep.dates;
  j["daily_returns"] = vector_json(rep.daily_returns);
  j["chosen_d"] = rep.chosen_d;
  return j;
}

Json to_json(const CovarianceSet& cov) {
  Json j;
  Json vt = Json::array();
  for (const MatrixXd& m : cov.var_theta) vt.push_back(matrix_json(m));
  Json vf = Json::array();
  for (const MatrixXd& m : cov.var_f) vf.push_back(matrix_json(m));
  Json se = Json::array();
  for (const MatrixXd& m : cov.var_theta) se.push_back(vector_json(m.diagonal().cwiseMax(0.0).cwiseSqrt()));
  j["var_theta"] = vt;
  j["var_f"] = vf;
  j["se_theta"] = se;
  j["singular_units"] = cov.singular_units;
  j["singular_periods"] = cov.singular_periods;
  return j;
}

Json envelope(const std::string& command, Json body) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = command;
  j["timestamp"] = utc_timestamp();
  j["result"] = std::move(body);
  return j;
}

std::string selection_table(const SelectionResult& sel) {
  std::ostringstream out;
  out << "  d        IC\n";
  for (const auto& [d, v] : sel.ic_values)
    out << "  " << d << "  " << fixed(v, 6) << (d == sel.chosen_d ? "  <- chosen" : "") << '\n';
  for (const auto& [d, why] : sel.excluded) out << "  " << d << "  excluded: " << why << '\n';
  out << "  xi = " << fixed(sel.penalty_xi, 6) << '\n';
  return out.str();
}

std::string mc_table(const std::string& label, const McReport& rep) {
  std::ostringstream out;
  out << label << "  M=" << rep.replications << " (failed " << rep.failed << ")\n";
  out << "    Pc      Pu      Po      RMSE_B  RMSE_F";
  for (Eigen::Index k = 0; k < rep.std_beta.size(); ++k) out << "  Std_b" << (k + 1) << " ";
  out << '\n';
  out << "    " << fixed(rep.pc, 3) << "   " << fixed(rep.pu, 3) << "   " << fixed(rep.po, 3) << "   "
      << fixed(rep.rmse_b, 4) << "  " << fixed(rep.rmse_f, 4);
  for (Eigen::Index k = 0; k < rep.std_beta.size(); ++k) out << "  " << fixed(rep.std_beta(k), 4) << " ";
  out << '\n';
  return out.str();
}

std::string backtest_table(const std::vector<BacktestReport>& reps) {
  std::ostringstream out;
  out << "  strategy        Mean(%)   Std(%)      IR      SR   no-trade\n";
  for (const auto& r : reps) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "  %-14s %8.2f %8.2f %7.2f %7.2f %10d\n", r.strategy.c_str(), r.stats.mean,
                  r.stats.std, r.stats.ir, r.stats.sr, r.n_no_trade_days);
    out << buf;
  }
  return out.str();
}

std::string fit_table(const FitResult& fit) {
  std::ostringstream out;
  out << "  d_f = " << fit.params.d_f() << ", loglik = " << fixed(fit.loglik, 6) << ", outer iterations = "
      << fit.outer_iters << (fit.converged ? " (converged)" : " (not converged)") << '\n';
  out << "  unit";
  for (int k = 0; k < fit.params.d_beta(); ++k) out << "      beta" << (k + 1);
  out << '\n';
  for (Eigen::Index i = 0; i < fit.params.B.rows(); ++i) {
    out << "  " << i;
    for (Eigen::Index k = 0; k < fit.params.B.cols(); ++k) out << "  " << fixed(fit.params.B(i, k), 6);
    out << '\n';
  }
  return out.str();
}

}  // namespace bife
