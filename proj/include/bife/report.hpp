#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "bife/estimator.hpp"
#include "bife/inference.hpp"
#include "bife/portfolio.hpp"
#include "bife/selector.hpp"
#include "bife/simulation.hpp"

namespace bife {

inline constexpr int kSchemaVersion = 1;

using Json = nlohmann::json;

Json matrix_json(const MatrixXd& m);
Json vector_json(const VectorXd& v);

Json to_json(const FitResult& fit);
Json to_json(const SelectionResult& sel);
Json to_json(const McReport& rep);
Json to_json(const BacktestReport& rep);
Json to_json(const CovarianceSet& cov);

/// Wraps `body` with schema_version, command name and an ISO-8601 UTC
/// timestamp. Keys serialise in sorted order.
Json envelope(const std::string& command, Json body);

std::string selection_table(const SelectionResult& sel);
/// One row per design cell: Pc Pu Po, RMSE_B, RMSE_F, Std per slope.
std::string mc_table(const std::string& label, const McReport& rep);
std::string backtest_table(const std::vector<BacktestReport>& reps);
std::string fit_table(const FitResult& fit);

}  // namespace bife
