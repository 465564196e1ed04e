#pragma once

#include <map>
#include <optional>
#include <string>

#include "bife/estimator.hpp"

namespace bife {

struct SelectionResult {
  std::map<int, double> ic_values;
  int chosen_d = 0;
  std::map<int, FitResult> fits;
  /// Candidates whose fit failed, with the reason.
  std::map<int, std::string> excluded;
  double penalty_xi = 0.0;
};

/// log(sqrt(N + T)).
double default_penalty(int n_units, int n_periods);

/// Mean squared response residual (1/NT) sum (y - G(z))^2 plus d * xi / sqrt(NT).
double ic_from_residual(double mean_sq_residual, int d, double penalty_xi, int n_units, int n_periods);

/// IC of a fit obtained with d factors on `data`.
double ic_value(const PanelData& data, const FitResult& fit, const LinkFamily& link, int d, double penalty_xi,
                IndexBounds bounds = {});

/// Index of the smallest IC; ties go to the smaller d.
int argmin_ic(const std::map<int, double>& ic_values);

/// Fits d = 0..d_max with the same seed ladder and returns the minimiser.
SelectionResult select_num_factors(const PanelData& data, const LinkFamily& link, const FitConfig& cfg, int d_max,
                                   std::optional<double> penalty_xi = std::nullopt);

}  // namespace bife
