#include "bife/selector.hpp"

#include <cmath>
#include <vector>

#include "bife/error.hpp"

namespace bife {

double default_penalty(int n_units, int n_periods) {
  return std::log(std::sqrt(static_cast<double>(n_units + n_periods)));
}

double ic_from_residual(double mean_sq_residual, int d, double penalty_xi, int n_units, int n_periods) {
  return mean_sq_residual + d * penalty_xi / std::sqrt(static_cast<double>(n_units) * n_periods);
}

double ic_value(const PanelData& data, const FitResult& fit, const LinkFamily& link, int d, double penalty_xi,
                IndexBounds bounds) {
  const LinearIndex z = linear_index(data, fit.params);
  double ss = 0.0;
  for (int i = 0; i < data.n_units(); ++i) {
    for (int t = 0; t < data.n_periods(); ++t) {
      const double r = data.y(i, t) - link.cdf(clamp_index(z(i, t), bounds));
      ss += r * r;
    }
  }
  const double nt = static_cast<double>(data.n_units()) * data.n_periods();
  return ic_from_residual(ss / nt, d, penalty_xi, data.n_units(), data.n_periods());
}

int argmin_ic(const std::map<int, double>& ic_values) {
  if (ic_values.empty()) throw Error("no IC values to minimise");
  auto best = ic_values.begin();
  for (auto it = ic_values.begin(); it != ic_values.end(); ++it) {
    if (it->second < best->second) best = it;
  }
  return best->first;
}

SelectionResult select_num_factors(const PanelData& data, const LinkFamily& link, const FitConfig& cfg, int d_max,
                                   std::optional<double> penalty_xi) {
  if (d_max < 0) throw Error("d_max must be >= 0");
  if (d_max >= std::min(data.n_units(), data.n_periods()))
    throw DimensionError("factors", "d_max must be < min(N, T)");

  SelectionResult out;
  out.penalty_xi = penalty_xi.value_or(default_penalty(data.n_units(), data.n_periods()));

  const int n_cand = d_max + 1;
  std::vector<FitResult> fits(static_cast<std::size_t>(n_cand));
  std::vector<std::string> errors(static_cast<std::size_t>(n_cand));
  std::vector<char> ok(static_cast<std::size_t>(n_cand), 0);
  std::vector<double> ics(static_cast<std::size_t>(n_cand), 0.0);

  // Candidates run side by side; each fit then runs its half-steps serially.
#pragma omp parallel for schedule(dynamic, 1) if (run_parallel(cfg.exec))
  for (int d = 0; d < n_cand; ++d) {
    const auto k = static_cast<std::size_t>(d);
    FitConfig c = cfg;
    c.d_f = d;
    try {
      fits[k] = fit(data, link, c);
      ics[k] = ic_value(data, fits[k], link, d, out.penalty_xi, cfg.bounds);
      ok[k] = std::isfinite(ics[k]) ? 1 : 0;
      if (!ok[k]) errors[k] = "non-finite IC";
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  }

  for (int d = 0; d < n_cand; ++d) {
    const auto k = static_cast<std::size_t>(d);
    if (ok[k]) {
      out.ic_values[d] = ics[k];
      out.fits.emplace(d, std::move(fits[k]));
    } else {
      out.excluded[d] = errors[k];
    }
  }
  if (out.ic_values.empty()) throw Error("every candidate number of factors failed to fit");
  out.chosen_d = argmin_ic(out.ic_values);
  return out;
}

}  // namespace bife
