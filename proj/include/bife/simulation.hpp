#pragma once

#include <cstdint>
#include <vector>

#include "bife/core_types.hpp"
#include "bife/estimator.hpp"
#include "bife/link.hpp"

namespace bife {

enum class TailCase { LightTail, HeavyTail };
enum class DgpKind { DGP1, DGP2, DGP3 };

struct DgpSpec {
  TailCase tail = TailCase::LightTail;
  DgpKind dgp = DgpKind::DGP1;
  int n_units = 50;
  int n_periods = 50;
  int d_beta = 2;
  int d_f = 2;
  std::uint64_t seed = 0;
  int burn_in = 100;

  void validate() const;
  /// AR(1) coefficient of the error process (0 for DGP1).
  double rho() const;
  /// Probit for the light-tail case, logit for the heavy-tail case.
  LinkFamily link() const;
};

struct SimulatedPanel {
  PanelData data;
  /// True B0, Gamma0, F0 (F0 is not normalised).
  ParameterSet truth;
};

/// N x T latent errors of the spec (y = 1{z0 >= eps}); gen_dgp draws the same
/// matrix from the same seed.
MatrixXd draw_errors(const DgpSpec& spec);

SimulatedPanel gen_dgp(const DgpSpec& spec);

/// ||P_A - P_B||_F through d_A + d_B - 2 tr(P_A P_B); an empty factor block
/// projects to zero. Never forms T x T matrices.
double projection_distance(const MatrixXd& f_hat, const MatrixXd& f_true);

struct McReport {
  double pc = 0.0;
  double pu = 0.0;
  double po = 0.0;
  double rmse_b = 0.0;
  double rmse_f = 0.0;
  VectorXd std_beta;
  int replications = 0;  ///< successful replications M
  int failed = 0;
  std::vector<int> chosen_d;
};

/// Per-replication outcome; the Monte Carlo driver reduces a list of these.
struct Replication {
  int chosen_d = 0;
  MatrixXd b_hat;
  MatrixXd b_true;
  double f_distance = 0.0;
};

/// Folds replications into the reported metrics. Order independent.
McReport summarize_replications(const std::vector<Replication>& reps, int true_d_f);

struct MonteCarloConfig {
  int replications = 100;
  int d_max = 4;
  FitConfig fit{};
  /// Replications whose seed is derived from (spec.seed, rep).
  Exec exec = Exec::Parallel;
};

/// Per replication: gen_dgp, choose d by the IC, keep the fit at the chosen d.
Replication run_replication(const DgpSpec& spec, int rep, const MonteCarloConfig& cfg);

McReport run_monte_carlo(const DgpSpec& spec, const MonteCarloConfig& cfg);

}  // namespace bife
