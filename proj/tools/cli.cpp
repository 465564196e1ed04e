#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "bife/error.hpp"
#include "bife/inference.hpp"
#include "bife/io.hpp"
#include "bife/parallel.hpp"
#include "bife/portfolio.hpp"
#include "bife/report.hpp"
#include "bife/selector.hpp"
#include "bife/simulation.hpp"

namespace bife {

namespace {

constexpr const char* kWorkersEnv = "BIFE_WORKERS";

struct FitFlags {
  int starts = 5;
  double epsilon = 1e-6;
  int max_iters = 500;
  double lo = -30.0;
  double hi = 30.0;
  bool expected_hessian = false;

  void add(CLI::App* app) {
    app->add_option("--starts", starts, "Random initialisations per fit")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--epsilon", epsilon, "Stop tolerance on (1/sqrt(N))||B_j - B_j-1||")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--max-iters", max_iters, "Maximum outer iterations")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--index-lo", lo, "Lower clamp of the linear index")->capture_default_str();
    app->add_option("--index-hi", hi, "Upper clamp of the linear index")->capture_default_str();
    app->add_flag("--expected-hessian", expected_hessian, "Newton steps with the expected-information Hessian");
  }

  FitConfig make(std::uint64_t seed) const {
    FitConfig c;
    c.n_starts = starts;
    c.epsilon = epsilon;
    c.max_outer_iters = max_iters;
    c.bounds = IndexBounds{lo, hi};
    c.newton.hessian = expected_hessian ? HessianForm::Expected : HessianForm::Full;
    c.seed = seed;
    return c;
  }
};

void write_outputs(const Json& doc, const std::string& table, const std::string& out_path, std::ostream& out) {
  const std::string text = doc.dump(2) + "\n";
  if (out_path.empty() || out_path == "-") {
    out << text;
  } else {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw Error("cannot write " + out_path);
    f << text;
    std::ofstream t(out_path + ".txt", std::ios::binary);
    if (!t) throw Error("cannot write " + out_path + ".txt");
    t << table;
    out << table;
  }
}

const char* error_kind(const std::exception& e) {
  if (dynamic_cast<const DimensionError*>(&e)) return "dimension";
  if (dynamic_cast<const NumericalError*>(&e)) return "numerical";
  if (dynamic_cast<const DataError*>(&e)) return "data";
  if (dynamic_cast<const SingularError*>(&e)) return "singular";
  return "runtime";
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Binary-response panels with interactive fixed effects"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI-style config file ([section] or section.key = value)");
  app.config_formatter(std::make_shared<CLI::ConfigINI>());
  app.allow_config_extras(CLI::config_extras_mode::error);

  int workers = 0;
  if (const char* env = std::getenv(kWorkersEnv)) workers = std::atoi(env);
  app.add_option("--workers", workers, std::string("OpenMP workers (default: $") + kWorkersEnv + " or all cores)");

  // simulate
  CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo study of the factor-number selector and estimator");
  int sim_case = 1, sim_dgp = 1, sim_n = 50, sim_t = 50, sim_m = 100, sim_dmax = 4, sim_dbeta = 2, sim_df = 2;
  std::uint64_t sim_seed = 0;
  std::string sim_out;
  FitFlags sim_fit;
  sim_fit.starts = 1;
  sim_fit.max_iters = 100;
  sim->add_option("--case", sim_case, "1: normal errors (probit), 2: logistic errors (logit)")
      ->check(CLI::IsMember({1, 2}))
      ->capture_default_str();
  sim->add_option("--dgp", sim_dgp, "1: i.i.d., 2: AR(1) 0.3, 3: AR(1) 0.7")->check(CLI::IsMember({1, 2, 3}))->capture_default_str();
  sim->add_option("--n", sim_n, "Units")->check(CLI::Range(2, 100000))->capture_default_str();
  sim->add_option("--t", sim_t, "Periods")->check(CLI::Range(2, 100000))->capture_default_str();
  sim->add_option("--m", sim_m, "Replications")->check(CLI::PositiveNumber)->capture_default_str();
  sim->add_option("--d-max", sim_dmax, "Largest candidate number of factors")->check(CLI::NonNegativeNumber)->capture_default_str();
  sim->add_option("--d-beta", sim_dbeta, "Regressors")->check(CLI::NonNegativeNumber)->capture_default_str();
  sim->add_option("--d-f", sim_df, "True number of factors")->check(CLI::NonNegativeNumber)->capture_default_str();
  sim->add_option("--seed", sim_seed, "RNG seed")->required();
  sim->add_option("--out", sim_out, "JSON output path (text table written next to it)");
  sim_fit.add(sim);

  // estimate
  CLI::App* est = app.add_subcommand("estimate", "Fit a panel CSV; report parameters, standard errors and APEs");
  std::string est_in, est_link = "probit", est_out;
  int est_df = 1, est_dmax = 5;
  bool est_select = false, est_jack = false;
  std::uint64_t est_seed = 0;
  FitFlags est_fit;
  est->add_option("--input", est_in, "Panel CSV (unit,time,y,x1..xk)")->required()->check(CLI::ExistingFile);
  est->add_option("--link", est_link, "probit | logit | uniform | uniform:lo:hi")->capture_default_str();
  est->add_option("--d-f", est_df, "Number of factors")->check(CLI::NonNegativeNumber)->capture_default_str();
  est->add_flag("--select-d", est_select, "Choose the number of factors by the information criterion");
  est->add_option("--d-max", est_dmax, "Largest candidate when --select-d is set")->check(CLI::NonNegativeNumber)->capture_default_str();
  est->add_flag("--jackknife", est_jack, "Add the half-panel jackknife bias-corrected mean-group slope");
  est->add_option("--seed", est_seed, "RNG seed")->capture_default_str();
  est->add_option("--out", est_out, "JSON output path");
  est_fit.add(est);

  // select
  CLI::App* sel = app.add_subcommand("select", "Information-criterion table for d = 0..d_max");
  std::string sel_in, sel_link = "probit", sel_out;
  int sel_dmax = 5;
  std::optional<double> sel_xi;
  std::uint64_t sel_seed = 0;
  FitFlags sel_fit;
  sel->add_option("--input", sel_in, "Panel CSV")->required()->check(CLI::ExistingFile);
  sel->add_option("--link", sel_link, "probit | logit | uniform | uniform:lo:hi")->capture_default_str();
  sel->add_option("--d-max", sel_dmax, "Largest candidate number of factors")->check(CLI::NonNegativeNumber)->capture_default_str();
  sel->add_option("--xi", sel_xi, "Penalty xi (default log(sqrt(N + T)))");
  sel->add_option("--seed", sel_seed, "RNG seed")->capture_default_str();
  sel->add_option("--out", sel_out, "JSON output path");
  sel_fit.add(sel);

  // backtest
  CLI::App* bt = app.add_subcommand("backtest", "Rolling-window sign-forecast portfolio backtest");
  std::string bt_prices, bt_vix, bt_rfi, bt_link = "probit", bt_out;
  std::vector<std::string> bt_strategies{"ife", "fe", "ew", "cm"};
  std::string bt_df = "optimal";
  int bt_dmax = 5, bt_window = 505;
  double bt_ridge = 1e-6;
  std::uint64_t bt_seed = 0;
  FitFlags bt_fit;
  bt_fit.starts = 1;
  bt->add_option("--prices", bt_prices, "Price CSV: date,<stock>...")->required()->check(CLI::ExistingFile);
  bt->add_option("--vix", bt_vix, "VIX CSV: date,vix")->required()->check(CLI::ExistingFile);
  bt->add_option("--rfi", bt_rfi, "Risk-free CSV: date,rfi (daily decimal)")->required()->check(CLI::ExistingFile);
  bt->add_option("--strategy", bt_strategies, "Any of ife, fe, ew, cm")
      ->check(CLI::IsMember({"ife", "fe", "ew", "cm"}))
      ->capture_default_str();
  bt->add_option("--d-f", bt_df, "Factors for ife: a number or 'optimal'")->capture_default_str();
  bt->add_option("--d-max", bt_dmax, "Largest candidate for 'optimal'")->check(CLI::NonNegativeNumber)->capture_default_str();
  bt->add_option("--window", bt_window, "Days per estimation window")->check(CLI::Range(4, 1000000))->capture_default_str();
  bt->add_option("--ridge", bt_ridge, "Covariance ridge, multiple of trace/k")->check(CLI::NonNegativeNumber)->capture_default_str();
  bt->add_option("--link", bt_link, "probit | logit | uniform | uniform:lo:hi")->capture_default_str();
  bt->add_option("--seed", bt_seed, "RNG seed")->required();
  bt->add_option("--out", bt_out, "JSON output path");
  bt_fit.add(bt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << e.what() << "\n\n";
    const CLI::App* failed = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << failed->help();
    return 2;
  }

  try {
    if (workers < 0) throw CLI::ValidationError("--workers", "must be >= 0");
    if (workers > 0) set_workers(workers);

    if (*sim) {
      DgpSpec spec;
      spec.tail = sim_case == 1 ? TailCase::LightTail : TailCase::HeavyTail;
      spec.dgp = sim_dgp == 1 ? DgpKind::DGP1 : (sim_dgp == 2 ? DgpKind::DGP2 : DgpKind::DGP3);
      spec.n_units = sim_n;
      spec.n_periods = sim_t;
      spec.d_beta = sim_dbeta;
      spec.d_f = sim_df;
      spec.seed = sim_seed;
      MonteCarloConfig mc;
      mc.replications = sim_m;
      mc.d_max = sim_dmax;
      mc.fit = sim_fit.make(sim_seed);
      const McReport rep = run_monte_carlo(spec, mc);
      Json body = to_json(rep);
      body["design"] = {{"case", sim_case}, {"dgp", sim_dgp}, {"N", sim_n}, {"T", sim_t},
                        {"d_beta", sim_dbeta}, {"d_f", sim_df}, {"d_max", sim_dmax}, {"seed", sim_seed}};
      const std::string label = "Case " + std::to_string(sim_case) + " DGP " + std::to_string(sim_dgp) +
                                " N=" + std::to_string(sim_n) + " T=" + std::to_string(sim_t);
      write_outputs(envelope("simulate", body), mc_table(label, rep), sim_out, out);
    } else if (*est) {
      const PanelData data = load_panel_csv(est_in);
      const LinkFamily link = LinkFamily::parse(est_link);
      FitConfig cfg = est_fit.make(est_seed);
      Json body;
      FitResult f;
      std::string table;
      if (est_select) {
        SelectionResult s = select_num_factors(data, link, cfg, est_dmax);
        body["selection"] = to_json(s);
        body["chosen_d"] = s.chosen_d;
        table += selection_table(s);
        f = s.fits.at(s.chosen_d);
        cfg.d_f = s.chosen_d;
      } else {
        cfg.d_f = est_df;
        f = fit(data, link, cfg);
      }
      body["fit"] = to_json(f);
      body["link"] = link.name();
      body["units"] = data.unit_ids();
      body["times"] = data.time_ids();
      body["covariance"] = to_json(covariances(data, f, link, cfg.bounds));
      body["ape"] = matrix_json(ape(data, f, link, cfg.bounds).delta);
      if (data.d_beta() > 0) {
        body["beta_bar"] = vector_json(mean_group(f));
        body["sigma1_hat"] = matrix_json(sigma1_hat(data, f, link, cfg.bounds));
        if (est_jack) {
          const JackknifeResult jk = jackknife_bc(data, link, cfg, est_seed);
          body["beta_bc"] = vector_json(jk.beta_bc);
          body["jackknife_dropped_last_unit"] = jk.dropped_last_unit;
        }
      }
      table += fit_table(f);
      write_outputs(envelope("estimate", body), table, est_out, out);
    } else if (*sel) {
      const PanelData data = load_panel_csv(sel_in);
      const LinkFamily link = LinkFamily::parse(sel_link);
      const SelectionResult s = select_num_factors(data, link, sel_fit.make(sel_seed), sel_dmax, sel_xi);
      write_outputs(envelope("select", to_json(s)), selection_table(s), sel_out, out);
    } else if (*bt) {
      const MarketLoad load = load_market_csv(bt_prices, bt_vix, bt_rfi);
      int d_f = -1;
      if (bt_df != "optimal") {
        try {
          d_f = std::stoi(bt_df);
        } catch (const std::exception&) {
          throw CLI::ValidationError("--d-f", "expected a number or 'optimal'");
        }
        if (d_f < 0) throw CLI::ValidationError("--d-f", "must be >= 0");
      }
      std::vector<BacktestReport> reports;
      Json strategies = Json::array();
      for (const std::string& s : bt_strategies) {
        BacktestConfig cfg;
        cfg.strategy = s == "ife" ? Strategy::IFE : s == "fe" ? Strategy::FE : s == "ew" ? Strategy::EW : Strategy::CM;
        cfg.d_f = d_f;
        cfg.d_max = bt_dmax;
        cfg.window = bt_window;
        cfg.ridge = bt_ridge;
        cfg.link = LinkFamily::parse(bt_link);
        cfg.fit = bt_fit.make(bt_seed);
        reports.push_back(rolling_backtest(load.market, cfg));
        strategies.push_back(to_json(reports.back()));
      }
      Json body;
      body["strategies"] = strategies;
      body["dropped_stocks"] = load.dropped_stocks;
      body["dates"] = {{"prices", load.price_dates}, {"vix", load.vix_dates}, {"rfi", load.rfi_dates},
                       {"joined", load.joined_dates}};
      body["n_stocks"] = load.market.n_stocks();
      write_outputs(envelope("backtest", body), backtest_table(reports), bt_out, out);
    }
  } catch (const CLI::ValidationError& e) {
    err << "error: usage: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << error_kind(e) << ": " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace bife
