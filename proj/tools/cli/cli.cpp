#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "cli.hpp"
#include "evseq/errors.hpp"
#include "evseq/models.hpp"

namespace evseq::cli {
namespace {

using verify::ModelKind;

struct EffectFlags {
  std::optional<double> delta0, dplus, sigma0, splus, theta0, tplus;
  std::string prior;
};

void add_effect_flags(CLI::App* app, EffectFlags& f) {
  app->add_option("--delta0", f.delta0, "null effect size (t, linreg)");
  app->add_option("--dplus", f.dplus, "alternative effect size (t, linreg)");
  app->add_option("--sigma0", f.sigma0, "null standard deviation (chisq)");
  app->add_option("--splus", f.splus, "alternative standard deviation (chisq)");
  app->add_option("--theta0", f.theta0, "null success probability in [0.5, 1) (bernoulli)");
  app->add_option("--tplus", f.tplus, "alternative success probability in [0.5, 1) (bernoulli)");
  app->add_option("--prior", f.prior, "CSV prior grid with header delta,weight");
}

struct Family {
  const char* null_flag;
  const char* alt_flag;
  std::optional<double> EffectFlags::*null_value;
  std::optional<double> EffectFlags::*alt_value;
};

Family family_of(ModelKind kind) {
  switch (kind) {
    case ModelKind::chi_square:
      return {"--sigma0", "--splus", &EffectFlags::sigma0, &EffectFlags::splus};
    case ModelKind::bernoulli:
      return {"--theta0", "--tplus", &EffectFlags::theta0, &EffectFlags::tplus};
    default:
      return {"--delta0", "--dplus", &EffectFlags::delta0, &EffectFlags::dplus};
  }
}

void check_effect_value(ModelKind kind, double v, const std::string& what) {
  if (!std::isfinite(v)) throw ConfigError(what + " must be finite");
  if (kind == ModelKind::chi_square && !(v > 0.0)) throw ConfigError(what + " must be > 0");
  if (kind == ModelKind::bernoulli && !(v >= 0.5 && v < 1.0)) {
    throw ConfigError(what + " must lie in [0.5, 1); map theta -> 1 - theta (label flip) first");
  }
}

EffectSpec build_effect(ModelKind kind, const EffectFlags& f) {
  const Family fam = family_of(kind);
  const std::pair<const char*, const std::optional<double>*> all[] = {
      {"--delta0", &f.delta0}, {"--dplus", &f.dplus},  {"--sigma0", &f.sigma0},
      {"--splus", &f.splus},   {"--theta0", &f.theta0}, {"--tplus", &f.tplus}};
  for (const auto& [flag, value] : all) {
    const bool mine = std::string(flag) == fam.null_flag || std::string(flag) == fam.alt_flag;
    if (value->has_value() && !mine) {
      throw ConfigError(std::string(flag) + " does not apply to model " +
                        std::string(verify::model_name(kind)));
    }
  }
  const auto& null_value = f.*fam.null_value;
  const auto& alt_value = f.*fam.alt_value;
  if (!null_value) throw ConfigError(std::string(fam.null_flag) + " is required");
  check_effect_value(kind, *null_value, fam.null_flag);
  const bool has_prior = !f.prior.empty();
  if (alt_value.has_value() == has_prior) {
    throw ConfigError(std::string("give exactly one of ") + fam.alt_flag + " and --prior");
  }
  if (!has_prior) {
    check_effect_value(kind, *alt_value, fam.alt_flag);
    return EffectSpec::point(*null_value, *alt_value);
  }
  std::ifstream file(f.prior);
  if (!file) throw ConfigError("cannot open prior file '" + f.prior + "'");
  auto grid = read_prior(file);
  for (const auto& atom : grid.atoms()) check_effect_value(kind, atom.effect, "prior atom");
  return EffectSpec::mixture(*null_value, std::move(grid));
}

/// Alternatives on both sides of the null (or, for one-sided models, below it).
bool guarantee_void(ModelKind kind, const EffectSpec& effect) {
  if (kind != ModelKind::chi_square) return effect.guarantee_void();
  bool above = false, below = false;
  for (const auto& a : effect.atoms()) {
    above |= a.effect > effect.null_effect();
    below |= a.effect < effect.null_effect();
  }
  return above && below;
}

std::ostream& open_output(const std::string& path, std::ostream& fallback,
                          std::unique_ptr<std::ofstream>& holder) {
  if (path.empty() || path == "-") return fallback;
  holder = std::make_unique<std::ofstream>(path, std::ios::binary);
  if (!*holder) throw ConfigError("cannot open output file '" + path + "'");
  return *holder;
}

std::istream& open_input(const std::string& path, std::istream& fallback,
                         std::unique_ptr<std::ifstream>& holder) {
  if (path.empty() || path == "-") return fallback;
  holder = std::make_unique<std::ifstream>(path, std::ios::binary);
  if (!*holder) throw ConfigError("cannot open input file '" + path + "'");
  return *holder;
}

// ---------------------------------------------------------------------------
// run

struct RunOptions {
  std::string model;
  EffectFlags effect;
  double alpha = 0.05;
  std::string input = "-";
  std::string output;
  std::string plot;
  std::string format = "csv";
};

struct RunSummary {
  std::size_t observations = 0;
  std::size_t uninformative = 0;
  double final_log_e = 0.0;
};

template <SequentialModel M, class Convert>
void drive(const M& model, Convert convert, RecordReader& reader, const EffectSpec& effect,
           const StoppingRule& rule, std::ostream& out, Trajectory& trajectory, RunSummary& summary) {
  auto state = start(model);
  while (auto rec = reader.next()) {
    try {
      state = step(model, state, convert(*rec), effect);
    } catch (const DataError& e) {
      throw DataError("row " + std::to_string(rec->row) + ": " + e.what());
    }
    const double stat = model.statistic(state.model);
    if constexpr (std::is_same_v<M, LinearRegression>) {
      if (!state.model.informative()) ++summary.uninformative;
    }
    const auto& r = trajectory.append(state.n, stat, state.log_e, rule);
    out << trajectory_row(r) << '\n';
    summary.observations = state.n;
    summary.final_log_e = state.log_e;
  }
}

int cmd_run(const RunOptions& opt, std::istream& in, std::ostream& out, std::ostream& err) {
  ModelKind kind;
  std::optional<EffectSpec> effect;
  std::optional<StoppingRule> rule;
  InputFormat format;
  std::unique_ptr<std::ifstream> in_file;
  std::unique_ptr<std::ofstream> out_file;
  try {
    kind = verify::parse_model_kind(opt.model);
    effect = build_effect(kind, opt.effect);
    if (!(opt.alpha > 0.0 && opt.alpha < 1.0)) throw ConfigError("--alpha must lie in (0, 1)");
    rule.emplace(opt.alpha);
    format = parse_input_format(opt.format);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  std::istream& input = open_input(opt.input, in, in_file);
  std::ostream& traj = open_output(opt.output, out, out_file);
  std::ostream& report = (opt.output.empty() || opt.output == "-") ? err : out;

  Trajectory trajectory;
  RunSummary summary;
  traj << kTrajectoryHeader << '\n';
  RecordReader reader(input, format, kind);
  auto scalar = [](const Record& r) { return r.y; };
  switch (kind) {
    case ModelKind::t_test:
      drive(TTest{}, scalar, reader, *effect, *rule, traj, trajectory, summary);
      break;
    case ModelKind::chi_square:
      drive(ChiSquare{}, scalar, reader, *effect, *rule, traj, trajectory, summary);
      break;
    case ModelKind::bernoulli:
      drive(LabelAgnosticBernoulli{}, [](const Record& r) { return static_cast<int>(r.y); },
            reader, *effect, *rule, traj, trajectory, summary);
      break;
    case ModelKind::regression:
      drive(LinearRegression{reader.nuisance_dim()},
            [](const Record& r) { return RegressionObservation{r.y, r.x, r.z}; }, reader, *effect,
            *rule, traj, trajectory, summary);
      break;
  }
  traj.flush();
  if (!traj) throw ConfigError("failed writing the trajectory");

  report << "model: " << verify::model_name(kind) << '\n';
  report << "observations: " << summary.observations << '\n';
  report << "final e-value: " << format_number(evalue(summary.final_log_e).value) << '\n';
  report << "threshold: " << format_number(rule->threshold()) << '\n';
  if (const auto tau = trajectory.first_crossing()) {
    report << "rejected: yes, tau=" << *tau << '\n';
  } else {
    report << "rejected: no\n";
  }
  if (guarantee_void(kind, *effect)) {
    report << "note: guarantee void, an alternative lies on the wrong side of the null\n";
  }
  if (summary.uninformative > 0) {
    report << "note: " << summary.uninformative
           << " uninformative step(s) with e-value held at 1 (k < 2 or x in span of z)\n";
  }

  if (!opt.plot.empty()) {
    if (trajectory.empty()) {
      report << "note: no observations, plot skipped\n";
    } else {
      std::ofstream svg(opt.plot, std::ios::binary);
      if (!svg) throw ConfigError("cannot open plot file '" + opt.plot + "'");
      svg << render_svg(trajectory.records(), opt.alpha);
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// plot

struct PlotOptions {
  std::string input = "-";
  std::string output;
  double alpha = 0.05;
};

int cmd_plot(const PlotOptions& opt, std::istream& in, std::ostream& out) {
  if (!(opt.alpha > 0.0 && opt.alpha < 1.0)) throw ConfigError("--alpha must lie in (0, 1)");
  std::unique_ptr<std::ifstream> in_file;
  std::istream& input = open_input(opt.input, in, in_file);
  const auto records = read_trajectory(input);
  std::unique_ptr<std::ofstream> out_file;
  std::ostream& svg = open_output(opt.output, out, out_file);
  svg << render_svg(records, opt.alpha);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verify

struct GeneratorFlags {
  double mu = 0.0;
  double sigma = 1.0;
  std::optional<double> theta;
  double true_delta = 0.0;
  std::vector<double> beta;
  bool rademacher = false;
};

void add_generator_flags(CLI::App* app, GeneratorFlags& g) {
  app->add_option("--mu", g.mu, "generator mean (t, chisq)");
  app->add_option("--sigma", g.sigma, "generator standard deviation (t, chisq, linreg noise)");
  app->add_option("--theta", g.theta, "generator success probability (bernoulli)");
  app->add_option("--true-delta", g.true_delta, "generator effect size (linreg)");
  app->add_option("--beta", g.beta, "generator nuisance coefficients (linreg)")->delimiter(',');
  app->add_flag("--rademacher", g.rademacher, "draw +/-1 signs instead of gaussians (t)");
}

verify::Generator build_generator(ModelKind kind, const GeneratorFlags& g) {
  switch (kind) {
    case ModelKind::t_test:
      if (g.rademacher) return verify::RademacherGenerator{};
      return verify::GaussianGenerator{g.mu, g.sigma};
    case ModelKind::chi_square:
      return verify::GaussianGenerator{g.mu, g.sigma};
    case ModelKind::bernoulli:
      if (!g.theta) throw ConfigError("--theta is required for the bernoulli generator");
      return verify::BernoulliGenerator{*g.theta};
    case ModelKind::regression: {
      verify::RegressionGenerator r;
      r.delta = g.true_delta;
      r.beta = g.beta;
      r.sigma = g.sigma;
      return r;
    }
  }
  throw ConfigError("unknown model");
}

struct VerifyOptions {
  std::string output;
  // counterexample
  std::size_t n = 5;
  std::vector<double> deltas{0.2, 0.1, 0.05};
  // mlr, quadrature
  double nu = 2.0;
  double lplus = 1.0;
  double l0 = 0.0;
  double lo = -15.0;
  double hi = 15.0;
  double step = 0.01;
  std::vector<double> lambdas;
  // monte carlo
  std::string model = "t";
  EffectFlags effect;
  GeneratorFlags generator;
  std::size_t reps = 10000;
  std::vector<std::size_t> checkpoints{2, 5, 10, 25};
  std::uint64_t seed = 20261016;
  double alpha = 0.05;
  std::size_t horizon = 100;
  // positivity
  std::vector<double> thetas;
  std::size_t n_max = 30;
};

verify::VerificationReport run_check(const std::string& check, const VerifyOptions& o) {
  if (check == "counterexample") return verify::counterexample_report(o.n, o.deltas);
  if (check == "mlr") {
    return verify::mlr_report(o.nu, o.lplus, o.l0, verify::uniform_grid(o.lo, o.hi, o.step));
  }
  if (check == "quadrature") {
    std::vector<double> lambdas = o.lambdas;
    if (lambdas.empty()) {
      const double a = std::min(o.l0, o.lplus) - 2.0;
      const double b = std::max(o.l0, o.lplus) + 2.0;
      for (double v = o.l0; v >= a; v -= 0.5) lambdas.insert(lambdas.begin(), v);
      for (double v = o.l0 + 0.5; v <= b; v += 0.5) lambdas.push_back(v);
    }
    return verify::evariable_report(o.nu, o.lplus, o.l0, lambdas);
  }
  if (check == "positivity") {
    std::vector<double> thetas = o.thetas;
    if (thetas.empty()) {
      for (int i = 51; i <= 99; ++i) thetas.push_back(i / 100.0);
    }
    return verify::positivity_report(thetas, o.n_max);
  }
  const ModelKind kind = verify::parse_model_kind(o.model);
  const verify::ModelSpec spec{kind, build_effect(kind, o.effect)};
  verify::SimConfig sim{build_generator(kind, o.generator), o.seed, o.reps, o.checkpoints};
  if (check == "mc") return verify::mc_expectation(spec, sim);
  if (check == "type1") {
    if (!(o.alpha > 0.0 && o.alpha < 1.0)) throw ConfigError("--alpha must lie in (0, 1)");
    return verify::type1_report(spec, StoppingRule(o.alpha), o.horizon, sim);
  }
  if (check == "epower") return verify::epower_report(spec, o.n, sim);
  throw ConfigError("unknown check '" + check + "'");
}

int cmd_verify(const std::string& check, const VerifyOptions& o, std::ostream& out,
               std::ostream& err) {
  verify::VerificationReport report;
  try {
    report = run_check(check, o);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  } catch (const ContractError& e) {
    throw ConfigError(e.what());
  }
  std::unique_ptr<std::ofstream> file;
  std::ostream& dest = open_output(o.output, out, file);
  dest << report.to_json().dump(2) << '\n';
  err << "verify " << check << ": " << (report.passed() ? "pass" : "FAIL") << '\n';
  for (const auto& row : report.rows) {
    err << "  " << row.key << " = " << format_number(row.estimate) << " ["
        << verify::verdict_name(row.verdict) << "]\n";
  }
  return report.passed() ? kExitOk : kExitFailedCheck;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Anytime-valid sequential tests from e-processes"};
  app.name("evseq");
  app.require_subcommand(1);

  RunOptions run_opt;
  auto* run = app.add_subcommand("run", "run a sequential test over a data stream");
  run->add_option("--model", run_opt.model, "t | chisq | linreg | bernoulli")->required();
  add_effect_flags(run, run_opt.effect);
  run->add_option("--alpha", run_opt.alpha, "level; reject once e >= 1/alpha");
  run->add_option("--input", run_opt.input, "data file, or - for standard input");
  run->add_option("--output", run_opt.output, "trajectory CSV (default: standard output)");
  run->add_option("--plot", run_opt.plot, "also write an SVG plot here");
  run->add_option("--format", run_opt.format, "csv | jsonl");

  PlotOptions plot_opt;
  auto* plot = app.add_subcommand("plot", "render a trajectory as SVG");
  plot->add_option("--input", plot_opt.input, "trajectory CSV, or - for standard input");
  plot->add_option("--output", plot_opt.output, "SVG file (default: standard output)");
  plot->add_option("--alpha", plot_opt.alpha, "level used for the threshold line");

  VerifyOptions vo;
  auto* ver = app.add_subcommand("verify", "run a verification check and emit a JSON report");
  ver->require_subcommand(1);
  auto add_output = [&](CLI::App* c) { c->add_option("--output", vo.output, "JSON report path"); };
  auto add_mc = [&](CLI::App* c) {
    c->add_option("--model", vo.model, "t | chisq | linreg | bernoulli");
    add_effect_flags(c, vo.effect);
    add_generator_flags(c, vo.generator);
    c->add_option("--reps", vo.reps, "Monte Carlo replications");
    c->add_option("--seed", vo.seed, "master seed");
    add_output(c);
  };

  auto* v_ce = ver->add_subcommand("counterexample", "exact Rademacher expectation and delta^4 fit");
  v_ce->add_option("--n", vo.n, "sample size, 2..20");
  v_ce->add_option("--deltas", vo.deltas, "comma-separated effect sizes in (0, 0.3]")->delimiter(',');
  add_output(v_ce);

  auto* v_mlr = ver->add_subcommand("mlr", "monotone likelihood ratio grid check");
  v_mlr->add_option("--nu", vo.nu, "degrees of freedom");
  v_mlr->add_option("--lplus", vo.lplus, "alternative noncentrality");
  v_mlr->add_option("--l0", vo.l0, "null noncentrality");
  v_mlr->add_option("--lo", vo.lo, "grid start");
  v_mlr->add_option("--hi", vo.hi, "grid end");
  v_mlr->add_option("--step", vo.step, "grid step");
  add_output(v_mlr);

  auto* v_quad = ver->add_subcommand("quadrature", "e-variable check by numerical integration");
  v_quad->add_option("--nu", vo.nu, "degrees of freedom");
  v_quad->add_option("--lplus", vo.lplus, "alternative noncentrality");
  v_quad->add_option("--l0", vo.l0, "null noncentrality");
  v_quad->add_option("--lambdas", vo.lambdas, "true noncentralities")->delimiter(',');
  add_output(v_quad);

  auto* v_pos = ver->add_subcommand("positivity", "Bernoulli mixed-partial and monotonicity check");
  v_pos->add_option("--thetas", vo.thetas, "grid in (0.5, 1)")->delimiter(',');
  v_pos->add_option("--nmax", vo.n_max, "largest sample size");
  add_output(v_pos);

  auto* v_mc = ver->add_subcommand("mc", "Monte Carlo mean of the e-value at checkpoints");
  add_mc(v_mc);
  v_mc->add_option("--checkpoints", vo.checkpoints, "increasing sample sizes")->delimiter(',');

  auto* v_t1 = ver->add_subcommand("type1", "Monte Carlo type-I error up to a horizon");
  add_mc(v_t1);
  v_t1->add_option("--alpha", vo.alpha, "level");
  v_t1->add_option("--horizon", vo.horizon, "largest sample size");

  auto* v_ep = ver->add_subcommand("epower", "Monte Carlo mean log e-value at n");
  add_mc(v_ep);
  v_ep->add_option("--n", vo.n, "sample size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_opt, in, out, err);
    if (*plot) return cmd_plot(plot_opt, in, out);
    for (auto* sub : ver->get_subcommands()) {
      return cmd_verify(sub->get_name(), vo, out, err);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitConfig;
}

}  // namespace evseq::cli
