#include "mdensity/commands.hpp"

#include <algorithm>
#include <cmath>

#include "mdensity/analytic.hpp"
#include "mdensity/diagnostics.hpp"
#include "mdensity/errors.hpp"
#include "mdensity/estimators.hpp"
#include "mdensity/losses.hpp"
#include "mdensity/net_io.hpp"
#include "mdensity/output.hpp"
#include "mdensity/validation.hpp"

#ifndef MDENSITY_VERSION
#define MDENSITY_VERSION "unknown"
#endif

namespace mdensity::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return xs;
}

json check_json(const DiagnosticReport& r) {
  json checks = json::array();
  for (const Check& c : r.checks) checks.push_back({{"check", c.name}, {"value", c.value}, {"passed", c.passed()}});
  return {{"name", r.name}, {"passed", r.passed()}, {"checks", checks}, {"details", r.details}};
}

void write_reports(const fs::path& path, const std::vector<DiagnosticReport>& reports) {
  std::ofstream out = open_output(path);
  write_report_csv_header(out);
  for (const auto& r : reports) write_report_csv(out, r);
}

std::vector<double> thin(const std::vector<double>& xs, std::size_t target) {
  if (xs.size() <= target) return xs;
  std::vector<double> out;
  const double stride = static_cast<double>(xs.size() - 1) / static_cast<double>(target - 1);
  for (std::size_t i = 0; i < target; ++i) out.push_back(xs[static_cast<std::size_t>(std::lround(i * stride))]);
  return out;
}

}  // namespace

RunOutcome cmd_demo_figure1(const RunConfig& config, std::ostream& log) {
  RunOutcome outcome;
  const GaussianMixturePrior prior = config.prior->build();
  const NoiseModel noise = noise_model(config, 1);
  const GaussianMDensity model(prior, noise);
  const fs::path& dir = config.out;
  const GridSpec& g = config.grid;
  const std::vector<double> xs = linspace(g.lo, g.hi, g.n);
  const double h = (g.hi - g.lo) / (g.n - 1);

  {
    std::ofstream out = open_output(dir / "prior_density.csv");
    out << "x,density\n";
    std::vector<double> ps;
    for (double x : xs) {
      ps.push_back(std::exp(prior.log_density(Vec::Constant(1, x))));
      out << x << ',' << ps.back() << '\n';
    }
    svg_lines(dir / "prior_density.svg", "p(x)", {{xs, ps, ""}}, "x", "density");
    outcome.outputs.insert(outcome.outputs.end(), {"prior_density.csv", "prior_density.svg"});
  }

  Eigen::MatrixXd density(g.n, g.n), logp(g.n, g.n);
  {
    std::ofstream out = open_output(dir / "mdensity_grid.csv");
    out << "i,j,y1,y2,density,log_density\n";
    Vec y(2);
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j) {
        y << xs[i], xs[j];
        logp(i, j) = model.log_density(MultiY(y, noise));
        density(i, j) = std::exp(logp(i, j));
        out << i << ',' << j << ',' << xs[i] << ',' << xs[j] << ',' << density(i, j) << ',' << logp(i, j) << '\n';
      }
  }
  svg_heatmap(dir / "mdensity.svg", "p(y1, y2)", density, g.lo, g.hi);
  svg_heatmap(dir / "log_mdensity.svg", "log p(y1, y2)", logp, g.lo, g.hi);
  outcome.outputs.insert(outcome.outputs.end(), {"mdensity_grid.csv", "mdensity.svg", "log_mdensity.svg"});

  {
    std::ofstream out = open_output(dir / "score_field.csv");
    out << "y1,y2,score1,score2\n";
    const std::vector<double> ax = linspace(g.lo, g.hi, g.arrows);
    std::vector<double> px, py, vx, vy;
    Vec y(2);
    for (double a : ax)
      for (double b : ax) {
        y << a, b;
        const Vec s = model.score(MultiY(y, noise));
        out << a << ',' << b << ',' << s[0] << ',' << s[1] << '\n';
        px.push_back(a), py.push_back(b), vx.push_back(s[0]), vy.push_back(s[1]);
      }
    svg_quiver(dir / "score_field.svg", "score of p(y1, y2)", px, py, vx, vy, g.lo, g.hi);
    outcome.outputs.insert(outcome.outputs.end(), {"score_field.csv", "score_field.svg"});
  }

  double mass = 0.0, asym = 0.0;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      const double wi = (i == 0 || i == g.n - 1) ? 0.5 : 1.0;
      const double wj = (j == 0 || j == g.n - 1) ? 0.5 : 1.0;
      mass += wi * wj * density(i, j);
      asym = std::max(asym, std::abs(density(i, j) - density(j, i)));
    }
  mass *= h * h;
  const DiagnosticReport report{"demo_figure1",
                                {Check::at_most("quadrature_mass_gap", std::abs(mass - 1.0), 1e-3),
                                 Check::at_most("grid_asymmetry", asym, 1e-10)},
                                "trapezoid rule on the written grid"};
  write_reports(dir / "checks.csv", {report});
  outcome.outputs.push_back("checks.csv");
  outcome.results["quadrature_normalization"] = mass;
  outcome.results["grid_asymmetry"] = asym;
  log << "quadrature normalization " << mass << ", max |p(i,j) - p(j,i)| " << asym << '\n';
  if (!report.passed()) {
    outcome.exit_code = kExitDiagnostic;
    outcome.status = "diagnostic_failure";
    write_report_text(log, report);
  }
  return outcome;
}

RunOutcome cmd_sample(const RunConfig& config, std::ostream& log) {
  RunOutcome outcome;
  const fs::path& dir = config.out;
  std::optional<NoiseModel> noise;
  ScoreSource src;
  if (config.sample.net) {
    SavedNet saved = load_net(*config.sample.net);
    noise = saved.net.noise();
    src = score_from_nu(saved.net.as_nu(), *noise);
    outcome.results["score_source"] = "net";
  } else {
    const GaussianMixturePrior prior = config.prior->build();
    noise = noise_model(config, prior.d());
    src = GaussianMDensity(prior, *noise).score_source();
    outcome.results["score_source"] = "analytic";
    // score sanity check on a separate stream so the chain itself is unaffected
    Rng check_rng = Rng(config.seed).split(7);
    std::vector<MultiY> points;
    for (int i = 0; i < 20; ++i) points.push_back(sample_mnm(prior.sample(check_rng), *noise, check_rng));
    const DiagnosticReport fd = fd_score_check(src, points);
    std::ofstream fd_csv = open_output(dir / "fd_check.csv");
    write_report_csv_header(fd_csv);
    write_report_csv(fd_csv, fd);
    outcome.outputs.push_back("fd_check.csv");
    outcome.results["fd_score_check"] = fd.checks.front().value;
    if (!fd.passed()) {
      outcome.exit_code = kExitDiagnostic;
      outcome.status = "diagnostic_failure";
      write_report_text(log, fd);
      return outcome;
    }
  }
  outcome.results["noise"] = noise->sigmas();
  const int d = noise->d();

  std::ofstream jumps = open_output(dir / "jumps.csv");
  jumps << "k";
  for (int i = 0; i < d; ++i) jumps << ",xhat_" << i;
  jumps << ",consistency_gap\n";
  outcome.outputs.push_back("jumps.csv");

  std::vector<std::vector<double>> coords(static_cast<std::size_t>(d));
  std::vector<double> ks;
  WalkJumpOptions opts;
  opts.integrator = config.sample.integrator;
  opts.init = config.sample.init;
  opts.jump_every = config.sample.jump_every;
  opts.keep_records = false;
  opts.estimator = [&](const MultiY& y) { return bayes_estimate_mean(src, *noise, y); };
  opts.on_jump = [&](const WJSRecord& r) {
    jumps << r.k;
    for (int i = 0; i < d; ++i) {
      jumps << ',' << r.xhat[i];
      coords[static_cast<std::size_t>(i)].push_back(r.xhat[i]);
    }
    jumps << ',' << r.consistency_gap << '\n';
    ks.push_back(static_cast<double>(r.k));
  };

  Rng rng(config.seed);
  long completed = config.sample.params.K;
  std::optional<long> diverged_at;
  try {
    walk_jump(src, *noise, config.sample.params, opts, rng);
  } catch (const DivergenceError& e) {
    diverged_at = e.step();
    completed = e.step() - 1;
    log << "divergence at step " << e.step() << ": " << e.what() << '\n';
  }
  jumps.close();

  std::ofstream summary = open_output(dir / "summary.csv");
  summary << "quantity,value\n";
  summary << "status," << (diverged_at ? "diverged" : "ok") << '\n';
  summary << "steps_completed," << completed << '\n';
  summary << "divergence_step," << (diverged_at ? std::to_string(*diverged_at) : "") << '\n';
  summary << "jumps," << ks.size() << '\n';
  json coord_stats = json::array();
  for (int i = 0; i < d; ++i) {
    const auto& c = coords[static_cast<std::size_t>(i)];
    if (c.size() < 2) continue;
    const AutocorrEss ess = autocorr_ess(c);
    summary << "mean_" << i << ',' << mean(c) << '\n';
    summary << "variance_" << i << ',' << variance(c) << '\n';
    summary << "ess_" << i << ',' << ess.ess << '\n';
    coord_stats.push_back({{"mean", mean(c)}, {"variance", variance(c)}, {"ess", ess.ess}});
  }
  outcome.outputs.push_back("summary.csv");
  outcome.results["jumps"] = ks.size();
  outcome.results["coordinates"] = coord_stats;

  if (config.sample.trace_svg && !ks.empty()) {
    svg_lines(dir / "trace.svg", "jump trace, coordinate 0", {{thin(ks, 2000), thin(coords[0], 2000), ""}}, "k",
              "xhat_0");
    svg_histogram(dir / "histogram.svg", "jump samples, coordinate 0", coords[0], 80);
    outcome.outputs.insert(outcome.outputs.end(), {"trace.svg", "histogram.svg"});
  }
  if (diverged_at) {
    outcome.exit_code = kExitDivergence;
    outcome.status = "diverged";
    outcome.results["divergence_step"] = *diverged_at;
  }
  return outcome;
}

RunOutcome cmd_train(const RunConfig& config, std::ostream& log) {
  RunOutcome outcome;
  const fs::path& dir = config.out;
  const TrainSpec& spec = config.train;
  const ToyDataset dataset = spec.dataset.kind == "two_rings"
                                 ? ToyDataset::two_rings(spec.dataset.r_inner, spec.dataset.r_outer, spec.dataset.width)
                                 : ToyDataset::gaussian_mixture(config.prior->build());
  const NoiseModel noise = noise_model(config, dataset.d());
  const Rng root(config.seed);

  std::optional<MlpScoreNet> net;
  std::optional<AdamState> adam;
  if (spec.resume) {
    SavedNet saved = load_net(*spec.resume);
    if (!(saved.net.noise() == noise)) throw ConfigError("resume: net noise model differs from the configured one");
    net = std::move(saved.net);
    adam = std::move(saved.adam);
    if (adam) adam->config.lr = spec.options.lr;
  } else {
    Rng init = root.split(0);
    net.emplace(spec.widths.empty() ? MlpScoreNet::default_widths(noise) : spec.widths, noise, init);
  }
  const long start = net->trained_steps();
  outcome.results["start_step"] = start;

  const double baseline = dataset.d() * sigma_eff(noise) * sigma_eff(noise);
  std::ofstream losses = open_output(dir / "losses.csv");
  losses << "step,loss,plugin_baseline\n";
  outcome.outputs.push_back("losses.csv");

  Rng train_rng = root.split(1000 + static_cast<std::uint64_t>(start));
  std::optional<TrainResult> result;
  try {
    result.emplace(train_mdae(dataset, noise, *net, spec.options, train_rng, adam));
  } catch (const DivergenceError& e) {
    log << "training diverged at step " << e.step() << ": " << e.what() << '\n';
    outcome.exit_code = kExitDivergence;
    outcome.status = "diverged";
    outcome.results["divergence_step"] = e.step();
    return outcome;
  }
  for (std::size_t i = 0; i < result->losses.size(); ++i)
    losses << start + static_cast<long>(i) + 1 << ',' << result->losses[i] << ',' << baseline << '\n';
  losses.close();

  save_net(dir / "net.txt", result->net, &result->adam);
  outcome.outputs.push_back("net.txt");

  std::vector<double> steps(result->losses.size()), smooth(result->losses.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < result->losses.size(); ++i) {
    acc += result->losses[i];
    if (i >= 100) acc -= result->losses[i - 100];
    steps[i] = static_cast<double>(start + static_cast<long>(i) + 1);
    smooth[i] = acc / static_cast<double>(std::min<std::size_t>(i + 1, 100));
  }
  svg_lines(dir / "losses.svg", "MDAE loss (100-step mean)",
            {{thin(steps, 2000), thin(smooth, 2000), "loss"},
             {{steps.front(), steps.back()}, {baseline, baseline}, "plug-in baseline"}},
            "step", "loss");
  outcome.outputs.push_back("losses.svg");

  Rng eval = root.split(2);
  const double heldout = evaluate_mdae(result->net, dataset, spec.eval_samples, eval);
  const ScoreSource learned = score_from_nu(result->net.as_nu(), noise);
  const long n_gap = std::min<long>(spec.eval_samples, 5000);
  double gap2 = 0.0;
  for (long i = 0; i < n_gap; ++i) {
    const MultiY y = sample_mnm(dataset.sample(eval), noise, eval);
    const double g = bayes_estimate_mean(learned, noise, y).consistency_gap;
    gap2 += g * g;
  }
  const double rms_gap = std::sqrt(gap2 / static_cast<double>(n_gap));
  const double sigma_min = *std::min_element(noise.sigmas().begin(), noise.sigmas().end());

  DiagnosticReport report{"train_mdae",
                          {Check::at_most("heldout_loss_vs_plugin", heldout, baseline),
                           Check::at_most("rms_consistency_gap", rms_gap, 0.1 * sigma_min)},
                          "held-out samples " + std::to_string(spec.eval_samples)};
  outcome.results["heldout_loss"] = heldout;
  outcome.results["plugin_baseline"] = baseline;
  outcome.results["rms_consistency_gap"] = rms_gap;
  if (dataset.prior() && dataset.d() == 1) {
    const double risk = bayes_risk_1d(GaussianMDensity(*dataset.prior(), noise));
    report.checks.push_back(Check::within("heldout_over_bayes_risk", heldout / risk, 0.85, 1.15));
    outcome.results["bayes_risk"] = risk;
  }
  write_reports(dir / "diagnostics.csv", {report});
  outcome.outputs.push_back("diagnostics.csv");
  write_report_text(log, report);
  if (!report.passed()) {
    outcome.exit_code = kExitDiagnostic;
    outcome.status = "diagnostic_failure";
  }
  return outcome;
}

RunOutcome cmd_validate(const RunConfig& config, std::ostream& log) {
  RunOutcome outcome;
  ValidationOptions opt;
  opt.seed = config.seed;
  opt.corrupt_score = config.validate.corrupt_score;
  opt.sampler_steps = config.validate.sampler_steps;
  opt.concentration_trials = config.validate.concentration_trials;
  const std::vector<DiagnosticReport> reports = run_validation_suite(opt);

  std::ofstream out = open_output(config.out / "validation.csv");
  out << "name,passed,checks,failed_checks,details\n";
  json rows = json::array();
  int failed = 0;
  for (const DiagnosticReport& r : reports) {
    std::string failing;
    for (const Check& c : r.checks)
      if (!c.passed()) failing += (failing.empty() ? "" : ";") + c.name;
    std::string details = r.details;
    std::replace(details.begin(), details.end(), '"', '\'');
    out << r.name << ',' << (r.passed() ? 1 : 0) << ',' << r.checks.size() << ',' << failing << ",\"" << details
        << "\"\n";
    rows.push_back(check_json(r));
    if (!r.passed()) {
      ++failed;
      log << "FAILED: " << r.name << '\n';
      write_report_text(log, r);
    }
  }
  out.close();
  write_reports(config.out / "validation_checks.csv", reports);
  outcome.outputs = {"validation.csv", "validation_checks.csv"};
  outcome.results["reports"] = rows;
  outcome.results["failed"] = failed;
  log << reports.size() - static_cast<std::size_t>(failed) << "/" << reports.size() << " reports passed\n";
  if (failed > 0) {
    outcome.exit_code = kExitDiagnostic;
    outcome.status = "diagnostic_failure";
  }
  return outcome;
}

RunOutcome cmd_concentration(const RunConfig& config, std::ostream& log) {
  RunOutcome outcome;
  const ConcentrationSpec& spec = config.concentration;
  const NoiseModel noise = noise_model(config, spec.d);
  const Rng root(config.seed);

  std::vector<DiagnosticReport> reports;
  Rng r0 = root.split(0);
  reports.push_back(concentration_report(noise, spec.trials, r0));
  {
    Rng again = root.split(0);
    const std::vector<double> norms = plugin_error_norms(noise, spec.trials, again);
    std::ofstream out = open_output(config.out / "norms.csv");
    out << "trial,error_norm\n";
    for (std::size_t i = 0; i < norms.size(); ++i) out << i << ',' << norms[i] << '\n';
    svg_histogram(config.out / "norms.svg", "|x - mean(y)|", norms, 60);
    outcome.outputs.insert(outcome.outputs.end(), {"norms.csv", "norms.svg"});
  }
  if (spec.congruent) {
    const NoiseModel other(spec.congruent->sigmas, spec.d);
    if (spec.trials < 2) throw ConfigError("congruence comparison needs trials >= 2");
    Rng r1 = root.split(1);
    reports.push_back(congruence_report(other, noise, spec.trials, r1));
  }
  write_reports(config.out / "concentration.csv", reports);
  outcome.outputs.push_back("concentration.csv");
  json rows = json::array();
  bool ok = true;
  for (const auto& r : reports) {
    write_report_text(log, r);
    rows.push_back(check_json(r));
    ok = ok && r.passed();
  }
  outcome.results["reports"] = rows;
  if (!ok) {
    outcome.exit_code = kExitDiagnostic;
    outcome.status = "diagnostic_failure";
  }
  return outcome;
}

int run(const RunConfig& config, std::ostream& log) {
  validate_config(config);
  fs::create_directories(config.out);
  RunOutcome outcome;
  switch (config.command) {
    case Command::demo_figure1: outcome = cmd_demo_figure1(config, log); break;
    case Command::sample: outcome = cmd_sample(config, log); break;
    case Command::train: outcome = cmd_train(config, log); break;
    case Command::validate: outcome = cmd_validate(config, log); break;
    case Command::concentration: outcome = cmd_concentration(config, log); break;
  }
  json manifest = {{"tool", "mdensity"},
                   {"version", MDENSITY_VERSION},
                   {"command", to_string(config.command)},
                   {"seed", config.seed},
                   {"config", to_json(config)},
                   {"status", outcome.status},
                   {"exit_code", outcome.exit_code},
                   {"outputs", outcome.outputs},
                   {"results", outcome.results}};
  if (config.command == Command::validate) manifest["suite_manifest"] = validation_suite_manifest();
  std::ofstream out = open_output(config.out / "manifest.json");
  out << manifest.dump(2) << '\n';
  return outcome.exit_code;
}

}  // namespace mdensity::cli
