// rpsm: recycled postselected measurement calculator.
//
// Subcommands: summary (one parameter point), sweep (grid -> csv/json),
// self-check (closed forms vs pulse-train oracle vs lane kernels), and
// mc (shot-noise Monte Carlo). Exit codes: 0 ok, 1 validation or parse
// error, 2 self-check failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rpsm/mc.hpp"
#include "rpsm/oracle.hpp"
#include "rpsm/sweep.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw rpsm::ValidationError("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

rpsm::Rounds parse_rounds_arg(const std::string& text) {
  if (text == "inf" || text == "infinite") return rpsm::Rounds::infinite();
  try {
    std::size_t pos = 0;
    const unsigned long long n = std::stoull(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return rpsm::Rounds::finite(n);
  } catch (const rpsm::ValidationError&) {
    throw;
  } catch (const std::exception&) {
    throw rpsm::ValidationError("--rounds expects 'inf' or a positive integer");
  }
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void print_summary(std::ostream& out, const rpsm::ExperimentParams& p,
                   const rpsm::RecyclingSummary& s) {
  out << "scheme = " << rpsm::scheme_name(p.scheme) << "\n";
  out << "theta = " << g17(p.theta_rad) << "\n";
  out << "beta = " << g17(p.beta_rad) << "\n";
  out << "loss = " << g17(p.loss_L) << "\n";
  out << "epsilon = " << g17(p.epsilon_rad) << "\n";
  out << "photons = " << g17(p.photons_N) << "\n";
  out << "rounds = "
      << (p.rounds.is_infinite() ? std::string("inf")
                                 : std::to_string(p.rounds.count()))
      << "\n";
  out << "p_d1 = " << g17(s.p_d1) << "\n";
  out << "p_c1 = " << g17(s.p_c1) << "\n";
  out << "gamma1 = " << g17(s.gamma_1) << "\n";
  out << "P_d = " << g17(s.P_d) << "\n";
  out << "Gamma = " << g17(s.Gamma) << "\n";
  out << "gamma_hp = " << g17(s.gamma_hp) << "\n";
  out << "gamma_ext = " << g17(s.gamma_ext) << "\n";
  out << "residual = " << g17(s.residual) << "\n";
  out << "P_V = " << g17(s.P_V) << "\n";
  out << "theta_tilde = " << g17(s.theta_tilde) << "\n";
  out << "eta = " << g17(s.eta) << "\n";
  out << "x_or_y = " << g17(s.x_or_y) << "\n";
  out << "kappa_n = " << g17(s.kappa_n) << "\n";
  out << "R_tilde = " << g17(s.snr_enhancement) << "\n";
  out << "sensitivity_canonical = " << g17(s.sensitivity_canonical) << "\n";
  out << "sensitivity_paper_convention = " << g17(s.sensitivity_paper) << "\n";
}

int run(int argc, char** argv) {
  CLI::App app{"recycled postselected-measurement magnetometry calculator"};
  app.require_subcommand(1);

  // ---- summary
  auto* summary = app.add_subcommand("summary", "evaluate one parameter point");
  std::string sum_scheme = "scheme1";
  double sum_theta = 0.0, sum_beta = 0.0, sum_loss = 0.0, sum_eps = 0.0;
  double sum_photons = 1e6;
  std::string sum_rounds = "inf";
  summary->add_option("--scheme", sum_scheme, "none|scheme1|scheme2")->required();
  summary->add_option("--theta", sum_theta, "FR angle (rad)")->required();
  summary->add_option("--beta", sum_beta, "postselection phase (rad)")->required();
  summary->add_option("--loss", sum_loss, "external loss L in [0,1), scheme I");
  summary->add_option("--epsilon", sum_eps, "recycling delay phase (rad)");
  summary->add_option("--photons", sum_photons, "mean photon number N");
  summary->add_option("--rounds", sum_rounds, "recycle count: inf or integer");

  // ---- sweep
  auto* sweep = app.add_subcommand("sweep", "evaluate a parameter grid");
  std::string sw_config, sw_out, sw_format;
  bool sw_no_ts = false;
  sweep->add_option("--config", sw_config, "config file")->required();
  sweep->add_option("--out", sw_out, "output file (overrides config)");
  sweep->add_option("--format", sw_format, "csv|json (overrides config)");
  sweep->add_flag("--no-header-timestamp", sw_no_ts,
                  "omit the generated-at header for byte-stable output");

  // ---- self-check
  auto* selfcheck = app.add_subcommand("self-check",
                                       "cross-validate closed forms against the oracle");
  double sc_tol = 1e-10;
  std::string sc_config;
  selfcheck->add_option("--tol", sc_tol, "pass/fail tolerance");
  selfcheck->add_option("--config", sc_config,
                        "optional config whose theta/beta axes define the grid");

  // ---- mc
  auto* mc = app.add_subcommand("mc", "shot-noise Monte Carlo");
  std::string mc_config, mc_out;
  std::uint64_t mc_trials = 0, mc_seed = 0;
  bool mc_trials_set = false, mc_seed_set = false;
  mc->add_option("--config", mc_config, "config file")->required();
  mc->add_option("--trials", mc_trials, "trial count (overrides config)")
      ->each([&](const std::string&) { mc_trials_set = true; });
  mc->add_option("--seed", mc_seed, "master seed (overrides config)")
      ->each([&](const std::string&) { mc_seed_set = true; });
  mc->add_option("--out", mc_out, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  if (summary->parsed()) {
    rpsm::ExperimentParams p;
    p.scheme = rpsm::scheme_from_name(sum_scheme);
    p.theta_rad = sum_theta;
    p.beta_rad = sum_beta;
    p.loss_L = sum_loss;
    p.epsilon_rad = sum_eps;
    p.photons_N = sum_photons;
    p.rounds = parse_rounds_arg(sum_rounds);
    print_summary(std::cout, p, rpsm::evaluate(p));
    return 0;
  }

  if (sweep->parsed()) {
    rpsm::SweepSpec spec = rpsm::parse_config(read_file(sw_config));
    if (!sw_out.empty()) spec.output_path = sw_out;
    if (!sw_format.empty()) {
      if (sw_format == "csv") spec.format = rpsm::OutputFormat::csv;
      else if (sw_format == "json") spec.format = rpsm::OutputFormat::json;
      else throw rpsm::ValidationError("--format must be csv or json");
    }
    if (spec.output_path.empty())
      throw rpsm::ValidationError("no output path: pass --out or set 'out' in the config");
    const std::vector<rpsm::SweepRow> rows = rpsm::run_sweep(spec);
    std::ofstream out(spec.output_path, std::ios::binary);
    if (!out)
      throw rpsm::ValidationError("cannot write '" + spec.output_path + "'");
    if (spec.format == rpsm::OutputFormat::csv)
      rpsm::write_csv(out, rows, !sw_no_ts);
    else
      rpsm::write_json(out, rows, !sw_no_ts);
    return 0;
  }

  if (selfcheck->parsed()) {
    rpsm::SelfCheckOptions opt = rpsm::SelfCheckOptions::defaults();
    opt.tol = sc_tol;
    if (!sc_config.empty()) {
      const rpsm::SweepSpec spec = rpsm::parse_config(read_file(sc_config));
      for (const rpsm::AxisSpec& axis : spec.axes) {
        if (axis.name == "theta") opt.thetas = rpsm::axis_values(axis);
        if (axis.name == "beta") opt.betas = rpsm::axis_values(axis);
      }
    }
    const rpsm::SelfCheckReport report = rpsm::self_check(opt);
    std::cout << report.details.dump(2) << "\n";
    return report.pass ? 0 : 2;
  }

  if (mc->parsed()) {
    const rpsm::SweepSpec spec = rpsm::parse_config(read_file(mc_config));
    rpsm::McConfig config;
    config.params = spec.fixed;
    config.trials = mc_trials_set ? mc_trials : spec.mc.trials;
    config.master_seed = mc_seed_set ? mc_seed : spec.mc.seed;
    const rpsm::McEstimate est = rpsm::run_trials(config);
    const rpsm::RecyclingSummary s = rpsm::evaluate(config.params);

    nlohmann::ordered_json doc;
    doc["scheme"] = rpsm::scheme_name(config.params.scheme);
    doc["theta"] = config.params.theta_rad;
    doc["beta"] = config.params.beta_rad;
    doc["loss"] = config.params.loss_L;
    doc["epsilon"] = config.params.epsilon_rad;
    doc["photons"] = config.params.photons_N;
    doc["rounds"] = config.params.rounds.is_infinite()
                        ? nlohmann::ordered_json("inf")
                        : nlohmann::ordered_json(config.params.rounds.count());
    doc["trials"] = config.trials;
    doc["seed"] = config.master_seed;
    doc["mean_theta_tilde"] = est.mean_theta_tilde;
    doc["theta_tilde_analytic"] = s.theta_tilde;
    doc["empirical_std"] = est.empirical_std;
    doc["predicted_std"] = est.predicted_std;
    doc["rel_deviation"] = est.rel_deviation;
    doc["trials_used"] = est.trials_used;

    if (mc_out.empty()) {
      std::cout << doc.dump(2) << "\n";
    } else {
      std::ofstream out(mc_out, std::ios::binary);
      if (!out) throw rpsm::ValidationError("cannot write '" + mc_out + "'");
      out << doc.dump(2) << "\n";
    }
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const rpsm::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
