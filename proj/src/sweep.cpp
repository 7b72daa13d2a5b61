#include "rpsm/sweep.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <limits>
#include <ostream>
#include <sstream>

#include "rpsm/interferometer.hpp"
#include "rpsm/oracle.hpp"
#include "rpsm/pulse_kernels.hpp"
#include "rpsm/threads.hpp"

namespace rpsm {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string unquote(std::string s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                        (s.front() == '\'' && s.back() == '\'')))
    return s.substr(1, s.size() - 2);
  return s;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

bool parse_u64(const std::string& s, std::uint64_t& out) {
  if (s.empty() || s[0] == '-') return false;
  char* end = nullptr;
  out = std::strtoull(s.c_str(), &end, 10);
  return end == s.c_str() + s.size();
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void parse_fail(std::size_t line, const std::string& msg) {
  throw ParseError("line " + std::to_string(line) + ": " + msg);
}

bool valid_axis_name(const std::string& name) {
  return name == "theta" || name == "beta" || name == "loss" || name == "n";
}

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

const char* const kColumns =
    "scheme,theta,beta,loss,epsilon,n,p_d1,p_c1,gamma1,P_d,Gamma,residual,P_V,"
    "theta_tilde,eta,R_tilde,sensitivity_canonical,sensitivity_paper_convention,"
    "status";

}  // namespace

std::vector<double> axis_values(const AxisSpec& axis) {
  std::vector<double> out;
  out.reserve(axis.count);
  if (axis.count == 1) {
    out.push_back(axis.min);
    return out;
  }
  const double denom = static_cast<double>(axis.count - 1);
  for (std::uint64_t i = 0; i < axis.count; ++i) {
    const double t = static_cast<double>(i) / denom;
    if (axis.log_scale)
      out.push_back(axis.min * std::pow(axis.max / axis.min, t));
    else
      out.push_back(axis.min + (axis.max - axis.min) * t);
  }
  return out;
}

SweepSpec parse_config(const std::string& text) {
  SweepSpec spec;
  enum class Section { top, axis, mc };
  Section section = Section::top;
  AxisSpec* axis = nullptr;

  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;

    if (line.front() == '[') {
      if (line.back() != ']') parse_fail(lineno, "unterminated section header");
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (name == "mc") {
        section = Section::mc;
        continue;
      }
      if (name.rfind("sweep.", 0) == 0) {
        const std::string axis_name = name.substr(6);
        if (!valid_axis_name(axis_name))
          throw ValidationError("unknown sweep axis '" + axis_name +
                                "' (expected theta|beta|loss|n)");
        for (const AxisSpec& a : spec.axes)
          if (a.name == axis_name)
            throw ValidationError("duplicate sweep axis '" + axis_name + "'");
        spec.axes.push_back(AxisSpec{axis_name, 0.0, 0.0, 1, false});
        axis = &spec.axes.back();
        section = Section::axis;
        continue;
      }
      parse_fail(lineno, "unknown section '" + name + "'");
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) parse_fail(lineno, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = unquote(trim(line.substr(eq + 1)));
    if (key.empty()) parse_fail(lineno, "empty key");
    if (value.empty()) parse_fail(lineno, "empty value for '" + key + "'");

    auto need_double = [&]() {
      double v;
      if (!parse_double(value, v)) parse_fail(lineno, "bad number '" + value + "'");
      return v;
    };
    auto need_u64 = [&]() {
      std::uint64_t v;
      if (!parse_u64(value, v)) parse_fail(lineno, "bad integer '" + value + "'");
      return v;
    };

    switch (section) {
      case Section::top:
        if (key == "scheme") spec.fixed.scheme = scheme_from_name(value);
        else if (key == "theta") spec.fixed.theta_rad = need_double();
        else if (key == "beta") spec.fixed.beta_rad = need_double();
        else if (key == "loss") spec.fixed.loss_L = need_double();
        else if (key == "epsilon") spec.fixed.epsilon_rad = need_double();
        else if (key == "photons") spec.fixed.photons_N = need_double();
        else if (key == "rounds") {
          if (value == "inf" || value == "infinite") spec.fixed.rounds = Rounds::infinite();
          else spec.fixed.rounds = Rounds::finite(need_u64());
        } else if (key == "format") {
          if (value == "csv") spec.format = OutputFormat::csv;
          else if (value == "json") spec.format = OutputFormat::json;
          else throw ValidationError("format must be csv or json");
        } else if (key == "out") spec.output_path = value;
        else parse_fail(lineno, "unknown key '" + key + "'");
        break;
      case Section::axis:
        if (key == "min") axis->min = need_double();
        else if (key == "max") axis->max = need_double();
        else if (key == "count") axis->count = need_u64();
        else if (key == "scale") {
          if (value == "linear") axis->log_scale = false;
          else if (value == "log") axis->log_scale = true;
          else throw ValidationError("scale must be linear or log");
        } else parse_fail(lineno, "unknown axis key '" + key + "'");
        break;
      case Section::mc:
        if (key == "trials") spec.mc.trials = need_u64();
        else if (key == "seed") spec.mc.seed = need_u64();
        else parse_fail(lineno, "unknown mc key '" + key + "'");
        break;
    }
  }

  validate(spec.fixed);
  if (spec.axes.size() > 2)
    throw ValidationError("at most 2 sweep axes are supported");
  for (const AxisSpec& a : spec.axes) {
    if (a.count < 1) throw ValidationError("axis count must be >= 1");
    if (!(a.min <= a.max) && a.count > 1)
      throw ValidationError("axis '" + a.name + "' needs min <= max");
    if (a.log_scale && !(a.min > 0.0))
      throw ValidationError("log-scaled axis '" + a.name + "' needs min > 0");
    if (a.name == "loss" && !(a.min >= 0.0 && a.max < 1.0))
      throw ValidationError("loss_L must be in [0,1)");
    if (a.name == "n") {
      if (a.min < 1.0) throw ValidationError("axis n needs min >= 1");
      if (spec.fixed.scheme == Scheme::NoRecycle)
        throw ValidationError("axis n requires scheme1 or scheme2");
    }
  }
  if (spec.mc.trials < 2) throw ValidationError("trials must be >= 2");
  return spec;
}

std::string render_config(const SweepSpec& spec) {
  std::ostringstream out;
  out << "scheme = " << scheme_name(spec.fixed.scheme) << "\n";
  out << "theta = " << g17(spec.fixed.theta_rad) << "\n";
  out << "beta = " << g17(spec.fixed.beta_rad) << "\n";
  out << "loss = " << g17(spec.fixed.loss_L) << "\n";
  out << "epsilon = " << g17(spec.fixed.epsilon_rad) << "\n";
  out << "photons = " << g17(spec.fixed.photons_N) << "\n";
  if (spec.fixed.rounds.is_infinite())
    out << "rounds = inf\n";
  else
    out << "rounds = " << spec.fixed.rounds.count() << "\n";
  out << "format = " << (spec.format == OutputFormat::csv ? "csv" : "json") << "\n";
  if (!spec.output_path.empty()) out << "out = " << spec.output_path << "\n";
  for (const AxisSpec& a : spec.axes) {
    out << "\n[sweep." << a.name << "]\n";
    out << "min = " << g17(a.min) << "\n";
    out << "max = " << g17(a.max) << "\n";
    out << "count = " << a.count << "\n";
    out << "scale = " << (a.log_scale ? "log" : "linear") << "\n";
  }
  out << "\n[mc]\n";
  out << "trials = " << spec.mc.trials << "\n";
  out << "seed = " << spec.mc.seed << "\n";
  return out.str();
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  validate(spec.fixed);
  std::vector<std::vector<double>> values;
  std::size_t total = 1;
  for (const AxisSpec& a : spec.axes) {
    values.push_back(axis_values(a));
    total *= values.back().size();
  }

  std::vector<SweepRow> rows(total);
  parallel_for(total, [&](std::size_t i) {
    ExperimentParams p = spec.fixed;
    std::size_t rem = i;
    for (std::size_t k = spec.axes.size(); k-- > 0;) {
      const double v = values[k][rem % values[k].size()];
      rem /= values[k].size();
      const std::string& name = spec.axes[k].name;
      if (name == "theta") p.theta_rad = v;
      else if (name == "beta") p.beta_rad = v;
      else if (name == "loss") p.loss_L = v;
      else if (name == "n")
        p.rounds = Rounds::finite(static_cast<std::uint64_t>(std::llround(v)));
    }
    rows[i].params = p;
    try {
      rows[i].summary = evaluate(p);
    } catch (const DegenerateDarkPort&) {
      rows[i].degenerate = true;
      RecyclingSummary& s = rows[i].summary;
      const FirstRoundProbs fr = scheme1_first_round(p.theta_rad, p.beta_rad);
      s.p_d1 = fr.p_d1;
      s.p_c1 = fr.p_c1;
      s.gamma_1 = fr.gamma_1;
      s.P_d = s.Gamma = s.residual = s.P_V = s.theta_tilde = s.eta = kNan;
      s.snr_enhancement = s.sensitivity_canonical = s.sensitivity_paper = kNan;
      s.x_or_y = s.kappa_n = kNan;
    }
  });
  return rows;
}

namespace {

std::string rounds_text(const Rounds& r) {
  return r.is_infinite() ? "inf" : std::to_string(r.count());
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows,
               bool timestamp_header) {
  if (timestamp_header) out << "# generated " << utc_now() << "\n";
  out << kColumns << "\n";
  for (const SweepRow& r : rows) {
    const RecyclingSummary& s = r.summary;
    out << scheme_name(r.params.scheme) << ',' << g17(r.params.theta_rad) << ','
        << g17(r.params.beta_rad) << ',' << g17(r.params.loss_L) << ','
        << g17(r.params.epsilon_rad) << ',' << rounds_text(r.params.rounds) << ','
        << g17(s.p_d1) << ',' << g17(s.p_c1) << ',' << g17(s.gamma_1) << ','
        << g17(s.P_d) << ',' << g17(s.Gamma) << ',' << g17(s.residual) << ','
        << g17(s.P_V) << ',' << g17(s.theta_tilde) << ',' << g17(s.eta) << ','
        << g17(s.snr_enhancement) << ',' << g17(s.sensitivity_canonical) << ','
        << g17(s.sensitivity_paper) << ','
        << (r.degenerate ? "degenerate" : "ok") << "\n";
  }
}

void write_json(std::ostream& out, const std::vector<SweepRow>& rows,
                bool timestamp_header) {
  nlohmann::ordered_json doc;
  if (timestamp_header) doc["generated"] = utc_now();
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const SweepRow& r : rows) {
    const RecyclingSummary& s = r.summary;
    nlohmann::ordered_json row;
    row["scheme"] = scheme_name(r.params.scheme);
    row["theta"] = r.params.theta_rad;
    row["beta"] = r.params.beta_rad;
    row["loss"] = r.params.loss_L;
    row["epsilon"] = r.params.epsilon_rad;
    if (r.params.rounds.is_infinite())
      row["n"] = "inf";
    else
      row["n"] = r.params.rounds.count();
    row["p_d1"] = s.p_d1;
    row["p_c1"] = s.p_c1;
    row["gamma1"] = s.gamma_1;
    row["P_d"] = s.P_d;
    row["Gamma"] = s.Gamma;
    row["residual"] = s.residual;
    row["P_V"] = s.P_V;
    row["theta_tilde"] = s.theta_tilde;
    row["eta"] = s.eta;
    row["R_tilde"] = s.snr_enhancement;
    row["sensitivity_canonical"] = s.sensitivity_canonical;
    row["sensitivity_paper_convention"] = s.sensitivity_paper;
    row["status"] = r.degenerate ? "degenerate" : "ok";
    arr.push_back(std::move(row));
  }
  doc["rows"] = std::move(arr);
  out << doc.dump(2) << "\n";
}

SelfCheckOptions SelfCheckOptions::defaults() {
  SelfCheckOptions opt;
  constexpr double kPi = 3.14159265358979323846;
  for (int i = 1; i <= 20; ++i) opt.thetas.push_back(i * (kPi / 3.0) / 20.0);
  for (int i = 1; i <= 20; ++i) opt.betas.push_back(i * (kPi / 2.0) / 20.0);
  return opt;
}

namespace {

struct DiffTracker {
  double P_d = 0.0, Gamma = 0.0, gamma_hp = 0.0, gamma_ext = 0.0;
  double residual = 0.0, P_V = 0.0;
  std::size_t points = 0;
  std::size_t degenerate = 0;

  void fold(const DiffTracker& other) {
    P_d = std::max(P_d, other.P_d);
    Gamma = std::max(Gamma, other.Gamma);
    gamma_hp = std::max(gamma_hp, other.gamma_hp);
    gamma_ext = std::max(gamma_ext, other.gamma_ext);
    residual = std::max(residual, other.residual);
    P_V = std::max(P_V, other.P_V);
    points += other.points;
    degenerate += other.degenerate;
  }

  double worst() const {
    return std::max({P_d, Gamma, gamma_hp, gamma_ext, residual, P_V});
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["P_d"] = P_d;
    j["Gamma"] = Gamma;
    j["gamma_hp"] = gamma_hp;
    j["gamma_ext"] = gamma_ext;
    j["residual"] = residual;
    j["P_V"] = P_V;
    j["points"] = points;
    j["degenerate_skipped"] = degenerate;
    return j;
  }
};

double nan_safe_diff(double a, double b) {
  if (std::isnan(a) && std::isnan(b)) return 0.0;
  return std::abs(a - b);
}

// One scheme at one loss value: oracle vs analytic and oracle vs lane kernels
// over the theta x beta lanes, for each round count plus the infinite proxy.
void equivalence_block(Scheme scheme, double loss, const SelfCheckOptions& opt,
                       DiffTracker& vs_analytic, DiffTracker& vs_kernels) {
  std::vector<ExperimentParams> pts;
  for (double th : opt.thetas)
    for (double be : opt.betas) {
      ExperimentParams p;
      p.theta_rad = th;
      p.beta_rad = be;
      p.loss_L = loss;
      p.epsilon_rad = 0.8;  // must cancel everywhere; keep it nonzero
      p.scheme = scheme;
      pts.push_back(p);
    }

  kernels::Scheme1Batch b1;
  kernels::Scheme2Batch b2;
  if (scheme == Scheme::SchemeI) b1 = kernels::build_scheme1_batch(pts);
  else b2 = kernels::build_scheme2_batch(pts);

  std::vector<std::uint64_t> round_counts = opt.finite_rounds;
  round_counts.push_back(opt.infinite_proxy_rounds);  // stands in for n = inf

  for (std::size_t ri = 0; ri < round_counts.size(); ++ri) {
    const std::uint64_t n = round_counts[ri];
    const bool proxy = ri + 1 == round_counts.size();

    kernels::BatchTotals totals;
    if (scheme == Scheme::SchemeI) kernels::run_scheme1(b1, n, totals);
    else kernels::run_scheme2(b2, n, totals);

    std::vector<DiffTracker> lane_analytic(pts.size());
    std::vector<DiffTracker> lane_kernel(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) {
      ExperimentParams p = pts[i];
      const PulseTrainResult sim = scheme == Scheme::SchemeI
                                       ? simulate_scheme1(p, n)
                                       : simulate_scheme2(p, n);
      DiffTracker& a = lane_analytic[i];
      a.points = 1;
      try {
        p.rounds = proxy ? Rounds::infinite() : Rounds::finite(n);
        const RecyclingSummary s = evaluate(p);
        a.P_d = nan_safe_diff(s.P_d, sim.P_d_total);
        a.Gamma = nan_safe_diff(s.Gamma, sim.Gamma_total);
        a.gamma_hp = nan_safe_diff(s.gamma_hp, sim.gamma_hp);
        a.gamma_ext = nan_safe_diff(s.gamma_ext, sim.gamma_ext);
        a.residual = nan_safe_diff(s.residual, sim.residual);
        a.P_V = nan_safe_diff(s.P_V, sim.P_V_mixed);
      } catch (const DegenerateDarkPort&) {
        a.degenerate = 1;
      }
      DiffTracker& k = lane_kernel[i];
      k.points = 1;
      k.P_d = nan_safe_diff(totals.p_d[i], sim.P_d_total);
      k.gamma_hp = nan_safe_diff(totals.gamma_hp[i], sim.gamma_hp);
      k.gamma_ext = nan_safe_diff(totals.gamma_ext[i], sim.gamma_ext);
      k.residual = nan_safe_diff(totals.residual[i], sim.residual);
      if (sim.P_d_total > 0.0)
        k.P_V = nan_safe_diff(totals.v_weight[i] / totals.p_d[i], sim.P_V_mixed);
    });
    for (const DiffTracker& t : lane_analytic) vs_analytic.fold(t);
    for (const DiffTracker& t : lane_kernel) vs_kernels.fold(t);
  }
}

}  // namespace

SelfCheckReport self_check(const SelfCheckOptions& opt) {
  nlohmann::ordered_json details;
  details["tolerance"] = opt.tol;
  details["kernel_isa"] = kernels::isa_name(kernels::active_isa());
  double worst = 0.0;

  // closed forms vs pulse-train oracle vs lane kernels
  {
    DiffTracker s1_analytic, s1_kernel;
    for (double L : opt.losses)
      equivalence_block(Scheme::SchemeI, L, opt, s1_analytic, s1_kernel);
    DiffTracker s2_analytic, s2_kernel;
    equivalence_block(Scheme::SchemeII, 0.0, opt, s2_analytic, s2_kernel);

    nlohmann::ordered_json eq;
    eq["scheme1"] = s1_analytic.to_json();
    eq["scheme2"] = s2_analytic.to_json();
    details["oracle_vs_analytic"] = eq;
    nlohmann::ordered_json kq;
    kq["scheme1"] = s1_kernel.to_json();
    kq["scheme2"] = s2_kernel.to_json();
    details["oracle_vs_kernels"] = kq;
    worst = std::max({worst, s1_analytic.worst(), s2_analytic.worst(),
                      s1_kernel.worst(), s2_kernel.worst()});
  }

  // conservation of the closed forms on a 50x50 grid
  {
    constexpr double kPi = 3.14159265358979323846;
    double inf1 = 0.0, inf2 = 0.0, fin1 = 0.0, fin2 = 0.0, lossy = 0.0;
    const std::array<std::uint64_t, 4> ns{1, 2, 10, 100};
    for (int i = 1; i <= 50; ++i)
      for (int j = 1; j <= 50; ++j) {
        ExperimentParams p;
        p.theta_rad = i * (kPi / 3.0) / 50.0;
        p.beta_rad = j * (kPi / 2.0) / 50.0;
        p.scheme = Scheme::SchemeI;
        const RecyclingSummary a = scheme1_infinite(p);
        inf1 = std::max(inf1, std::abs(a.P_d + a.Gamma - 1.0));
        const RecyclingSummary c = scheme2_infinite(p);
        inf2 = std::max(inf2, std::abs(c.P_d + c.Gamma - 1.0));
        for (std::uint64_t n : ns) {
          p.rounds = Rounds::finite(n);
          const RecyclingSummary f1 = scheme1_finite(p);
          fin1 = std::max(fin1, std::abs(f1.P_d + f1.Gamma + f1.residual - 1.0));
          const RecyclingSummary f2 = scheme2_finite(p);
          fin2 = std::max(fin2, std::abs(f2.P_d + f2.Gamma + f2.residual - 1.0));
        }
        p.rounds = Rounds::finite(25);
        p.loss_L = 0.3;
        const RecyclingSummary g = scheme1_finite(p);
        lossy = std::max(lossy,
                         std::abs(g.P_d + g.gamma_hp + g.gamma_ext + g.residual - 1.0));
        p.loss_L = 0.0;
      }
    nlohmann::ordered_json c;
    c["scheme1_infinite"] = inf1;
    c["scheme2_infinite"] = inf2;
    c["scheme1_finite"] = fin1;
    c["scheme2_finite"] = fin2;
    c["scheme1_external_loss"] = lossy;
    details["conservation"] = c;
    worst = std::max({worst, inf1, inf2, fin1, fin2, lossy});
  }

  // element-built first pass vs closed forms
  {
    constexpr double kPi = 3.14159265358979323846;
    double dark = 0.0, bright = 0.0;
    for (int i = 0; i < 50; ++i)
      for (int j = 0; j < 50; ++j) {
        const double th = i * kPi / 50.0;
        const double be = j * kPi / 50.0;
        const FirstPass fp = compose_first_pass(th, be);
        dark = std::max(dark, max_abs_diff(fp.dark, single_pass_dark(th, be)));
        bright = std::max(bright, std::abs(fp.bright - single_pass_bright(th, be)));
      }
    nlohmann::ordered_json c;
    c["dark_entry"] = dark;
    c["bright"] = bright;
    details["compositional"] = c;
    worst = std::max({worst, dark, bright});
  }

  // scheme I invariances: P_V must not depend on n, L, or epsilon
  {
    double pv_spread = 0.0, eps_spread = 0.0;
    const std::array<double, 3> eps{0.0, 1.0, 3.14159265358979323846};
    for (std::size_t i = 1; i <= 10; ++i)
      for (std::size_t j = 1; j <= 10; ++j) {
        ExperimentParams p;
        p.theta_rad = opt.thetas[(i * opt.thetas.size()) / 11];
        p.beta_rad = opt.betas[(j * opt.betas.size()) / 11];
        p.scheme = Scheme::SchemeI;
        const double pv_ref = no_recycle(p).P_V;
        for (double L : {0.0, 0.4}) {
          p.loss_L = L;
          for (std::uint64_t n : {std::uint64_t{1}, std::uint64_t{5}, std::uint64_t{50}}) {
            p.rounds = Rounds::finite(n);
            pv_spread = std::max(pv_spread, std::abs(scheme1_finite(p).P_V - pv_ref));
            p.epsilon_rad = 0.0;
            const PulseTrainResult base = simulate_scheme1(p, n);
            for (double e : eps) {
              p.epsilon_rad = e;
              const PulseTrainResult r = simulate_scheme1(p, n);
              eps_spread = std::max(eps_spread,
                                    std::abs(r.P_d_total - base.P_d_total));
              eps_spread = std::max(eps_spread,
                                    std::abs(r.Gamma_total - base.Gamma_total));
              eps_spread = std::max(eps_spread,
                                    nan_safe_diff(r.P_V_mixed, base.P_V_mixed));
            }
          }
        }
      }
    nlohmann::ordered_json c;
    c["P_V_vs_n_and_L"] = pv_spread;
    c["epsilon_probabilities"] = eps_spread;
    details["scheme1_invariance"] = c;
    worst = std::max({worst, pv_spread, eps_spread});
  }

  details["max_discrepancy"] = worst;
  SelfCheckReport report;
  report.details = std::move(details);
  report.pass = worst <= opt.tol;
  report.details["pass"] = report.pass;
  return report;
}

}  // namespace rpsm
