#include "rpsm/oracle.hpp"

#include <cmath>
#include <limits>

#include "rpsm/interferometer.hpp"

namespace rpsm {

namespace {

// Iteration stops once the circulating weight is below this; the remaining
// rounds contribute exactly zero at double precision.
constexpr double kDeadWeight = 1e-300;
constexpr std::uint64_t kRoundCap = 10'000'000;

// Tens of thousands of tiny positive increments; plain summation would drift
// past the 1e-12 bookkeeping tolerance, compensation keeps it at a few ulps.
struct KahanSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    const double y = x - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

JointVector at_port(int path_slot, const PolVector& pol) {
  JointVector v;
  v.c[2 * path_slot + 0] = pol.h;
  v.c[2 * path_slot + 1] = pol.v;
  return v;
}

JointVector forward_pass(const ElementSet& e, const PolVector& in) {
  JointVector v = at_port(0, in);  // port a
  v = apply(e.s1, v);
  v = apply(e.u1, v);
  v = apply(e.u2, v);
  v = apply(e.s2, v);
  return v;
}

struct Accums {
  KahanSum p_d, g_hp, g_ext, v_weight;
};

PulseTrainResult finish(std::vector<RoundRecord> records, const Accums& acc,
                        double residual, std::uint64_t rounds) {
  PulseTrainResult r;
  r.records = std::move(records);
  r.P_d_total = acc.p_d.sum;
  r.gamma_hp = acc.g_hp.sum;
  r.gamma_ext = acc.g_ext.sum;
  r.Gamma_total = r.gamma_hp + r.gamma_ext;
  r.residual = residual;
  r.rounds_simulated = rounds;
  r.P_V_mixed = r.P_d_total > 0.0 ? acc.v_weight.sum / r.P_d_total
                                  : std::numeric_limits<double>::quiet_NaN();
  return r;
}

class Scheme1Walker {
 public:
  explicit Scheme1Walker(const ExperimentParams& p)
      : elements_(make_elements(p.theta_rad, p.beta_rad)),
        feed_(std::polar(std::sqrt(1.0 - p.loss_L), p.epsilon_rad)),
        loss_L_(p.loss_L) {}

  RoundRecord step() {
    ++j_;
    const JointVector out = forward_pass(elements_, {c_, Complex{}});
    RoundRecord rec;
    rec.round_j = j_;
    rec.dark_state = {out.c[2], out.c[3]};
    rec.p_dj = norm_sq(rec.dark_state);
    acc_.p_d.add(rec.p_dj);
    acc_.v_weight.add(std::norm(rec.dark_state.v));
    rec.loss_j = std::norm(out.c[1]);  // V light removed by the polarizer
    acc_.g_hp.add(rec.loss_j);
    const Complex amp = out.c[0];
    acc_.g_ext.add(loss_L_ * std::norm(amp));
    c_ = feed_ * amp;
    rec.bright_amp = c_;
    return rec;
  }

  double circulating() const { return std::norm(c_); }
  const Accums& accums() const { return acc_; }

 private:
  ElementSet elements_;
  Complex feed_;
  double loss_L_;
  Complex c_{1.0, 0.0};
  Accums acc_;
  std::uint64_t j_ = 0;
};

class Scheme2Walker {
 public:
  explicit Scheme2Walker(const ExperimentParams& p)
      : elements_(make_elements(p.theta_rad, p.beta_rad)) {}

  RoundRecord step() {
    ++j_;
    JointVector out;
    double hp1 = 0.0;
    if (j_ == 1) {
      out = forward_pass(elements_, phi_);
    } else {
      // Backwards from port c through the interferometer; both beam-splitter
      // blocks are their own inverses. The entrance filter removes the V
      // components at ports a and b before the state is re-sent forward.
      JointVector v = at_port(0, phi_);
      v = apply(elements_.s2, v);
      v = apply(elements_.u1, v);
      v = apply(elements_.u2, v);
      v = apply(elements_.s1, v);
      hp1 = std::norm(v.c[1]) + std::norm(v.c[3]);
      v.c[1] = Complex{};
      v.c[3] = Complex{};
      v = apply(elements_.s1, v);
      v = apply(elements_.u1, v);
      v = apply(elements_.u2, v);
      v = apply(elements_.s2, v);
      out = v;
    }
    RoundRecord rec;
    rec.round_j = j_;
    rec.dark_state = {out.c[2], out.c[3]};
    rec.p_dj = norm_sq(rec.dark_state);
    acc_.p_d.add(rec.p_dj);
    acc_.v_weight.add(std::norm(rec.dark_state.v));
    const double hp2 = std::norm(out.c[1]);
    rec.loss_j = hp1 + hp2;
    acc_.g_hp.add(rec.loss_j);
    phi_ = {out.c[0], Complex{}};
    rec.bright_amp = out.c[0];
    return rec;
  }

  double circulating() const { return std::norm(phi_.h); }
  const Accums& accums() const { return acc_; }

 private:
  ElementSet elements_;
  PolVector phi_{Complex{1.0, 0.0}, Complex{}};
  Accums acc_;
  std::uint64_t j_ = 0;
};

template <class Walker>
PulseTrainResult run(Walker walker, std::uint64_t n) {
  std::vector<RoundRecord> records;
  records.reserve(n < 65536 ? static_cast<std::size_t>(n) : 65536);
  std::uint64_t j = 0;
  for (; j < n; ++j) {
    records.push_back(walker.step());
    if (walker.circulating() < kDeadWeight) {
      ++j;
      break;
    }
  }
  return finish(std::move(records), walker.accums(), walker.circulating(), j);
}

}  // namespace

PulseTrainResult simulate_scheme1(const ExperimentParams& params, std::uint64_t n) {
  validate(params);
  if (n == 0) throw ValidationError("simulate_scheme1: n must be >= 1");
  return run(Scheme1Walker(params), n);
}

PulseTrainResult simulate_scheme2(const ExperimentParams& params, std::uint64_t n) {
  validate(params);
  if (n == 0) throw ValidationError("simulate_scheme2: n must be >= 1");
  return run(Scheme2Walker(params), n);
}

double mixed_state_pv(const PulseTrainResult& result) {
  if (!(result.P_d_total > 0.0))
    throw EmptyEnsemble("mixed_state_pv: no photon was ever postselected");
  KahanSum v;
  for (const RoundRecord& rec : result.records) v.add(std::norm(rec.dark_state.v));
  return v.sum / result.P_d_total;
}

std::uint64_t convergence_rounds(const ExperimentParams& params, double tol) {
  validate(params);
  if (!(tol > 0.0)) throw ValidationError("convergence_rounds: tol must be positive");

  auto search = [&](auto walker) -> std::uint64_t {
    for (std::uint64_t j = 1; j <= kRoundCap; ++j) {
      walker.step();
      if (walker.circulating() < tol) return j;
    }
    throw NoConvergence("residual did not drop below tolerance within 1e7 rounds");
  };

  switch (params.scheme) {
    case Scheme::SchemeI:
      return search(Scheme1Walker(params));
    case Scheme::SchemeII:
      return search(Scheme2Walker(params));
    case Scheme::NoRecycle:
      break;
  }
  throw ValidationError("convergence_rounds requires a recycling scheme");
}

}  // namespace rpsm
