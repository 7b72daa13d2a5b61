#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "rpsm/analytic.hpp"

// Configuration ingestion, parameter sweeps, and the self-check harness
// behind the CLI. Grid points are evaluated in parallel (RPSM_THREADS caps
// the workers) and emitted in row-major axis order, so output bytes do not
// depend on scheduling.

namespace rpsm {

enum class OutputFormat { csv, json };

/// One swept parameter: theta, beta, loss, or n.
struct AxisSpec {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  std::uint64_t count = 1;
  bool log_scale = false;

  friend bool operator==(const AxisSpec&, const AxisSpec&) = default;
};

/// Grid values for one axis; count = 1 collapses to {min}.
std::vector<double> axis_values(const AxisSpec& axis);

struct McSection {
  std::uint64_t trials = 2000;
  std::uint64_t seed = 42;

  friend bool operator==(const McSection&, const McSection&) = default;
};

struct SweepSpec {
  ExperimentParams fixed;       // defaults: L=0, eps=0, N=1e6, rounds=inf
  std::vector<AxisSpec> axes;   // at most 2
  std::string output_path;      // may stay empty when --out is given
  OutputFormat format = OutputFormat::csv;
  McSection mc;

  friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

/// Flat key-value text with [sweep.NAME] axis sections and an optional [mc]
/// section; see README for the key list. Throws ParseError (with the line
/// number) or ValidationError.
SweepSpec parse_config(const std::string& text);

/// Canonical text form; parse_config(render_config(s)) == s.
std::string render_config(const SweepSpec& spec);

struct SweepRow {
  ExperimentParams params;
  RecyclingSummary summary;
  bool degenerate = false;  // dark port closed at this grid point
};

std::vector<SweepRow> run_sweep(const SweepSpec& spec);

/// Fixed column set; numbers carry 17 significant digits. The optional first
/// line is a '# generated <utc>' comment, suppressed for byte-stable reruns.
void write_csv(std::ostream& out, const std::vector<SweepRow>& rows,
               bool timestamp_header);
void write_json(std::ostream& out, const std::vector<SweepRow>& rows,
                bool timestamp_header);

struct SelfCheckOptions {
  double tol = 1e-10;
  std::vector<double> thetas;   // default: 20 points in (0, pi/3]
  std::vector<double> betas;    // default: 20 points in (0, pi/2]
  std::vector<double> losses{0.0, 0.1, 0.5};
  std::vector<std::uint64_t> finite_rounds{1, 2, 10, 1000};
  std::uint64_t infinite_proxy_rounds = 10000;

  static SelfCheckOptions defaults();
};

struct SelfCheckReport {
  bool pass = false;
  nlohmann::ordered_json details;
};

/// Cross-validates the closed forms, the record-keeping oracle and the lane
/// kernels over the grid, plus conservation, the compositional first-pass
/// check and the scheme I invariances. Every maximum is gated on tol.
SelfCheckReport self_check(const SelfCheckOptions& options);

}  // namespace rpsm
