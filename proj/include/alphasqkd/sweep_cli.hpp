#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace alphasqkd::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Inclusive value range; a single value is min == max.
struct Range {
  double min = 0.0;
  double max = 0.0;
  double step = 1.0;

  static Range single(double v) { return {v, v, 1.0}; }
  int count() const;
  double at(int i) const;
};

struct SweepConfig {
  enum class Mode { keyrate, sweep, soundness, intercept };
  enum class Format { csv, json };

  Mode mode = Mode::keyrate;
  Range alpha = Range::single(0.2);
  Range qf = Range::single(0.0);
  Range qr = Range::single(0.0);
  Range qx = Range::single(0.0);
  bool tie_reverse_loop = false;  // qx follows qr; the qx range is ignored
  std::optional<double> p_override;
  int grid_points = 64;
  int refine_passes = 1;
  std::uint64_t seed = 1;
  int attacks = 1000;  // soundness mode
  int d_e = 4;
  std::string output;  // empty writes to stdout
  Format format = Format::csv;
  int workers = 0;  // 0 = hardware concurrency

  void validate() const;
};

/// Parses a JSON config document mirroring the field names above.
SweepConfig parse_config_json(const std::string& text);

/// JSON config reproducing one of the paper-figure evaluations
/// (fig1, fig2, fig3, fig5).
std::string preset_config_json(const std::string& name);

/// Runs the configured mode and writes the output artifact.  Returns 0 on
/// success; validity errors are reported on `diag` with a non-zero return.
int run(const SweepConfig& config, std::ostream& diag);

}  // namespace alphasqkd::cli
