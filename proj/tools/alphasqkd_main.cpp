#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "alphasqkd/sweep_cli.hpp"

namespace {

using alphasqkd::cli::SweepConfig;

struct FlagValues {
  std::optional<std::string> config_path;
  std::optional<double> alpha, alpha_min, alpha_max, alpha_step;
  std::optional<double> qf, qf_min, qf_max, qf_step;
  std::optional<double> qr, qr_min, qr_max, qr_step;
  std::optional<double> qx, qx_min, qx_max, qx_step;
  bool tie_reverse_loop = false;
  std::optional<double> p_override;
  std::optional<int> grid_points, refine_passes, attacks, d_e, workers;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output, format;
};

void add_common_flags(CLI::App* cmd, FlagValues& v) {
  cmd->add_option("--config", v.config_path, "JSON config file; flags override its values");
  cmd->add_option("--alpha", v.alpha, "single alpha value");
  cmd->add_option("--alpha-min", v.alpha_min);
  cmd->add_option("--alpha-max", v.alpha_max);
  cmd->add_option("--alpha-step", v.alpha_step);
  cmd->add_option("--qf", v.qf, "forward depolarization noise");
  cmd->add_option("--qf-min", v.qf_min);
  cmd->add_option("--qf-max", v.qf_max);
  cmd->add_option("--qf-step", v.qf_step);
  cmd->add_option("--qr", v.qr, "reverse depolarization noise");
  cmd->add_option("--qr-min", v.qr_min);
  cmd->add_option("--qr-max", v.qr_max);
  cmd->add_option("--qr-step", v.qr_step);
  cmd->add_option("--qx", v.qx, "loop (reflection) depolarization noise");
  cmd->add_option("--qx-min", v.qx_min);
  cmd->add_option("--qx-max", v.qx_max);
  cmd->add_option("--qx-step", v.qx_step);
  cmd->add_flag("--tie-reverse-loop", v.tie_reverse_loop, "let qx follow the qr range");
  cmd->add_option("--p-override", v.p_override, "POVM scale (default 1/(1+alpha))");
  cmd->add_option("--grid-points", v.grid_points, "grid points per hidden-parameter axis");
  cmd->add_option("--refine-passes", v.refine_passes);
  cmd->add_option("--seed", v.seed);
  cmd->add_option("--attacks", v.attacks, "attack count for soundness mode");
  cmd->add_option("--d-e", v.d_e, "ancilla dimension for soundness mode");
  cmd->add_option("--output", v.output, "output path (default stdout)");
  cmd->add_option("--format", v.format)->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--workers", v.workers, "worker threads (0 = all cores)");
}

void apply_range(alphasqkd::cli::Range& range, const std::optional<double>& single,
                 const std::optional<double>& lo, const std::optional<double>& hi,
                 const std::optional<double>& step) {
  if (single) range = alphasqkd::cli::Range::single(*single);
  if (lo) range.min = *lo;
  if (hi) range.max = *hi;
  if (step) range.step = *step;
}

SweepConfig build_config(SweepConfig::Mode mode, const FlagValues& v) {
  SweepConfig config;
  if (v.config_path) {
    std::ifstream in(*v.config_path);
    if (!in) throw std::runtime_error("cannot read config file: " + *v.config_path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    config = alphasqkd::cli::parse_config_json(buffer.str());
  }
  config.mode = mode;
  apply_range(config.alpha, v.alpha, v.alpha_min, v.alpha_max, v.alpha_step);
  apply_range(config.qf, v.qf, v.qf_min, v.qf_max, v.qf_step);
  apply_range(config.qr, v.qr, v.qr_min, v.qr_max, v.qr_step);
  apply_range(config.qx, v.qx, v.qx_min, v.qx_max, v.qx_step);
  if (v.tie_reverse_loop) config.tie_reverse_loop = true;
  if (v.p_override) config.p_override = *v.p_override;
  if (v.grid_points) config.grid_points = *v.grid_points;
  if (v.refine_passes) config.refine_passes = *v.refine_passes;
  if (v.seed) config.seed = *v.seed;
  if (v.attacks) config.attacks = *v.attacks;
  if (v.d_e) config.d_e = *v.d_e;
  if (v.workers) config.workers = *v.workers;
  if (v.output) config.output = *v.output;
  if (v.format)
    config.format = (*v.format == "json") ? SweepConfig::Format::json
                                          : SweepConfig::Format::csv;
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"alpha-tuneable semi-quantum key distribution: key-rate bounds and sweeps"};
  app.require_subcommand(1);

  struct ModeCmd {
    SweepConfig::Mode mode;
    CLI::App* cmd;
    FlagValues flags;
  };
  std::vector<ModeCmd> modes;
  modes.push_back({SweepConfig::Mode::keyrate,
                   app.add_subcommand("keyrate", "single key-rate evaluation"), {}});
  modes.push_back({SweepConfig::Mode::sweep,
                   app.add_subcommand("sweep", "key-rate sweep over alpha/noise grids"), {}});
  modes.push_back({SweepConfig::Mode::soundness,
                   app.add_subcommand("soundness",
                                      "random-attack soundness suite against the exact oracle"),
                   {}});
  modes.push_back({SweepConfig::Mode::intercept,
                   app.add_subcommand("intercept",
                                      "intercept-resend analysis of the restricted variant"),
                   {}});
  for (ModeCmd& m : modes) add_common_flags(m.cmd, m.flags);

  CLI::App* preset = app.add_subcommand("preset", "emit a paper-figure configuration");
  std::string preset_name;
  std::string preset_output;
  preset->add_option("name", preset_name, "fig1, fig2, fig3, or fig5")->required();
  preset->add_option("--output", preset_output, "write the config here (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (preset->parsed()) {
      const std::string text = alphasqkd::cli::preset_config_json(preset_name);
      if (preset_output.empty()) {
        std::cout << text;
      } else {
        std::ofstream out(preset_output, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open output file: " + preset_output);
        out << text;
      }
      return 0;
    }
    for (const ModeCmd& m : modes)
      if (m.cmd->parsed()) return alphasqkd::cli::run(build_config(m.mode, m.flags), std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
