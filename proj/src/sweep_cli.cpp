#include "alphasqkd/sweep_cli.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include <json.hpp>

#include "alphasqkd/channel_models.hpp"
#include "alphasqkd/ir_analysis.hpp"
#include "alphasqkd/keyrate_bound.hpp"
#include "alphasqkd/protocol_sim.hpp"

namespace alphasqkd::cli {

namespace {

using nlohmann::json;

std::string fmt12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

using Row = std::vector<std::string>;

struct Table {
  std::vector<std::string> header;
  std::vector<Row> rows;
  std::vector<std::string> trailer;  // '#'-prefixed summary lines (CSV only)
  json metadata;
};

void write_table(const Table& table, const SweepConfig& config, std::ostream& out) {
  if (config.format == SweepConfig::Format::csv) {
    for (size_t i = 0; i < table.header.size(); ++i)
      out << (i ? "," : "") << table.header[i];
    out << '\n';
    for (const Row& row : table.rows) {
      for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
      out << '\n';
    }
    for (const std::string& line : table.trailer) out << "# " << line << '\n';
  } else {
    json doc;
    doc["metadata"] = table.metadata;
    doc["rows"] = json::array();
    for (const Row& row : table.rows) {
      json obj;
      for (size_t i = 0; i < table.header.size(); ++i) {
        const std::string& field = row[i];
        if (field.empty())
          obj[table.header[i]] = nullptr;
        else if (field.find_first_not_of("+-.0123456789eEinf") == std::string::npos &&
                 field != "-" && !field.empty())
          obj[table.header[i]] = std::stod(field);
        else
          obj[table.header[i]] = field;
      }
      doc["rows"].push_back(std::move(obj));
    }
    out << doc.dump(2) << '\n';
  }
}

json config_echo(const SweepConfig& config);

void emit(const Table& table, const SweepConfig& config) {
  if (config.output.empty()) {
    write_table(table, config, std::cout);
    return;
  }
  std::ofstream out(config.output, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + config.output);
  write_table(table, config, out);
}

/// Ordered parallel map: rows are stored by task index regardless of the
/// completion order.
void parallel_rows(int n_tasks, int workers, std::vector<Row>& rows,
                   const std::function<Row(int)>& task) {
  rows.resize(n_tasks);
  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, n_tasks));

  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::atomic<bool> failed{false};
  std::string error_message;
  std::mutex error_mutex;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n_tasks; i = next.fetch_add(1)) {
        if (failed.load()) return;
        try {
          rows[i] = task(i);
        } catch (const std::exception& e) {
          std::lock_guard<std::mutex> lock(error_mutex);
          failed = true;
          error_message = e.what();
          return;
        }
      }
    });
  for (std::thread& t : pool) t.join();
  if (failed) throw std::runtime_error(error_message);
}

struct GridPoint {
  double alpha, q_f, q_r, q_x;
};

std::vector<GridPoint> expand_grid(const SweepConfig& config) {
  std::vector<GridPoint> points;
  for (int ia = 0; ia < config.alpha.count(); ++ia)
    for (int jf = 0; jf < config.qf.count(); ++jf)
      for (int jr = 0; jr < config.qr.count(); ++jr) {
        if (config.tie_reverse_loop) {
          points.push_back({config.alpha.at(ia), config.qf.at(jf), config.qr.at(jr),
                            config.qr.at(jr)});
        } else {
          for (int jx = 0; jx < config.qx.count(); ++jx)
            points.push_back({config.alpha.at(ia), config.qf.at(jf), config.qr.at(jr),
                              config.qx.at(jx)});
        }
      }
  return points;
}

Row sweep_row(const SweepConfig& config, const GridPoint& pt) {
  const NoisePoint noise{pt.q_f, pt.q_r, pt.q_x};
  const ObservedStatistics stats =
      depolarize_statistics(pt.alpha, noise, config.p_override.value_or(0.0));
  GridSpec grid;
  grid.points = config.grid_points;
  grid.refine_passes = config.refine_passes;
  const KeyRateReport report = key_rate(stats, pt.alpha, grid);

  std::string flag;
  if (report.infeasible) flag = "infeasible";
  else if (report.assumption_clamped) flag = "assumption_clamped";

  Row row{fmt12(pt.alpha), fmt12(pt.q_f), fmt12(pt.q_r), fmt12(pt.q_x)};
  if (report.infeasible) {
    row.insert(row.end(), {"", "", "", "", "", ""});
  } else {
    row.insert(row.end(),
               {fmt12(report.sae_lower), fmt12(report.hab), fmt12(report.rate),
                fmt12(report.argmin.q3), fmt12(report.argmin.e2_sq),
                fmt12(report.argmin.f3_sq)});
  }
  row.push_back(flag);
  return row;
}

Table run_sweep(const SweepConfig& config, bool single_point) {
  Table table;
  table.header = {"alpha",  "q_f", "q_r",       "q_x",       "sae_lower", "hab",
                  "rate",   "argmin_q3", "argmin_e2", "argmin_f3", "flag"};
  std::vector<GridPoint> points = expand_grid(config);
  if (single_point) points.resize(1);
  parallel_rows(static_cast<int>(points.size()), config.workers, table.rows,
                [&](int i) { return sweep_row(config, points[i]); });
  table.metadata = config_echo(config);
  return table;
}

Table run_soundness(const SweepConfig& config) {
  Table table;
  table.header = {"seed",      "d_e",       "symmetric", "alpha",
                  "sae_exact", "sae_lower", "margin",    "skipped"};

  struct Outcome {
    double margin = 0.0;
    bool skipped = false;
  };
  std::vector<Outcome> outcomes(config.attacks);

  parallel_rows(config.attacks, config.workers, table.rows, [&](int i) -> Row {
    const std::uint64_t attack_seed = config.seed + static_cast<std::uint64_t>(i);
    const bool symmetric = (i % 2 == 0);

    std::mt19937_64 rng(attack_seed ^ 0xa1fa5eedULL);
    std::uniform_real_distribution<double> unif(0.05, 0.95);
    const double alpha = unif(rng);

    const RestrictedAttack attack = symmetric
                                        ? random_symmetric_attack(config.d_e, attack_seed)
                                        : random_attack(config.d_e, attack_seed);
    const ProtocolParams params = ProtocolParams::make(alpha, max_povm_scale(alpha));
    const ObservedStatistics stats = simulate_statistics(attack, params);
    const ExactOracle oracle = build_rho_abe(attack, params);

    GridSpec grid;
    grid.points = config.grid_points;
    grid.refine_passes = config.refine_passes;

    Row row{std::to_string(attack_seed), std::to_string(config.d_e),
            symmetric ? "1" : "0", fmt12(alpha), fmt12(oracle.sae_exact)};
    try {
      const SaeResult sae = sae_lower(stats, alpha, grid);
      outcomes[i].margin = oracle.sae_exact - sae.value;
      row.insert(row.end(), {fmt12(sae.value), fmt12(outcomes[i].margin), "0"});
    } catch (const std::runtime_error&) {
      outcomes[i].skipped = true;
      row.insert(row.end(), {"", "", "1"});
    }
    return row;
  });

  double min_margin = std::numeric_limits<double>::infinity();
  int skipped = 0;
  for (const Outcome& o : outcomes) {
    if (o.skipped)
      ++skipped;
    else
      min_margin = std::min(min_margin, o.margin);
  }
  table.trailer.push_back("min_margin=" + fmt12(min_margin) + " skipped=" +
                          std::to_string(skipped) + "/" + std::to_string(config.attacks));
  table.metadata = config_echo(config);
  table.metadata["min_margin"] = min_margin;
  table.metadata["skipped"] = skipped;
  return table;
}

Table run_intercept(const SweepConfig& config) {
  Table table;
  table.header = {"alpha", "h_a_e", "h_a_b", "rate"};
  const int n = config.alpha.count();
  parallel_rows(n, config.workers, table.rows, [&](int i) -> Row {
    const double alpha = config.alpha.at(i);
    const IRRates rates = ir_rates(alpha);
    return {fmt12(alpha), fmt12(rates.h_a_given_e), fmt12(rates.h_a_given_b),
            fmt12(rates.rate)};
  });
  table.metadata = config_echo(config);
  return table;
}

std::string mode_name(SweepConfig::Mode mode) {
  switch (mode) {
    case SweepConfig::Mode::keyrate: return "keyrate";
    case SweepConfig::Mode::sweep: return "sweep";
    case SweepConfig::Mode::soundness: return "soundness";
    case SweepConfig::Mode::intercept: return "intercept";
  }
  return "?";
}

json range_json(const Range& r) {
  if (r.min == r.max) return r.min;
  return json{{"min", r.min}, {"max", r.max}, {"step", r.step}};
}

json config_echo(const SweepConfig& config) {
  json meta;
  meta["tool_version"] = kToolVersion;
  meta["seed"] = config.seed;
  json cfg;
  cfg["mode"] = mode_name(config.mode);
  cfg["alpha"] = range_json(config.alpha);
  cfg["q_f"] = range_json(config.qf);
  cfg["q_r"] = range_json(config.qr);
  cfg["q_x"] = range_json(config.qx);
  cfg["tie_reverse_loop"] = config.tie_reverse_loop;
  if (config.p_override) cfg["p_override"] = *config.p_override;
  cfg["grid_points"] = config.grid_points;
  cfg["refine_passes"] = config.refine_passes;
  cfg["seed"] = config.seed;
  cfg["attacks"] = config.attacks;
  cfg["d_e"] = config.d_e;
  cfg["format"] = config.format == SweepConfig::Format::csv ? "csv" : "json";
  meta["config"] = std::move(cfg);
  return meta;
}

Range parse_range(const json& value, const char* name) {
  if (value.is_number()) return Range::single(value.get<double>());
  if (value.is_object()) {
    Range r;
    r.min = value.at("min").get<double>();
    r.max = value.value("max", r.min);
    r.step = value.value("step", 1.0);
    return r;
  }
  throw std::invalid_argument(std::string("config field '") + name +
                              "' must be a number or a {min,max,step} object");
}

}  // namespace

int Range::count() const {
  if (max <= min) return 1;
  return static_cast<int>(std::floor((max - min) / step + 1e-9)) + 1;
}

double Range::at(int i) const { return std::min(min + i * step, max); }

void SweepConfig::validate() const {
  for (const Range* r : {&alpha, &qf, &qr, &qx}) {
    if (r->max < r->min) throw std::invalid_argument("range must be well-ordered");
    if (r->max > r->min && r->step <= 0.0)
      throw std::invalid_argument("range step must be positive");
  }
  if (alpha.min < 0.0 || alpha.max > 1.0)
    throw std::invalid_argument("alpha must lie in [0,1]");
  for (const Range* r : {&qf, &qr, &qx})
    if (r->min < 0.0 || r->max > 0.5)
      throw std::invalid_argument("noise parameters must lie in [0, 0.5]");
  if (grid_points < 8) throw std::invalid_argument("grid_points must be >= 8");
  if (refine_passes < 0) throw std::invalid_argument("refine_passes must be >= 0");
  if (attacks < 1) throw std::invalid_argument("attacks must be >= 1");
  if (d_e < 2) throw std::invalid_argument("d_e must be >= 2");
  if (p_override && *p_override <= 0.0)
    throw std::invalid_argument("p_override must be positive");
}

SweepConfig parse_config_json(const std::string& text) {
  const json doc = json::parse(text);
  SweepConfig config;
  if (doc.contains("mode")) {
    const std::string m = doc["mode"].get<std::string>();
    if (m == "keyrate") config.mode = SweepConfig::Mode::keyrate;
    else if (m == "sweep") config.mode = SweepConfig::Mode::sweep;
    else if (m == "soundness") config.mode = SweepConfig::Mode::soundness;
    else if (m == "intercept") config.mode = SweepConfig::Mode::intercept;
    else throw std::invalid_argument("unknown mode: " + m);
  }
  if (doc.contains("alpha")) config.alpha = parse_range(doc["alpha"], "alpha");
  if (doc.contains("q_f")) config.qf = parse_range(doc["q_f"], "q_f");
  if (doc.contains("q_r")) config.qr = parse_range(doc["q_r"], "q_r");
  if (doc.contains("q_x")) config.qx = parse_range(doc["q_x"], "q_x");
  if (doc.contains("tie_reverse_loop")) config.tie_reverse_loop = doc["tie_reverse_loop"];
  if (doc.contains("p_override")) config.p_override = doc["p_override"].get<double>();
  if (doc.contains("grid_points")) config.grid_points = doc["grid_points"];
  if (doc.contains("refine_passes")) config.refine_passes = doc["refine_passes"];
  if (doc.contains("seed")) config.seed = doc["seed"].get<std::uint64_t>();
  if (doc.contains("attacks")) config.attacks = doc["attacks"];
  if (doc.contains("d_e")) config.d_e = doc["d_e"];
  if (doc.contains("output")) config.output = doc["output"].get<std::string>();
  if (doc.contains("format")) {
    const std::string f = doc["format"].get<std::string>();
    if (f == "csv") config.format = SweepConfig::Format::csv;
    else if (f == "json") config.format = SweepConfig::Format::json;
    else throw std::invalid_argument("unknown format: " + f);
  }
  if (doc.contains("workers")) config.workers = doc["workers"];
  config.validate();
  return config;
}

std::string preset_config_json(const std::string& name) {
  json cfg;
  if (name == "fig1") {
    cfg["_comment"] =
        "Forward noise 1e-5 per the figure caption; the reverse/loop range is a "
        "documented guess (high, approaching 10%).";
    cfg["mode"] = "sweep";
    cfg["alpha"] = {{"min", 0.0}, {"max", 0.5}, {"step", 0.005}};
    cfg["q_f"] = 1e-5;
    cfg["q_r"] = {{"min", 0.02}, {"max", 0.10}, {"step", 0.02}};
    cfg["tie_reverse_loop"] = true;
    cfg["output"] = "fig1.csv";
  } else if (name == "fig2") {
    cfg["_comment"] =
        "Low forward noise with increasing reverse and loop noise; exact axis "
        "ranges are documented guesses.";
    cfg["mode"] = "sweep";
    cfg["alpha"] = {{"min", 0.0}, {"max", 0.5}, {"step", 0.005}};
    cfg["q_f"] = 0.01;
    cfg["q_r"] = {{"min", 0.01}, {"max", 0.05}, {"step", 0.01}};
    cfg["tie_reverse_loop"] = true;
    cfg["output"] = "fig2.csv";
  } else if (name == "fig3") {
    cfg["_comment"] =
        "Forward noise increased at fixed reverse/loop noise; the window of "
        "positive-rate alpha narrows.";
    cfg["mode"] = "sweep";
    cfg["alpha"] = {{"min", 0.0}, {"max", 0.5}, {"step", 0.005}};
    cfg["q_f"] = {{"min", 0.01}, {"max", 0.03}, {"step", 0.005}};
    cfg["q_r"] = 0.01;
    cfg["q_x"] = 0.01;
    cfg["output"] = "fig3.csv";
  } else if (name == "fig5") {
    cfg["_comment"] = "Intercept-resend attack on the projective-measurement variant.";
    cfg["mode"] = "intercept";
    cfg["alpha"] = {{"min", 0.0}, {"max", 1.0}, {"step", 0.01}};
    cfg["output"] = "fig5.csv";
  } else {
    throw std::invalid_argument("unknown preset: " + name +
                                " (expected fig1, fig2, fig3, or fig5)");
  }
  return cfg.dump(2) + "\n";
}

int run(const SweepConfig& config, std::ostream& diag) {
  try {
    config.validate();
    Table table;
    switch (config.mode) {
      case SweepConfig::Mode::keyrate:
        table = run_sweep(config, /*single_point=*/true);
        break;
      case SweepConfig::Mode::sweep:
        table = run_sweep(config, /*single_point=*/false);
        break;
      case SweepConfig::Mode::soundness:
        table = run_soundness(config);
        break;
      case SweepConfig::Mode::intercept:
        table = run_intercept(config);
        break;
    }
    emit(table, config);
    return 0;
  } catch (const std::exception& e) {
    diag << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace alphasqkd::cli
