// Command-line entry point: reads a JSON run configuration, dispatches to the
// toolkit, and writes CSV (or a JSON envelope) suitable for external
// plotting. Exit codes: 0 success, 1 configuration/validation error,
// 2 applicability-condition violation, 3 budget exceeded.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nfl/nfl.hpp"

using nlohmann::json;

namespace {

struct OutputOptions {
  std::string out_path;  // empty -> stdout
  bool as_json = false;
};

struct RunContext {
  json config;
  std::string command;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
};

void require_keys(const json& object, const std::set<std::string>& allowed,
                  const std::string& where) {
  for (auto it = object.begin(); it != object.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw nfl::ConfigError("unknown key \"" + where + it.key() + "\"");
    }
  }
}

const json& require_field(const json& object, const std::string& key,
                          const std::string& where) {
  const auto it = object.find(key);
  if (it == object.end()) {
    throw nfl::ConfigError("missing required field \"" + where + key + "\"");
  }
  return *it;
}

std::vector<double> number_array(const json& value, const std::string& where) {
  if (!value.is_array() || value.empty()) {
    throw nfl::ConfigError("field \"" + where + "\" must be a non-empty array of numbers");
  }
  std::vector<double> out;
  for (const auto& entry : value) {
    if (!entry.is_number()) {
      throw nfl::ConfigError("field \"" + where + "\" must contain only numbers");
    }
    out.push_back(entry.get<double>());
  }
  return out;
}

nfl::SystemDescriptor load_system(const json& config) {
  return nfl::validate_system(number_array(require_field(config, "ratios", ""), "ratios"));
}

nfl::DensitySpec load_density_spec(const json& noise) {
  nfl::DensitySpec spec;
  spec.family = require_field(noise, "family", "noise.").get<std::string>();
  if (spec.family == "uniform" || spec.family == "triangular") {
    require_keys(noise, {"type", "family", "beta", "resolution"}, "noise.");
    spec.beta = require_field(noise, "beta", "noise.").get<double>();
  } else if (spec.family == "gaussian") {
    require_keys(noise, {"type", "family", "sigma", "cut", "resolution"}, "noise.");
    spec.sigma = require_field(noise, "sigma", "noise.").get<double>();
    spec.cut = require_field(noise, "cut", "noise.").get<double>();
  } else if (spec.family == "tabulated") {
    require_keys(noise, {"type", "family", "x_min", "x_max", "values", "resolution"},
                 "noise.");
    spec.x_min = require_field(noise, "x_min", "noise.").get<double>();
    spec.x_max = require_field(noise, "x_max", "noise.").get<double>();
    spec.values = number_array(require_field(noise, "values", "noise."), "noise.values");
  } else {
    throw nfl::UnknownFamily("unknown density family: " + spec.family);
  }
  return spec;
}

int density_resolution(const json& noise) {
  if (noise.contains("resolution")) return noise["resolution"].get<int>();
  return 1 << 14;
}

nfl::NoiseModel load_noise(const json& config, const nfl::SystemDescriptor& sys) {
  const json& noise = require_field(config, "noise", "");
  if (!noise.is_object()) throw nfl::ConfigError("field \"noise\" must be an object");
  const std::string type = require_field(noise, "type", "noise.").get<std::string>();
  if (type == "trivalued") {
    require_keys(noise, {"type", "deltas"}, "noise.");
    return nfl::make_trivalued(
        number_array(require_field(noise, "deltas", "noise."), "noise.deltas"),
        sys.symbol_count());
  }
  if (type == "density") {
    return nfl::make_density_noise({load_density_spec(noise)}, sys.symbol_count(),
                                   density_resolution(noise));
  }
  if (type == "tent") {
    require_keys(noise, {"type", "epsilon", "x0", "variant"}, "noise.");
    const double epsilon = require_field(noise, "epsilon", "noise.").get<double>();
    const nfl::Rational x0 =
        nfl::parse_rational(require_field(noise, "x0", "noise.").get<std::string>());
    const std::string variant = require_field(noise, "variant", "noise.").get<std::string>();
    if (variant != "collapse" && variant != "merge") {
      throw nfl::ConfigError("noise.variant must be \"collapse\" or \"merge\"");
    }
    return nfl::make_tent(epsilon, x0,
                          variant == "merge" ? nfl::TentVariant::Merge
                                             : nfl::TentVariant::Collapse);
  }
  throw nfl::ConfigError("noise.type must be \"trivalued\", \"density\" or \"tent\"");
}

nfl::AddressPolicy load_policy(const json& config, const nfl::SystemDescriptor& sys) {
  const std::string policy = config.value("policy", std::string("cyclic"));
  if (policy == "cyclic") return nfl::AddressPolicy::cyclic();
  if (policy == "random") return nfl::AddressPolicy::uniform_random();
  if (policy == "fixed") {
    const std::string address = config.value("address", std::string());
    if (address.empty()) {
      throw nfl::ConfigError("policy \"fixed\" needs a non-empty \"address\" pattern");
    }
    return nfl::AddressPolicy::fixed(
        nfl::parse_address(address, sys.symbol_count()).symbols);
  }
  throw nfl::ConfigError("policy must be \"cyclic\", \"random\" or \"fixed\"");
}

// Path followed by the analytic tables: an explicit pattern is cycled out to
// the requested depth; the default walks the symbols cyclically.
nfl::Address table_address(const json& config, const nfl::SystemDescriptor& sys,
                           int max_stage) {
  const std::string text = config.value("address", std::string());
  if (text.empty()) return nfl::cyclic_address(sys.symbol_count(), max_stage);
  const nfl::Address pattern = nfl::parse_address(text, sys.symbol_count());
  nfl::Address addr;
  for (int i = 0; i < max_stage; ++i) {
    addr.symbols.push_back(
        pattern.symbols[static_cast<std::size_t>(i) % pattern.symbols.size()]);
  }
  return addr;
}

// Table plus meta, rendered as CSV or a JSON envelope.
struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;  // cells are numbers, strings or bools
};

bool probability_column(const std::string& name) {
  return name == "LE" || name == "NT" || name == "C" || name == "GE" ||
         name == "estimate" || name == "stderr";
}

std::string render_cell(const json& cell, bool probability, bool& clamped) {
  if (cell.is_string()) return cell.get<std::string>();
  if (cell.is_boolean()) return cell.get<bool>() ? "true" : "false";
  if (cell.is_null()) return "";
  if (cell.is_number_integer()) return std::to_string(cell.get<std::int64_t>());
  if (probability) return nfl::format_probability(cell.get<double>(), clamped);
  return nfl::format_number(cell.get<double>());
}

void emit(const ResultTable& table, const RunContext& context, const OutputOptions& output) {
  std::ostringstream body;
  if (output.as_json) {
    json envelope;
    envelope["meta"] = {{"tool", "nfl"},
                        {"version", nfl::kVersion},
                        {"command", context.command},
                        {"config_hash", nfl::hex64(context.config_hash)},
                        {"seed", context.seed}};
    json rows = json::array();
    for (const auto& row : table.rows) {
      json entry;
      for (std::size_t i = 0; i < table.columns.size(); ++i) entry[table.columns[i]] = row[i];
      rows.push_back(std::move(entry));
    }
    envelope["rows"] = std::move(rows);
    body << envelope.dump(2) << "\n";
  } else {
    nfl::CsvWriter writer(table.columns);
    writer.add_comment("nfl version=" + std::string(nfl::kVersion) +
                       " command=" + context.command +
                       " config_hash=" + nfl::hex64(context.config_hash) +
                       " seed=" + std::to_string(context.seed));
    bool clamped = false;
    for (const auto& row : table.rows) {
      std::vector<std::string> cells;
      for (std::size_t i = 0; i < row.size(); ++i) {
        cells.push_back(render_cell(row[i], probability_column(table.columns[i]), clamped));
      }
      writer.add_row(std::move(cells));
    }
    if (clamped) writer.note_probability_clamped();
    writer.write(body);
  }

  if (output.out_path.empty()) {
    std::cout << body.str();
  } else {
    std::ofstream file(output.out_path, std::ios::binary);
    if (!file) throw nfl::ConfigError("cannot open output file: " + output.out_path);
    file << body.str();
  }
}

// --- subcommand bodies -----------------------------------------------------

int run_dim(const RunContext& context, const OutputOptions& output) {
  const nfl::SystemDescriptor sys = load_system(context.config);
  const double tol = context.config.value("tol", 1e-12);
  const double dimension = nfl::moran_dimension(sys, tol);
  if (output.out_path.empty() && !output.as_json) {
    std::cout << nfl::format_number(dimension) << "\n";
    return 0;
  }
  ResultTable table;
  table.columns = {"dimension"};
  table.rows.push_back({json(dimension)});
  emit(table, context, output);
  return 0;
}

int run_simulate(const RunContext& context, const OutputOptions& output) {
  const nfl::SystemDescriptor sys = load_system(context.config);
  const nfl::NoiseModel noise = load_noise(context.config, sys);
  const auto trials = require_field(context.config, "trials", "").get<std::uint64_t>();
  const int horizon = require_field(context.config, "horizon", "").get<int>();
  const nfl::AddressPolicy policy = load_policy(context.config, sys);

  const nfl::EmpiricalDistribution distribution =
      nfl::monte_carlo_distribution(sys, noise, policy, trials, horizon, context.seed);

  ResultTable table;
  table.columns = {"stage", "estimate", "stderr", "trials"};
  for (const nfl::EmpiricalRow& row : distribution.rows) {
    table.rows.push_back({json(row.stage), json(row.estimate), json(row.stderr_),
                          json(row.trials)});
  }
  emit(table, context, output);
  return 0;
}

int run_tree(const RunContext& context, const OutputOptions& output, bool intervals_only) {
  const nfl::SystemDescriptor sys = load_system(context.config);
  const nfl::NoiseModel noise = load_noise(context.config, sys);
  const int depth = require_field(context.config, "depth", "").get<int>();

  const nfl::AddressTree tree = nfl::run_tree(sys, noise, depth, context.seed);

  ResultTable table;
  if (intervals_only) {
    table.columns = {"address", "length"};
    for (const nfl::IntervalRow& row : nfl::emit_intervals(sys, tree)) {
      table.rows.push_back({json(row.address.str()), json(row.length)});
    }
  } else {
    table.columns = {"address", "stage", "diameter", "noise_term", "collapsed"};
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
      const nfl::TreeNode& node = tree.nodes[i];
      table.rows.push_back({json(tree.address_of(static_cast<std::int64_t>(i)).str()),
                            json(node.stage), json(node.diameter), json(node.noise_term),
                            json(node.collapsed)});
    }
  }
  emit(table, context, output);
  return 0;
}

int run_analytic1(const RunContext& context, const OutputOptions& output) {
  const nfl::SystemDescriptor sys = load_system(context.config);
  const nfl::NoiseModel noise = load_noise(context.config, sys);
  const auto* trivalued = std::get_if<nfl::TriValuedNoise>(&noise);
  if (trivalued == nullptr) {
    throw nfl::ConfigError("analytic1 needs noise.type \"trivalued\"");
  }
  const int max_stage = require_field(context.config, "max_stage", "").get<int>();
  const nfl::Address address = table_address(context.config, sys, max_stage);

  const nfl::Case1Table result = nfl::distribution_case1(sys, *trivalued, address, max_stage);

  ResultTable table;
  table.columns = {"stage", "LE", "NT", "C", "GE", "regime"};
  for (const nfl::Case1Row& row : result.rows) {
    table.rows.push_back({json(row.stage), json(row.le), json(row.nt), json(row.c),
                          json(row.ge), json(nfl::regime_name(row.regime))});
  }
  emit(table, context, output);
  return 0;
}

int run_analytic2(const RunContext& context, const OutputOptions& output,
                  const std::string& dump_prefix) {
  const nfl::SystemDescriptor sys = load_system(context.config);
  const json& noise_json = require_field(context.config, "noise", "");
  if (noise_json.value("type", std::string()) != "density") {
    throw nfl::ConfigError("analytic2 needs noise.type \"density\"");
  }
  const nfl::DensitySpec spec = load_density_spec(noise_json);
  const int max_stage = require_field(context.config, "max_stage", "").get<int>();
  const nfl::Address address = table_address(context.config, sys, max_stage);

  nfl::Case2Options options;
  options.resolution = context.config.value("resolution", density_resolution(noise_json));
  std::vector<nfl::DensityGrid> densities;
  if (!dump_prefix.empty()) options.stage_densities = &densities;

  const nfl::Case2Table result =
      nfl::distribution_case2(sys, {spec}, address, max_stage, options);

  if (!dump_prefix.empty()) {
    for (std::size_t s = 0; s < densities.size(); ++s) {
      std::ofstream file(dump_prefix + "stage" + std::to_string(s + 1) + ".csv",
                         std::ios::binary);
      if (!file) throw nfl::ConfigError("cannot open density dump file");
      file << "x,value\n";
      const nfl::DensityGrid& grid = densities[s];
      for (std::size_t i = 0; i < grid.size(); ++i) {
        file << nfl::format_number(grid.point(i)) << ","
             << nfl::format_number(grid.values[i]) << "\n";
      }
    }
  }

  ResultTable table;
  table.columns = {"stage", "LE", "NT", "C"};
  for (const nfl::Case2Row& row : result.rows) {
    table.rows.push_back({json(row.stage), json(row.le), json(row.nt), json(row.c)});
  }
  emit(table, context, output);
  return 0;
}

int run_chaos(const RunContext& context, const OutputOptions& output,
              const std::string& x0_override) {
  const nfl::SystemDescriptor sys = load_system(context.config);
  const nfl::NoiseModel noise = load_noise(context.config, sys);
  const auto* tent = std::get_if<nfl::TentNoise>(&noise);
  if (tent == nullptr) throw nfl::ConfigError("chaos needs noise.type \"tent\"");

  nfl::ChaosRunOptions options;
  options.policy = load_policy(context.config, sys);
  options.max_stage = context.config.value("max_stage", 10000);
  options.seed = context.seed;

  std::vector<nfl::Rational> starts;
  bool sweep = false;
  if (!x0_override.empty() && x0_override.rfind("q<=", 0) == 0) {
    sweep = true;
    const int max_q = std::stoi(x0_override.substr(3));
    starts = nfl::enumerate_reduced_rationals(max_q);
    options.throw_on_exceed = false;
  } else if (!x0_override.empty()) {
    starts.push_back(nfl::parse_rational(x0_override));
  } else {
    starts.push_back(tent->x0);
  }

  std::vector<nfl::TruncationReport> reports;
  reports.reserve(starts.size());
  for (const nfl::Rational& x0 : starts) {
    nfl::TentNoise run_noise = *tent;
    run_noise.x0 = x0;
    reports.push_back(nfl::run_until_truncation(sys, run_noise, options));
  }

  ResultTable table;
  table.columns = {"x0", "k", "collapse_stage", "n0", "bound_satisfied"};
  for (const nfl::TruncationReport& report : reports) {
    table.rows.push_back(
        {json(report.x0.str()),
         report.hit_stage ? json(*report.hit_stage) : json(),
         report.collapse_stage ? json(*report.collapse_stage) : json(),
         json(report.n0), json(report.bound_satisfied)});
  }
  emit(table, context, output);

  if (sweep) {
    const nfl::TruncationSummary summary = nfl::verify_truncation_bound(reports);
    std::cerr << "sweep: " << summary.total << " starts, " << summary.truncated
              << " truncated (" << summary.truncated_with_hit << " after entering (0,a), "
              << summary.truncated_without_hit << " before), " << summary.no_hit_survivors
              << " never entered (0,a); violations: " << summary.violators.size() << "\n";
    if (!summary.all_ok) return 3;
  }
  return 0;
}

std::uint64_t effective_hash(const json& config) {
  return nfl::fnv1a64(config.dump());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"noisy self-similar set toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string address_flag;
  std::string policy_flag;
  std::string x0_flag;
  std::string variant_flag;
  std::string dump_prefix;
  bool as_json = false;
  std::int64_t seed_flag = -1;
  std::int64_t trials_flag = -1;
  int horizon_flag = -1;
  int depth_flag = -1;
  int max_stage_flag = -1;
  int resolution_flag = -1;
  double tol_flag = -1.0;
  double epsilon_flag = -1.0;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON run configuration")->required();
    cmd->add_option("--out", out_path, "output path (default stdout)");
    cmd->add_flag("--json", as_json, "emit a JSON envelope instead of CSV");
    cmd->add_option("--seed", seed_flag, "generator seed (default 0)");
  };

  CLI::App* dim = app.add_subcommand("dim", "similarity dimension of the system");
  add_common(dim);
  dim->add_option("--tol", tol_flag, "residual tolerance");

  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo collapse distribution");
  add_common(simulate);
  simulate->add_option("--trials", trials_flag, "number of independent paths");
  simulate->add_option("--horizon", horizon_flag, "maximum stage per path");
  simulate->add_option("--policy", policy_flag, "cyclic | random | fixed");
  simulate->add_option("--address", address_flag, "symbol pattern for fixed policy");

  CLI::App* tree = app.add_subcommand("tree", "noisy expansion of the address tree");
  add_common(tree);
  tree->add_option("--depth", depth_flag, "tree depth");

  CLI::App* intervals = app.add_subcommand("emit-intervals",
                                           "surviving leaf intervals of a noisy tree");
  add_common(intervals);
  intervals->add_option("--depth", depth_flag, "tree depth");

  CLI::App* analytic1 = app.add_subcommand("analytic1",
                                           "closed-form table for tri-valued noise");
  add_common(analytic1);
  analytic1->add_option("--max-stage", max_stage_flag, "table depth");
  analytic1->add_option("--address", address_flag, "path the table follows");

  CLI::App* analytic2 = app.add_subcommand("analytic2",
                                           "density-propagation table");
  add_common(analytic2);
  analytic2->add_option("--max-stage", max_stage_flag, "table depth");
  analytic2->add_option("--address", address_flag, "path the table follows");
  analytic2->add_option("--resolution", resolution_flag, "grid points per density");
  analytic2->add_option("--dump-densities", dump_prefix,
                        "write per-stage densities to <prefix>stageN.csv");

  CLI::App* chaos = app.add_subcommand("chaos", "tent-map truncation runs");
  add_common(chaos);
  chaos->add_option("--x0", x0_flag, "start as \"p/q\", or sweep spec \"q<=N\"");
  chaos->add_option("--epsilon", epsilon_flag, "kick amplitude in (0,1)");
  chaos->add_option("--variant", variant_flag, "collapse | merge");
  chaos->add_option("--max-stage", max_stage_flag, "run length cap");
  chaos->add_option("--policy", policy_flag, "cyclic | random | fixed");
  chaos->add_option("--address", address_flag, "symbol pattern for fixed policy");

  CLI11_PARSE(app, argc, argv);

  try {
    std::ifstream file(config_path);
    if (!file) throw nfl::ConfigError("cannot open config file: " + config_path);
    json config;
    try {
      config = json::parse(file);
    } catch (const json::exception& e) {
      throw nfl::ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!config.is_object()) throw nfl::ConfigError("config root must be an object");
    // Schema check: commands read only the fields they use, but nothing
    // outside the documented set is allowed anywhere.
    require_keys(config,
                 {"ratios", "noise", "seed", "tol", "trials", "horizon", "depth",
                  "max_stage", "resolution", "policy", "address"},
                 "");

    // Flag overrides fold into the effective config before hashing.
    if (seed_flag >= 0) config["seed"] = seed_flag;
    if (trials_flag >= 0) config["trials"] = trials_flag;
    if (horizon_flag >= 0) config["horizon"] = horizon_flag;
    if (depth_flag >= 0) config["depth"] = depth_flag;
    if (max_stage_flag >= 0) config["max_stage"] = max_stage_flag;
    if (resolution_flag >= 0) config["resolution"] = resolution_flag;
    if (tol_flag > 0.0) config["tol"] = tol_flag;
    if (!address_flag.empty()) config["address"] = address_flag;
    if (!policy_flag.empty()) config["policy"] = policy_flag;
    if (!variant_flag.empty() && config.contains("noise")) {
      config["noise"]["variant"] = variant_flag;
    }
    if (epsilon_flag > 0.0 && config.contains("noise")) {
      config["noise"]["epsilon"] = epsilon_flag;
    }
    if (!x0_flag.empty() && x0_flag.rfind("q<=", 0) != 0 && config.contains("noise") &&
        config["noise"].value("type", std::string()) == "tent") {
      config["noise"]["x0"] = x0_flag;
    }

    RunContext context;
    context.config = std::move(config);
    context.seed = context.config.value("seed", std::uint64_t(0));
    context.config_hash = effective_hash(context.config);

    OutputOptions output{out_path, as_json};

    if (dim->parsed()) {
      context.command = "dim";
      return run_dim(context, output);
    }
    if (simulate->parsed()) {
      context.command = "simulate";
      return run_simulate(context, output);
    }
    if (tree->parsed()) {
      context.command = "tree";
      return run_tree(context, output, false);
    }
    if (intervals->parsed()) {
      context.command = "emit-intervals";
      return run_tree(context, output, true);
    }
    if (analytic1->parsed()) {
      context.command = "analytic1";
      return run_analytic1(context, output);
    }
    if (analytic2->parsed()) {
      context.command = "analytic2";
      return run_analytic2(context, output, dump_prefix);
    }
    if (chaos->parsed()) {
      context.command = "chaos";
      return run_chaos(context, output, x0_flag);
    }
    return 1;
  } catch (const nfl::ConditionViolation& e) {
    std::cerr << "condition violated: " << e.what() << "\n";
    return 2;
  } catch (const nfl::BudgetError& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return 3;
  } catch (const nfl::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "error: config field has the wrong type: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
