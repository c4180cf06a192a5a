#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nfl/errors.hpp"
#include "nfl/ifs.hpp"
#include "nfl/noise.hpp"
#include "nfl/parallel.hpp"
#include "nfl/rng.hpp"

namespace nfl {

// Live state of one generating-set lineage. The diameter and the noise term
// follow the same one-step contraction law, so
//     diameter = noiseless product + noise_term
// holds along the whole run up to floating rounding.
struct PathState {
  int stage = 0;
  double diameter = 1.0;
  double noise_term = 0.0;
  double product = 1.0;  // noiseless diameter of the same address
  Address address;
};

// Advances both recursions one stage:
//   L' = xi * (L + delta),   N' = xi * (N + delta).
// The caller appends the chosen symbol to the address.
inline PathState step(const PathState& state, double ratio, double delta) {
  PathState next = state;
  next.stage = state.stage + 1;
  next.diameter = ratio * (state.diameter + delta);
  next.noise_term = ratio * (state.noise_term + delta);
  next.product = state.product * ratio;
  return next;
}

enum class PathStatus { Collapsed, Merged, Survived };

struct TrajectoryOutcome {
  PathStatus status = PathStatus::Survived;
  int terminal_stage = 0;
  std::optional<std::vector<PathState>> trace;  // stages 0..terminal when requested
};

// How the infinite symbol sequence is produced. The closed forms treat the
// sequence as given, so the choice is exposed rather than fixed.
struct AddressPolicy {
  enum class Kind { FixedSequence, UniformRandom, Cyclic };
  Kind kind = Kind::Cyclic;
  std::vector<int> pattern;  // FixedSequence: repeated cyclically

  static AddressPolicy cyclic() { return AddressPolicy{}; }
  static AddressPolicy uniform_random() {
    return AddressPolicy{Kind::UniformRandom, {}};
  }
  static AddressPolicy fixed(std::vector<int> pattern) {
    if (pattern.empty()) throw BadParameters("fixed address policy needs a pattern");
    return AddressPolicy{Kind::FixedSequence, std::move(pattern)};
  }

  int symbol_at(int stage, int symbol_count, SplitMix64& rng) const {
    switch (kind) {
      case Kind::FixedSequence:
        return pattern[static_cast<std::size_t>((stage - 1) % static_cast<int>(pattern.size()))];
      case Kind::Cyclic:
        return 1 + (stage - 1) % symbol_count;
      default:
        return 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(symbol_count)));
    }
  }
};

namespace detail {

// Run-wide immutable noise state: inverse-CDF samplers are built once and
// shared by every path (they are read-only while sampling).
struct NoiseContext {
  explicit NoiseContext(const NoiseModel& noise) : model(noise) {
    if (const auto* density = std::get_if<DensityNoise>(&noise)) {
      for (const DensityGrid& grid : density->grids) samplers.emplace_back(grid);
    }
    const auto* tent = std::get_if<TentNoise>(&noise);
    merge_directed = tent != nullptr && tent->variant == TentVariant::Merge;
  }

  const NoiseModel& model;
  std::vector<DensitySampler> samplers;
  // Merge is the terminal event only for the merge-directed tent variant;
  // every other source terminates on collapse alone.
  bool merge_directed = false;
};

// Per-path disturbance source: owns the mutable state (generator position,
// tent orbit) and reads the shared context.
class DeltaSource {
 public:
  DeltaSource(const NoiseContext& context, SplitMix64& rng)
      : context_(context), rng_(rng) {
    if (const auto* tent = std::get_if<TentNoise>(&context.model)) {
      x_ = tent->x0;
    }
  }

  // Disturbance for the given stage/symbol. Tent noise advances its orbit
  // exactly once per stage, independent of the symbol.
  double operator()(int symbol) {
    if (const auto* tri = std::get_if<TriValuedNoise>(&context_.model)) {
      return sample_trivalued(*tri, symbol, rng_);
    }
    if (!context_.samplers.empty()) {
      const std::size_t idx =
          context_.samplers.size() == 1 ? 0 : static_cast<std::size_t>(symbol - 1);
      return context_.samplers[idx].sample(rng_);
    }
    const auto& tent = std::get<TentNoise>(context_.model);
    x_ = tent_step(x_);
    return tent_delta(x_, tent);
  }

  const Rational& orbit_position() const { return x_; }

 private:
  const NoiseContext& context_;
  SplitMix64& rng_;
  Rational x_;
};

}  // namespace detail

// Runs one lineage until it truncates or the horizon is reached. Collapse is
// diameter <= 0 (ties collapse); the merge-directed tent variant instead
// terminates when the noise term reaches the noiseless product.
inline TrajectoryOutcome run_path(const SystemDescriptor& sys, const NoiseModel& noise,
                                  const AddressPolicy& policy, int horizon,
                                  std::uint64_t seed, bool want_trace = false,
                                  std::uint64_t path_index = 0) {
  if (horizon < 1) throw BadParameters("horizon must be at least 1");
  SplitMix64 rng(seed, path_index);
  const detail::NoiseContext context(noise);
  detail::DeltaSource delta_of(context, rng);
  const bool stop_on_merge = context.merge_directed;

  TrajectoryOutcome outcome;
  PathState state;
  if (want_trace) {
    outcome.trace.emplace();
    outcome.trace->push_back(state);
  }

  for (int stage = 1; stage <= horizon; ++stage) {
    const int symbol = policy.symbol_at(stage, sys.symbol_count(), rng);
    const double delta = delta_of(symbol);
    state = step(state, sys.ratio(symbol), delta);
    state.address.symbols.push_back(symbol);
    if (want_trace) outcome.trace->push_back(state);

    if (!stop_on_merge && state.diameter <= 0.0) {
      outcome.status = PathStatus::Collapsed;
      outcome.terminal_stage = stage;
      return outcome;
    }
    if (stop_on_merge && state.noise_term >= state.product) {
      outcome.status = PathStatus::Merged;
      outcome.terminal_stage = stage;
      return outcome;
    }
  }
  outcome.status = PathStatus::Survived;
  outcome.terminal_stage = horizon;
  return outcome;
}

// Noisy expansion of the whole address tree. Branches draw independent
// disturbances keyed by their canonical node index, so the result does not
// depend on construction order. A collapsed node prunes only its own subtree.
inline AddressTree run_tree(const SystemDescriptor& sys, const NoiseModel& noise,
                            int depth, std::uint64_t seed,
                            std::int64_t node_budget = kDefaultNodeBudget) {
  if (depth < 0) throw BadParameters("tree depth must be nonnegative");
  complete_tree_node_count(sys.symbol_count(), depth, node_budget);

  // Tent noise is orbit-driven and identical on every branch at a stage.
  std::vector<double> tent_deltas;
  if (const auto* tent = std::get_if<TentNoise>(&noise)) {
    Rational x = tent->x0;
    for (int stage = 1; stage <= depth; ++stage) {
      x = tent_step(x);
      tent_deltas.push_back(tent_delta(x, *tent));
    }
  }
  std::vector<DensitySampler> samplers;
  if (const auto* density = std::get_if<DensityNoise>(&noise)) {
    for (const DensityGrid& grid : density->grids) samplers.emplace_back(grid);
  }

  AddressTree tree;
  tree.symbol_count = sys.symbol_count();
  tree.depth = depth;
  tree.nodes.push_back(TreeNode{});

  // Canonical complete-tree index of a child; stable under pruning.
  std::vector<std::int64_t> canonical{0};

  std::size_t level_begin = 0;
  std::size_t level_end = 1;
  const int k = sys.symbol_count();
  for (int stage = 1; stage <= depth; ++stage) {
    for (std::size_t p = level_begin; p < level_end; ++p) {
      if (tree.nodes[p].collapsed) continue;
      const TreeNode parent = tree.nodes[p];
      const std::int64_t parent_canonical = canonical[p];
      for (int sym = 1; sym <= k; ++sym) {
        const std::int64_t node_id = parent_canonical * k + sym;
        double delta = 0.0;
        if (const auto* tri = std::get_if<TriValuedNoise>(&noise)) {
          SplitMix64 rng(seed, static_cast<std::uint64_t>(node_id));
          delta = sample_trivalued(*tri, sym, rng);
        } else if (std::holds_alternative<DensityNoise>(noise)) {
          SplitMix64 rng(seed, static_cast<std::uint64_t>(node_id));
          const std::size_t idx =
              samplers.size() == 1 ? 0 : static_cast<std::size_t>(sym - 1);
          delta = samplers[idx].sample(rng);
        } else {
          delta = tent_deltas[static_cast<std::size_t>(stage - 1)];
        }
        TreeNode node;
        node.parent = static_cast<std::int64_t>(p);
        node.symbol = sym;
        node.stage = stage;
        node.diameter = sys.ratio(sym) * (parent.diameter + delta);
        node.noise_term = sys.ratio(sym) * (parent.noise_term + delta);
        node.collapsed = node.diameter <= 0.0;
        tree.nodes.push_back(node);
        canonical.push_back(node_id);
      }
    }
    level_begin = level_end;
    level_end = tree.nodes.size();
  }
  return tree;
}

// Per-stage collapse-frequency estimates from independent paths.
struct EmpiricalRow {
  int stage = 0;
  double estimate = 0.0;
  double stderr_ = 0.0;
  std::uint64_t trials = 0;
};

struct EmpiricalDistribution {
  std::vector<EmpiricalRow> rows;  // stages 1..horizon
  std::uint64_t trials = 0;
  int horizon = 0;
  std::vector<std::uint64_t> counts;     // terminations at each stage
  std::vector<std::uint64_t> survivors;  // paths alive entering each stage
};

// Monte Carlo estimator of the per-stage collapse distribution. Each path
// owns the generator stream keyed by its index, and chunk results are merged
// as exact integer counts, so the table is bit-identical for a fixed seed no
// matter how many workers run.
inline EmpiricalDistribution monte_carlo_distribution(
    const SystemDescriptor& sys, const NoiseModel& noise, const AddressPolicy& policy,
    std::uint64_t trials, int horizon, std::uint64_t seed, int threads = 0) {
  if (trials < 1) throw BadParameters("trials must be at least 1");
  if (horizon < 1) throw BadParameters("horizon must be at least 1");

  const int workers = worker_count(threads);
  const auto stages = static_cast<std::size_t>(horizon);
  std::vector<std::vector<std::uint64_t>> chunk_counts(
      static_cast<std::size_t>(workers) + 1, std::vector<std::uint64_t>(stages + 1, 0));

  const detail::NoiseContext context(noise);
  const bool stop_on_merge = context.merge_directed;
  parallel_chunks(trials, workers, [&](std::uint64_t begin, std::uint64_t end, int chunk) {
    auto& counts = chunk_counts[static_cast<std::size_t>(chunk)];
    for (std::uint64_t path = begin; path < end; ++path) {
      SplitMix64 rng(seed, path);
      detail::DeltaSource delta_of(context, rng);
      double diameter = 1.0;
      double noise_term = 0.0;
      double product = 1.0;
      for (int stage = 1; stage <= horizon; ++stage) {
        const int symbol = policy.symbol_at(stage, sys.symbol_count(), rng);
        const double ratio = sys.ratio(symbol);
        const double delta = delta_of(symbol);
        diameter = ratio * (diameter + delta);
        noise_term = ratio * (noise_term + delta);
        product *= ratio;
        const bool truncated =
            stop_on_merge ? noise_term >= product : diameter <= 0.0;
        if (truncated) {
          ++counts[static_cast<std::size_t>(stage)];
          break;
        }
      }
    }
  });

  EmpiricalDistribution out;
  out.trials = trials;
  out.horizon = horizon;
  out.counts.assign(stages + 1, 0);
  for (const auto& counts : chunk_counts) {
    for (std::size_t s = 0; s <= stages; ++s) out.counts[s] += counts[s];
  }
  out.survivors.assign(stages + 1, 0);
  std::uint64_t alive = trials;
  for (std::size_t s = 1; s <= stages; ++s) {
    out.survivors[s] = alive;  // paths entering stage s
    alive -= out.counts[s];
  }
  const double n = static_cast<double>(trials);
  for (int stage = 1; stage <= horizon; ++stage) {
    const double c = static_cast<double>(out.counts[static_cast<std::size_t>(stage)]);
    EmpiricalRow row;
    row.stage = stage;
    row.estimate = c / n;
    row.stderr_ = std::sqrt(row.estimate * (1.0 - row.estimate) / n);
    row.trials = trials;
    out.rows.push_back(row);
  }
  return out;
}

// Checks the geometric noise-term envelope |N| <= xi*dmax/(1-xi) along a
// trace. `slack` absorbs floating rounding when the margin has decayed away.
inline bool noise_bound_check(std::span<const PathState> trace, const SystemDescriptor& sys,
                              const TriValuedNoise& noise, double slack = 0.0) {
  const double bound = sys.xi_max * noise.delta_max / (1.0 - sys.xi_max) + slack;
  for (const PathState& state : trace) {
    if (std::abs(state.noise_term) > bound) return false;
  }
  return true;
}

}  // namespace nfl
