#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "nfl/errors.hpp"

namespace nfl {

// A self-similar system reduced to what the diameter dynamics can see: the
// contraction ratios. Geometric placement of the pieces is out of scope; the
// open-set condition (disjoint interiors) cannot be checked from ratios
// alone and is the caller's responsibility.
struct SystemDescriptor {
  std::vector<double> ratios;  // xi_j, each strictly inside (0,1)
  double xi_max = 0.0;

  int symbol_count() const { return static_cast<int>(ratios.size()); }
  double ratio(int symbol) const { return ratios[static_cast<std::size_t>(symbol - 1)]; }
};

inline SystemDescriptor validate_system(const std::vector<double>& ratios) {
  if (ratios.size() < 2) {
    throw TooFewMaps("need at least 2 contraction ratios, got " +
                     std::to_string(ratios.size()));
  }
  SystemDescriptor sys;
  sys.ratios = ratios;
  for (std::size_t j = 0; j < ratios.size(); ++j) {
    const double xi = ratios[j];
    if (!(xi > 0.0) || !(xi < 1.0)) {
      throw RatioOutOfRange("ratios[" + std::to_string(j) + "] = " +
                            std::to_string(xi) + " is outside (0,1)");
    }
    if (xi > sys.xi_max) sys.xi_max = xi;
  }
  return sys;
}

// Index string of a generating set: symbols are 1-based, stage = length,
// the empty address is the root.
struct Address {
  std::vector<int> symbols;

  int stage() const { return static_cast<int>(symbols.size()); }
  bool empty() const { return symbols.empty(); }

  // Dot-separated 1-based form, e.g. "1.2.1"; the root prints as "".
  std::string str() const {
    std::string out;
    for (std::size_t i = 0; i < symbols.size(); ++i) {
      if (i) out += '.';
      out += std::to_string(symbols[i]);
    }
    return out;
  }
};

inline Address parse_address(const std::string& text, int symbol_count) {
  Address addr;
  if (text.empty()) return addr;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t dot = text.find('.', pos);
    if (dot == std::string::npos) dot = text.size();
    const std::string part = text.substr(pos, dot - pos);
    if (part.empty()) throw BadParameters("malformed address: " + text);
    int sym = 0;
    for (char c : part) {
      if (c < '0' || c > '9') throw BadParameters("malformed address: " + text);
      sym = sym * 10 + (c - '0');
    }
    if (sym < 1 || sym > symbol_count) {
      throw BadParameters("address symbol " + std::to_string(sym) +
                          " outside 1.." + std::to_string(symbol_count));
    }
    addr.symbols.push_back(sym);
    pos = dot + 1;
    if (dot == text.size()) break;
  }
  return addr;
}

// Product of the ratios along the address; 1 for the root (unit initial
// diameter).
inline double noiseless_diameter(const SystemDescriptor& sys, const Address& address) {
  double product = 1.0;
  for (int sym : address.symbols) {
    if (sym < 1 || sym > sys.symbol_count()) {
      throw BadParameters("address symbol outside 1..K");
    }
    product *= sys.ratio(sym);
  }
  return product;
}

struct TreeNode {
  std::int64_t parent = -1;  // -1 for the root
  int symbol = 0;            // 0 for the root
  int stage = 0;
  double diameter = 1.0;
  double noise_term = 0.0;
  bool collapsed = false;
};

// Address tree stored in breadth-first order. Collapsed nodes carry no
// descendants: collapse prunes exactly its own subtree.
struct AddressTree {
  int symbol_count = 0;
  int depth = 0;
  std::vector<TreeNode> nodes;

  Address address_of(std::int64_t index) const {
    Address addr;
    std::int64_t cur = index;
    while (cur > 0) {
      addr.symbols.push_back(nodes[static_cast<std::size_t>(cur)].symbol);
      cur = nodes[static_cast<std::size_t>(cur)].parent;
    }
    std::reverse(addr.symbols.begin(), addr.symbols.end());
    return addr;
  }
};

struct GeneratingSetRecord {
  Address address;
  double diameter = 0.0;
  bool collapsed = false;
};

inline GeneratingSetRecord record_at(const AddressTree& tree, std::int64_t index) {
  const TreeNode& node = tree.nodes[static_cast<std::size_t>(index)];
  return GeneratingSetRecord{tree.address_of(index), node.diameter, node.collapsed};
}

// Node count of the complete K-ary tree to the given depth, guarded against
// overflow of the configured budget.
inline std::int64_t complete_tree_node_count(int symbol_count, int depth,
                                             std::int64_t budget) {
  std::int64_t total = 0;
  std::int64_t level = 1;
  for (int d = 0; d <= depth; ++d) {
    total += level;
    if (total > budget) {
      throw DepthTooLarge("address tree of depth " + std::to_string(depth) +
                          " exceeds the node budget of " + std::to_string(budget));
    }
    if (d < depth) {
      if (level > budget / symbol_count + 1) {
        throw DepthTooLarge("address tree of depth " + std::to_string(depth) +
                            " exceeds the node budget of " + std::to_string(budget));
      }
      level *= symbol_count;
    }
  }
  return total;
}

inline constexpr std::int64_t kDefaultNodeBudget = std::int64_t(1) << 20;

// Complete K-ary address tree with noiseless diameters.
inline AddressTree enumerate_addresses(const SystemDescriptor& sys, int depth,
                                       std::int64_t node_budget = kDefaultNodeBudget) {
  if (depth < 0) throw BadParameters("tree depth must be nonnegative");
  const std::int64_t total = complete_tree_node_count(sys.symbol_count(), depth, node_budget);

  AddressTree tree;
  tree.symbol_count = sys.symbol_count();
  tree.depth = depth;
  tree.nodes.reserve(static_cast<std::size_t>(total));
  tree.nodes.push_back(TreeNode{});

  std::size_t level_begin = 0;
  std::size_t level_end = 1;
  for (int d = 1; d <= depth; ++d) {
    for (std::size_t p = level_begin; p < level_end; ++p) {
      const double parent_diameter = tree.nodes[p].diameter;
      for (int sym = 1; sym <= sys.symbol_count(); ++sym) {
        TreeNode node;
        node.parent = static_cast<std::int64_t>(p);
        node.symbol = sym;
        node.stage = d;
        node.diameter = parent_diameter * sys.ratio(sym);
        tree.nodes.push_back(node);
      }
    }
    level_begin = level_end;
    level_end = tree.nodes.size();
  }
  return tree;
}

struct IntervalRow {
  Address address;
  double length = 0.0;
};

// One row per surviving leaf of a collapse-annotated tree; lengths are the
// recorded (possibly noisy) diameters. Suited to 1-D Cantor-type presets.
inline std::vector<IntervalRow> emit_intervals(const SystemDescriptor& sys,
                                               const AddressTree& tree) {
  (void)sys;
  std::vector<IntervalRow> rows;
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const TreeNode& node = tree.nodes[i];
    if (node.stage == tree.depth && !node.collapsed) {
      rows.push_back(IntervalRow{tree.address_of(static_cast<std::int64_t>(i)),
                                 node.diameter});
    }
  }
  return rows;
}

// Root of sum_j ratio_j^s = 1. The left side is strictly decreasing in s, so
// bracketed bisection cannot miss. Convergence is judged on the residual.
inline double moran_dimension(const SystemDescriptor& sys, double tol = 1e-12,
                              int max_iterations = 200) {
  if (!(tol > 0.0)) throw BadParameters("moran_dimension tolerance must be positive");
  const auto residual = [&](double s) {
    double sum = 0.0;
    for (double xi : sys.ratios) sum += std::pow(xi, s);
    return sum - 1.0;
  };

  double lo = 0.0;  // residual K-1 > 0
  double hi = std::log(static_cast<double>(sys.symbol_count())) /
                  std::log(1.0 / sys.xi_max) +
              1.0;  // residual < 0: sum <= K * xi_max^s < 1 there
  for (int it = 0; it < max_iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double r = residual(mid);
    if (std::abs(r) <= tol) return mid;
    if (r > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  throw ToleranceNotMet("moran_dimension: residual above " + std::to_string(tol) +
                        " after " + std::to_string(max_iterations) + " bisections");
}

}  // namespace nfl
