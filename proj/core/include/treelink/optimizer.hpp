#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "treelink/chain.hpp"

namespace treelink {

struct SearchBounds {
  int max_depth = 3;
  int max_branch = 16;
  std::int64_t qubit_budget = 0;
  std::int64_t min_qubits = 1;
  std::vector<int> n_set;
  std::vector<int> m_set;
};

/// All regular trees with depth <= max_depth, entries in [1, max_branch] and
/// min_qubits <= N_b <= qubit_budget, in lexicographic order.
std::vector<BranchingVector> enumerate_trees(const SearchBounds& bounds);

/// Photons per repeater graph state. Roots are consumed by the encoding and
/// excluded; a physical link qubit counts as one photon.
std::int64_t rgs_size(BsmStrategy strategy, int multiplexing, const BranchingVector& inner_tree,
                      const std::optional<BranchingVector>& link_tree);

/// Maximize logical-BSM success at one loss value. With link_wait_profile the
/// level-1 loss is epsilon and deeper levels take 1-(1-epsilon)^2, the profile
/// of link trees whose deeper levels wait for fusion outcomes.
struct BsmProbAt {
  double epsilon = 0.0;
  bool link_wait_profile = false;
};

/// Maximize the chain rate at one distance (best repeater count from n_set).
struct RateAt {
  double length_km = 0.0;
};

/// Minimize the fitted decay exponent of the rate envelope over the given
/// lengths; the score is -s so the optimizer still maximizes.
struct EnvelopeExponent {
  std::vector<double> lengths_km;
};

using OptimizeObjective = std::variant<BsmProbAt, RateAt, EnvelopeExponent>;

struct OptimizerParams {
  double fusion_success = 0.5;
  double eta_gen = 1.0;
  double alpha_db_per_km = 0.2;
  AdaptiveVariant variant = AdaptiveVariant::kAsPrinted;
  OracleSettings oracle = {};
};

struct OptimizeResult {
  BranchingVector tree;  // BSM objectives: the scanned tree; rate objectives: the inner tree
  std::optional<BranchingVector> link_tree;
  int multiplexing = 1;
  int repeaters = 0;  // argmax n for RateAt, 0 otherwise
  double score = 0.0;
  std::int64_t total_qubits = 0;  // N_b for BSM objectives, rgs_size for rate objectives
};

/// Exhaustive scan of enumerate_trees (x m_set x n_set for rate objectives).
/// Ties break toward fewer total qubits, then lexicographically smaller
/// configuration. Throws std::invalid_argument naming the violated bound when
/// the feasible set is empty.
OptimizeResult optimize(const OptimizeObjective& objective, const SearchBounds& bounds,
                        BsmStrategy strategy, const OptimizerParams& params);

}  // namespace treelink
