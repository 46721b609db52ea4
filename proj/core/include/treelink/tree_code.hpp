#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace treelink {

/// Shape of a regular tree code: branches[k] children per level-k qubit.
/// Level 0 is the (virtual) root consumed during encoding; the encoded block
/// holds the levels 1..depth qubits only.
class BranchingVector {
 public:
  explicit BranchingVector(std::vector<int> branches);

  int depth() const { return static_cast<int>(branches_.size()); }

  /// b_k; zero for every k >= depth, matching the recursion boundary b_l = 0.
  int branch(int level) const;

  /// Number of qubits in the encoded block (root excluded).
  std::int64_t num_qubits() const;

  /// Qubits on one level, 1 <= level <= depth.
  std::int64_t level_size(int level) const;

  const std::vector<int>& branches() const { return branches_; }

  std::string to_string() const;  // e.g. "[3,2]"

  friend bool operator==(const BranchingVector&, const BranchingVector&) = default;
  friend auto operator<=>(const BranchingVector&, const BranchingVector&) = default;

 private:
  std::vector<int> branches_;
};

/// Per-level loss probabilities for the physical qubits of one tree,
/// indexed by level 1..depth.
class LossProfile {
 public:
  explicit LossProfile(std::vector<double> per_level);

  static LossProfile uniform(double epsilon, int depth);

  int depth() const { return static_cast<int>(per_level_.size()); }

  double loss(int level) const;  // epsilon_k, valid for 1 <= level <= depth
  double survival(int level) const { return 1.0 - loss(level); }

  const std::vector<double>& levels() const { return per_level_; }

  friend bool operator==(const LossProfile&, const LossProfile&) = default;
  friend auto operator<=>(const LossProfile&, const LossProfile&) = default;

 private:
  std::vector<double> per_level_;
};

/// Success probability xi_k of an indirect-Z measurement on a level-k qubit,
/// 0 <= k <= depth. xi_depth is exactly 0; k = 0 gives the logical-X path.
double indirect_z_prob(const BranchingVector& shape, const LossProfile& profile, int level);

/// P_{Z,k} = 1 - eps_k + eps_k * xi_k for 1 <= k <= depth.
double z_prob(const BranchingVector& shape, const LossProfile& profile, int level);

/// Logical Z success probability P_{Z,1}^{b_0}.
double logical_z_prob(const BranchingVector& shape, const LossProfile& profile);

/// Logical X success probability xi_0.
double logical_x_prob(const BranchingVector& shape, const LossProfile& profile);

}  // namespace treelink
