#include "treelink/tree_code.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace treelink {

BranchingVector::BranchingVector(std::vector<int> branches) : branches_(std::move(branches)) {
  if (branches_.empty()) {
    throw std::invalid_argument("branching vector must have at least one level");
  }
  for (int b : branches_) {
    if (b < 1) {
      throw std::invalid_argument("branching vector entries must be >= 1");
    }
  }
}

int BranchingVector::branch(int level) const {
  if (level < 0) {
    throw std::domain_error("branch level must be non-negative");
  }
  if (level >= depth()) {
    return 0;
  }
  return branches_[static_cast<std::size_t>(level)];
}

std::int64_t BranchingVector::num_qubits() const {
  std::int64_t total = 0;
  std::int64_t layer = 1;
  for (int b : branches_) {
    layer *= b;
    total += layer;
  }
  return total;
}

std::int64_t BranchingVector::level_size(int level) const {
  if (level < 1 || level > depth()) {
    throw std::domain_error("level out of range for level_size");
  }
  std::int64_t layer = 1;
  for (int k = 0; k < level; ++k) {
    layer *= branches_[static_cast<std::size_t>(k)];
  }
  return layer;
}

std::string BranchingVector::to_string() const {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < branches_.size(); ++i) {
    if (i > 0) out << ',';
    out << branches_[i];
  }
  out << ']';
  return out.str();
}

LossProfile::LossProfile(std::vector<double> per_level) : per_level_(std::move(per_level)) {
  if (per_level_.empty()) {
    throw std::invalid_argument("loss profile must have at least one level");
  }
  for (double eps : per_level_) {
    if (!(eps >= 0.0 && eps <= 1.0)) {
      throw std::invalid_argument("loss probabilities must lie in [0,1]");
    }
  }
}

LossProfile LossProfile::uniform(double epsilon, int depth) {
  if (depth < 1) {
    throw std::invalid_argument("profile depth must be >= 1");
  }
  return LossProfile(std::vector<double>(static_cast<std::size_t>(depth), epsilon));
}

double LossProfile::loss(int level) const {
  if (level < 1 || level > depth()) {
    throw std::domain_error("loss level out of range");
  }
  return per_level_[static_cast<std::size_t>(level - 1)];
}

namespace {

void require_matching(const BranchingVector& shape, const LossProfile& profile) {
  if (shape.depth() != profile.depth()) {
    throw std::invalid_argument("loss profile depth must match tree depth");
  }
}

// xi_k for k = depth..0, evaluated bottom-up. The inner power is taken only
// when b_{k+1} > 0, so epsilon indices beyond the profile are never touched.
std::vector<double> indirect_z_table(const BranchingVector& shape, const LossProfile& profile) {
  const int l = shape.depth();
  std::vector<double> xi(static_cast<std::size_t>(l) + 1, 0.0);
  for (int k = l - 1; k >= 0; --k) {
    double inner = 1.0;
    const int child_branch = shape.branch(k + 1);
    if (child_branch > 0) {
      const double eps2 = profile.loss(k + 2);
      inner = std::pow(1.0 - eps2 + eps2 * xi[static_cast<std::size_t>(k) + 2],
                       static_cast<double>(child_branch));
    }
    const double eps1 = profile.loss(k + 1);
    const double attempt = (1.0 - eps1) * inner;
    xi[static_cast<std::size_t>(k)] =
        1.0 - std::pow(1.0 - attempt, static_cast<double>(shape.branch(k)));
  }
  return xi;
}

}  // namespace

double indirect_z_prob(const BranchingVector& shape, const LossProfile& profile, int level) {
  require_matching(shape, profile);
  if (level < 0 || level > shape.depth()) {
    throw std::domain_error("indirect-Z level out of range");
  }
  if (level == shape.depth()) {
    return 0.0;
  }
  return indirect_z_table(shape, profile)[static_cast<std::size_t>(level)];
}

double z_prob(const BranchingVector& shape, const LossProfile& profile, int level) {
  require_matching(shape, profile);
  if (level < 1 || level > shape.depth()) {
    throw std::domain_error("Z-measurement level out of range");
  }
  const double eps = profile.loss(level);
  const double xi = level == shape.depth()
                        ? 0.0
                        : indirect_z_table(shape, profile)[static_cast<std::size_t>(level)];
  return 1.0 - eps + eps * xi;
}

double logical_z_prob(const BranchingVector& shape, const LossProfile& profile) {
  return std::pow(z_prob(shape, profile, 1), static_cast<double>(shape.branch(0)));
}

double logical_x_prob(const BranchingVector& shape, const LossProfile& profile) {
  return indirect_z_prob(shape, profile, 0);
}

}  // namespace treelink
