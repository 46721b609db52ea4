#include "treelink/bsm.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace treelink {

std::string_view to_string(BsmStrategy strategy) {
  switch (strategy) {
    case BsmStrategy::kPhysical: return "physical";
    case BsmStrategy::kAdaptive: return "adaptive";
    case BsmStrategy::kStatic: return "static";
    case BsmStrategy::kDynamic: return "dynamic";
  }
  throw std::logic_error("unknown strategy");
}

std::string_view to_string(AdaptiveVariant variant) {
  switch (variant) {
    case AdaptiveVariant::kAsPrinted: return "as-printed";
    case AdaptiveVariant::kSymmetrized: return "symmetrized";
  }
  throw std::logic_error("unknown variant");
}

namespace {

void validate(const BranchingVector& shape, const LossProfile& profile, double fusion_success) {
  if (shape.depth() != profile.depth()) {
    throw std::invalid_argument("loss profile depth must match link tree depth");
  }
  if (!(fusion_success >= 0.0 && fusion_success <= 1.0)) {
    throw std::invalid_argument("fusion success probability must lie in [0,1]");
  }
}

// Exact integer binomial with an overflow guard; b_0 stays small in practice
// but the guard keeps pathological inputs honest.
double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  if (k > n - k) k = n - k;
  std::uint64_t result = 1;
  for (int i = 1; i <= k; ++i) {
    const std::uint64_t numer = static_cast<std::uint64_t>(n - k + i);
    if (result > std::numeric_limits<std::uint64_t>::max() / numer) {
      throw std::overflow_error("binomial coefficient overflow");
    }
    result = result * numer / static_cast<std::uint64_t>(i);
  }
  return static_cast<double>(result);
}

int charged_sides(AdaptiveVariant variant) {
  return variant == AdaptiveVariant::kSymmetrized ? 2 : 1;
}

}  // namespace

double x_pair_prob(const BranchingVector& link_shape, const LossProfile& profile,
                   double fusion_success, AdaptiveVariant variant) {
  validate(link_shape, profile, fusion_success);
  const double eta1 = profile.survival(1);
  const int b1 = link_shape.branch(1);
  double child_term = 1.0;
  if (b1 > 0) {
    child_term = std::pow(z_prob(link_shape, profile, 2),
                          static_cast<double>(charged_sides(variant) * b1));
  }
  return eta1 * eta1 * fusion_success * child_term;
}

double adaptive_bsm_prob(const BranchingVector& link_shape, const LossProfile& profile,
                         double fusion_success, AdaptiveVariant variant) {
  validate(link_shape, profile, fusion_success);
  const double eta1 = profile.survival(1);
  const double eta1_sq = eta1 * eta1;
  const double xi1 = indirect_z_prob(link_shape, profile, 1);
  const double pz1 = z_prob(link_shape, profile, 1);
  const double pair = x_pair_prob(link_shape, profile, fusion_success, variant);
  const int b0 = link_shape.branch(0);
  const int sides = charged_sides(variant);

  double total = 0.0;
  for (int i = 0; i < b0; ++i) {
    double history = 0.0;
    for (int j = 0; j <= i; ++j) {
      // j earlier fusions lost (both sides recovered indirectly), i-j failed.
      double term = binomial(i, j);
      term *= std::pow(1.0 - eta1_sq, static_cast<double>(j));
      term *= std::pow(eta1_sq * (1.0 - fusion_success), static_cast<double>(i - j));
      term *= std::pow(xi1, static_cast<double>(2 * j));
      history += term;
    }
    total += history * pair * std::pow(pz1, static_cast<double>(sides * (b0 - i - 1)));
  }
  return total;
}

std::int64_t link_modes(BsmStrategy strategy, const std::optional<BranchingVector>& link_shape) {
  if (strategy == BsmStrategy::kPhysical) {
    return 2;
  }
  if (!link_shape.has_value()) {
    throw std::domain_error("encoded BSM strategies require a link tree");
  }
  if (strategy == BsmStrategy::kAdaptive) {
    return 2 * static_cast<std::int64_t>(link_shape->branch(0));
  }
  return 2 * link_shape->num_qubits();
}

}  // namespace treelink
