#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "treelink/tree_code.hpp"

namespace treelink {

/// How the link Bell measurement is scheduled.
///   kPhysical: bare link photons, one fusion per link (original protocol).
///   kAdaptive: fuse level-1 pairs one at a time, single-qubit fallbacks.
///   kStatic:   fuse every pair of the two trees at once.
///   kDynamic:  fuse a pair's children only after the pair's fusion succeeded.
enum class BsmStrategy { kPhysical, kAdaptive, kStatic, kDynamic };

/// The closed-form adaptive success probability exists in two readings that
/// differ in which tree is charged for the success-time Z measurements.
/// kAsPrinted charges one tree (exponents b_1 and b_0-i-1); kSymmetrized
/// charges both (exponents doubled). The enumeration oracle adjudicates
/// kSymmetrized as the one matching the measurement sequence.
enum class AdaptiveVariant { kAsPrinted, kSymmetrized };

std::string_view to_string(BsmStrategy strategy);
std::string_view to_string(AdaptiveVariant variant);

/// Probability that one fusion attempt plus the Z measurements on the fused
/// qubits' children succeeds: eta_1^2 * p_f * P_{Z,2}^{b_1} (kAsPrinted) or
/// with the exponent 2*b_1 (kSymmetrized).
double x_pair_prob(const BranchingVector& link_shape, const LossProfile& profile,
                   double fusion_success, AdaptiveVariant variant);

/// Full adaptive logical-BSM success probability: sum over the index of the
/// first successful fusion, with binomially weighted loss/failure histories.
double adaptive_bsm_prob(const BranchingVector& link_shape, const LossProfile& profile,
                         double fusion_success, AdaptiveVariant variant);

/// Optical modes consumed by one link BSM: 2 (physical), 2*b_0 (adaptive,
/// only level-1 qubits travel), 2*N_b (static/dynamic, the whole tree travels).
std::int64_t link_modes(BsmStrategy strategy, const std::optional<BranchingVector>& link_shape);

}  // namespace treelink
