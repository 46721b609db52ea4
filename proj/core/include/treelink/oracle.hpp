#pragma once

#include <cstdint>
#include <stdexcept>

#include "treelink/bsm.hpp"
#include "treelink/rng.hpp"
#include "treelink/tree_code.hpp"

namespace treelink {

/// Outcome of one linear-optical fusion. Loss if either input photon is
/// missing (no stabilizer measured); otherwise Success (XX and ZZ) with
/// probability p_f and Failure (ZZ only) with 1 - p_f.
enum class FusionOutcome { kSuccess, kFailure, kLoss };

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
};

class EnumerationTooLargeError : public std::runtime_error {
 public:
  EnumerationTooLargeError(std::int64_t explored, std::int64_t limit);
  std::int64_t explored() const { return explored_; }
  std::int64_t limit() const { return limit_; }

 private:
  std::int64_t explored_;
  std::int64_t limit_;
};

inline constexpr std::int64_t kDefaultEnumerationLimit = 10'000'000;

/// One Bernoulli draw of logical-BSM success on two identically encoded
/// trees. Per-qubit loss is sampled once and reused across every fusion and
/// single-qubit measurement touching that qubit. kPhysical ignores the tree
/// shape and fuses a single bare pair with loss profile level 1.
bool simulate_bsm(BsmStrategy strategy, const BranchingVector& shape, const LossProfile& profile,
                  double fusion_success, SplitMix64& rng,
                  AdaptiveVariant variant = AdaptiveVariant::kSymmetrized);

/// Monte Carlo estimate over `samples` independent draws. Each sample uses a
/// stream derived from (seed, sample index), so the result is bit-identical
/// for any worker count.
Estimate estimate_bsm(BsmStrategy strategy, const BranchingVector& shape,
                      const LossProfile& profile, double fusion_success, std::int64_t samples,
                      std::uint64_t seed, AdaptiveVariant variant = AdaptiveVariant::kSymmetrized,
                      int workers = 1);

/// Exact success probability by depth-first enumeration over every reachable
/// assignment of fusion outcomes and qubit losses. Random variables are
/// instantiated lazily, so branches the strategy never looks at do not
/// enlarge the walk. Throws EnumerationTooLargeError once more than
/// `max_states` leaves have been visited.
double exact_bsm_prob(BsmStrategy strategy, const BranchingVector& shape,
                      const LossProfile& profile, double fusion_success,
                      AdaptiveVariant variant = AdaptiveVariant::kSymmetrized,
                      std::int64_t max_states = kDefaultEnumerationLimit);

}  // namespace treelink
