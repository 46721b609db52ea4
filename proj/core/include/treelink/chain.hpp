#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

#include "treelink/bsm.hpp"
#include "treelink/oracle.hpp"
#include "treelink/tree_code.hpp"

namespace treelink {

/// One repeater-chain experiment: n equidistant repeaters between the end
/// users, minor nodes halfway between neighbors, m parallel link attempts per
/// repeater pair, biclique inner qubits encoded in inner_tree.
struct ChainConfig {
  double length_km = 0.0;
  int repeaters = 1;      // n
  int multiplexing = 1;   // m
  BranchingVector inner_tree;
  std::optional<BranchingVector> link_tree;
  double eta_gen = 1.0;
  double alpha_db_per_km = 0.2;
  double fusion_success = 0.5;
  BsmStrategy strategy = BsmStrategy::kPhysical;
  AdaptiveVariant variant = AdaptiveVariant::kAsPrinted;
};

struct RatePoint {
  double length_km = 0.0;
  int repeaters = 0;
  double rate = 0.0;  // ebits per optical mode
  std::optional<ChainConfig> config;
};

/// Loss model of one chain configuration. Repeater-held qubits wait one full
/// segment's worth of classical signalling; link-tree qubits split between
/// the travelling level-1 photons and the waiting deeper levels.
struct LinkLossModel {
  double epsilon_repeater = 0.0;  // loss of every repeater-held qubit
  double eta_link_level1 = 0.0;   // survival of a link photon at the minor node
  LossProfile inner_profile;
  std::optional<LossProfile> link_profile;
};

double transmissivity(double length_km, double alpha_db_per_km);

/// Direct-transmission benchmark -log2(1 - eta). Throws std::domain_error at
/// length 0 where the expression diverges.
double repeaterless_rate(double length_km, double alpha_db_per_km);

LinkLossModel link_loss_model(const ChainConfig& config);

/// p = eta_gen^2 * eta^{1/(n+1)} * p_f for the original (physical link) protocol.
double physical_link_success(const ChainConfig& config);

struct OracleSettings {
  std::int64_t samples = 100'000;
  std::uint64_t seed = 0x74726565ULL;
  /// Static/dynamic link probabilities use exact enumeration when the lazy
  /// walk stays within this many leaves, Monte Carlo otherwise.
  std::int64_t exact_state_limit = 250'000;
};

/// Memo for static/dynamic link-BSM success probabilities, keyed by
/// (strategy, link tree, profile, p_f, sampling settings). Thread-safe.
class LinkBsmCache {
 public:
  double probability(BsmStrategy strategy, const BranchingVector& link_tree,
                     const LossProfile& profile, double fusion_success,
                     const OracleSettings& settings);

 private:
  using Key = std::tuple<int, std::vector<int>, std::vector<double>, double, std::int64_t,
                         std::uint64_t, std::int64_t>;
  std::mutex mutex_;
  std::map<Key, double> values_;
};

/// Success probability of one link BSM under the config's strategy and the
/// loss model above.
double link_bsm_probability(const ChainConfig& config, const OracleSettings& settings = {},
                            LinkBsmCache* cache = nullptr);

/// Rate formula with an externally supplied link success probability:
/// P_XL^{2n} P_ZL^{2(m-1)n} [1-(1-P)^m]^{n+1} / (m * modes-per-link).
double rate_from_link_prob(const ChainConfig& config, double link_success);

double rate(const ChainConfig& config, const OracleSettings& settings = {},
            LinkBsmCache* cache = nullptr);

/// Per-length maximum of rate over the candidate repeater counts; ties go to
/// the smaller count. Returned points are sorted by length.
std::vector<RatePoint> envelope(const ChainConfig& base, std::span<const double> lengths_km,
                                std::span<const int> repeater_counts,
                                const OracleSettings& settings = {},
                                LinkBsmCache* cache = nullptr);

struct ExponentFit {
  double exponent_per_km = 0.0;  // s in R = exp(intercept) * exp(-s L)
  double intercept = 0.0;
  std::int64_t points_used = 0;
};

/// Least-squares fit of ln(rate) = intercept - s * L over points with
/// positive rate. Throws std::invalid_argument with fewer than two such points.
ExponentFit fit_exponent(std::span<const RatePoint> points);

}  // namespace treelink
