#include "treelink/chain.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace treelink {

namespace {

constexpr double kLn10Over10 = 0.23025850929940457;  // dB/km -> 1/km

void validate_config(const ChainConfig& cfg) {
  if (cfg.length_km < 0.0) throw std::invalid_argument("chain length must be >= 0");
  if (cfg.repeaters < 1) throw std::invalid_argument("repeater count must be >= 1");
  if (cfg.multiplexing < 1) throw std::invalid_argument("multiplexing must be >= 1");
  if (!(cfg.eta_gen > 0.0 && cfg.eta_gen <= 1.0)) {
    throw std::invalid_argument("eta_gen must lie in (0,1]");
  }
  if (!(cfg.alpha_db_per_km > 0.0)) throw std::invalid_argument("alpha must be > 0 dB/km");
  if (!(cfg.fusion_success >= 0.0 && cfg.fusion_success <= 1.0)) {
    throw std::invalid_argument("fusion success probability must lie in [0,1]");
  }
  const bool encoded = cfg.strategy != BsmStrategy::kPhysical;
  if (encoded != cfg.link_tree.has_value()) {
    throw std::invalid_argument("link tree is required exactly when the strategy is encoded");
  }
}

double segment_survival(const ChainConfig& cfg) {
  return std::exp(-cfg.alpha_db_per_km * kLn10Over10 * cfg.length_km /
                  static_cast<double>(cfg.repeaters + 1));
}

double half_segment_survival(const ChainConfig& cfg) {
  return std::exp(-cfg.alpha_db_per_km * kLn10Over10 * cfg.length_km /
                  static_cast<double>(2 * (cfg.repeaters + 1)));
}

}  // namespace

double transmissivity(double length_km, double alpha_db_per_km) {
  if (length_km < 0.0) throw std::domain_error("length must be >= 0");
  if (!(alpha_db_per_km > 0.0)) throw std::invalid_argument("alpha must be > 0 dB/km");
  return std::exp(-alpha_db_per_km * kLn10Over10 * length_km);
}

double repeaterless_rate(double length_km, double alpha_db_per_km) {
  if (length_km <= 0.0) {
    throw std::domain_error("repeaterless rate diverges at length 0; use a positive length");
  }
  const double eta = transmissivity(length_km, alpha_db_per_km);
  // -log2(1 - eta), via log1p so tiny eta does not round to zero.
  return -std::log1p(-eta) / std::numbers::ln2_v<double>;
}

LinkLossModel link_loss_model(const ChainConfig& cfg) {
  validate_config(cfg);
  const double seg = segment_survival(cfg);
  const double half = half_segment_survival(cfg);
  const double eps_rep = 1.0 - cfg.eta_gen * seg;
  const double eta1 = cfg.eta_gen * half;

  LinkLossModel model{
      .epsilon_repeater = eps_rep,
      .eta_link_level1 = eta1,
      .inner_profile = LossProfile::uniform(eps_rep, cfg.inner_tree.depth()),
      .link_profile = std::nullopt,
  };
  if (cfg.strategy == BsmStrategy::kAdaptive) {
    // Level-1 photons travel to the minor node; deeper levels wait at the
    // repeater for the fusion outcomes and take the repeater loss.
    std::vector<double> levels(static_cast<std::size_t>(cfg.link_tree->depth()), eps_rep);
    levels[0] = 1.0 - eta1;
    model.link_profile = LossProfile(std::move(levels));
  } else if (cfg.strategy != BsmStrategy::kPhysical) {
    // Static/dynamic send the whole link tree to the minor node.
    model.link_profile = LossProfile::uniform(1.0 - eta1, cfg.link_tree->depth());
  }
  return model;
}

double physical_link_success(const ChainConfig& cfg) {
  validate_config(cfg);
  if (cfg.strategy != BsmStrategy::kPhysical) {
    throw std::domain_error("physical_link_success requires the physical strategy");
  }
  return cfg.eta_gen * cfg.eta_gen * segment_survival(cfg) * cfg.fusion_success;
}

double LinkBsmCache::probability(BsmStrategy strategy, const BranchingVector& link_tree,
                                 const LossProfile& profile, double fusion_success,
                                 const OracleSettings& settings) {
  Key key{static_cast<int>(strategy), link_tree.branches(),      profile.levels(),
          fusion_success,             settings.samples,          settings.seed,
          settings.exact_state_limit};
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = values_.find(key);
    if (it != values_.end()) return it->second;
  }
  double value;
  try {
    value = exact_bsm_prob(strategy, link_tree, profile, fusion_success,
                           AdaptiveVariant::kSymmetrized, settings.exact_state_limit);
  } catch (const EnumerationTooLargeError&) {
    value = estimate_bsm(strategy, link_tree, profile, fusion_success, settings.samples,
                         settings.seed)
                .mean;
  }
  std::lock_guard<std::mutex> lock(mutex_);
  values_.emplace(key, value);
  return value;
}

double link_bsm_probability(const ChainConfig& cfg, const OracleSettings& settings,
                            LinkBsmCache* cache) {
  validate_config(cfg);
  switch (cfg.strategy) {
    case BsmStrategy::kPhysical:
      return physical_link_success(cfg);
    case BsmStrategy::kAdaptive: {
      const LinkLossModel model = link_loss_model(cfg);
      return adaptive_bsm_prob(*cfg.link_tree, *model.link_profile, cfg.fusion_success,
                               cfg.variant);
    }
    case BsmStrategy::kStatic:
    case BsmStrategy::kDynamic: {
      const LinkLossModel model = link_loss_model(cfg);
      if (cache != nullptr) {
        return cache->probability(cfg.strategy, *cfg.link_tree, *model.link_profile,
                                  cfg.fusion_success, settings);
      }
      LinkBsmCache local;
      return local.probability(cfg.strategy, *cfg.link_tree, *model.link_profile,
                               cfg.fusion_success, settings);
    }
  }
  throw std::logic_error("unknown strategy");
}

double rate_from_link_prob(const ChainConfig& cfg, double link_success) {
  validate_config(cfg);
  if (!(link_success >= 0.0 && link_success <= 1.0)) {
    throw std::invalid_argument("link success probability must lie in [0,1]");
  }
  const LinkLossModel model = link_loss_model(cfg);
  const double px = logical_x_prob(cfg.inner_tree, model.inner_profile);
  const double pz = logical_z_prob(cfg.inner_tree, model.inner_profile);
  const double n = static_cast<double>(cfg.repeaters);
  const double m = static_cast<double>(cfg.multiplexing);
  // 1 - (1 - P)^m, stable for small P.
  const double multiplexed = -std::expm1(m * std::log1p(-link_success));
  if (px <= 0.0 || pz <= 0.0 || multiplexed <= 0.0) return 0.0;

  const double modes =
      m * static_cast<double>(link_modes(cfg.strategy, cfg.link_tree));
  const double log_rate = 2.0 * n * std::log(px) + 2.0 * (m - 1.0) * n * std::log(pz) +
                          (n + 1.0) * std::log(multiplexed) - std::log(modes);
  return std::exp(log_rate);
}

double rate(const ChainConfig& cfg, const OracleSettings& settings, LinkBsmCache* cache) {
  return rate_from_link_prob(cfg, link_bsm_probability(cfg, settings, cache));
}

std::vector<RatePoint> envelope(const ChainConfig& base, std::span<const double> lengths_km,
                                std::span<const int> repeater_counts,
                                const OracleSettings& settings, LinkBsmCache* cache) {
  if (lengths_km.empty()) throw std::invalid_argument("envelope needs a non-empty length grid");
  if (repeater_counts.empty()) {
    throw std::invalid_argument("envelope needs a non-empty repeater set");
  }
  std::vector<double> lengths(lengths_km.begin(), lengths_km.end());
  std::sort(lengths.begin(), lengths.end());
  std::vector<int> counts(repeater_counts.begin(), repeater_counts.end());
  std::sort(counts.begin(), counts.end());

  LinkBsmCache local;
  if (cache == nullptr) cache = &local;

  std::vector<RatePoint> points;
  points.reserve(lengths.size());
  for (double length : lengths) {
    RatePoint best{.length_km = length, .repeaters = 0, .rate = -1.0, .config = std::nullopt};
    for (int n : counts) {
      ChainConfig cfg = base;
      cfg.length_km = length;
      cfg.repeaters = n;
      const double r = rate(cfg, settings, cache);
      if (r > best.rate) {
        best.rate = r;
        best.repeaters = n;
        best.config = cfg;
      }
    }
    points.push_back(std::move(best));
  }
  return points;
}

ExponentFit fit_exponent(std::span<const RatePoint> points) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::int64_t used = 0;
  for (const RatePoint& p : points) {
    if (p.rate <= 0.0) continue;
    const double y = std::log(p.rate);
    sx += p.length_km;
    sy += y;
    sxx += p.length_km * p.length_km;
    sxy += p.length_km * y;
    ++used;
  }
  if (used < 2) {
    throw std::invalid_argument("exponent fit needs at least two points with positive rate");
  }
  const double denom = static_cast<double>(used) * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("exponent fit needs distinct lengths");
  const double slope = (static_cast<double>(used) * sxy - sx * sy) / denom;
  return ExponentFit{.exponent_per_km = -slope,
                     .intercept = (sy - slope * sx) / static_cast<double>(used),
                     .points_used = used};
}

}  // namespace treelink
