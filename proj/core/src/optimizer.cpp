#include "treelink/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace treelink {

namespace {

void validate_bounds(const SearchBounds& bounds) {
  if (bounds.max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
  if (bounds.max_branch < 1) throw std::invalid_argument("max_branch must be >= 1");
  if (bounds.qubit_budget < 1) throw std::invalid_argument("qubit_budget must be >= 1");
  if (bounds.min_qubits < 1) throw std::invalid_argument("min_qubits must be >= 1");
}

void emit_trees(std::vector<int>& prefix, std::int64_t qubits, std::int64_t layer,
                const SearchBounds& bounds, std::vector<BranchingVector>& out) {
  for (int b = 1; b <= bounds.max_branch; ++b) {
    const std::int64_t grown = qubits + layer * b;
    if (grown > bounds.qubit_budget) break;  // entries only grow the count
    prefix.push_back(b);
    if (grown >= bounds.min_qubits) out.emplace_back(prefix);
    if (static_cast<int>(prefix.size()) < bounds.max_depth) {
      emit_trees(prefix, grown, layer * b, bounds, out);
    }
    prefix.pop_back();
  }
}

LossProfile objective_profile(const BsmProbAt& objective, int depth) {
  if (!objective.link_wait_profile) return LossProfile::uniform(objective.epsilon, depth);
  const double waited = 1.0 - (1.0 - objective.epsilon) * (1.0 - objective.epsilon);
  std::vector<double> levels(static_cast<std::size_t>(depth), waited);
  levels[0] = objective.epsilon;
  return LossProfile(levels);
}

struct Candidate {
  double score = -std::numeric_limits<double>::infinity();
  std::int64_t qubits = 0;
  BranchingVector tree;
  std::optional<BranchingVector> link_tree;
  int multiplexing = 1;
  int repeaters = 0;

  bool beats(const Candidate& other) const {
    if (score != other.score) return score > other.score;
    if (qubits != other.qubits) return qubits < other.qubits;
    if (tree != other.tree) return tree < other.tree;
    if (link_tree.has_value() != other.link_tree.has_value() ||
        (link_tree && *link_tree != *other.link_tree)) {
      if (!link_tree) return true;
      if (!other.link_tree) return false;
      return *link_tree < *other.link_tree;
    }
    if (multiplexing != other.multiplexing) return multiplexing < other.multiplexing;
    return repeaters < other.repeaters;
  }
};

double bsm_score(BsmStrategy strategy, const BranchingVector& tree, const LossProfile& profile,
                 const OptimizerParams& params) {
  switch (strategy) {
    case BsmStrategy::kPhysical: {
      const double eta = profile.survival(1);
      return eta * eta * params.fusion_success;
    }
    case BsmStrategy::kAdaptive:
      return adaptive_bsm_prob(tree, profile, params.fusion_success, params.variant);
    case BsmStrategy::kStatic:
    case BsmStrategy::kDynamic:
      try {
        return exact_bsm_prob(strategy, tree, profile, params.fusion_success,
                              AdaptiveVariant::kSymmetrized, params.oracle.exact_state_limit);
      } catch (const EnumerationTooLargeError&) {
        return estimate_bsm(strategy, tree, profile, params.fusion_success,
                            params.oracle.samples, params.oracle.seed)
            .mean;
      }
  }
  throw std::logic_error("unknown strategy");
}

OptimizeResult finish(const Candidate& best, bool feasible, const char* bound_name) {
  if (!feasible) {
    throw std::invalid_argument(std::string("optimize: feasible set is empty; violated bound: ") +
                                bound_name);
  }
  return OptimizeResult{.tree = best.tree,
                        .link_tree = best.link_tree,
                        .multiplexing = best.multiplexing,
                        .repeaters = best.repeaters,
                        .score = best.score,
                        .total_qubits = best.qubits};
}

OptimizeResult optimize_bsm(const BsmProbAt& objective, const SearchBounds& bounds,
                            BsmStrategy strategy, const OptimizerParams& params) {
  const std::vector<BranchingVector> trees = enumerate_trees(bounds);
  if (trees.empty()) {
    throw std::invalid_argument(
        "optimize: no tree satisfies qubit_budget/min_qubits/max_depth/max_branch");
  }
  bool any = false;
  Candidate best;
  for (const BranchingVector& tree : trees) {
    const LossProfile profile = objective_profile(objective, tree.depth());
    Candidate cand{.score = bsm_score(strategy, tree, profile, params),
                   .qubits = tree.num_qubits(),
                   .tree = tree};
    if (!any || cand.beats(best)) {
      best = std::move(cand);
      any = true;
    }
  }
  return finish(best, any, "qubit_budget");
}

ChainConfig make_config(BsmStrategy strategy, const OptimizerParams& params, double length_km,
                        int n, int m, const BranchingVector& inner,
                        const std::optional<BranchingVector>& link) {
  return ChainConfig{.length_km = length_km,
                     .repeaters = n,
                     .multiplexing = m,
                     .inner_tree = inner,
                     .link_tree = link,
                     .eta_gen = params.eta_gen,
                     .alpha_db_per_km = params.alpha_db_per_km,
                     .fusion_success = params.fusion_success,
                     .strategy = strategy,
                     .variant = params.variant};
}

// Best rate at one length over n_set; also reports the argmax n.
std::pair<double, int> best_rate_over_n(const ChainConfig& base, const std::vector<int>& n_set,
                                        const OptimizerParams& params, LinkBsmCache& cache) {
  double best = -1.0;
  int best_n = 0;
  for (int n : n_set) {
    ChainConfig cfg = base;
    cfg.repeaters = n;
    const double r = rate(cfg, params.oracle, &cache);
    if (r > best) {
      best = r;
      best_n = n;
    }
  }
  return {best, best_n};
}

double envelope_score(const ChainConfig& base, const std::vector<double>& lengths,
                      const std::vector<int>& n_set, const OptimizerParams& params,
                      LinkBsmCache& cache) {
  const std::vector<RatePoint> env =
      envelope(base, lengths, n_set, params.oracle, &cache);
  return -fit_exponent(env).exponent_per_km;
}

OptimizeResult optimize_rate(const OptimizeObjective& objective, const SearchBounds& bounds,
                             BsmStrategy strategy, const OptimizerParams& params) {
  if (bounds.m_set.empty()) throw std::invalid_argument("optimize: m_set is empty");
  if (bounds.n_set.empty()) throw std::invalid_argument("optimize: n_set is empty");
  const bool encoded = strategy != BsmStrategy::kPhysical;
  const bool rate_at = std::holds_alternative<RateAt>(objective);
  const double length = rate_at ? std::get<RateAt>(objective).length_km : 0.0;
  const std::vector<double>* lengths =
      rate_at ? nullptr : &std::get<EnvelopeExponent>(objective).lengths_km;
  if (!rate_at && lengths->size() < 2) {
    throw std::invalid_argument("optimize: envelope objective needs at least two lengths");
  }

  SearchBounds tree_bounds = bounds;
  tree_bounds.qubit_budget = bounds.qubit_budget;  // per-tree cap refined below per m
  LinkBsmCache cache;
  bool any = false;
  Candidate best;

  for (int m : bounds.m_set) {
    if (m < 1) throw std::invalid_argument("optimize: m_set entries must be >= 1");
    // Largest inner/link trees that can still fit this multiplexing.
    const std::int64_t per_partition = bounds.qubit_budget / (2 * m);
    const std::int64_t inner_cap = encoded ? per_partition - 1 : per_partition - 1;
    if (inner_cap < 1) continue;
    tree_bounds.qubit_budget = inner_cap;
    tree_bounds.min_qubits = 1;
    const std::vector<BranchingVector> trees = enumerate_trees(tree_bounds);
    for (const BranchingVector& inner : trees) {
      if (!encoded) {
        if (rgs_size(strategy, m, inner, std::nullopt) > bounds.qubit_budget) continue;
        if (inner.num_qubits() < bounds.min_qubits) continue;
        ChainConfig base = make_config(strategy, params, length, bounds.n_set.front(), m, inner,
                                       std::nullopt);
        Candidate cand{.qubits = rgs_size(strategy, m, inner, std::nullopt),
                       .tree = inner,
                       .multiplexing = m};
        if (rate_at) {
          auto [score, n] = best_rate_over_n(base, bounds.n_set, params, cache);
          cand.score = score;
          cand.repeaters = n;
        } else {
          cand.score = envelope_score(base, *lengths, bounds.n_set, params, cache);
        }
        if (!any || cand.beats(best)) {
          best = std::move(cand);
          any = true;
        }
        continue;
      }
      for (const BranchingVector& link : trees) {
        const std::int64_t total = rgs_size(strategy, m, inner, link);
        if (total > bounds.qubit_budget) continue;
        if (inner.num_qubits() + link.num_qubits() < bounds.min_qubits) continue;
        ChainConfig base = make_config(strategy, params, length, bounds.n_set.front(), m, inner,
                                       link);
        Candidate cand{.qubits = total, .tree = inner, .link_tree = link, .multiplexing = m};
        if (rate_at) {
          auto [score, n] = best_rate_over_n(base, bounds.n_set, params, cache);
          cand.score = score;
          cand.repeaters = n;
        } else {
          try {
            cand.score = envelope_score(base, *lengths, bounds.n_set, params, cache);
          } catch (const std::invalid_argument&) {
            continue;  // no positive rates anywhere: not fit-able
          }
        }
        if (!any || cand.beats(best)) {
          best = std::move(cand);
          any = true;
        }
      }
    }
  }
  return finish(best, any, "qubit_budget (no configuration fits any m in m_set)");
}

}  // namespace

std::vector<BranchingVector> enumerate_trees(const SearchBounds& bounds) {
  validate_bounds(bounds);
  std::vector<BranchingVector> out;
  std::vector<int> prefix;
  emit_trees(prefix, 0, 1, bounds, out);
  return out;
}

std::int64_t rgs_size(BsmStrategy strategy, int multiplexing, const BranchingVector& inner_tree,
                      const std::optional<BranchingVector>& link_tree) {
  if (multiplexing < 1) throw std::invalid_argument("multiplexing must be >= 1");
  const std::int64_t m = multiplexing;
  if (strategy == BsmStrategy::kPhysical) {
    if (link_tree.has_value()) {
      throw std::invalid_argument("the physical strategy has bare link qubits, not a link tree");
    }
    return 2 * m * inner_tree.num_qubits() + 2 * m;
  }
  if (!link_tree.has_value()) {
    throw std::invalid_argument("encoded strategies require a link tree");
  }
  return 2 * m * (inner_tree.num_qubits() + link_tree->num_qubits());
}

OptimizeResult optimize(const OptimizeObjective& objective, const SearchBounds& bounds,
                        BsmStrategy strategy, const OptimizerParams& params) {
  validate_bounds(bounds);
  if (std::holds_alternative<BsmProbAt>(objective)) {
    const BsmProbAt& at = std::get<BsmProbAt>(objective);
    if (!(at.epsilon >= 0.0 && at.epsilon <= 1.0)) {
      throw std::invalid_argument("objective epsilon must lie in [0,1]");
    }
    return optimize_bsm(at, bounds, strategy, params);
  }
  return optimize_rate(objective, bounds, strategy, params);
}

}  // namespace treelink
