#include "treelink/oracle.hpp"

#include <cmath>
#include <cstring>
#include <future>
#include <sstream>
#include <vector>

namespace treelink {

EnumerationTooLargeError::EnumerationTooLargeError(std::int64_t explored, std::int64_t limit)
    : std::runtime_error([&] {
        std::ostringstream out;
        out << "enumeration too large: explored " << explored
            << " outcome states, limit " << limit;
        return out.str();
      }()),
      explored_(explored),
      limit_(limit) {}

namespace {

// Flat indexing of one tree side. Levels run 1..depth; qubit (k, i) has
// children (k+1, i*b_k + j). The root is virtual and never stored.
struct TreeIndex {
  explicit TreeIndex(const BranchingVector& shape) {
    depth = shape.depth();
    branch.assign(static_cast<std::size_t>(depth) + 1, 0);
    for (int k = 0; k < depth; ++k) branch[static_cast<std::size_t>(k)] = shape.branch(k);
    offset.assign(static_cast<std::size_t>(depth) + 2, 0);
    std::int64_t layer = 1;
    for (int k = 1; k <= depth; ++k) {
      layer *= branch[static_cast<std::size_t>(k - 1)];
      offset[static_cast<std::size_t>(k) + 1] = offset[static_cast<std::size_t>(k)] + layer;
    }
    total = offset[static_cast<std::size_t>(depth) + 1];
    level.assign(static_cast<std::size_t>(total), 0);
    for (int k = 1; k <= depth; ++k) {
      for (std::int64_t q = offset[static_cast<std::size_t>(k)];
           q < offset[static_cast<std::size_t>(k) + 1]; ++q) {
        level[static_cast<std::size_t>(q)] = static_cast<std::int8_t>(k);
      }
    }
  }

  std::int64_t id(int lvl, std::int64_t idx) const {
    return offset[static_cast<std::size_t>(lvl)] + idx;
  }

  int depth;
  std::vector<int> branch;           // branch[k] = b_k, 0 at k == depth
  std::vector<std::int64_t> offset;  // offset[k] = first id of level k
  std::vector<std::int8_t> level;    // level of each qubit id
  std::int64_t total;                // N_b per side
};

// --- strategy evaluators, shared by sampling and enumeration -------------
//
// A Source answers two queries against one shared outcome sample:
//   pair_outcome(level, idx): fusion on the positionally matched pair
//   survives(side, level, idx): single-qubit measurement availability
// Fused qubits are never singly measured and vice versa.

template <class Source>
bool z_recoverable(const TreeIndex& t, Source& src, int side, int lvl, std::int64_t idx);

// The indirect path alone: one surviving child measured in X, that child's
// children recovered in Z. This is what remains available after the qubit
// itself was consumed or lost.
template <class Source>
bool indirect_z(const TreeIndex& t, Source& src, int side, int lvl, std::int64_t idx) {
  const int nchild = t.branch[static_cast<std::size_t>(lvl)];
  const std::int64_t child_base = idx * nchild;
  for (int c = 0; c < nchild; ++c) {
    const std::int64_t child = child_base + c;
    if (!src.survives(side, lvl + 1, child)) continue;
    const int ngrand = t.branch[static_cast<std::size_t>(lvl) + 1];
    const std::int64_t grand_base = child * ngrand;
    bool all_ok = true;
    for (int g = 0; g < ngrand && all_ok; ++g) {
      all_ok = z_recoverable(t, src, side, lvl + 2, grand_base + g);
    }
    if (all_ok) return true;
  }
  return false;
}

template <class Source>
bool z_recoverable(const TreeIndex& t, Source& src, int side, int lvl, std::int64_t idx) {
  if (src.survives(side, lvl, idx)) return true;
  return indirect_z(t, src, side, lvl, idx);
}

// Static: every pair is fused. A lost pair recovers ZZ from a successful
// child fusion plus ZZ-recovery of that child's children.
template <class Source>
bool zz_recoverable_static(const TreeIndex& t, Source& src, int lvl, std::int64_t idx) {
  if (src.pair_outcome(lvl, idx) != FusionOutcome::kLoss) return true;
  const int nchild = t.branch[static_cast<std::size_t>(lvl)];
  const std::int64_t child_base = idx * nchild;
  for (int c = 0; c < nchild; ++c) {
    const std::int64_t child = child_base + c;
    if (src.pair_outcome(lvl + 1, child) != FusionOutcome::kSuccess) continue;
    const int ngrand = t.branch[static_cast<std::size_t>(lvl) + 1];
    const std::int64_t grand_base = child * ngrand;
    bool all_ok = true;
    for (int g = 0; g < ngrand && all_ok; ++g) {
      all_ok = zz_recoverable_static(t, src, lvl + 2, grand_base + g);
    }
    if (all_ok) return true;
  }
  return false;
}

template <class Source>
bool eval_static(const TreeIndex& t, Source& src) {
  const int b0 = t.branch[0];
  for (int v = 0; v < b0; ++v) {
    if (src.pair_outcome(1, v) != FusionOutcome::kSuccess) continue;
    bool ok = true;
    const int nchild = t.branch[1];
    for (int c = 0; c < nchild && ok; ++c) {
      ok = zz_recoverable_static(t, src, 2, static_cast<std::int64_t>(v) * nchild + c);
    }
    for (int u = 0; u < b0 && ok; ++u) {
      if (u != v) ok = zz_recoverable_static(t, src, 1, u);
    }
    if (ok) return true;
  }
  return false;
}

// Dynamic: children are fused only below a success, so a lost pair falls
// back to independent single-qubit indirect-Z on both sides.
template <class Source>
bool zz_recoverable_dynamic(const TreeIndex& t, Source& src, int lvl, std::int64_t idx) {
  if (src.pair_outcome(lvl, idx) != FusionOutcome::kLoss) return true;
  return indirect_z(t, src, 0, lvl, idx) && indirect_z(t, src, 1, lvl, idx);
}

template <class Source>
bool eval_dynamic(const TreeIndex& t, Source& src) {
  const int b0 = t.branch[0];
  for (int v = 0; v < b0; ++v) {
    if (src.pair_outcome(1, v) != FusionOutcome::kSuccess) continue;
    bool ok = true;
    const int nchild = t.branch[1];
    for (int c = 0; c < nchild && ok; ++c) {
      ok = zz_recoverable_dynamic(t, src, 2, static_cast<std::int64_t>(v) * nchild + c);
    }
    for (int u = 0; u < b0 && ok; ++u) {
      if (u != v) ok = zz_recoverable_dynamic(t, src, 1, u);
    }
    if (ok) return true;
  }
  return false;
}

// Adaptive: fuse level-1 pairs in order. Loss demands indirect-Z on both
// sides; failure already yields ZZ; the first success triggers Z
// measurements on the fused qubits' children and the unfused level-1 qubits
// (on both trees in the symmetrized reading, on one in the printed one).
template <class Source>
bool eval_adaptive(const TreeIndex& t, Source& src, AdaptiveVariant variant) {
  const int b0 = t.branch[0];
  const int sides = variant == AdaptiveVariant::kSymmetrized ? 2 : 1;
  for (int i = 0; i < b0; ++i) {
    const FusionOutcome outcome = src.pair_outcome(1, i);
    if (outcome == FusionOutcome::kLoss) {
      if (!indirect_z(t, src, 0, 1, i)) return false;
      if (!indirect_z(t, src, 1, 1, i)) return false;
      continue;
    }
    if (outcome == FusionOutcome::kFailure) continue;
    const int nchild = t.branch[1];
    for (int side = 0; side < sides; ++side) {
      for (int c = 0; c < nchild; ++c) {
        if (!z_recoverable(t, src, side, 2, static_cast<std::int64_t>(i) * nchild + c)) {
          return false;
        }
      }
      for (int u = i + 1; u < b0; ++u) {
        if (!z_recoverable(t, src, side, 1, u)) return false;
      }
    }
    return true;
  }
  return false;
}

template <class Source>
bool eval_strategy(BsmStrategy strategy, const TreeIndex& t, Source& src,
                   AdaptiveVariant variant) {
  switch (strategy) {
    case BsmStrategy::kPhysical:
      return src.pair_outcome(1, 0) == FusionOutcome::kSuccess;
    case BsmStrategy::kAdaptive:
      return eval_adaptive(t, src, variant);
    case BsmStrategy::kStatic:
      return eval_static(t, src);
    case BsmStrategy::kDynamic:
      return eval_dynamic(t, src);
  }
  throw std::logic_error("unknown strategy");
}

// --- Monte Carlo source ----------------------------------------------------

class SampledSource {
 public:
  SampledSource(const TreeIndex& t, const LossProfile& profile, double fusion_success)
      : tree_(t),
        fusion_success_(fusion_success),
        survival_prob_(static_cast<std::size_t>(t.depth) + 1, 0.0),
        survived_(static_cast<std::size_t>(2 * t.total), 0),
        outcome_(static_cast<std::size_t>(t.total), -1) {
    for (int k = 1; k <= t.depth; ++k) {
      survival_prob_[static_cast<std::size_t>(k)] = profile.survival(k);
    }
  }

  // One loss draw per qubit, in fixed (side, id) order; coins are drawn
  // lazily in the order fusions are consumed.
  void reset(SplitMix64& rng) {
    rng_ = &rng;
    for (int side = 0; side < 2; ++side) {
      std::uint8_t* row = survived_.data() + side * tree_.total;
      for (std::int64_t q = 0; q < tree_.total; ++q) {
        row[q] = rng.bernoulli(survival_prob_[static_cast<std::size_t>(
                     tree_.level[static_cast<std::size_t>(q)])])
                     ? 1
                     : 0;
      }
    }
    std::memset(outcome_.data(), 0xFF, outcome_.size());
  }

  bool survives(int side, int lvl, std::int64_t idx) const {
    return survived_[static_cast<std::size_t>(side * tree_.total + tree_.id(lvl, idx))] != 0;
  }

  FusionOutcome pair_outcome(int lvl, std::int64_t idx) {
    const std::int64_t q = tree_.id(lvl, idx);
    std::int8_t& slot = outcome_[static_cast<std::size_t>(q)];
    if (slot >= 0) return static_cast<FusionOutcome>(slot);
    FusionOutcome result;
    if (survived_[static_cast<std::size_t>(q)] == 0 ||
        survived_[static_cast<std::size_t>(tree_.total + q)] == 0) {
      result = FusionOutcome::kLoss;
    } else {
      result = rng_->bernoulli(fusion_success_) ? FusionOutcome::kSuccess
                                                : FusionOutcome::kFailure;
    }
    slot = static_cast<std::int8_t>(result);
    return result;
  }

 private:
  const TreeIndex& tree_;
  double fusion_success_;
  SplitMix64* rng_ = nullptr;
  std::vector<double> survival_prob_;
  std::vector<std::uint8_t> survived_;
  std::vector<std::int8_t> outcome_;
};

// --- exact enumeration source ----------------------------------------------
//
// Depth-first walk over the strategy's decision tree. Each run replays the
// recorded choice trail; the first query past the trail opens a new choice
// at its first value. After a leaf, the odometer advances the deepest
// incrementable choice and truncates everything after it. Queries reach a
// variable at most at first read (re-reads hit the memo), so the weights of
// all leaves partition unity.

class EnumSource {
 public:
  EnumSource(const TreeIndex& t, const LossProfile& profile, double fusion_success)
      : tree_(t),
        pair_state_(static_cast<std::size_t>(t.total), -1),
        surv_state_(static_cast<std::size_t>(2 * t.total), -1) {
    pair_prob_.resize(static_cast<std::size_t>(t.depth) + 1);
    surv_prob_.resize(static_cast<std::size_t>(t.depth) + 1, 0.0);
    for (int k = 1; k <= t.depth; ++k) {
      const double eta = profile.survival(k);
      const double both = eta * eta;
      pair_prob_[static_cast<std::size_t>(k)] = {both * fusion_success,
                                                 both * (1.0 - fusion_success), 1.0 - both};
      surv_prob_[static_cast<std::size_t>(k)] = eta;
    }
  }

  void begin_run() {
    for (std::int64_t q : touched_pairs_) pair_state_[static_cast<std::size_t>(q)] = -1;
    for (std::int64_t s : touched_surv_) surv_state_[static_cast<std::size_t>(s)] = -1;
    touched_pairs_.clear();
    touched_surv_.clear();
    cursor_ = 0;
  }

  bool replay_consumed() const { return cursor_ == trail_.size(); }

  // Next leaf: bump the deepest choice that still has values left.
  bool advance() {
    std::size_t keep = trail_.size();
    while (keep > 0 && trail_[keep - 1].value + 1 >= trail_[keep - 1].num_values) --keep;
    if (keep == 0) return false;
    ++trail_[keep - 1].value;
    trail_.resize(keep);
    return true;
  }

  double leaf_weight() const {
    double w = 1.0;
    for (const Choice& c : trail_) {
      const std::size_t lvl = static_cast<std::size_t>(
          tree_.level[static_cast<std::size_t>(c.var % tree_.total)]);
      if (c.var < tree_.total) {
        w *= pair_prob_[lvl][static_cast<std::size_t>(c.value)];
      } else {
        w *= c.value == 0 ? surv_prob_[lvl] : 1.0 - surv_prob_[lvl];
      }
    }
    return w;
  }

  FusionOutcome pair_outcome(int lvl, std::int64_t idx) {
    const std::int64_t q = tree_.id(lvl, idx);
    if (surv_state_[static_cast<std::size_t>(q)] >= 0 ||
        surv_state_[static_cast<std::size_t>(tree_.total + q)] >= 0) {
      throw std::logic_error("fusion requested on a singly measured qubit");
    }
    std::int8_t& slot = pair_state_[static_cast<std::size_t>(q)];
    if (slot >= 0) return static_cast<FusionOutcome>(slot);
    slot = static_cast<std::int8_t>(choose(q, 3));
    touched_pairs_.push_back(q);
    return static_cast<FusionOutcome>(slot);
  }

  bool survives(int side, int lvl, std::int64_t idx) {
    const std::int64_t q = tree_.id(lvl, idx);
    if (pair_state_[static_cast<std::size_t>(q)] >= 0) {
      throw std::logic_error("single measurement requested on a fused qubit");
    }
    std::int8_t& slot = surv_state_[static_cast<std::size_t>(side * tree_.total + q)];
    if (slot < 0) {
      slot = static_cast<std::int8_t>(choose(tree_.total * (1 + side) + q, 2));
      touched_surv_.push_back(side * tree_.total + q);
    }
    return slot == 0;
  }

 private:
  struct Choice {
    std::int64_t var;
    std::int8_t value;
    std::int8_t num_values;
  };

  int choose(std::int64_t var, int num_values) {
    if (cursor_ < trail_.size()) {
      const Choice& c = trail_[cursor_];
      if (c.var != var) throw std::logic_error("non-deterministic enumeration replay");
      ++cursor_;
      return c.value;
    }
    trail_.push_back(Choice{var, 0, static_cast<std::int8_t>(num_values)});
    ++cursor_;
    return 0;
  }

  const TreeIndex& tree_;
  std::vector<std::array<double, 3>> pair_prob_;  // per level: success/failure/loss
  std::vector<double> surv_prob_;                 // per level: survival
  std::vector<Choice> trail_;
  std::size_t cursor_ = 0;
  std::vector<std::int8_t> pair_state_;
  std::vector<std::int8_t> surv_state_;
  std::vector<std::int64_t> touched_pairs_;
  std::vector<std::int64_t> touched_surv_;
};

struct PhysicalReduction {
  BranchingVector shape;
  LossProfile profile;
};

// The physical strategy fuses one bare pair whose loss is the profile's
// level-1 entry; the tree shape is irrelevant.
PhysicalReduction reduce_physical(const LossProfile& profile) {
  return PhysicalReduction{BranchingVector({1}), LossProfile({profile.loss(1)})};
}

void validate_inputs(const BranchingVector& shape, const LossProfile& profile,
                     double fusion_success) {
  if (shape.depth() != profile.depth()) {
    throw std::invalid_argument("loss profile depth must match tree depth");
  }
  if (!(fusion_success >= 0.0 && fusion_success <= 1.0)) {
    throw std::invalid_argument("fusion success probability must lie in [0,1]");
  }
}

}  // namespace

bool simulate_bsm(BsmStrategy strategy, const BranchingVector& shape, const LossProfile& profile,
                  double fusion_success, SplitMix64& rng, AdaptiveVariant variant) {
  validate_inputs(shape, profile, fusion_success);
  if (strategy == BsmStrategy::kPhysical) {
    const PhysicalReduction reduced = reduce_physical(profile);
    const TreeIndex t(reduced.shape);
    SampledSource src(t, reduced.profile, fusion_success);
    src.reset(rng);
    return eval_strategy(strategy, t, src, variant);
  }
  const TreeIndex t(shape);
  SampledSource src(t, profile, fusion_success);
  src.reset(rng);
  return eval_strategy(strategy, t, src, variant);
}

Estimate estimate_bsm(BsmStrategy strategy, const BranchingVector& shape,
                      const LossProfile& profile, double fusion_success, std::int64_t samples,
                      std::uint64_t seed, AdaptiveVariant variant, int workers) {
  validate_inputs(shape, profile, fusion_success);
  if (samples < 1) throw std::invalid_argument("sample count must be >= 1");
  if (workers < 1) workers = 1;

  const bool physical = strategy == BsmStrategy::kPhysical;
  const PhysicalReduction reduced =
      physical ? reduce_physical(profile) : PhysicalReduction{shape, profile};
  const TreeIndex t(reduced.shape);

  auto count_range = [&](std::int64_t begin, std::int64_t end) {
    SampledSource src(t, reduced.profile, fusion_success);
    std::int64_t hits = 0;
    for (std::int64_t i = begin; i < end; ++i) {
      SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
      src.reset(rng);
      if (eval_strategy(strategy, t, src, variant)) ++hits;
    }
    return hits;
  };

  std::int64_t hits = 0;
  if (workers == 1) {
    hits = count_range(0, samples);
  } else {
    const std::int64_t chunk = (samples + workers - 1) / workers;
    std::vector<std::future<std::int64_t>> parts;
    for (std::int64_t begin = 0; begin < samples; begin += chunk) {
      const std::int64_t end = std::min(begin + chunk, samples);
      parts.push_back(std::async(std::launch::async, count_range, begin, end));
    }
    for (auto& part : parts) hits += part.get();
  }

  const double mean = static_cast<double>(hits) / static_cast<double>(samples);
  return Estimate{
      .mean = mean,
      .std_error = std::sqrt(mean * (1.0 - mean) / static_cast<double>(samples)),
      .samples = samples,
      .seed = seed,
  };
}

double exact_bsm_prob(BsmStrategy strategy, const BranchingVector& shape,
                      const LossProfile& profile, double fusion_success, AdaptiveVariant variant,
                      std::int64_t max_states) {
  validate_inputs(shape, profile, fusion_success);
  if (max_states < 1) throw std::invalid_argument("enumeration limit must be >= 1");

  const bool physical = strategy == BsmStrategy::kPhysical;
  const PhysicalReduction reduced =
      physical ? reduce_physical(profile) : PhysicalReduction{shape, profile};
  const TreeIndex t(reduced.shape);

  EnumSource src(t, reduced.profile, fusion_success);
  double success = 0.0;
  double total = 0.0;
  std::int64_t leaves = 0;
  for (;;) {
    src.begin_run();
    const bool ok = eval_strategy(strategy, t, src, variant);
    if (!src.replay_consumed()) throw std::logic_error("enumeration replay under-consumed");
    const double w = src.leaf_weight();
    total += w;
    if (ok) success += w;
    if (++leaves > max_states) throw EnumerationTooLargeError(leaves, max_states);
    if (!src.advance()) break;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::logic_error("enumeration weights do not sum to unity");
  }
  return success;
}

}  // namespace treelink
