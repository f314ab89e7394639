#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace funnel {

enum class OpKind : std::uint8_t {
  insert,
  extract_max,
  remove,
  increase_key,
  decrease_key,
  search,
  max_item,
};
inline constexpr std::size_t kOpKinds = 7;

inline constexpr std::string_view to_string(OpKind op) noexcept {
  constexpr std::array<std::string_view, kOpKinds> names = {
      "insert", "extract_max", "remove", "increase_key", "decrease_key", "search", "max_item"};
  return names[static_cast<std::size_t>(op)];
}

/// Things the queue counts. The first four are the primitive steps of the
/// cost model, the rest are structural events.
enum class Tally : std::uint8_t {
  key_comparison,
  item_move,
  hash_probe,
  w0_evaluation,
  grow_call,
  trim_call,
  tunnel_call,
  meta_heap_restore,
  level_insert,  // insert() calls reaching a level queue, nested ones included
};
inline constexpr std::size_t kTallies = 9;

struct TallyRow {
  std::array<std::uint64_t, kTallies> counts{};

  std::uint64_t operator[](Tally t) const noexcept { return counts[static_cast<std::size_t>(t)]; }
  std::uint64_t& operator[](Tally t) noexcept { return counts[static_cast<std::size_t>(t)]; }
};

inline double ratio(std::uint64_t num, std::uint64_t den) noexcept {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

struct OpStats {
  std::uint64_t invocations = 0;
  std::uint64_t max_comparisons = 0;
  TallyRow tallies;

  double mean_comparisons() const noexcept { return ratio(tallies[Tally::key_comparison], invocations); }
  double mean_moves() const noexcept { return ratio(tallies[Tally::item_move], invocations); }
  double mean_hash_probes() const noexcept { return ratio(tallies[Tally::hash_probe], invocations); }
  /// Grow calls per invocation of this operation.
  double beta_hat() const noexcept { return ratio(tallies[Tally::grow_call], invocations); }
};

struct LevelStats {
  TallyRow tallies;
  std::uint64_t tunnel_restores = 0;
  std::uint64_t tunnel_restores_outside_barrier = 0;
  std::size_t max_tunnel_restore_slot = 0;

  /// Measured relative grow frequency at this level: grows per level insert.
  double beta_hat() const noexcept { return ratio(tallies[Tally::grow_call], tallies[Tally::level_insert]); }
};

/// Immutable copy of the counters with derived ratios.
struct CounterReport {
  std::array<OpStats, kOpKinds> ops{};
  std::vector<LevelStats> levels;  // index 0 is level 1
  TallyRow totals;

  const OpStats& op(OpKind k) const { return ops[static_cast<std::size_t>(k)]; }
  const LevelStats& level(int i) const { return levels.at(static_cast<std::size_t>(i - 1)); }
  /// Grow calls at level 1 per insert() invocation of the facade.
  double beta_hat_level1() const noexcept {
    return levels.empty() ? 0.0 : ratio(levels[0].tallies[Tally::grow_call], op(OpKind::insert).invocations);
  }
};

/// Per-queue counter sink. Tallies are attributed to the facade operation that
/// is currently open (see OpScope) and to the level that produced them.
class OpCounters {
 public:
  explicit OpCounters(bool enabled = true) : enabled_(enabled) {}

  bool enabled() const noexcept { return enabled_; }

  void record(Tally t, int level, std::uint64_t amount = 1) {
    if (!enabled_) return;
    auto& lvl = level_row(level);
    lvl.tallies[t] += amount;
    totals_[t] += amount;
    if (current_) ops_[static_cast<std::size_t>(*current_)].tallies[t] += amount;
  }

  /// A meta-heap restore started by tunnel() at `slot`; `barrier` is t_B.
  void record_tunnel_restore(int level, std::size_t slot, std::size_t barrier) {
    if (!enabled_) return;
    auto& lvl = level_row(level);
    ++lvl.tunnel_restores;
    if (slot >= barrier) ++lvl.tunnel_restores_outside_barrier;
    if (slot > lvl.max_tunnel_restore_slot) lvl.max_tunnel_restore_slot = slot;
  }

  void begin(OpKind op) {
    if (!enabled_) return;
    current_ = op;
    comparisons_at_begin_ = totals_[Tally::key_comparison];
    ++ops_[static_cast<std::size_t>(op)].invocations;
  }

  void end() {
    if (!enabled_ || !current_) return;
    auto& row = ops_[static_cast<std::size_t>(*current_)];
    const auto used = totals_[Tally::key_comparison] - comparisons_at_begin_;
    if (used > row.max_comparisons) row.max_comparisons = used;
    current_.reset();
  }

  CounterReport snapshot() const {
    CounterReport r;
    r.ops = ops_;
    r.levels = levels_;
    r.totals = totals_;
    return r;
  }

  void reset() {
    ops_ = {};
    levels_.clear();
    totals_ = {};
    current_.reset();
    comparisons_at_begin_ = 0;
  }

 private:
  LevelStats& level_row(int level) {
    const auto idx = static_cast<std::size_t>(level < 1 ? 0 : level - 1);
    if (idx >= levels_.size()) levels_.resize(idx + 1);
    return levels_[idx];
  }

  bool enabled_;
  std::array<OpStats, kOpKinds> ops_{};
  std::vector<LevelStats> levels_;
  TallyRow totals_;
  std::optional<OpKind> current_;
  std::uint64_t comparisons_at_begin_ = 0;
};

/// Opens a facade operation on a (possibly null) sink for the scope's lifetime.
class OpScope {
 public:
  OpScope(OpCounters* sink, OpKind op) : sink_(sink) {
    if (sink_) sink_->begin(op);
  }
  ~OpScope() {
    if (sink_) sink_->end();
  }
  OpScope(const OpScope&) = delete;
  OpScope& operator=(const OpScope&) = delete;

 private:
  OpCounters* sink_;
};

}  // namespace funnel
