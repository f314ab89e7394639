#pragma once

/// \file
/// Seeded workload generation shared by the CLI, the benchmarks and the tests.
///
/// The random source is std::mt19937_64 (the standard 64-bit Mersenne
/// Twister). Bounded draws use the high half of a 128-bit product and unit
/// reals use the top 53 bits, so sequences do not depend on the standard
/// library's distribution classes.

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "funnel/error.hpp"
#include "funnel/instrumentation.hpp"
#include "funnel/item.hpp"

namespace funnel {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound) {
    const auto wide = static_cast<unsigned __int128>(next()) * bound;
    return static_cast<std::uint64_t>(wide >> 64);
  }

  /// Uniform in [0, 1).
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

enum class WorkloadKind : std::uint8_t { insert_only, mixed, dijkstra_like, remove_heavy };
enum class KeyDist : std::uint8_t { uniform64, ascending, descending, clustered };

/// Operation shares; must sum to 1.
struct OpMix {
  double insert = 1.0;
  double extract_max = 0.0;
  double remove = 0.0;
  double increase_key = 0.0;
  double decrease_key = 0.0;
  double search = 0.0;

  double sum() const { return insert + extract_max + remove + increase_key + decrease_key + search; }
};

inline OpMix default_mix(WorkloadKind kind) {
  switch (kind) {
    case WorkloadKind::insert_only: return {1.0, 0, 0, 0, 0, 0};
    case WorkloadKind::mixed: return {0.40, 0.15, 0.10, 0.10, 0.15, 0.10};
    case WorkloadKind::dijkstra_like: return {0.30, 0.20, 0, 0, 0.50, 0};
    case WorkloadKind::remove_heavy: return {0.20, 0.10, 0.60, 0, 0, 0.10};
  }
  return {};
}

struct WorkloadSpec {
  WorkloadKind kind = WorkloadKind::mixed;
  std::size_t op_count = 1000;
  std::uint64_t seed = 1;
  KeyDist keys = KeyDist::uniform64;
  OpMix mix = default_mix(WorkloadKind::mixed);

  static WorkloadSpec of(WorkloadKind kind, std::size_t ops, std::uint64_t seed, KeyDist keys = KeyDist::uniform64) {
    return {kind, ops, seed, keys, default_mix(kind)};
  }

  void validate() const {
    const double s = mix.sum();
    if (s < 1.0 - 1e-9 || s > 1.0 + 1e-9) throw error(errc::configuration, "op mix ratios must sum to 1");
    for (double r : {mix.insert, mix.extract_max, mix.remove, mix.increase_key, mix.decrease_key, mix.search}) {
      if (r < 0.0) throw error(errc::configuration, "op mix ratios must be nonnegative");
    }
  }
};

inline constexpr std::array<std::string_view, 4> kWorkloadNames = {"insert-only", "mixed", "dijkstra-like",
                                                                   "remove-heavy"};
inline constexpr std::array<std::string_view, 4> kKeyDistNames = {"uniform64", "ascending", "descending",
                                                                  "clustered"};

inline std::string_view to_string(WorkloadKind k) { return kWorkloadNames[static_cast<std::size_t>(k)]; }
inline std::string_view to_string(KeyDist k) { return kKeyDistNames[static_cast<std::size_t>(k)]; }

inline WorkloadKind parse_workload(std::string_view s) {
  for (std::size_t i = 0; i < kWorkloadNames.size(); ++i) {
    if (kWorkloadNames[i] == s) return static_cast<WorkloadKind>(i);
  }
  throw error(errc::configuration, "unknown workload '" + std::string(s) + "'");
}

inline KeyDist parse_key_dist(std::string_view s) {
  for (std::size_t i = 0; i < kKeyDistNames.size(); ++i) {
    if (kKeyDistNames[i] == s) return static_cast<KeyDist>(i);
  }
  throw error(errc::configuration, "unknown key distribution '" + std::string(s) + "'");
}

/// Draws fresh keys and key deltas for one distribution.
class KeySource {
 public:
  KeySource(KeyDist dist, Rng& rng) : dist_(dist), rng_(&rng) {}

  Key next() {
    switch (dist_) {
      case KeyDist::uniform64: return static_cast<Key>(rng_->next() >> 2) - (Key{1} << 61);
      case KeyDist::ascending: return counter_++;
      case KeyDist::descending: return -(counter_++);
      case KeyDist::clustered:
        return static_cast<Key>(rng_->below(8)) * (Key{1} << 40) + static_cast<Key>(rng_->below(16));
    }
    return 0;
  }

  /// Positive step for increase / decrease key.
  Key delta() {
    switch (dist_) {
      case KeyDist::uniform64: return 1 + static_cast<Key>(rng_->below(std::uint64_t{1} << 32));
      case KeyDist::clustered: return 1 + static_cast<Key>(rng_->below(4));
      default: return 1 + static_cast<Key>(rng_->below(1024));
    }
  }

 private:
  KeyDist dist_;
  Rng* rng_;
  Key counter_ = 0;
};

struct Op {
  OpKind kind = OpKind::insert;
  ItemId id = 0;  // target for remove / key changes / search
  Key key = 0;    // insert key or new key
};

inline std::string describe(const Op& op) {
  std::string s(to_string(op.kind));
  switch (op.kind) {
    case OpKind::insert: return s + "(key=" + std::to_string(op.key) + ")";
    case OpKind::increase_key:
    case OpKind::decrease_key: return s + "(id=" + std::to_string(op.id) + ", key=" + std::to_string(op.key) + ")";
    case OpKind::remove:
    case OpKind::search: return s + "(id=" + std::to_string(op.id) + ")";
    default: return s + "()";
  }
}

/// Emits a valid operation sequence. It keeps a shadow of the live ids and
/// their keys; callers report what each operation actually did through the
/// on_* hooks (extract_max is the only op whose target the generator cannot
/// know in advance).
class WorkloadGenerator {
 public:
  explicit WorkloadGenerator(const WorkloadSpec& spec) : spec_(spec), rng_(spec.seed), keys_(spec.keys, rng_) {
    spec_.validate();
  }

  std::size_t live() const noexcept { return live_.size(); }

  /// Switches the op mix mid-stream, e.g. after a build phase.
  void set_mix(const OpMix& mix) {
    WorkloadSpec s = spec_;
    s.mix = mix;
    s.validate();
    spec_ = s;
  }

  Op next() {
    const double u = rng_.unit();
    const auto& m = spec_.mix;
    OpKind kind = OpKind::search;
    double acc = m.insert;
    if (u < acc) {
      kind = OpKind::insert;
    } else if (u < (acc += m.extract_max)) {
      kind = OpKind::extract_max;
    } else if (u < (acc += m.remove)) {
      kind = OpKind::remove;
    } else if (u < (acc += m.increase_key)) {
      kind = OpKind::increase_key;
    } else if (u < (acc += m.decrease_key)) {
      kind = OpKind::decrease_key;
    }
    if (kind != OpKind::insert && live_.empty()) kind = OpKind::insert;

    Op op;
    op.kind = kind;
    switch (kind) {
      case OpKind::insert: op.key = keys_.next(); break;
      case OpKind::extract_max: break;
      case OpKind::remove:
      case OpKind::search: op.id = pick(); break;
      case OpKind::increase_key: {
        op.id = pick();
        const Key cur = key_of_.at(op.id);
        const Key d = keys_.delta();
        if (cur > std::numeric_limits<Key>::max() - d) {
          op.kind = OpKind::search;
        } else {
          op.key = cur + d;
        }
        break;
      }
      case OpKind::decrease_key: {
        op.id = pick();
        const Key cur = key_of_.at(op.id);
        const Key d = keys_.delta();
        if (cur < std::numeric_limits<Key>::min() + d) {
          op.kind = OpKind::search;
        } else {
          op.key = cur - d;
        }
        break;
      }
      case OpKind::max_item: break;
    }
    return op;
  }

  void on_inserted(ItemId id, Key key) {
    pos_[id] = live_.size();
    live_.push_back(id);
    key_of_[id] = key;
  }

  void on_removed(ItemId id) {
    const auto it = pos_.find(id);
    if (it == pos_.end()) return;
    const std::size_t p = it->second;
    const ItemId moved = live_.back();
    live_[p] = moved;
    pos_[moved] = p;
    live_.pop_back();
    pos_.erase(id);
    key_of_.erase(id);
  }

  void on_key_changed(ItemId id, Key key) { key_of_[id] = key; }

  Key key_of(ItemId id) const { return key_of_.at(id); }

 private:
  ItemId pick() { return live_[rng_.below(live_.size())]; }

  WorkloadSpec spec_;
  Rng rng_;
  KeySource keys_;
  std::vector<ItemId> live_;
  std::unordered_map<ItemId, std::size_t> pos_;
  std::unordered_map<ItemId, Key> key_of_;
};

/// Applies one generated op to any queue with the common API and reports
/// back to the generator. Returns the extracted or removed id, if any.
template <class Queue>
std::optional<ItemId> apply_op(Queue& q, WorkloadGenerator& gen, const Op& op) {
  switch (op.kind) {
    case OpKind::insert: {
      const auto id = q.insert(op.key);
      gen.on_inserted(id, op.key);
      return std::nullopt;
    }
    case OpKind::extract_max: {
      const auto x = q.extract_max();
      gen.on_removed(x.id);
      return x.id;
    }
    case OpKind::remove: {
      q.remove(op.id);
      gen.on_removed(op.id);
      return op.id;
    }
    case OpKind::increase_key:
      q.increase_key(op.id, op.key);
      gen.on_key_changed(op.id, op.key);
      return std::nullopt;
    case OpKind::decrease_key:
      q.decrease_key(op.id, op.key);
      gen.on_key_changed(op.id, op.key);
      return std::nullopt;
    case OpKind::search:
      q.search(op.id, [](auto&) {});
      return std::nullopt;
    case OpKind::max_item:
      (void)q.max_item();
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace funnel
