#pragma once

/// \file
/// Load-balancing numerics: the principal branch of the Lambert W function and
/// the level-dependent formulas that map a level's item count to its optimal
/// number of common-heaps.
///
/// With n items on level i, the equilibrium heap size is
///   n_{i-1} = log k_i          (i > 1)
///   n_0     = sqrt(log2 k_1)   (i = 1)
/// and inverting n_i = k_i * n_{i-1} gives
///   k_i = exp(W0(n_i))                   (i > 1, natural log)
///   k_i = exp(W0(n_i * ln 2))            (i > 1, binary log)
///   k_1 = exp(W0(n_1^2 * ln 4) / 2)      (i = 1)

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "funnel/error.hpp"
#include "funnel/instrumentation.hpp"

namespace funnel {

enum class EvalStrategy : std::uint8_t { always_compute, memoized, precomputed_table };

/// Which logarithm the formulas for levels above 1 use. Level 1 is binary in
/// both modes.
enum class LogBase : std::uint8_t {
  natural, // natural log above level 1, so k = exp(W0(n)) is exact
  binary,  // binary log everywhere, k = exp(W0(n ln 2))
};

struct BalancePolicy {
  int level_index = 1;
  EvalStrategy eval_strategy = EvalStrategy::memoized;
  double w0_tolerance = 1e-12;
  LogBase log_base = LogBase::natural;
};

struct BalanceTargets {
  std::uint64_t k_star = 1;
  double expected_heap_size = 1.0;
  double delta_to_grow = 1.0;
};

inline constexpr int kW0MaxIterations = 64;

/// Principal branch W0 for x >= 0, by Halley iteration seeded from ln(1 + x).
/// Stops once |w e^w - x| <= tolerance * max(1, x).
inline double lambert_w0(double x, double tolerance = 1e-12) {
  if (!(x >= 0.0)) throw error(errc::domain, "lambert_w0 needs a nonnegative argument");
  if (std::isinf(x)) return x;
  const double bound = tolerance * std::max(1.0, x);
  double w = std::log1p(x);
  for (int it = 0; it < kW0MaxIterations; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    if (std::abs(f) <= bound) break;
    const double wp1 = w + 1.0;
    const double step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
    double next = w - step;
    if (next < 0.0) next = 0.5 * w;  // damp: W0 is nonnegative on x >= 0
    if (next == w) break;
    w = next;
  }
  return w;
}

inline void check_level(int level) {
  if (level < 1) throw error(errc::domain, "level index must be >= 1");
}

/// Unrounded load-balancing function.
inline double heap_count_real(int level, double n, LogBase base = LogBase::natural, double tolerance = 1e-12) {
  check_level(level);
  if (level == 1) return std::exp(0.5 * lambert_w0(n * n * std::log(4.0), tolerance));
  if (base == LogBase::binary) return std::exp(lambert_w0(n * std::numbers::ln2, tolerance));
  return std::exp(lambert_w0(n, tolerance));
}

/// Optimal number of common-heaps for `n` items on `level`: round to nearest,
/// never below one.
inline std::uint64_t optimal_heap_count(int level, std::uint64_t n, LogBase base = LogBase::natural,
                                        double tolerance = 1e-12) {
  const double k = heap_count_real(level, static_cast<double>(n), base, tolerance);
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(k)));
}

inline std::uint64_t optimal_heap_count(const BalancePolicy& policy, std::uint64_t n) {
  return optimal_heap_count(policy.level_index, n, policy.log_base, policy.w0_tolerance);
}

namespace detail {
inline double level_log(int level, double x, LogBase base) {
  return (level == 1 || base == LogBase::binary) ? std::log2(x) : std::log(x);
}
}  // namespace detail

/// Equilibrium common-heap size for `k` heaps on `level`, clamped to >= 1.
inline double expected_heap_size(int level, std::uint64_t k, LogBase base = LogBase::natural) {
  check_level(level);
  if (k < 1) throw error(errc::domain, "expected_heap_size needs k >= 1");
  const double lg = detail::level_log(level, static_cast<double>(k), base);
  const double size = level == 1 ? std::sqrt(lg) : lg;
  return std::max(1.0, size);
}

/// Approximate number of inserts after which k_star + 1 heaps become optimal.
inline double delta_to_grow(int level, std::uint64_t k_star, LogBase base = LogBase::natural) {
  check_level(level);
  if (k_star < 1) throw error(errc::domain, "delta_to_grow needs k_star >= 1");
  const double lg = detail::level_log(level, static_cast<double>(k_star) + 1.0, base);
  return level == 1 ? std::sqrt(lg) : lg;
}

inline BalanceTargets balance_targets(const BalancePolicy& policy, std::uint64_t n) {
  BalanceTargets t;
  t.k_star = optimal_heap_count(policy, n);
  t.expected_heap_size = expected_heap_size(policy.level_index, t.k_star, policy.log_base);
  t.delta_to_grow = delta_to_grow(policy.level_index, t.k_star, policy.log_base);
  return t;
}

/// Evaluates optimal_heap_count for one level under the configured strategy,
/// capped at the level's common-heap capacity. The memo and the precomputed
/// table cover n in [0, max_items]; larger n are always computed. The memo is
/// filled lazily from const calls, so an instance must not be shared between
/// threads unless it uses always_compute or precomputed_table.
class LoadBalancer {
 public:
  LoadBalancer(BalancePolicy policy, std::uint64_t max_items, std::uint64_t heap_capacity,
               OpCounters* sink = nullptr)
      : policy_(policy), max_items_(max_items), heap_capacity_(heap_capacity), sink_(sink) {
    check_level(policy_.level_index);
    if (!(policy_.w0_tolerance > 0.0)) throw error(errc::configuration, "w0_tolerance must be > 0");
    if (heap_capacity_ < 1) throw error(errc::configuration, "heap capacity must be >= 1");
    if (policy_.eval_strategy != EvalStrategy::always_compute) table_.assign(max_items_ + 1, 0);
    if (policy_.eval_strategy == EvalStrategy::precomputed_table) {
      for (std::uint64_t n = 0; n <= max_items_; ++n) table_[n] = static_cast<std::uint32_t>(compute(n, false));
    }
  }

  const BalancePolicy& policy() const noexcept { return policy_; }
  std::uint64_t heap_capacity() const noexcept { return heap_capacity_; }
  std::uint64_t max_items() const noexcept { return max_items_; }

  std::uint64_t heap_count(std::uint64_t n) const {
    if (n > max_items_ || table_.empty()) return compute(n, true);
    auto& slot = table_[n];
    if (slot == 0) slot = static_cast<std::uint32_t>(compute(n, true));
    return slot;
  }

 private:
  std::uint64_t compute(std::uint64_t n, bool count) const {
    if (count && sink_) sink_->record(Tally::w0_evaluation, policy_.level_index);
    return std::min(optimal_heap_count(policy_, n), heap_capacity_);
  }

  BalancePolicy policy_;
  std::uint64_t max_items_;
  std::uint64_t heap_capacity_;
  OpCounters* sink_;
  mutable std::vector<std::uint32_t> table_;  // 0 marks "not yet computed"
};

}  // namespace funnel
