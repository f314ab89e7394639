#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "funnel/numerics.hpp"

using namespace funnel;

namespace {

// Independent root finder: bisection on w*e^w = x in long double.
long double w0_bisect(long double x) {
  long double lo = 0, hi = x < 1 ? 1 : std::log(x) + 1;
  for (int i = 0; i < 200; ++i) {
    const long double mid = (lo + hi) / 2;
    (mid * std::exp(mid) < x ? lo : hi) = mid;
  }
  return (lo + hi) / 2;
}

// Real heap count by solving the system equation k * size(k) = n directly.
long double k_by_bisection(int level, long double n, LogBase base) {
  auto f = [&](long double k) {
    const long double lg = (level == 1 || base == LogBase::binary) ? std::log2(k) : std::log(k);
    return k * (level == 1 ? std::sqrt(lg) : lg);
  };
  long double lo = 1, hi = 2 + n;
  for (int i = 0; i < 200; ++i) {
    const long double mid = (lo + hi) / 2;
    (f(mid) < n ? lo : hi) = mid;
  }
  return (lo + hi) / 2;
}

}  // namespace

TEST(LambertW, ClosedFormPoints) {
  EXPECT_EQ(lambert_w0(0.0), 0.0);
  EXPECT_NEAR(lambert_w0(std::numbers::e), 1.0, 1e-12);
  EXPECT_NEAR(lambert_w0(2 * std::numbers::e * std::numbers::e), 2.0, 1e-12);
}

TEST(LambertW, FrozenReferenceValues) {
  // 40-digit values from an arbitrary-precision evaluator
  EXPECT_NEAR(lambert_w0(1.0), 0.5671432904097838730, 1e-12);
  EXPECT_NEAR(lambert_w0(10.0), 1.7455280027406993831, 1e-12);
  EXPECT_NEAR(lambert_w0(100.0), 3.3856301402900501849, 1e-12);
  EXPECT_NEAR(lambert_w0(1e6), 11.383358086140052622, 1e-11);
  EXPECT_NEAR(lambert_w0(1e9), 17.841725967421469183, 1e-11);
}

TEST(LambertW, MatchesBisection) {
  for (double x : {1e-9, 1e-3, 0.1, 0.5, 1.0, 3.0, 42.0, 1e3, 1e5, 1e8}) {
    EXPECT_NEAR(lambert_w0(x), static_cast<double>(w0_bisect(x)), 1e-10 * std::max(1.0, std::log(x))) << x;
  }
}

TEST(LambertW, ResidualOnLogGrid) {
  constexpr int kPoints = 10000;
  double worst = 0;
  for (int i = 0; i < kPoints; ++i) {
    const double x = i == 0 ? 0.0 : std::pow(10.0, -6.0 + 15.0 * i / (kPoints - 1));
    const double w = lambert_w0(x);
    ASSERT_GE(w, 0.0);
    worst = std::max(worst, std::abs(w * std::exp(w) - x) / std::max(1.0, x));
  }
  EXPECT_LE(worst, 1e-9);
}

TEST(LambertW, LooseToleranceStillConverges) {
  const double w = lambert_w0(1e4, 1e-3);
  EXPECT_LE(std::abs(w * std::exp(w) - 1e4), 1e-3 * 1e4);
}

TEST(LambertW, NegativeInputIsDomainError) {
  try {
    lambert_w0(-1.0);
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::domain);
  }
  EXPECT_THROW(lambert_w0(std::nan("")), error);
}

TEST(OptimalHeapCount, Examples) {
  EXPECT_EQ(optimal_heap_count(2, 0), 1u);
  EXPECT_EQ(optimal_heap_count(2, 15), 7u);
  EXPECT_EQ(optimal_heap_count(1, 1), 1u);
  EXPECT_EQ(optimal_heap_count(1, 0), 1u);
}

TEST(OptimalHeapCount, FifteenMinimisesSystemEquationResidual) {
  std::uint64_t best = 1;
  double best_err = 1e300;
  for (std::uint64_t k = 1; k < 20; ++k) {
    const double err = std::abs(k * std::log(static_cast<double>(k)) - 15.0);
    if (err < best_err) best_err = err, best = k;
  }
  EXPECT_EQ(best, 7u);
  EXPECT_EQ(optimal_heap_count(2, 15), best);
}

TEST(OptimalHeapCount, FrozenReferenceValues) {
  // heap counts rounded from 40-digit evaluations
  EXPECT_EQ(optimal_heap_count(1, 100), 43u);
  EXPECT_EQ(optimal_heap_count(1, 10000), 2946u);
  EXPECT_EQ(optimal_heap_count(1, 1u << 20), 247714u);
  EXPECT_EQ(optimal_heap_count(2, 100), 30u);
  EXPECT_EQ(optimal_heap_count(2, 10000), 1383u);
  EXPECT_EQ(optimal_heap_count(3, 1000000), 87848u);
  EXPECT_EQ(optimal_heap_count(2, 100, LogBase::binary), 22u);
  EXPECT_EQ(optimal_heap_count(2, 10000, LogBase::binary), 1003u);
  EXPECT_EQ(optimal_heap_count(2, 1u << 20, LogBase::binary), 65536u);
}

TEST(OptimalHeapCount, AgreesWithSystemEquationSolver) {
  for (int level = 1; level <= 3; ++level) {
    for (auto base : {LogBase::natural, LogBase::binary}) {
      for (std::uint64_t n : {2u, 5u, 17u, 99u, 1234u, 65537u, 999999u}) {
        const auto k = static_cast<double>(k_by_bisection(level, n, base));
        EXPECT_NEAR(heap_count_real(level, static_cast<double>(n), base), k, 1e-7 * k) << level << " " << n;
      }
    }
  }
}

TEST(OptimalHeapCount, Monotone) {
  for (int level = 1; level <= 3; ++level) {
    for (auto base : {LogBase::natural, LogBase::binary}) {
      std::uint64_t prev = 1;
      for (std::uint64_t n = 0; n <= 100000; ++n) {
        const auto k = optimal_heap_count(level, n, base);
        ASSERT_GE(k, prev) << "level " << level << " n " << n;
        prev = k;
      }
    }
  }
}

TEST(OptimalHeapCount, SystemEquationHoldsWithinOneHeap) {
  for (int level = 1; level <= 3; ++level) {
    for (auto base : {LogBase::natural, LogBase::binary}) {
      for (std::uint64_t n = 4; n <= 200000; n += (n < 2000 ? 1 : 97)) {
        const auto k = optimal_heap_count(level, n, base);
        const double lhs = std::abs(k * expected_heap_size(level, k, base) - static_cast<double>(n));
        ASSERT_LE(lhs, expected_heap_size(level, k + 1, base) + 1) << "level " << level << " n " << n;
      }
    }
  }
}

TEST(OptimalHeapCount, RejectsLevelZero) { EXPECT_THROW(optimal_heap_count(0, 5), error); }

TEST(ExpectedHeapSize, Examples) {
  EXPECT_DOUBLE_EQ(expected_heap_size(1, 16), 2.0);
  EXPECT_DOUBLE_EQ(expected_heap_size(2, 1), 1.0);
  EXPECT_DOUBLE_EQ(expected_heap_size(2, 8, LogBase::binary), 3.0);
  EXPECT_DOUBLE_EQ(expected_heap_size(2, 8, LogBase::natural), std::log(8.0));
  EXPECT_DOUBLE_EQ(expected_heap_size(1, 1), 1.0);
  EXPECT_DOUBLE_EQ(expected_heap_size(1, 2), 1.0);
}

TEST(ExpectedHeapSize, RejectsZeroHeaps) { EXPECT_THROW(expected_heap_size(1, 0), error); }

TEST(DeltaToGrow, Examples) {
  EXPECT_DOUBLE_EQ(delta_to_grow(1, 15), 2.0);
  EXPECT_DOUBLE_EQ(delta_to_grow(2, 7, LogBase::binary), 3.0);
  EXPECT_DOUBLE_EQ(delta_to_grow(1, 1), 1.0);
  EXPECT_DOUBLE_EQ(delta_to_grow(2, 7, LogBase::natural), std::log(8.0));
  EXPECT_THROW(delta_to_grow(1, 0), error);
}

TEST(BalanceTargets, Consistent) {
  BalancePolicy p;
  p.level_index = 1;
  const auto t = balance_targets(p, 10000);
  EXPECT_EQ(t.k_star, 2946u);
  EXPECT_DOUBLE_EQ(t.expected_heap_size, expected_heap_size(1, 2946));
  EXPECT_DOUBLE_EQ(t.delta_to_grow, delta_to_grow(1, 2946));
}

TEST(LoadBalancer, StrategiesAreBitIdentical) {
  for (int level = 1; level <= 3; ++level) {
    BalancePolicy p;
    p.level_index = level;
    p.eval_strategy = EvalStrategy::always_compute;
    LoadBalancer always(p, 5000, 1u << 20);
    p.eval_strategy = EvalStrategy::memoized;
    LoadBalancer memo(p, 5000, 1u << 20);
    p.eval_strategy = EvalStrategy::precomputed_table;
    LoadBalancer table(p, 5000, 1u << 20);
    for (std::uint64_t n = 0; n <= 6000; ++n) {
      const auto k = always.heap_count(n);
      ASSERT_EQ(memo.heap_count(n), k);
      ASSERT_EQ(memo.heap_count(n), k);  // second call served from the memo
      ASSERT_EQ(table.heap_count(n), k);
      ASSERT_EQ(k, optimal_heap_count(p, n));
    }
  }
}

TEST(LoadBalancer, CapsAtHeapCapacity) {
  BalancePolicy p;
  LoadBalancer lb(p, 100000, 10);
  EXPECT_EQ(lb.heap_count(100000), 10u);
  EXPECT_EQ(lb.heap_count(0), 1u);
}

TEST(LoadBalancer, CountsEvaluations) {
  OpCounters sink;
  BalancePolicy p;
  p.eval_strategy = EvalStrategy::memoized;
  LoadBalancer memo(p, 100, 1000, &sink);
  memo.heap_count(50);
  memo.heap_count(50);
  memo.heap_count(50);
  EXPECT_EQ(sink.snapshot().totals[Tally::w0_evaluation], 1u);

  OpCounters sink2;
  p.eval_strategy = EvalStrategy::always_compute;
  LoadBalancer always(p, 100, 1000, &sink2);
  for (int i = 0; i < 3; ++i) always.heap_count(50);
  EXPECT_EQ(sink2.snapshot().totals[Tally::w0_evaluation], 3u);

  OpCounters sink3;
  p.eval_strategy = EvalStrategy::precomputed_table;
  LoadBalancer table(p, 100, 1000, &sink3);
  table.heap_count(50);
  EXPECT_EQ(sink3.snapshot().totals[Tally::w0_evaluation], 0u);
}

TEST(LoadBalancer, RejectsBadConfiguration) {
  BalancePolicy p;
  p.w0_tolerance = 0;
  EXPECT_THROW(LoadBalancer(p, 10, 10), error);
  p = {};
  p.level_index = 0;
  EXPECT_THROW(LoadBalancer(p, 10, 10), error);
  p = {};
  EXPECT_THROW(LoadBalancer(p, 10, 0), error);
}
