// Built with FUNNEL_COUNT_RAW_COMPARISONS, so every Priority comparison also
// bumps a raw counter that does not go through OpCounters.

#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "funnel/funnel_queue.hpp"
#include "funnel/instrumentation.hpp"
#include "funnel/workload.hpp"

using namespace funnel;
using Queue = FunnelQueue<std::string>;

namespace {

// Replays a workload and renders every visible output.
std::vector<std::string> trace(int alpha, OpCounters* sink, KeyDist keys) {
  Queue q(alpha, 10000, {}, sink);
  WorkloadGenerator gen(WorkloadSpec::of(WorkloadKind::mixed, 6000, 123, keys));
  std::vector<std::string> out;
  for (int i = 0; i < 6000; ++i) {
    const Op op = gen.next();
    if (op.kind == OpKind::insert) {
      const auto id = q.insert(op.key, std::to_string(i));
      gen.on_inserted(id, op.key);
      out.push_back("id " + std::to_string(id));
    } else if (op.kind == OpKind::extract_max) {
      const auto x = q.extract_max();
      gen.on_removed(x.id);
      out.push_back("x " + std::to_string(x.id) + " " + std::to_string(x.key) + " " + x.payload);
    } else {
      const auto removed = apply_op(q, gen, op);
      if (removed) out.push_back("r " + std::to_string(*removed));
    }
    if (!q.empty()) {
      const auto m = q.max_item();
      out.push_back("m " + std::to_string(m.id) + " " + std::to_string(m.key));
    }
  }
  while (!q.empty()) out.push_back("d " + std::to_string(q.extract_max().id));
  return out;
}

}  // namespace

TEST(Record, Accumulates) {
  OpCounters c;
  c.record(Tally::key_comparison, 1, 1);
  c.record(Tally::key_comparison, 1, 1);
  EXPECT_EQ(c.snapshot().level(1).tallies[Tally::key_comparison], 2u);
  EXPECT_EQ(c.snapshot().totals[Tally::key_comparison], 2u);
}

TEST(Record, DisabledSinkStaysZero) {
  OpCounters c(false);
  c.record(Tally::grow_call, 2, 5);
  Queue q(2, 1000, {}, &c);
  for (Key k = 0; k < 500; ++k) q.insert(k);
  while (!q.empty()) q.extract_max();
  const auto r = c.snapshot();
  for (auto v : r.totals.counts) EXPECT_EQ(v, 0u);
  for (const auto& op : r.ops) EXPECT_EQ(op.invocations, 0u);
}

TEST(Record, OneInsertIsOneInvocation) {
  OpCounters c;
  Queue q(2, 10, {}, &c);
  q.insert(5);
  EXPECT_EQ(c.snapshot().op(OpKind::insert).invocations, 1u);
}

TEST(Snapshot, EmptyRunIsAllZero) {
  OpCounters c;
  const auto r = c.snapshot();
  for (auto v : r.totals.counts) EXPECT_EQ(v, 0u);
  for (const auto& op : r.ops) {
    EXPECT_EQ(op.invocations, 0u);
    EXPECT_EQ(op.mean_comparisons(), 0.0);
    EXPECT_EQ(op.beta_hat(), 0.0);
  }
  EXPECT_EQ(r.beta_hat_level1(), 0.0);
}

TEST(Snapshot, CountsInvocationsAndIsACopy) {
  OpCounters c;
  Queue q(1, 5000, {}, &c);
  for (Key k = 0; k < 3000; ++k) q.insert(k * 7 % 1001);
  const auto before = c.snapshot();
  EXPECT_EQ(before.op(OpKind::insert).invocations, 3000u);
  q.insert(1);
  EXPECT_EQ(before.op(OpKind::insert).invocations, 3000u);
  EXPECT_EQ(c.snapshot().op(OpKind::insert).invocations, 3001u);
}

TEST(Snapshot, CountersAreMonotone) {
  OpCounters c;
  Queue q(2, 5000, {}, &c);
  WorkloadGenerator gen(WorkloadSpec::of(WorkloadKind::mixed, 3000, 9));
  auto prev = c.snapshot().totals;
  for (int i = 0; i < 3000; ++i) {
    apply_op(q, gen, gen.next());
    const auto now = c.snapshot().totals;
    for (std::size_t t = 0; t < kTallies; ++t) ASSERT_GE(now.counts[t], prev.counts[t]);
    prev = now;
  }
}

TEST(Snapshot, LevelOneGrowFrequency) {
  OpCounters c;
  Queue q(1, 1 << 15, {}, &c);
  Rng rng(14);
  for (int i = 0; i < (1 << 14); ++i) q.insert(static_cast<Key>(rng.next() >> 1));
  const auto r = c.snapshot();
  const auto k = q.root().active_heaps();
  EXPECT_LE(r.beta_hat_level1(), 2.0 / expected_heap_size(1, k));
  EXPECT_DOUBLE_EQ(r.beta_hat_level1(), r.level(1).beta_hat());
}

TEST(Snapshot, MaxComparisonsPerInvocation) {
  OpCounters c;
  Queue q(1, 100, {}, &c);
  q.insert(1);
  q.insert(2);
  const auto r = c.snapshot().op(OpKind::insert);
  EXPECT_GE(r.max_comparisons, 1u);
  EXPECT_LE(r.max_comparisons, r.tallies[Tally::key_comparison]);
}

TEST(Transparency, OutputsIdenticalWithCountersOnOrOff) {
  for (int alpha = 1; alpha <= 3; ++alpha) {
    for (auto keys : {KeyDist::uniform64, KeyDist::ascending, KeyDist::clustered}) {
      OpCounters on;
      OpCounters off(false);
      const auto a = trace(alpha, nullptr, keys);
      EXPECT_EQ(trace(alpha, &on, keys), a);
      EXPECT_EQ(trace(alpha, &off, keys), a);
    }
  }
}

TEST(Completeness, EveryComparisonIsRecorded) {
  for (int alpha = 1; alpha <= 3; ++alpha) {
    OpCounters c;
    Queue q(alpha, 10000, {}, &c);
    WorkloadGenerator gen(WorkloadSpec::of(WorkloadKind::mixed, 8000, 31 + alpha));
    detail::raw_comparisons = 0;
    for (int i = 0; i < 8000; ++i) apply_op(q, gen, gen.next());
    while (!q.empty()) q.extract_max();
    EXPECT_GT(detail::raw_comparisons, 0u);
    EXPECT_EQ(c.snapshot().totals[Tally::key_comparison], detail::raw_comparisons);
  }
}

TEST(Completeness, OpTalliesSumToTotals) {
  OpCounters c;
  Queue q(2, 10000, {}, &c);
  c.reset();  // construction links the first heaps outside any operation
  WorkloadGenerator gen(WorkloadSpec::of(WorkloadKind::mixed, 5000, 2));
  for (int i = 0; i < 5000; ++i) apply_op(q, gen, gen.next());
  const auto r = c.snapshot();
  for (std::size_t t = 0; t < kTallies; ++t) {
    std::uint64_t sum = 0;
    for (const auto& op : r.ops) sum += op.tallies.counts[t];
    std::uint64_t by_level = 0;
    for (const auto& l : r.levels) by_level += l.tallies.counts[t];
    EXPECT_EQ(sum, r.totals.counts[t]) << t;
    EXPECT_EQ(by_level, r.totals.counts[t]) << t;
  }
}

TEST(Reset, ClearsEverything) {
  OpCounters c;
  Queue q(2, 100, {}, &c);
  q.insert(1);
  c.reset();
  const auto r = c.snapshot();
  EXPECT_EQ(r.op(OpKind::insert).invocations, 0u);
  EXPECT_EQ(r.totals[Tally::key_comparison], 0u);
}
