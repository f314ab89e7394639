#pragma once

/// \file
/// Addressable max priority queue built as an alpha-level funnel of
/// implicit binary heaps. Ids are assigned here, on the outermost level.
///
///   funnel::FunnelQueue<> q(2, 1 << 20);
///   auto id = q.insert(42, "payload");
///   q.increase_key(id, 50);
///   auto top = q.extract_max();

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "funnel/error.hpp"
#include "funnel/instrumentation.hpp"
#include "funnel/item.hpp"
#include "funnel/level_queue.hpp"
#include "funnel/numerics.hpp"

namespace funnel {

inline constexpr std::size_t kMaxCapacity = std::size_t{1} << 31;
inline constexpr int kMaxAutoAlpha = 3;

/// Level count for a capacity: the smallest alpha whose alpha-fold binary log
/// of the capacity is <= 2, capped at kMaxAutoAlpha.
inline int auto_alpha(std::size_t capacity) {
  double x = static_cast<double>(capacity);
  int alpha = 1;
  x = std::log2(std::max(x, 1.0));
  while (x > 2.0 && alpha < kMaxAutoAlpha) {
    x = std::log2(x);
    ++alpha;
  }
  return alpha;
}

template <class Payload = std::string>
class FunnelQueue {
 public:
  using item_type = Item<Payload>;
  using level_type = LevelQueue<Payload>;

  FunnelQueue(int alpha, std::size_t capacity, QueueConfig config = {}, OpCounters* sink = nullptr)
      : alpha_(alpha), ctx_(std::make_unique<QueueContext>()) {
    if (alpha < 1) throw error(errc::configuration, "alpha must be >= 1");
    if (capacity == 0) throw error(errc::configuration, "capacity must be positive");
    if (capacity > kMaxCapacity) throw error(errc::configuration, "capacity exceeds the addressable range");
    if (config.tunnel_c > 20) throw error(errc::configuration, "tunnel_c too large");
    if (!(config.balance.w0_tolerance > 0.0)) throw error(errc::configuration, "w0_tolerance must be > 0");
    ctx_->config = config;
    ctx_->capacity = capacity;
    ctx_->tunnel_barrier = std::size_t{1} << config.tunnel_c;
    ctx_->sink = sink;
    ctx_->balancers.reserve(static_cast<std::size_t>(alpha));
    for (int level = 1; level <= alpha; ++level) {
      BalancePolicy p = config.balance;
      p.level_index = level;
      const auto heaps = optimal_heap_count(p, capacity) + config.grow_tolerance + 2;
      ctx_->balancers.emplace_back(p, capacity, heaps, sink);
    }
    root_ = std::make_unique<level_type>(alpha, ctx_.get());
  }

  /// Picks alpha from the capacity (see auto_alpha).
  static FunnelQueue with_auto_alpha(std::size_t capacity, QueueConfig config = {}, OpCounters* sink = nullptr) {
    return FunnelQueue(auto_alpha(capacity), capacity, config, sink);
  }

  FunnelQueue(FunnelQueue&&) noexcept = default;
  FunnelQueue& operator=(FunnelQueue&&) noexcept = default;

  int alpha() const noexcept { return alpha_; }
  std::size_t capacity() const noexcept { return ctx_->capacity; }
  std::size_t size() const noexcept { return root_->size(); }
  bool empty() const noexcept { return root_->empty(); }
  const QueueConfig& config() const noexcept { return ctx_->config; }
  std::size_t tunnel_barrier() const noexcept { return ctx_->tunnel_barrier; }
  const level_type& root() const noexcept { return *root_; }
  ItemId next_id() const noexcept { return next_id_; }

  ItemId insert(Key key, Payload payload = {}) {
    OpScope scope(ctx_->sink, OpKind::insert);
    if (root_->size() >= ctx_->capacity) throw error(errc::overflow, "queue is at capacity");
    const ItemId id = next_id_++;
    root_->insert(item_type{id, key, std::move(payload)});
    return id;
  }

  ItemRef max_item() const {
    OpScope scope(ctx_->sink, OpKind::max_item);
    const auto& x = root_->top_item();
    return {x.id, x.key};
  }

  item_type extract_max() {
    OpScope scope(ctx_->sink, OpKind::extract_max);
    return root_->extract_max();
  }

  item_type remove(ItemId id) {
    OpScope scope(ctx_->sink, OpKind::remove);
    return root_->remove(id);
  }

  void increase_key(ItemId id, Key new_key) {
    OpScope scope(ctx_->sink, OpKind::increase_key);
    root_->increase_key(id, new_key);
  }

  void decrease_key(ItemId id, Key new_key) {
    OpScope scope(ctx_->sink, OpKind::decrease_key);
    root_->decrease_key(id, new_key);
  }

  /// Applies `f(Payload&)` to the item's payload. Keys are not reachable from here.
  template <class F>
  void search(ItemId id, F&& f) {
    OpScope scope(ctx_->sink, OpKind::search);
    root_->search(id, std::forward<F>(f));
  }

  bool contains(ItemId id) const { return root_->contains(id); }
  const item_type& get(ItemId id) const { return root_->get(id); }

  /// Runs the structural scanner on every level; empty means healthy.
  std::vector<std::string> check_invariants() const {
    std::vector<std::string> out;
    root_->verify(out);
    return out;
  }

  /// Per-level totals, index 0 is level 1.
  std::vector<LevelShape> shape() const {
    std::vector<LevelShape> levels(static_cast<std::size_t>(alpha_));
    root_->collect_shape(levels);
    return levels;
  }

 private:
  friend struct FunnelQueueTestAccess;

  int alpha_;
  std::unique_ptr<QueueContext> ctx_;
  std::unique_ptr<level_type> root_;
  ItemId next_id_ = 0;
};

}  // namespace funnel
