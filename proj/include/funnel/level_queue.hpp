#pragma once

/// \file
/// One level of the funnel: a meta-heap of common-heaps. On level 1 each
/// common-heap is an array of items; on level i > 1 it is a nested level
/// i-1 queue. Every level keeps a hash index from item id to the id of the
/// common-heap that (recursively) holds the item, and a stack of suspended
/// heap ids for reuse.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "funnel/error.hpp"
#include "funnel/heap_core.hpp"
#include "funnel/instrumentation.hpp"
#include "funnel/item.hpp"
#include "funnel/numerics.hpp"

namespace funnel {

struct QueueConfig {
  BalancePolicy balance{};   // level_index is filled in per level
  unsigned tunnel_c = 3;     // tunnel barrier t_B = 2^c
  unsigned grow_tolerance = 1;
};

enum class BalanceDecision : std::uint8_t { stay, need_grow, need_trim };

/// State shared by every level queue of one facade.
struct QueueContext {
  QueueConfig config;
  std::size_t capacity = 0;         // N_max
  std::size_t tunnel_barrier = 8;   // t_B
  std::vector<LoadBalancer> balancers;  // index level - 1
  OpCounters* sink = nullptr;

  LoadBalancer& balancer(int level) { return balancers[static_cast<std::size_t>(level - 1)]; }
  const LoadBalancer& balancer(int level) const { return balancers[static_cast<std::size_t>(level - 1)]; }
};

/// Aggregated shape of all queue instances on one level.
struct LevelShape {
  int level = 0;
  std::size_t instances = 0;
  std::size_t items = 0;
  std::size_t heaps = 0;
  std::size_t k_star = 0;
  long long min_deviation = std::numeric_limits<long long>::max();
  long long max_deviation = std::numeric_limits<long long>::min();
  std::size_t suspended = 0;
  std::size_t tunnel_occupancy = 0;  // items held by heaps at meta slots < t_B
  std::size_t max_heap_items = 0;
};

template <class Payload>
class LevelQueue {
 public:
  using item_type = Item<Payload>;
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  struct MetaEntry {
    Priority top;  // local max of the referenced heap
    HeapId heap = 0;
  };

  struct CommonHeap {
    HeapId id = 0;
    std::size_t meta_slot = npos;
    heap::HeapArray<item_type> items;     // level 1
    std::unique_ptr<LevelQueue> nested;   // level > 1

    bool linked() const noexcept { return meta_slot != npos; }
  };

  LevelQueue(int level, QueueContext* ctx)
      : level_(level), ctx_(ctx), meta_(ctx->balancer(level).heap_capacity()) {
    link(activate_heap());
  }

  LevelQueue(const LevelQueue&) = delete;
  LevelQueue& operator=(const LevelQueue&) = delete;

  int level() const noexcept { return level_; }
  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }
  std::size_t active_heaps() const noexcept { return meta_.size(); }
  std::size_t suspended_heaps() const noexcept { return suspended_.size(); }
  std::size_t heap_capacity() const noexcept { return meta_.capacity(); }
  Priority top_priority() const noexcept { return meta_[0].top; }
  const heap::HeapArray<MetaEntry>& meta_heap() const noexcept { return meta_; }
  const std::vector<CommonHeap>& common_heaps() const noexcept { return heaps_; }
  const std::vector<HeapId>& suspended() const noexcept { return suspended_; }

  BalanceDecision check_balance() {
    const auto k_star = ctx_->balancer(level_).heap_count(size_);
    const auto k = meta_.size();
    if (k_star >= k + 1) return BalanceDecision::need_grow;
    if (k_star + 1 + ctx_->config.grow_tolerance <= k) return BalanceDecision::need_trim;
    return BalanceDecision::stay;
  }

  std::uint64_t optimal_heaps() const { return ctx_->balancer(level_).heap_count(size_); }

  const item_type& top_item() const {
    if (size_ == 0) throw error(errc::empty, "max_item on an empty queue");
    const auto& a = heaps_[meta_[0].heap];
    return level_ == 1 ? a.items[0] : a.nested->top_item();
  }

  bool contains(ItemId id) const { return index_.find(id) != index_.end(); }

  const item_type& get(ItemId id) const {
    const auto& a = heaps_[lookup(id)];
    if (level_ == 1) return a.items[find_index(a, id)];
    return a.nested->get(id);
  }

  void insert(item_type x) {
    ++size_;
    record(Tally::level_insert);
    route(std::move(x));
    if (check_balance() == BalanceDecision::need_grow) grow();
  }

  /// insert() without the size update and the balance check.
  void reinsert(item_type x) { route(std::move(x)); }

  item_type extract_max() {
    if (size_ == 0) throw error(errc::empty, "extract_max on an empty queue");
    auto& a = heaps_[meta_[0].heap];
    item_type x = level_ == 1 ? a.items.pop(item_less(), item_notify()) : a.nested->extract_max();
    erase_index(x.id);
    --size_;
    refresh_down(a);
    if (check_balance() == BalanceDecision::need_trim) trim_and_redistribute();
    return x;
  }

  item_type remove(ItemId id) {
    auto& a = heaps_[lookup(id)];
    const bool was_max = meta_[a.meta_slot].top.id == id;
    item_type x = take_from(a, id);
    erase_index(id);
    --size_;
    if (was_max) refresh_down(a);
    if (check_balance() == BalanceDecision::need_trim) trim_and_redistribute();
    return x;
  }

  void increase_key(ItemId id, Key new_key) {
    auto& a = heaps_[lookup(id)];
    const std::size_t slot = a.meta_slot;
    const Priority raised{new_key, id};
    if (meta_[slot].top.id == id) {
      // local max: update in place, then the meta-heap
      raise_in_heap(a, id, new_key);
      meta_[slot].top = raised;
      restore_meta_up(slot);
    } else if (!less(meta_[slot].top, raised)) {
      raise_in_heap(a, id, new_key);
    } else {
      if (level_ == 1) {
        const auto j = find_index(a, id);
        if (new_key <= a.items[j].key) throw error(errc::domain, "increase_key needs a larger key");
      }
      item_type x = take_from(a, id);
      x.key = new_key;
      tunnel(std::move(x));
    }
  }

  void decrease_key(ItemId id, Key new_key) {
    auto& a = heaps_[lookup(id)];
    const bool was_max = meta_[a.meta_slot].top.id == id;
    if (level_ == 1) {
      const auto j = find_index(a, id);
      if (new_key >= a.items[j].key) throw error(errc::domain, "decrease_key needs a smaller key");
      a.items[j].key = new_key;
      a.items.restore_down(j, item_less(), item_notify());
    } else {
      a.nested->decrease_key(id, new_key);
    }
    if (was_max) refresh_down(a);
  }

  template <class F>
  void search(ItemId id, F&& f) {
    auto& a = heaps_[lookup(id)];
    if (level_ == 1) {
      f(a.items[find_index(a, id)].payload);
    } else {
      a.nested->search(id, std::forward<F>(f));
    }
  }

  /// Visits every live item of this queue.
  template <class F>
  void for_each_item(F&& f) const {
    for (std::size_t j = 0; j < meta_.size(); ++j) visit_heap(heaps_[meta_[j].heap], f);
  }

  void grow() {
    record(Tally::grow_call);
    const HeapId bid = activate_heap();
    const std::size_t span = std::min(ctx_->tunnel_barrier, meta_.size());
    const std::size_t slot = tunnel_cursor_ % span;
    tunnel_cursor_ = slot + 1;
    auto& a = heaps_[meta_[slot].heap];
    auto& b = heaps_[bid];
    if (heap_size(a) >= 2) {
      if (level_ == 1) {
        auto tail = a.items.take_tail(a.items.size() / 2);
        for (auto& x : tail) {
          write_index(x.id, bid);
          b.items.append_unordered(std::move(x));
        }
        b.items.make_heap(item_less(), item_notify());
      } else if (a.nested->active_heaps() >= 2) {
        b.nested->adopt(a.nested->release_trailing((a.nested->active_heaps() + 1) / 2));
        b.nested->for_each_item([&](const item_type& x) { write_index(x.id, bid); });
        a.nested->settle();
        b.nested->settle();
      }
    }
    link(bid);
  }

  void trim_and_redistribute() {
    if (meta_.size() < 2) return;
    record(Tally::trim_call);
    const MetaEntry last = meta_.pop_back();
    auto& d = heaps_[last.heap];
    d.meta_slot = npos;
    suspended_.push_back(d.id);
    std::vector<item_type> drained = level_ == 1 ? d.items.take_all() : d.nested->take_all();
    for (auto& x : drained) reinsert(std::move(x));
  }

  /// Runs grow / trim until the balance check is satisfied.
  void settle() {
    for (;;) {
      switch (check_balance()) {
        case BalanceDecision::need_grow: grow(); break;
        case BalanceDecision::need_trim: trim_and_redistribute(); break;
        case BalanceDecision::stay: return;
      }
    }
  }

  /// Detaches the common-heaps at the last `count` meta slots. Their ids
  /// are suspended here and their items leave this queue's index.
  std::vector<CommonHeap> release_trailing(std::size_t count) {
    std::vector<CommonHeap> out;
    out.reserve(count);
    for (std::size_t c = 0; c < count && meta_.size() > 1; ++c) {
      const MetaEntry e = meta_.pop_back();
      auto& h = heaps_[e.heap];
      CommonHeap moved;
      moved.items = std::move(h.items);
      moved.nested = std::move(h.nested);
      h.items = heap::HeapArray<item_type>(ctx_->capacity);
      h.meta_slot = npos;
      suspended_.push_back(h.id);
      visit_heap(moved, [&](const item_type& x) {
        erase_index(x.id);
        --size_;
      });
      out.push_back(std::move(moved));
    }
    return out;
  }

  /// Replaces the contents of an empty queue by intact common-heaps.
  void adopt(std::vector<CommonHeap> incoming) {
    if (size_ != 0) throw error(errc::domain, "adopt needs an empty queue");
    heaps_.clear();
    suspended_.clear();
    meta_.clear();
    index_.clear();
    insert_cursor_ = tunnel_cursor_ = 0;
    for (auto& h : incoming) {
      const auto id = static_cast<HeapId>(heaps_.size());
      h.id = id;
      h.meta_slot = npos;
      visit_heap(h, [&](const item_type& x) {
        write_index(x.id, id);
        ++size_;
      });
      heaps_.push_back(std::move(h));
      meta_.append_unordered(MetaEntry{local_max(heaps_.back()), id});
    }
    if (heaps_.empty()) {
      link(activate_heap());
      return;
    }
    meta_.make_heap(meta_less(), meta_notify());
  }

  /// Moves every item out and resets to the empty state.
  std::vector<item_type> take_all() {
    std::vector<item_type> out;
    out.reserve(size_);
    for (std::size_t j = 0; j < meta_.size(); ++j) {
      auto& h = heaps_[meta_[j].heap];
      if (level_ == 1) {
        for (auto& x : h.items.take_all()) out.push_back(std::move(x));
      } else {
        for (auto& x : h.nested->take_all()) out.push_back(std::move(x));
      }
    }
    heaps_.resize(1);
    heaps_[0].meta_slot = npos;
    if (level_ > 1 && !heaps_[0].nested) heaps_[0].nested = std::make_unique<LevelQueue>(level_ - 1, ctx_);
    suspended_.clear();
    meta_.clear();
    index_.clear();
    size_ = 0;
    insert_cursor_ = tunnel_cursor_ = 0;
    link(0);
    return out;
  }

  /// Appends a description of every broken structural invariant to `out`.
  void verify(std::vector<std::string>& out, const std::string& path = "") const {
    const std::string where = path.empty() ? "L" + std::to_string(level_) : path;
    auto fail = [&](const std::string& msg) { out.push_back(where + ": " + msg); };

    for (std::size_t j = 1; j < meta_.size(); ++j) {
      if (meta_[heap::parent(j)].top < meta_[j].top) fail("meta-heap order violated at slot " + std::to_string(j));
    }
    std::vector<bool> seen(heaps_.size(), false);
    std::size_t total = 0;
    for (std::size_t j = 0; j < meta_.size(); ++j) {
      const auto hid = meta_[j].heap;
      if (hid >= heaps_.size()) {
        fail("meta slot " + std::to_string(j) + " names unknown heap");
        continue;
      }
      const auto& h = heaps_[hid];
      if (seen[hid]) fail("heap " + std::to_string(hid) + " linked twice");
      seen[hid] = true;
      if (h.id != hid) fail("heap " + std::to_string(hid) + " has id " + std::to_string(h.id));
      if (h.meta_slot != j) fail("backlink of heap " + std::to_string(hid) + " is not slot " + std::to_string(j));
      if (!(meta_[j].top == local_max(h))) fail("meta key of heap " + std::to_string(hid) + " is stale");
      if (level_ == 1) {
        if (!heap::is_heap(h.items.slots(), [](const item_type& a, const item_type& b) {
              return a.priority() < b.priority();
            })) {
          fail("item heap " + std::to_string(hid) + " out of order");
        }
      } else if (!h.nested) {
        fail("active heap " + std::to_string(hid) + " has no storage");
        continue;
      } else {
        h.nested->verify(out, where + "/" + std::to_string(hid));
      }
      const auto n = heap_size(h);
      total += n;
      visit_heap(h, [&](const item_type& x) {
        const auto it = index_.find(x.id);
        if (it == index_.end()) {
          fail("item " + std::to_string(x.id) + " missing from hash index");
        } else if (it->second != hid) {
          fail("item " + std::to_string(x.id) + " indexed to heap " + std::to_string(it->second) + ", lives in " +
               std::to_string(hid));
        }
      });
    }
    if (total != size_) fail("size " + std::to_string(size_) + " but heaps hold " + std::to_string(total));
    if (index_.size() != size_) fail("hash index has " + std::to_string(index_.size()) + " entries for " +
                                     std::to_string(size_) + " items");
    std::unordered_set<HeapId> susp;
    for (const auto hid : suspended_) {
      if (hid >= heaps_.size()) {
        fail("suspended id out of range");
        continue;
      }
      if (!susp.insert(hid).second) fail("heap " + std::to_string(hid) + " suspended twice");
      const auto& h = heaps_[hid];
      if (h.linked() || seen[hid]) fail("suspended heap " + std::to_string(hid) + " is linked");
      if (heap_size(h) != 0) fail("suspended heap " + std::to_string(hid) + " is not empty");
    }
    if (meta_.size() + suspended_.size() != heaps_.size()) fail("heaps neither active nor suspended");
    const auto k_star = static_cast<long long>(optimal_heaps());
    const auto k = static_cast<long long>(meta_.size());
    const auto dev = k > k_star ? k - k_star : k_star - k;
    if (dev > static_cast<long long>(ctx_->config.grow_tolerance) + 1) {
      fail("balance envelope: k=" + std::to_string(k) + " k*=" + std::to_string(k_star));
    }
  }

  /// Adds this queue (and its nested queues) to per-level shape totals.
  void collect_shape(std::vector<LevelShape>& levels) const {
    auto& s = levels[static_cast<std::size_t>(level_ - 1)];
    s.level = level_;
    ++s.instances;
    s.items += size_;
    s.heaps += meta_.size();
    const auto k_star = optimal_heaps();
    s.k_star += k_star;
    const auto dev = static_cast<long long>(meta_.size()) - static_cast<long long>(k_star);
    s.min_deviation = std::min(s.min_deviation, dev);
    s.max_deviation = std::max(s.max_deviation, dev);
    s.suspended += suspended_.size();
    for (std::size_t j = 0; j < meta_.size(); ++j) {
      const auto& h = heaps_[meta_[j].heap];
      const auto n = heap_size(h);
      if (j < ctx_->tunnel_barrier) s.tunnel_occupancy += n;
      s.max_heap_items = std::max(s.max_heap_items, n);
      if (level_ > 1) h.nested->collect_shape(levels);
    }
  }

 private:
  friend struct LevelQueueTestAccess;

  void record(Tally t, std::uint64_t amount = 1) const {
    if (ctx_->sink) ctx_->sink->record(t, level_, amount);
  }

  bool less(const Priority& a, const Priority& b) const {
    record(Tally::key_comparison);
    return a < b;
  }

  auto item_less() const {
    return [this](const item_type& a, const item_type& b) { return less(a.priority(), b.priority()); };
  }
  auto item_notify() const {
    return [this](const item_type&, std::size_t) { record(Tally::item_move); };
  }
  auto meta_less() const {
    return [this](const MetaEntry& a, const MetaEntry& b) { return less(a.top, b.top); };
  }
  auto meta_notify() {
    return [this](const MetaEntry& e, std::size_t j) {
      heaps_[e.heap].meta_slot = j;
      record(Tally::item_move);
    };
  }

  std::size_t heap_size(const CommonHeap& h) const noexcept {
    if (level_ == 1) return h.items.size();
    return h.nested ? h.nested->size() : 0;
  }

  Priority local_max(const CommonHeap& h) const noexcept {
    if (heap_size(h) == 0) return Priority::lowest();
    return level_ == 1 ? h.items[0].priority() : h.nested->top_priority();
  }

  template <class F>
  void visit_heap(const CommonHeap& h, F&& f) const {
    if (level_ == 1) {
      for (const auto& x : h.items) f(x);
    } else if (h.nested) {
      h.nested->for_each_item(f);
    }
  }

  HeapId lookup(ItemId id) const {
    record(Tally::hash_probe);
    const auto it = index_.find(id);
    if (it == index_.end()) throw error(errc::not_found, "unknown item id " + std::to_string(id));
    return it->second;
  }
  void write_index(ItemId id, HeapId hid) {
    record(Tally::hash_probe);
    index_[id] = hid;
  }
  void erase_index(ItemId id) {
    record(Tally::hash_probe);
    index_.erase(id);
  }

  std::size_t find_index(const CommonHeap& h, ItemId id) const {
    for (std::size_t j = 0; j < h.items.size(); ++j) {
      if (h.items[j].id == id) return j;
    }
    throw error(errc::not_found, "item " + std::to_string(id) + " not in its indexed heap");
  }

  /// Takes a recycled id off the suspended stack or the next unused one and
  /// gives it empty storage. The heap is not linked yet.
  HeapId activate_heap() {
    HeapId id;
    if (!suspended_.empty()) {
      id = suspended_.back();
      suspended_.pop_back();
    } else {
      if (heaps_.size() >= meta_.capacity()) throw error(errc::capacity, "common-heap array exhausted");
      id = static_cast<HeapId>(heaps_.size());
      heaps_.emplace_back();
      heaps_.back().id = id;
      heaps_.back().items = heap::HeapArray<item_type>(ctx_->capacity);
    }
    auto& h = heaps_[id];
    if (level_ > 1 && !h.nested) h.nested = std::make_unique<LevelQueue>(level_ - 1, ctx_);
    return id;
  }

  void link(HeapId id) {
    record(Tally::meta_heap_restore);
    meta_.push(MetaEntry{local_max(heaps_[id]), id}, meta_less(), meta_notify());
  }

  void restore_meta_up(std::size_t slot) {
    record(Tally::meta_heap_restore);
    meta_.restore_up(slot, meta_less(), meta_notify());
  }

  /// The local max of `h` went down (or vanished): refresh its meta key.
  void refresh_down(CommonHeap& h) {
    const std::size_t slot = h.meta_slot;
    meta_[slot].top = local_max(h);
    record(Tally::meta_heap_restore);
    meta_.restore_down(slot, meta_less(), meta_notify());
  }

  item_type take_from(CommonHeap& h, ItemId id) {
    if (level_ == 1) return h.items.pop_at(find_index(h, id), item_less(), item_notify());
    return h.nested->remove(id);
  }

  void raise_in_heap(CommonHeap& h, ItemId id, Key new_key) {
    if (level_ == 1) {
      const auto j = find_index(h, id);
      if (new_key <= h.items[j].key) throw error(errc::domain, "increase_key needs a larger key");
      h.items[j].key = new_key;
      h.items.restore_up(j, item_less(), item_notify());
    } else {
      h.nested->increase_key(id, new_key);
    }
  }

  void place(CommonHeap& h, item_type x) {
    write_index(x.id, h.id);
    if (level_ == 1) {
      h.items.push(std::move(x), item_less(), item_notify());
    } else {
      h.nested->insert(std::move(x));
    }
  }

  void route(item_type x) {
    const std::size_t k = meta_.size();
    const std::size_t slot = insert_cursor_ % k;
    insert_cursor_ = slot + 1;
    auto& a = heaps_[meta_[slot].heap];
    const bool was_empty = heap_size(a) == 0;
    if (was_empty || !less(meta_[slot].top, x.priority())) {
      const Priority p = x.priority();
      place(a, std::move(x));
      if (was_empty) {
        meta_[slot].top = p;
        restore_meta_up(slot);
      }
    } else {
      tunnel(std::move(x));
    }
  }

  void tunnel(item_type x) {
    record(Tally::tunnel_call);
    const std::size_t span = std::min(ctx_->tunnel_barrier, meta_.size());
    const std::size_t slot = tunnel_cursor_ % span;
    tunnel_cursor_ = slot + 1;
    auto& b = heaps_[meta_[slot].heap];
    const Priority p = x.priority();
    const bool new_max = less(meta_[slot].top, p);
    place(b, std::move(x));
    if (new_max) {
      meta_[slot].top = p;
      if (ctx_->sink) ctx_->sink->record_tunnel_restore(level_, slot, ctx_->tunnel_barrier);
      restore_meta_up(slot);
    }
  }

  int level_;
  QueueContext* ctx_;
  std::size_t size_ = 0;
  heap::HeapArray<MetaEntry> meta_;
  std::vector<CommonHeap> heaps_;
  std::unordered_map<ItemId, HeapId> index_;
  std::vector<HeapId> suspended_;
  std::size_t insert_cursor_ = 0;
  std::size_t tunnel_cursor_ = 0;
};

}  // namespace funnel
