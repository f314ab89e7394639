#pragma once

/// \file
/// Reference priority queue for differential testing: an id map plus one
/// binary max-heap with lazy deletion. Same API, same error taxonomy and the
/// same id counter as FunnelQueue.

#include <algorithm>
#include <cstddef>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "funnel/error.hpp"
#include "funnel/item.hpp"

namespace funnel {

template <class Payload = std::string>
class OracleQueue {
 public:
  using item_type = Item<Payload>;

  explicit OracleQueue(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw error(errc::configuration, "capacity must be positive");
  }

  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }
  std::size_t capacity() const noexcept { return capacity_; }
  ItemId next_id() const noexcept { return next_id_; }

  ItemId insert(Key key, Payload payload = {}) {
    if (items_.size() >= capacity_) throw error(errc::overflow, "queue is at capacity");
    const ItemId id = next_id_++;
    items_.emplace(id, Entry{key, std::move(payload)});
    push_entry(key, id);
    return id;
  }

  ItemRef max_item() const {
    if (items_.empty()) throw error(errc::empty, "max_item on an empty queue");
    compact();
    return {heap_.front().id, heap_.front().key};
  }

  item_type extract_max() {
    if (items_.empty()) throw error(errc::empty, "extract_max on an empty queue");
    compact();
    const ItemId id = heap_.front().id;
    return take(id);
  }

  item_type remove(ItemId id) {
    find(id);
    return take(id);
  }

  void increase_key(ItemId id, Key new_key) {
    auto& e = find(id);
    if (new_key <= e.key) throw error(errc::domain, "increase_key needs a larger key");
    e.key = new_key;
    push_entry(new_key, id);
  }

  void decrease_key(ItemId id, Key new_key) {
    auto& e = find(id);
    if (new_key >= e.key) throw error(errc::domain, "decrease_key needs a smaller key");
    e.key = new_key;
    push_entry(new_key, id);
  }

  template <class F>
  void search(ItemId id, F&& f) {
    f(find(id).payload);
  }

  bool contains(ItemId id) const { return items_.count(id) != 0; }

  /// Max by linear scan of the id map; the oracle's own oracle.
  ItemRef scan_max() const {
    if (items_.empty()) throw error(errc::empty, "scan_max on an empty queue");
    ItemRef best{};
    bool first = true;
    for (const auto& [id, e] : items_) {
      if (first || e.key > best.key || (e.key == best.key && id < best.id)) best = {id, e.key};
      first = false;
    }
    return best;
  }

  /// Live items in unspecified order.
  std::vector<item_type> items() const {
    std::vector<item_type> out;
    out.reserve(items_.size());
    for (const auto& [id, e] : items_) out.push_back({id, e.key, e.payload});
    return out;
  }

 private:
  struct Entry {
    Key key;
    Payload payload;
  };
  struct HeapEntry {
    Key key;
    ItemId id;
  };
  // larger key first, then smaller id first
  static bool below(const HeapEntry& a, const HeapEntry& b) noexcept {
    return a.key < b.key || (a.key == b.key && a.id > b.id);
  }

  Entry& find(ItemId id) {
    const auto it = items_.find(id);
    if (it == items_.end()) throw error(errc::not_found, "unknown item id " + std::to_string(id));
    return it->second;
  }

  void push_entry(Key key, ItemId id) {
    heap_.push_back({key, id});
    std::push_heap(heap_.begin(), heap_.end(), below);
    if (heap_.size() > 2 * items_.size() + 64) rebuild();
  }

  bool stale(const HeapEntry& h) const {
    const auto it = items_.find(h.id);
    return it == items_.end() || it->second.key != h.key;
  }

  void compact() const {
    while (!heap_.empty() && stale(heap_.front())) {
      std::pop_heap(heap_.begin(), heap_.end(), below);
      heap_.pop_back();
    }
  }

  void rebuild() {
    heap_.clear();
    for (const auto& [id, e] : items_) heap_.push_back({e.key, id});
    std::make_heap(heap_.begin(), heap_.end(), below);
  }

  item_type take(ItemId id) {
    auto it = items_.find(id);
    item_type out{id, it->second.key, std::move(it->second.payload)};
    items_.erase(it);
    return out;
  }

  std::size_t capacity_;
  std::unordered_map<ItemId, Entry> items_;
  mutable std::vector<HeapEntry> heap_;
  ItemId next_id_ = 0;
};

}  // namespace funnel
