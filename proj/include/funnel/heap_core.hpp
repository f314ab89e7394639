#pragma once

/// \file
/// Implicit binary max-heap primitives over a contiguous array.
///
/// Every routine takes a strict-weak "less" and a placement callback
/// `notify(element, index)`. The callback fires once for each element that
/// ends up at a new index, which lets owners keep back-pointers exact while
/// elements are shifted around.

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "funnel/error.hpp"

namespace funnel::heap {

inline constexpr std::size_t parent(std::size_t j) noexcept { return (j - 1) / 2; }
inline constexpr std::size_t left(std::size_t j) noexcept { return 2 * j + 1; }

struct no_notify {
  template <class T>
  constexpr void operator()(const T&, std::size_t) const noexcept {}
};

/// Moves a[j] toward the root until its parent is not less. Returns its final index.
template <class T, class Less, class Notify>
std::size_t sift_up(std::span<T> a, std::size_t j, Less&& less, Notify&& notify) {
  const std::size_t start = j;
  T value = std::move(a[j]);
  while (j > 0) {
    const std::size_t p = parent(j);
    if (!less(a[p], value)) break;
    a[j] = std::move(a[p]);
    notify(a[j], j);
    j = p;
  }
  a[j] = std::move(value);
  if (j != start) notify(a[j], j);
  return j;
}

/// Moves a[j] toward the leaves of its own subtree. Returns its final index.
template <class T, class Less, class Notify>
std::size_t sift_down(std::span<T> a, std::size_t j, Less&& less, Notify&& notify) {
  const std::size_t n = a.size();
  const std::size_t start = j;
  T value = std::move(a[j]);
  for (;;) {
    const std::size_t l = left(j);
    if (l >= n) break;
    std::size_t c = l;
    if (l + 1 < n && less(a[l], a[l + 1])) c = l + 1;
    if (!less(value, a[c])) break;
    a[j] = std::move(a[c]);
    notify(a[j], j);
    j = c;
  }
  a[j] = std::move(value);
  if (j != start) notify(a[j], j);
  return j;
}

/// Floyd heap construction, then one notification per element.
template <class T, class Less, class Notify>
void make_heap(std::span<T> a, Less&& less, Notify&& notify) {
  const std::size_t n = a.size();
  if (n > 1) {
    for (std::size_t j = parent(n - 1) + 1; j-- > 0;) sift_down(a, j, less, no_notify{});
  }
  for (std::size_t j = 0; j < n; ++j) notify(a[j], j);
}

template <class T, class Less>
bool is_heap(std::span<const T> a, Less&& less) {
  for (std::size_t j = 1; j < a.size(); ++j) {
    if (less(a[parent(j)], a[j])) return false;
  }
  return true;
}

/// Heap storage with a hard capacity. Storage is allocated as the heap fills,
/// so a large capacity costs nothing until it is used.
template <class T>
class HeapArray {
 public:
  HeapArray() = default;
  explicit HeapArray(std::size_t capacity) : capacity_(capacity) {}

  std::size_t size() const noexcept { return slots_.size(); }
  bool empty() const noexcept { return slots_.empty(); }
  std::size_t capacity() const noexcept { return capacity_; }

  T& operator[](std::size_t j) { return slots_[j]; }
  const T& operator[](std::size_t j) const { return slots_[j]; }
  const T& top() const {
    if (slots_.empty()) throw error(errc::empty, "top of an empty heap");
    return slots_.front();
  }

  std::span<T> slots() noexcept { return slots_; }
  std::span<const T> slots() const noexcept { return slots_; }
  auto begin() const noexcept { return slots_.begin(); }
  auto end() const noexcept { return slots_.end(); }

  template <class Less = std::less<T>, class Notify = no_notify>
  std::size_t push(T value, Less&& less = {}, Notify&& notify = {}) {
    if (slots_.size() >= capacity_) throw error(errc::overflow, "heap capacity exceeded");
    slots_.push_back(std::move(value));
    const std::size_t last = slots_.size() - 1;
    const std::size_t j = sift_up(slots(), last, less, notify);
    if (j == last) notify(slots_[j], j);
    return j;
  }

  template <class Less = std::less<T>, class Notify = no_notify>
  T pop(Less&& less = {}, Notify&& notify = {}) {
    if (slots_.empty()) throw error(errc::empty, "pop from an empty heap");
    return pop_at(0, less, notify);
  }

  /// Removes the element at j: the last element fills the hole and is
  /// restored upward, then downward.
  template <class Less = std::less<T>, class Notify = no_notify>
  T pop_at(std::size_t j, Less&& less = {}, Notify&& notify = {}) {
    check_index(j);
    T out = std::move(slots_[j]);
    const std::size_t last = slots_.size() - 1;
    if (j != last) {
      slots_[j] = std::move(slots_[last]);
      slots_.pop_back();
      const std::size_t up = sift_up(slots(), j, less, notify);
      if (up == j) {
        if (sift_down(slots(), j, less, notify) == j) notify(slots_[j], j);
      }
    } else {
      slots_.pop_back();
    }
    return out;
  }

  /// Restores order after the element at j became larger.
  template <class Less = std::less<T>, class Notify = no_notify>
  std::size_t restore_up(std::size_t j, Less&& less = {}, Notify&& notify = {}) {
    check_index(j);
    return sift_up(slots(), j, less, notify);
  }

  /// Restores order in the subtree rooted at j after its element became smaller.
  template <class Less = std::less<T>, class Notify = no_notify>
  std::size_t restore_down(std::size_t j, Less&& less = {}, Notify&& notify = {}) {
    check_index(j);
    return sift_down(slots(), j, less, notify);
  }

  template <class Less = std::less<T>, class Notify = no_notify>
  void make_heap(Less&& less = {}, Notify&& notify = {}) {
    heap::make_heap(slots(), less, notify);
  }

  /// Appends without restoring order; follow with make_heap().
  void append_unordered(T value) {
    if (slots_.size() >= capacity_) throw error(errc::overflow, "heap capacity exceeded");
    slots_.push_back(std::move(value));
  }

  /// Removes the last element. The prefix stays a valid heap.
  T pop_back() {
    if (slots_.empty()) throw error(errc::empty, "pop_back from an empty heap");
    T out = std::move(slots_.back());
    slots_.pop_back();
    return out;
  }

  /// Detaches the trailing `count` elements. The remaining prefix stays a heap.
  std::vector<T> take_tail(std::size_t count) {
    if (count > slots_.size()) throw error(errc::index, "take_tail past the heap's length");
    const auto cut = slots_.end() - static_cast<std::ptrdiff_t>(count);
    std::vector<T> tail(std::make_move_iterator(cut), std::make_move_iterator(slots_.end()));
    slots_.erase(cut, slots_.end());
    return tail;
  }

  std::vector<T> take_all() {
    std::vector<T> out = std::move(slots_);
    slots_.clear();
    return out;
  }

  void clear() noexcept { slots_.clear(); }

 private:
  void check_index(std::size_t j) const {
    if (j >= slots_.size()) throw error(errc::index, "heap index out of range");
  }

  std::vector<T> slots_;
  std::size_t capacity_ = 0;
};

}  // namespace funnel::heap
