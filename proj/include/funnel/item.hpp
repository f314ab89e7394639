#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <type_traits>

namespace funnel {

using Key = std::int64_t;
using ItemId = std::uint64_t;
using HeapId = std::uint32_t;

#ifdef FUNNEL_COUNT_RAW_COMPARISONS
namespace detail {
// Test hook: counts every priority comparison, independent of OpCounters.
inline thread_local std::uint64_t raw_comparisons = 0;
}  // namespace detail
#endif

/// Total order on items: larger key first, then smaller id first.
struct Priority {
  Key key = std::numeric_limits<Key>::min();
  ItemId id = std::numeric_limits<ItemId>::max();

  /// Sorts below every real item; used as the local max of an empty heap.
  static constexpr Priority lowest() noexcept { return {}; }

  /// True when `a` ranks strictly below `b`.
  friend constexpr bool operator<(const Priority& a, const Priority& b) noexcept {
#ifdef FUNNEL_COUNT_RAW_COMPARISONS
    if (!std::is_constant_evaluated()) ++detail::raw_comparisons;
#endif
    return a.key < b.key || (a.key == b.key && a.id > b.id);
  }
  friend constexpr bool operator==(const Priority&, const Priority&) noexcept = default;
};

template <class Payload = std::string>
struct Item {
  ItemId id = 0;
  Key key = 0;
  Payload payload{};

  Priority priority() const noexcept { return {key, id}; }
  friend bool operator==(const Item&, const Item&) = default;
};

/// What max_item() reports.
struct ItemRef {
  ItemId id = 0;
  Key key = 0;
  friend bool operator==(const ItemRef&, const ItemRef&) = default;
};

}  // namespace funnel
