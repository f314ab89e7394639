#pragma once

/// \file
/// The three harness commands behind the `funnelq` CLI: lockstep
/// verification against the oracle, counter-based benchmark sweeps written as
/// CSV, and per-level structure reports.

#include <array>
#include <cstdio>
#include <cstdint>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "funnel/error.hpp"
#include "funnel/funnel_queue.hpp"
#include "funnel/instrumentation.hpp"
#include "funnel/oracle.hpp"
#include "funnel/workload.hpp"

namespace funnel {

inline std::string_view to_string(LogBase b) { return b == LogBase::binary ? "binary" : "natural"; }
inline LogBase parse_log_base(std::string_view s) {
  if (s == "natural") return LogBase::natural;
  if (s == "binary") return LogBase::binary;
  throw error(errc::configuration, "unknown log base '" + std::string(s) + "'");
}

inline std::string_view to_string(EvalStrategy s) {
  switch (s) {
    case EvalStrategy::always_compute: return "always";
    case EvalStrategy::memoized: return "memoized";
    case EvalStrategy::precomputed_table: return "table";
  }
  return "memoized";
}
inline EvalStrategy parse_eval_strategy(std::string_view s) {
  if (s == "always") return EvalStrategy::always_compute;
  if (s == "memoized") return EvalStrategy::memoized;
  if (s == "table") return EvalStrategy::precomputed_table;
  throw error(errc::configuration, "unknown w0 strategy '" + std::string(s) + "'");
}

// ---------------------------------------------------------------- verify

struct VerifyOptions {
  WorkloadSpec spec;
  int alpha = 2;
  std::size_t capacity = std::size_t{1} << 20;
  QueueConfig config;
  std::size_t scan_every = 1024;
  /// Testing aid: from this op index on, the next insert reaching the funnel
  /// side carries a key with its low bit flipped.
  std::optional<std::size_t> inject_fault_at;
};

struct VerifyReport {
  bool ok = true;
  std::size_t ops_applied = 0;
  std::size_t scans = 0;
  std::string message;
};

inline std::string reproduction_line(const VerifyOptions& o) {
  std::ostringstream s;
  s << "funnelq verify --alpha " << o.alpha << " --capacity " << o.capacity << " --ops " << o.spec.op_count
    << " --seed " << o.spec.seed << " --workload " << to_string(o.spec.kind) << " --keys " << to_string(o.spec.keys)
    << " --tolerance " << o.config.grow_tolerance << " --tunnel-c " << o.config.tunnel_c << " --log-base "
    << to_string(o.config.balance.log_base) << " --w0-strategy " << to_string(o.config.balance.eval_strategy)
    << " --scan-every " << o.scan_every;
  const auto& m = o.spec.mix;
  const auto d = default_mix(o.spec.kind);
  if (m.insert != d.insert || m.extract_max != d.extract_max || m.remove != d.remove ||
      m.increase_key != d.increase_key || m.decrease_key != d.decrease_key || m.search != d.search) {
    s << " --mix " << m.insert << ',' << m.extract_max << ',' << m.remove << ',' << m.increase_key << ','
      << m.decrease_key << ',' << m.search;
  }
  if (o.inject_fault_at) s << " --inject-fault " << *o.inject_fault_at;
  return s.str();
}

namespace detail {

template <class P>
std::string show(const Item<P>& x) {
  return "item(id=" + std::to_string(x.id) + ", key=" + std::to_string(x.key) + ", payload=" + x.payload + ")";
}

template <class Queue>
std::string show_max(const Queue& q) {
  try {
    const auto m = q.max_item();
    return "max=(" + std::to_string(m.id) + "," + std::to_string(m.key) + ")";
  } catch (const error& e) {
    return std::string("max=<") + to_string(e.code()) + ">";
  }
}

/// Runs one op and renders everything it makes visible.
template <class Queue>
std::string run_visible(Queue& q, const Op& op, std::size_t index, Key insert_key) {
  std::string out;
  try {
    switch (op.kind) {
      case OpKind::insert: out = "id=" + std::to_string(q.insert(insert_key, "p" + std::to_string(index))); break;
      case OpKind::extract_max: out = show(q.extract_max()); break;
      case OpKind::remove: out = show(q.remove(op.id)); break;
      case OpKind::increase_key: q.increase_key(op.id, op.key); out = "ok"; break;
      case OpKind::decrease_key: q.decrease_key(op.id, op.key); out = "ok"; break;
      case OpKind::search: {
        std::string seen;
        q.search(op.id, [&](std::string& payload) {
          seen = payload;
          payload = "s" + std::to_string(index);
        });
        out = "payload=" + seen;
        break;
      }
      case OpKind::max_item: out = "ok"; break;
    }
  } catch (const error& e) {
    out = std::string("error=") + to_string(e.code());
  }
  return out + " " + show_max(q);
}

}  // namespace detail

/// Replays the workload on the funnel queue and the oracle in lockstep.
/// Stops at the first divergence or invariant violation. Every scan also
/// diffs the full contents, since a wrong key can stay invisible to max_item
/// for a long time; after the last op both queues are drained and compared.
inline VerifyReport run_verify(const VerifyOptions& opt, std::ostream* log = nullptr) {
  VerifyReport rep;
  FunnelQueue<std::string> fq(opt.alpha, opt.capacity, opt.config);
  OracleQueue<std::string> oq(opt.capacity);
  WorkloadGenerator gen(opt.spec);
  bool fault_pending = opt.inject_fault_at.has_value();

  auto fail = [&](const std::string& what) {
    rep.ok = false;
    rep.message = what + "\nreproduce: " + reproduction_line(opt);
    if (log) *log << rep.message << "\n";
    return rep;
  };

  auto scan = [&](std::size_t at) -> std::optional<std::string> {
    ++rep.scans;
    const auto v = fq.check_invariants();
    if (!v.empty()) return "invariant violation after op " + std::to_string(at) + ": " + v.front();
    if (!oq.empty() && !(oq.max_item() == oq.scan_max())) return "oracle self-check failed after op " + std::to_string(at);
    if (fq.size() != oq.size()) return "size mismatch after op " + std::to_string(at);
    for (const auto& x : oq.items()) {
      if (!fq.contains(x.id)) return "item " + std::to_string(x.id) + " missing after op " + std::to_string(at);
      const auto& y = fq.get(x.id);
      if (y.key != x.key || y.payload != x.payload) {
        return "content mismatch after op " + std::to_string(at) + "\n  funnel: " + detail::show(y) +
               "\n  oracle: " + detail::show(x);
      }
    }
    return std::nullopt;
  };

  for (std::size_t i = 0; i < opt.spec.op_count; ++i) {
    const Op op = gen.next();
    Key funnel_key = op.key;
    if (fault_pending && op.kind == OpKind::insert && i >= *opt.inject_fault_at) {
      funnel_key ^= 1;
      fault_pending = false;
    }
    const ItemId top = oq.empty() ? 0 : oq.max_item().id;
    const std::string a = detail::run_visible(fq, op, i, funnel_key);
    const std::string b = detail::run_visible(oq, op, i, op.key);
    ++rep.ops_applied;
    if (a != b) {
      return fail("divergence at op " + std::to_string(i) + " " + describe(op) + "\n  funnel: " + a +
                  "\n  oracle: " + b);
    }
    // keep the generator's shadow in step with the oracle
    if (b.rfind("error=", 0) != 0) {
      switch (op.kind) {
        case OpKind::insert: gen.on_inserted(oq.next_id() - 1, op.key); break;
        case OpKind::extract_max: gen.on_removed(top); break;
        case OpKind::remove: gen.on_removed(op.id); break;
        case OpKind::increase_key:
        case OpKind::decrease_key: gen.on_key_changed(op.id, op.key); break;
        default: break;
      }
    }
    if (opt.scan_every != 0 && (i + 1) % opt.scan_every == 0) {
      if (auto bad = scan(i)) return fail(*bad);
    }
  }
  if (auto bad = scan(opt.spec.op_count)) return fail(*bad);

  for (std::size_t n = 0; !oq.empty() || !fq.empty(); ++n) {
    std::string a, b;
    try {
      a = detail::show(fq.extract_max());
    } catch (const error& e) {
      a = std::string("error=") + to_string(e.code());
    }
    try {
      b = detail::show(oq.extract_max());
    } catch (const error& e) {
      b = std::string("error=") + to_string(e.code());
    }
    if (a != b) return fail("divergence in final drain at extraction " + std::to_string(n) + "\n  funnel: " + a +
                            "\n  oracle: " + b);
  }
  if (log) *log << "verify ok: " << rep.ops_applied << " ops, " << rep.scans << " invariant scans\n";
  return rep;
}

// ---------------------------------------------------------------- bench

inline constexpr const char* kCsvHeader =
    "n,op,invocations,mean_comparisons,max_comparisons,mean_moves,mean_hash_probes,grow_calls,trim_calls,"
    "tunnel_calls,beta_hat";

inline constexpr std::array<OpKind, 6> kBenchOps = {OpKind::insert,       OpKind::extract_max,
                                                    OpKind::remove,       OpKind::increase_key,
                                                    OpKind::decrease_key, OpKind::search};

struct BenchOptions {
  WorkloadSpec spec;
  std::vector<std::size_t> sizes;
  int alpha = 2;
  QueueConfig config;
};

struct BenchRow {
  std::size_t n = 0;
  OpKind op = OpKind::insert;
  OpStats stats;
};

/// Builds a queue of n items, resets the counters, runs the workload and
/// returns one snapshot. Build keys come from the spec's key distribution.
inline CounterReport measure(const WorkloadSpec& spec, std::size_t n, int alpha, const QueueConfig& config) {
  OpCounters counters;
  const std::size_t capacity = n + spec.op_count + 1;
  FunnelQueue<std::string> q(alpha, capacity, config, &counters);
  WorkloadGenerator gen(WorkloadSpec::of(WorkloadKind::insert_only, n, spec.seed, spec.keys));
  for (std::size_t i = 0; i < n; ++i) apply_op(q, gen, gen.next());
  counters.reset();
  gen.set_mix(spec.mix);
  for (std::size_t i = 0; i < spec.op_count; ++i) apply_op(q, gen, gen.next());
  return counters.snapshot();
}

inline std::vector<BenchRow> run_bench(const BenchOptions& opt) {
  std::vector<BenchRow> rows;
  std::size_t prev = 0;
  for (const auto n : opt.sizes) {
    if (n < prev) throw error(errc::configuration, "bench sizes must be ascending");
    prev = n;
    const auto report = measure(opt.spec, n, opt.alpha, opt.config);
    for (const auto op : kBenchOps) rows.push_back({n, op, report.op(op)});
  }
  return rows;
}

inline void write_csv(const std::vector<BenchRow>& rows, std::ostream& out) {
  out << kCsvHeader << '\n';
  char buf[512];
  for (const auto& r : rows) {
    const auto& s = r.stats;
    std::snprintf(buf, sizeof buf, "%zu,%s,%llu,%.4f,%llu,%.4f,%.4f,%llu,%llu,%llu,%.6f", r.n,
                  std::string(to_string(r.op)).c_str(), static_cast<unsigned long long>(s.invocations),
                  s.mean_comparisons(), static_cast<unsigned long long>(s.max_comparisons), s.mean_moves(),
                  s.mean_hash_probes(), static_cast<unsigned long long>(s.tallies[Tally::grow_call]),
                  static_cast<unsigned long long>(s.tallies[Tally::trim_call]),
                  static_cast<unsigned long long>(s.tallies[Tally::tunnel_call]), s.beta_hat());
    out << buf << '\n';
  }
}

// ---------------------------------------------------------------- stats

template <class P>
std::string format_stats(const FunnelQueue<P>& q) {
  std::ostringstream s;
  s << "# alpha=" << q.alpha() << " capacity=" << q.capacity() << " size=" << q.size()
    << " tunnel_barrier=" << q.tunnel_barrier() << " tolerance=" << q.config().grow_tolerance << '\n';
  s << "level instances n k k_star deviation_min deviation_max suspended tunnel_occupancy max_heap_items\n";
  const auto levels = q.shape();
  for (auto it = levels.rbegin(); it != levels.rend(); ++it) {
    s << it->level << ' ' << it->instances << ' ' << it->items << ' ' << it->heaps << ' ' << it->k_star << ' '
      << it->min_deviation << ' ' << it->max_deviation << ' ' << it->suspended << ' ' << it->tunnel_occupancy << ' '
      << it->max_heap_items << '\n';
  }
  return s.str();
}

inline std::string run_stats(int alpha, std::size_t capacity, const WorkloadSpec& spec, const QueueConfig& config) {
  FunnelQueue<std::string> q(alpha, capacity, config);
  WorkloadGenerator gen(spec);
  for (std::size_t i = 0; i < spec.op_count; ++i) apply_op(q, gen, gen.next());
  return format_stats(q);
}

}  // namespace funnel
