// funnelq: verification, benchmark and structure-report harness for the
// funnel priority queue.
//
//   funnelq verify --workload mixed --ops 100000 --seed 7
//   funnelq bench --sizes 1024,262144 --csv out.csv
//   funnelq stats --alpha 2 --ops 10000 --workload insert-only
//
// Every flag can also be set from the environment as FUNNELQ_<FLAG>, e.g.
// FUNNELQ_SEED=3 or FUNNELQ_TUNNEL_C=4; command-line values win.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "funnel/harness.hpp"

namespace {

struct Common {
  int alpha = 2;
  std::size_t capacity = std::size_t{1} << 20;
  std::size_t ops = 1000;
  std::uint64_t seed = 1;
  std::string workload = "mixed";
  std::string keys = "uniform64";
  std::vector<double> mix;
  unsigned tolerance = 1;
  unsigned tunnel_c = 3;
  std::string log_base = "natural";
  std::string w0_strategy = "memoized";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--alpha", c.alpha, "number of levels")->envname("FUNNELQ_ALPHA")->capture_default_str();
  cmd->add_option("--capacity", c.capacity, "maximum live items")->envname("FUNNELQ_CAPACITY")->capture_default_str();
  cmd->add_option("--ops", c.ops, "operations to generate")->envname("FUNNELQ_OPS")->capture_default_str();
  cmd->add_option("--seed", c.seed, "workload seed")->envname("FUNNELQ_SEED")->capture_default_str();
  cmd->add_option("--workload", c.workload, "insert-only | mixed | dijkstra-like | remove-heavy")
      ->envname("FUNNELQ_WORKLOAD")
      ->capture_default_str();
  cmd->add_option("--keys", c.keys, "uniform64 | ascending | descending | clustered")
      ->envname("FUNNELQ_KEYS")
      ->capture_default_str();
  cmd->add_option("--mix", c.mix, "six ratios: insert,extract,remove,increase,decrease,search")
      ->delimiter(',')
      ->expected(6)
      ->envname("FUNNELQ_MIX");
  cmd->add_option("--tolerance", c.tolerance, "trim hysteresis in heaps")
      ->envname("FUNNELQ_TOLERANCE")
      ->capture_default_str();
  cmd->add_option("--tunnel-c", c.tunnel_c, "tunnel barrier exponent")->envname("FUNNELQ_TUNNEL_C")->capture_default_str();
  cmd->add_option("--log-base", c.log_base, "natural | binary")->envname("FUNNELQ_LOG_BASE")->capture_default_str();
  cmd->add_option("--w0-strategy", c.w0_strategy, "always | memoized | table")
      ->envname("FUNNELQ_W0_STRATEGY")
      ->capture_default_str();
}

funnel::WorkloadSpec make_spec(const Common& c, bool allow_empty = false) {
  if (c.ops < 1 && !allow_empty) throw funnel::error(funnel::errc::configuration, "--ops must be >= 1");
  auto spec = funnel::WorkloadSpec::of(funnel::parse_workload(c.workload), c.ops, c.seed, funnel::parse_key_dist(c.keys));
  if (!c.mix.empty()) spec.mix = {c.mix[0], c.mix[1], c.mix[2], c.mix[3], c.mix[4], c.mix[5]};
  spec.validate();
  return spec;
}

funnel::QueueConfig make_config(const Common& c) {
  funnel::QueueConfig cfg;
  cfg.grow_tolerance = c.tolerance;
  cfg.tunnel_c = c.tunnel_c;
  cfg.balance.log_base = funnel::parse_log_base(c.log_base);
  cfg.balance.eval_strategy = funnel::parse_eval_strategy(c.w0_strategy);
  return cfg;
}

std::vector<std::size_t> parse_sizes(const std::vector<std::string>& raw) {
  std::vector<std::size_t> out;
  for (const auto& s : raw) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != s.size() || s.empty()) throw funnel::error(funnel::errc::configuration, "bad size '" + s + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"funnel priority queue harness"};
  app.require_subcommand(1);

  Common verify_opts, bench_opts, stats_opts;
  std::size_t scan_every = 1024;
  std::optional<std::size_t> inject_fault;
  std::vector<std::string> sizes{"1024", "4096", "16384"};
  std::string csv_path;

  auto* verify = app.add_subcommand("verify", "lockstep run against the reference oracle");
  add_common(verify, verify_opts);
  verify->add_option("--scan-every", scan_every, "full invariant scan period, 0 = only at the end")
      ->envname("FUNNELQ_SCAN_EVERY")
      ->capture_default_str();
  verify->add_option("--inject-fault", inject_fault, "flip the key of the first insert at or after this op (test aid)")
      ->envname("FUNNELQ_INJECT_FAULT");

  auto* bench = app.add_subcommand("bench", "counter sweep over queue sizes, CSV output");
  add_common(bench, bench_opts);
  bench->add_option("--sizes", sizes, "ascending N values")->delimiter(',')->envname("FUNNELQ_SIZES");
  bench->add_option("--csv", csv_path, "output path, stdout when omitted")->envname("FUNNELQ_CSV");

  auto* stats = app.add_subcommand("stats", "per-level structure report after a workload");
  add_common(stats, stats_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (verify->parsed()) {
      funnel::VerifyOptions o;
      o.spec = make_spec(verify_opts);
      o.alpha = verify_opts.alpha;
      o.capacity = verify_opts.capacity;
      o.config = make_config(verify_opts);
      o.scan_every = scan_every;
      o.inject_fault_at = inject_fault;
      const auto rep = funnel::run_verify(o, &std::cout);
      return rep.ok ? 0 : 1;
    }

    if (bench->parsed()) {
      funnel::BenchOptions o;
      o.spec = make_spec(bench_opts);
      o.sizes = parse_sizes(sizes);
      o.alpha = bench_opts.alpha;
      o.config = make_config(bench_opts);
      std::ofstream file;
      if (!csv_path.empty()) {
        file.open(csv_path, std::ios::binary | std::ios::trunc);
        if (!file) throw funnel::error(funnel::errc::io, "cannot open '" + csv_path + "' for writing");
      }
      const auto rows = funnel::run_bench(o);
      std::ostream& out = csv_path.empty() ? std::cout : file;
      funnel::write_csv(rows, out);
      out.flush();
      if (!out) throw funnel::error(funnel::errc::io, "write to '" + csv_path + "' failed");
      return 0;
    }

    if (stats->parsed()) {
      std::cout << funnel::run_stats(stats_opts.alpha, stats_opts.capacity, make_spec(stats_opts, true),
                                     make_config(stats_opts));
      return 0;
    }
  } catch (const funnel::error& e) {
    std::cerr << "funnelq: " << e.what() << '\n';
    return e.code() == funnel::errc::io ? 3 : 2;
  }
  return 0;
}
