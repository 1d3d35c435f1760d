#pragma once

// Sweep of N(e, p) over all primes p <= x with deterministic parallel
// partitioning, exact aggregation, an exponent histogram, and CSV/JSON-lines
// persistence. Identical output for any worker count: the prime list is cut
// into fixed blocks, workers pull blocks from an atomic counter, and results
// merge in block order.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "powcycles/arith.hpp"
#include "powcycles/cycles.hpp"
#include "powcycles/errors.hpp"
#include "powcycles/oracle.hpp"
#include "powcycles/rational.hpp"

namespace powcycles::stats {

using arith::u64;

struct SweepRow {
  u64 p;
  u64 n_cycles;
  double exponent;  // log n_cycles / log p; 0 when n_cycles = 1
  std::optional<Rational> c_value;
};

struct SweepSummary {
  u64 e = 2;
  double x = 0;
  u64 count = 0;  // pi(x)
  u64 sum = 0;    // sum of n_cycles
  double mean = 0;
  SweepRow max_row{0, 0, 0.0, std::nullopt};
  double benchmark = 0;  // x^0.293, reported next to mean, never asserted
};

struct SweepResult {
  std::vector<SweepRow> rows;
  SweepSummary summary;
};

struct SweepOptions {
  bool with_c = false;
  bool verify = false;  // cross-check every row against the field oracle
  unsigned workers = 0;  // 0: hardware concurrency
  u64 block_size = 65536;
  oracle::OracleOptions oracle;
  arith::FactorOptions factor;
};

namespace detail {

inline SweepRow sweep_row(u64 e, u64 p, const SweepOptions& opt,
                          arith::OrderCache& cache) {
  cycles::PowerMapInstance inst;
  inst.e = e;
  inst.p = p;
  inst.k = 1;
  inst.n = p - 1;
  try {
    inst.n_fact = arith::factorize(p - 1, opt.factor);
  } catch (const BudgetError& err) {
    throw BudgetError("sweep: cannot factor p-1 for p=" + std::to_string(p) +
                          " within budget; raise it or lower x",
                      err.partial_factors, err.remaining_cofactor);
  }
  auto report = cycles::cycle_count(inst, &cache);
  SweepRow row{p, report.n_cycles, 0.0, std::nullopt};
  if (row.n_cycles > 1 && p > 2)
    row.exponent = std::log(static_cast<double>(row.n_cycles)) /
                   std::log(static_cast<double>(p));
  if (opt.with_c)
    row.c_value = cycles::average_cycle_length(inst, &cache).value;
  if (opt.verify && p <= opt.oracle.field_cap) {
    auto brute = oracle::brute_cycle_count_field(e, p, opt.oracle);
    if (brute.n_cycles != row.n_cycles)
      throw InternalError("sweep --verify: formula " +
                          std::to_string(row.n_cycles) + " != brute " +
                          std::to_string(brute.n_cycles) + " at p=" +
                          std::to_string(p));
  }
  return row;
}

}  // namespace detail

inline SweepResult sweep(u64 e, double x, const SweepOptions& opt = {}) {
  if (e < 2) throw std::domain_error("sweep: e must be >= 2");
  if (!(x >= 2)) throw std::domain_error("sweep: no primes below x");
  std::vector<u64> primes = arith::primes_up_to(x);
  if (primes.empty()) throw std::domain_error("sweep: no primes below x");

  const u64 block_size = std::max<u64>(1, opt.block_size);
  const u64 n_blocks = (primes.size() + block_size - 1) / block_size;
  std::vector<std::vector<SweepRow>> blocks(n_blocks);
  std::vector<std::exception_ptr> failures(n_blocks);
  std::atomic<u64> next_block{0};

  auto work = [&] {
    arith::OrderCache cache(opt.factor);
    for (u64 b = next_block.fetch_add(1); b < n_blocks;
         b = next_block.fetch_add(1)) {
      try {
        u64 lo = b * block_size;
        u64 hi = std::min<u64>(lo + block_size, primes.size());
        blocks[b].reserve(hi - lo);
        for (u64 i = lo; i < hi; ++i)
          blocks[b].push_back(detail::sweep_row(e, primes[i], opt, cache));
      } catch (...) {
        failures[b] = std::current_exception();
      }
    }
  };

  unsigned workers = opt.workers != 0
                         ? opt.workers
                         : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(
      std::min<u64>(workers, n_blocks));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (u64 b = 0; b < n_blocks; ++b)
    if (failures[b]) std::rethrow_exception(failures[b]);

  SweepResult result;
  result.rows.reserve(primes.size());
  for (auto& block : blocks)
    for (auto& row : block) result.rows.push_back(std::move(row));

  auto& s = result.summary;
  s.e = e;
  s.x = x;
  s.count = result.rows.size();
  for (const auto& row : result.rows) {
    u64 next = s.sum + row.n_cycles;
    if (next < s.sum) throw WidthError("sweep: cycle-count sum overflow");
    s.sum = next;
    if (row.n_cycles > s.max_row.n_cycles) s.max_row = row;
  }
  s.mean = static_cast<double>(s.sum) / static_cast<double>(s.count);
  s.benchmark = std::pow(x, 0.293);
  return result;
}

// Histogram of row exponents in buckets [i*w, (i+1)*w).
struct ExponentHistogram {
  double bucket_width = 0.1;
  std::map<u64, u64> buckets;  // bucket index -> count
};

inline ExponentHistogram exponent_table(const std::vector<SweepRow>& rows,
                                        double bucket_width) {
  if (!(bucket_width > 0))
    throw std::domain_error("exponent_table: bucket width must be positive");
  ExponentHistogram hist;
  hist.bucket_width = bucket_width;
  for (const auto& row : rows)
    ++hist.buckets[static_cast<u64>(row.exponent / bucket_width)];
  return hist;
}

// --- persistence ---------------------------------------------------------

namespace detail {

inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace detail

inline std::string row_csv(const SweepRow& row, bool with_c) {
  std::string line = std::to_string(row.p) + "," +
                     std::to_string(row.n_cycles) + "," +
                     detail::fmt_double(row.exponent);
  if (with_c) {
    const Rational& c = row.c_value ? *row.c_value : Rational(0);
    line += "," + std::to_string(c.num()) + "," + std::to_string(c.den());
  }
  return line;
}

inline std::string row_jsonl(const SweepRow& row, bool with_c) {
  std::string line = "{\"p\":" + std::to_string(row.p) + ",\"n\":" +
                     std::to_string(row.n_cycles) + ",\"exp\":" +
                     detail::fmt_double(row.exponent);
  if (with_c) {
    const Rational& c = row.c_value ? *row.c_value : Rational(0);
    line += ",\"c\":[" + std::to_string(c.num()) + "," +
            std::to_string(c.den()) + "]";
  }
  return line + "}";
}

inline std::string summary_json(const SweepSummary& s) {
  return "{\"summary\":{\"e\":" + std::to_string(s.e) + ",\"x\":" +
         detail::fmt_double(s.x) + ",\"count\":" + std::to_string(s.count) +
         ",\"sum\":" + std::to_string(s.sum) + ",\"mean\":" +
         detail::fmt_double(s.mean) + ",\"benchmark\":" +
         detail::fmt_double(s.benchmark) + ",\"max_p\":" +
         std::to_string(s.max_row.p) + ",\"max_n\":" +
         std::to_string(s.max_row.n_cycles) + "}}";
}

inline void write_csv(const std::vector<SweepRow>& rows, bool with_c,
                      std::ostream& out) {
  out << (with_c ? "p,n_cycles,exponent,c_num,c_den" : "p,n_cycles,exponent")
      << "\n";
  for (const auto& row : rows) out << row_csv(row, with_c) << "\n";
}

inline void write_jsonl(const std::vector<SweepRow>& rows, bool with_c,
                        std::ostream& out) {
  for (const auto& row : rows) out << row_jsonl(row, with_c) << "\n";
}

}  // namespace powcycles::stats
