#pragma once

// Brute-force ground truth: walk the actual functional graph of x -> x^e on
// F_p^x (or its cyclic model t -> e*t on Z/n) and measure cycles directly.
// Everything here is O(n) with flat arrays; nothing consults the formulas it
// is used to verify.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "powcycles/arith.hpp"
#include "powcycles/errors.hpp"
#include "powcycles/rational.hpp"

namespace powcycles::oracle {

using arith::u32;
using arith::u64;

struct GraphSummary {
  u64 n_nodes = 0;
  u64 n_cycles = 0;
  std::vector<u64> cycle_lengths;  // sorted ascending (canonical multiset)
  u64 cyclic_nodes = 0;
};

struct OracleOptions {
  u64 field_cap = 1'000'000;
  u64 cyclic_cap = 10'000'000;
};

namespace detail {

// One pass over all nodes with visited-state marking. Each node is walked
// at most twice: once on its path, once when its path is finalized.
template <typename NextFn>
GraphSummary census(u64 n_nodes, NextFn&& next) {
  GraphSummary summary;
  summary.n_nodes = n_nodes;
  std::vector<std::uint8_t> state(n_nodes, 0);  // 0 new, 1 on path, 2 done
  std::vector<u32> position(n_nodes, 0);
  std::vector<u32> path;
  for (u64 start = 0; start < n_nodes; ++start) {
    if (state[start] != 0) continue;
    path.clear();
    u64 x = start;
    while (state[x] == 0) {
      state[x] = 1;
      position[x] = static_cast<u32>(path.size());
      path.push_back(static_cast<u32>(x));
      x = next(x);
    }
    if (state[x] == 1) {
      // Closed a new cycle inside the current path.
      u64 length = path.size() - position[x];
      summary.cycle_lengths.push_back(length);
      summary.cyclic_nodes += length;
    }
    for (u32 node : path) state[node] = 2;
  }
  std::sort(summary.cycle_lengths.begin(), summary.cycle_lengths.end());
  summary.n_cycles = summary.cycle_lengths.size();
  return summary;
}

inline void check_cap(u64 size, u64 cap, const char* what) {
  if (size > cap)
    throw BudgetError(std::string(what) + ": size " + std::to_string(size) +
                      " exceeds brute-force cap " + std::to_string(cap));
}

}  // namespace detail

// Cycle census of x -> x^e mod p on {1, ..., p-1}.
inline GraphSummary brute_cycle_count_field(u64 e, u64 p,
                                            const OracleOptions& opt = {}) {
  if (e < 2) throw std::domain_error("brute_cycle_count_field: e >= 2");
  if (p < 2 || !arith::is_prime(p))
    throw std::domain_error("brute_cycle_count_field: p must be prime");
  detail::check_cap(p, opt.field_cap, "brute_cycle_count_field");
  return detail::census(p - 1, [e, p](u64 idx) {
    return arith::pow_mod(idx + 1, e, p) - 1;
  });
}

// Cycle census of t -> e*t mod n on {0, ..., n-1}; the cyclic model of the
// field map when n = q - 1.
inline GraphSummary brute_cycle_count_cyclic(u64 e, u64 n,
                                             const OracleOptions& opt = {}) {
  if (e < 2) throw std::domain_error("brute_cycle_count_cyclic: e >= 2");
  if (n == 0) throw std::domain_error("brute_cycle_count_cyclic: n >= 1");
  detail::check_cap(n, opt.cyclic_cap, "brute_cycle_count_cyclic");
  return detail::census(n, [e, n](u64 t) { return arith::mul_mod(e, t, n); });
}

// Length of the cycle eventually reached from seed x under x -> x^e mod p,
// found with Brent's power-of-two restart scheme.
inline u64 eventual_cycle_length(u64 e, u64 p, u64 x,
                                 const OracleOptions& opt = {}) {
  if (e < 2) throw std::domain_error("eventual_cycle_length: e >= 2");
  if (p < 2 || !arith::is_prime(p))
    throw std::domain_error("eventual_cycle_length: p must be prime");
  if (x < 1 || x > p - 1)
    throw std::domain_error("eventual_cycle_length: seed out of range");
  detail::check_cap(p, opt.field_cap, "eventual_cycle_length");
  u64 power = 1, length = 1;
  u64 tortoise = x;
  u64 hare = arith::pow_mod(x, e, p);
  while (tortoise != hare) {
    if (power == length) {
      tortoise = hare;
      power <<= 1;
      length = 0;
    }
    hare = arith::pow_mod(hare, e, p);
    ++length;
  }
  return length;
}

// Exact mean over all seeds in {1, ..., p-1} of the eventual cycle length.
inline Rational brute_average_cycle_length(u64 e, u64 p,
                                           const OracleOptions& opt = {}) {
  if (e < 2) throw std::domain_error("brute_average_cycle_length: e >= 2");
  if (p < 2 || !arith::is_prime(p))
    throw std::domain_error("brute_average_cycle_length: p must be prime");
  detail::check_cap(p, opt.field_cap, "brute_average_cycle_length");
  const u64 n = p - 1;
  std::vector<std::uint8_t> state(n, 0);
  std::vector<u32> position(n, 0);
  std::vector<u64> reached(n, 0);  // eventual cycle length per node
  std::vector<u32> path;
  auto next = [e, p](u64 idx) { return arith::pow_mod(idx + 1, e, p) - 1; };
  for (u64 start = 0; start < n; ++start) {
    if (state[start] != 0) continue;
    path.clear();
    u64 x = start;
    while (state[x] == 0) {
      state[x] = 1;
      position[x] = static_cast<u32>(path.size());
      path.push_back(static_cast<u32>(x));
      x = next(x);
    }
    u64 value;
    std::size_t tail_end;  // nodes path[0..tail_end) hang off the cycle
    if (state[x] == 1) {
      value = path.size() - position[x];
      tail_end = position[x];
      for (std::size_t i = tail_end; i < path.size(); ++i)
        reached[path[i]] = value;
    } else {
      value = reached[x];
      tail_end = path.size();
    }
    for (std::size_t i = 0; i < tail_end; ++i) reached[path[i]] = value;
    for (u32 node : path) state[node] = 2;
  }
  unsigned __int128 sum = 0;
  for (u64 v : reached) sum += v;
  return Rational::from_wide(sum, n);
}

}  // namespace powcycles::oracle
