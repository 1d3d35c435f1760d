#pragma once

// Exact evaluation of the cycle structure of the power map x -> x^e on the
// multiplicative group of F_q, q = p^k. The number of cycles is
//
//     N(e, q) = sum over d | rho of phi(d) / ord_e(d),
//
// where rho is the largest divisor of q - 1 coprime to e and ord_e(d) the
// multiplicative order of e mod d. Only q - 1 matters, so prime-power fields
// need no field arithmetic. The average cycle length over all seeds is
//
//     C(e, p) = (1/(p-1)) sum over d | p-1 of phi(d) * ord*_e(d),
//
// with ord*_e(d) the order of e modulo the prime-to-e part of d, squeezed
// between phi(p-1)/(p-1) * ord_e(rho) and ord_e(rho).

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "powcycles/arith.hpp"
#include "powcycles/errors.hpp"
#include "powcycles/rational.hpp"

namespace powcycles::cycles {

using arith::u128;
using arith::u32;
using arith::u64;

// The pair (e, q = p^k) with the group order n = q - 1 and its factorization.
struct PowerMapInstance {
  u64 e = 2;
  u64 p = 2;
  u64 k = 1;
  u64 n = 1;  // p^k - 1
  arith::Factorization n_fact;
};

inline PowerMapInstance make_instance(u64 e, u64 p, u64 k = 1,
                                      const arith::FactorOptions& opt = {}) {
  if (e < 2) throw std::domain_error("make_instance: e must be >= 2");
  if (k < 1) throw std::domain_error("make_instance: k must be >= 1");
  if (!arith::is_prime(p))
    throw std::domain_error("make_instance: " + std::to_string(p) +
                            " is not prime");
  PowerMapInstance inst;
  inst.e = e;
  inst.p = p;
  inst.k = k;
  inst.n = arith::checked_pow(p, k) - 1;
  inst.n_fact = arith::factorize(inst.n, opt);
  return inst;
}

struct Contribution {
  u64 d;
  u64 phi_d;
  u64 ord_d;
  Rational ratio;  // phi(d) / ord_e(d)
};

struct CycleReport {
  PowerMapInstance instance;
  u64 rho = 1;
  std::vector<Contribution> contributions;  // sorted by d, covers all d | rho
  u64 n_cycles = 1;
};

namespace detail {

inline u64 order_of(arith::OrderCache* cache, u64 a, u64 b) {
  return cache != nullptr ? cache->order(a, b) : arith::mult_order(a, b);
}

// Walk all divisors of the given prime powers, carrying (d, phi(d), ord) and
// calling fn at each leaf. `ord` combines per-prime-power values by lcm;
// prime powers whose prime divides `skip_e` contribute nothing to it, which
// turns ord_e into ord*_e when skipping is enabled.
template <typename Fn>
void walk_divisors(const std::vector<arith::Factorization::Entry>& pairs,
                   std::size_t idx, u64 d, u64 phi, u64 ord, u64 e,
                   bool skip_e_part, arith::OrderCache* cache, Fn&& fn) {
  if (idx == pairs.size()) {
    fn(d, phi, ord);
    return;
  }
  walk_divisors(pairs, idx + 1, d, phi, ord, e, skip_e_part, cache, fn);
  const auto& entry = pairs[idx];
  u64 pp = 1, phi_pp = 1;
  for (u32 j = 1; j <= entry.exponent; ++j) {
    pp *= entry.prime;
    phi_pp = (j == 1) ? entry.prime - 1 : phi_pp * entry.prime;
    u64 next_ord = ord;
    if (!(skip_e_part && e % entry.prime == 0))
      next_ord = arith::checked_lcm(ord, order_of(cache, e, pp));
    walk_divisors(pairs, idx + 1, d * pp, phi * phi_pp, next_ord, e,
                  skip_e_part, cache, fn);
  }
}

}  // namespace detail

// N(e, q) with the full per-divisor breakdown. The sum of phi(d)/ord_e(d)
// over d | rho must come out an exact integer; anything else is a bug.
inline CycleReport cycle_count(const PowerMapInstance& inst,
                               arith::OrderCache* cache = nullptr) {
  CycleReport report;
  report.instance = inst;
  std::vector<arith::Factorization::Entry> rho_pairs;
  u64 rho = 1;
  for (const auto& entry : inst.n_fact.pairs) {
    if (inst.e % entry.prime == 0) continue;
    rho_pairs.push_back(entry);
    for (u32 j = 0; j < entry.exponent; ++j) rho *= entry.prime;
  }
  report.rho = rho;
  Rational sum;
  detail::walk_divisors(rho_pairs, 0, 1, 1, 1, inst.e, false, cache,
                        [&](u64 d, u64 phi, u64 ord) {
                          Rational ratio(phi, ord);
                          report.contributions.push_back({d, phi, ord, ratio});
                          sum += ratio;
                        });
  std::sort(report.contributions.begin(), report.contributions.end(),
            [](const Contribution& a, const Contribution& b) {
              return a.d < b.d;
            });
  if (!sum.is_integer())
    throw InternalError("cycle_count: divisor sum is not an integer for e=" +
                        std::to_string(inst.e) + " q=" + std::to_string(inst.n + 1));
  report.n_cycles = sum.num();
  if (report.n_cycles < 1 || report.n_cycles > inst.n)
    throw InternalError("cycle_count: cycle total out of range");
  return report;
}

// ord*_e(n): the order of e modulo the prime-to-e part of n.
inline u64 order_star(u64 e, u64 n, arith::OrderCache* cache = nullptr) {
  if (e < 2) throw std::domain_error("order_star: e must be >= 2");
  return detail::order_of(cache, e, arith::coprime_part(n, e));
}

struct AverageCycleLength {
  PowerMapInstance instance;
  Rational value;  // C(e, p)
  Rational lower;  // phi(p-1)/(p-1) * ord_e(rho)
  u64 upper = 1;   // ord_e(rho)
};

inline AverageCycleLength average_cycle_length(
    const PowerMapInstance& inst, arith::OrderCache* cache = nullptr) {
  if (inst.k != 1)
    throw std::domain_error("average_cycle_length: defined for prime fields");
  AverageCycleLength out;
  out.instance = inst;
  u128 weighted = 0;
  detail::walk_divisors(
      inst.n_fact.pairs, 0, 1, 1, 1, inst.e, /*skip_e_part=*/true, cache,
      [&](u64 /*d*/, u64 phi, u64 ord_star_d) {
        weighted += static_cast<u128>(phi) * ord_star_d;
      });
  out.value = Rational::from_wide(weighted, inst.n);
  out.upper = order_star(inst.e, inst.n, cache);
  out.lower = Rational::from_wide(
      static_cast<u128>(arith::euler_phi(inst.n_fact)) * out.upper, inst.n);
  if (out.value < out.lower || Rational(out.upper) < out.value)
    throw InternalError("average_cycle_length: bound violated");
  return out;
}

struct PrimePowerBound {
  u64 k;           // ord_p(m), so that m | p^k - 1
  Rational bound;  // m / lambda(m), a lower bound on N(e, p^k)
};

// The small-lambda route to many cycles in prime-power fields: pick m coprime
// to e*p, let k = ord_p(m); then m divides rho(p^k) and
// N(e, p^k) >= phi(m)/ord_e(m) >= m/lambda(m).
inline PrimePowerBound prime_power_lower_bound(
    u64 e, u64 p, u64 m, const arith::FactorOptions& opt = {}) {
  if (e < 2) throw std::domain_error("prime_power_lower_bound: e must be >= 2");
  if (!arith::is_prime(p))
    throw std::domain_error("prime_power_lower_bound: p must be prime");
  if (m == 0) throw std::domain_error("prime_power_lower_bound: m >= 1");
  if (std::gcd(m, e) != 1 || std::gcd(m, p) != 1)
    throw std::domain_error(
        "prime_power_lower_bound: m must be coprime to e and p");
  PrimePowerBound out;
  out.k = arith::mult_order(p, m, opt);
  out.bound =
      Rational(m, arith::carmichael_lambda(arith::factorize(m, opt)));
  return out;
}

}  // namespace powcycles::cycles
