#pragma once

// Constructive searches for primes whose power map has many cycles.
//
//   hunt_large:       m = e^k - 1 forces ord_e(m) = k, so the least prime
//                     p = 1 (mod m) has N(e, p) >= phi(m)/k.
//   hunt_average:     moduli built as products of nu distinct primes r with
//                     r - 1 | M_v = lcm[1..v]; such m have ord_e(m) | M_v,
//                     so every prime p = 1 (mod m) below x contributes
//                     N(e, p) >= phi(m)/ord_e(m).
//   hunt_prime_power: m coprime to e*p with lambda(m) | M_v gives
//                     N(e, p^k) >= m/lambda(m) at k = ord_p(m).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "powcycles/arith.hpp"
#include "powcycles/cycles.hpp"
#include "powcycles/errors.hpp"
#include "powcycles/rational.hpp"

namespace powcycles::hunt {

using arith::u32;
using arith::u64;
using arith::u128;

// One found prime: the modulus that produced it, the exact cycle count, the
// guaranteed lower bound phi(m)/ord_e(m), and the empirical exponent.
struct HuntRecord {
  u64 e;
  u64 k;  // ord_e(m)
  u64 m;
  u64 p;
  Rational guaranteed_lower;
  u64 n_cycles;
  double exponent;  // log n_cycles / log p
};

struct HuntMiss {
  u64 k;
  u64 m;
  u64 p_cap;  // no prime p = 1 (mod m) was found at or below this
};

struct HuntLargeResult {
  std::vector<HuntRecord> records;
  std::vector<HuntMiss> misses;
};

namespace detail {

inline double exponent_of(u64 n_cycles, u64 p) {
  if (n_cycles <= 1 || p <= 2) return 0.0;
  return std::log(static_cast<double>(n_cycles)) /
         std::log(static_cast<double>(p));
}

inline void check_record(const HuntRecord& r) {
  if (r.m == 0 || r.p % r.m != 1 % r.m || std::gcd(r.m, r.e) != 1 ||
      Rational(r.n_cycles) < r.guaranteed_lower)
    throw InternalError("hunt: record violates its guarantee (m=" +
                        std::to_string(r.m) + ", p=" + std::to_string(r.p) +
                        ")");
}

// Lexicographic k-combinations of {0, ..., n-1}; fn returns false to stop.
template <typename Fn>
void for_each_combination(u64 n, u64 k, Fn&& fn) {
  if (k > n) return;
  if (k == 0) {
    fn(std::vector<u64>{});
    return;
  }
  std::vector<u64> idx(k);
  for (u64 i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    if (!fn(static_cast<const std::vector<u64>&>(idx))) return;
    // advance
    u64 i = k;
    while (i > 0) {
      --i;
      if (idx[i] != i + n - k) break;
      if (i == 0) return;
    }
    if (idx[i] == i + n - k) return;
    ++idx[i];
    for (u64 j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace detail

// For each k in [k_min, k_max]: m = e^k - 1, scan p = j*m + 1 for the least
// prime at or below p_cap, and evaluate N(e, p) exactly. Misses are reported,
// not thrown. ord_e(e^k - 1) = k is re-derived for every record.
inline HuntLargeResult hunt_large(u64 e, u64 k_min, u64 k_max, u64 p_cap,
                                  const arith::FactorOptions& opt = {}) {
  if (e < 2) throw std::domain_error("hunt_large: e must be >= 2");
  if (k_min < 1 || k_min > k_max)
    throw std::domain_error("hunt_large: need 1 <= k_min <= k_max");
  if (p_cap < 2) throw std::domain_error("hunt_large: p_cap must be >= 2");
  HuntLargeResult result;
  arith::OrderCache cache(opt);
  for (u64 k = k_min; k <= k_max; ++k) {
    u64 m = arith::checked_pow(e, k) - 1;
    u64 order = m == 1 ? 1 : cache.order(e, m);
    if (order != k)
      throw InternalError("hunt_large: ord_e(e^k-1) != k at k=" +
                          std::to_string(k));
    u64 found = 0;
    for (u64 j = 1; j <= (p_cap - 1) / m; ++j) {
      u64 p = j * m + 1;
      if (arith::is_prime(p)) {
        found = p;
        break;
      }
    }
    if (found == 0) {
      result.misses.push_back({k, m, p_cap});
      continue;
    }
    auto inst = cycles::make_instance(e, found, 1, opt);
    auto report = cycles::cycle_count(inst, &cache);
    u64 phi_m = arith::euler_phi(arith::factorize(m, opt));
    HuntRecord rec{e,
                   k,
                   m,
                   found,
                   Rational(phi_m, k),
                   report.n_cycles,
                   detail::exponent_of(report.n_cycles, found)};
    detail::check_record(rec);
    result.records.push_back(rec);
  }
  return result;
}

// Parameters of the shifted-prime construction: v = log u / log log u,
// w = v^(1/0.2961), M_v = lcm[1..v], Q the primes r in [w/(log w)^kappa, w]
// with r - 1 | M_v and r not dividing e, and nu = floor(log u / log w) the
// number of prime factors per product.
struct ConstructionParams {
  u64 e = 2;
  double u = 0;
  double kappa = 1.0;
  double v = 0;
  double w = 0;
  u64 m_v = 1;
  std::vector<u64> q_set;  // sorted ascending
  u64 nu = 0;
};

// Density exponent of smooth shifted primes driving w = v^(1/0.2961).
inline constexpr double kSmoothShiftExponent = 0.2961;

inline ConstructionParams build_construction(u64 e, double u, double kappa) {
  if (e < 2) throw std::domain_error("build_construction: e must be >= 2");
  if (!(u > 10)) throw std::domain_error("build_construction: u must be > 10");
  if (!(kappa > 0))
    throw std::domain_error("build_construction: kappa must be positive");
  ConstructionParams params;
  params.e = e;
  params.u = u;
  params.kappa = kappa;
  params.v = std::log(u) / std::log(std::log(u));
  u64 v_floor = static_cast<u64>(params.v);
  if (v_floor < 1) throw std::domain_error("build_construction: u too small");
  params.w = std::pow(params.v, 1.0 / kSmoothShiftExponent);
  params.m_v = 1;
  for (u64 i = 2; i <= v_floor; ++i)
    params.m_v = arith::checked_lcm(params.m_v, i);
  params.nu = static_cast<u64>(std::log(u) / std::log(params.w));
  double lo = params.w / std::pow(std::log(params.w), kappa);
  for (u64 d : arith::divisors(arith::factorize(params.m_v))) {
    u64 r = d + 1;
    double rd = static_cast<double>(r);
    if (rd < lo || rd > params.w) continue;
    if (e % r == 0) continue;
    if (!arith::is_prime(r)) continue;
    params.q_set.push_back(r);
  }
  std::sort(params.q_set.begin(), params.q_set.end());
  return params;
}

// Products of nu distinct primes from Q, in lexicographic combination order,
// up to `limit` of them. Each product is checked against the window
// (w/(log w)^kappa)^nu <= m <= w^nu, which holds by construction.
inline std::vector<u64> enumerate_products(const ConstructionParams& params,
                                           u64 limit) {
  if (params.q_set.size() < params.nu)
    throw ThinConstructionError(params.q_set.size(), params.nu);
  std::vector<u64> out;
  if (limit == 0) return out;
  double log_lo = params.nu * (std::log(params.w) -
                               params.kappa * std::log(std::log(params.w)));
  double log_hi = params.nu * std::log(params.w);
  detail::for_each_combination(
      params.q_set.size(), params.nu, [&](const std::vector<u64>& idx) {
        u64 m = 1;
        for (u64 i : idx) m = arith::checked_mul(m, params.q_set[i]);
        double log_m = std::log(static_cast<double>(m));
        if (log_m < log_lo - 1e-9 || log_m > log_hi + 1e-9)
          throw InternalError("enumerate_products: product escaped window");
        out.push_back(m);
        return out.size() < limit;
      });
  return out;
}

struct HuntAverageResult {
  ConstructionParams params;
  std::vector<HuntRecord> records;  // sorted by (m, p)
  u64 sum_pi = 0;                   // sum over m of pi(x; m, 1)
  u64 distinct_primes = 0;          // each prime counted once across all m
  double mean_n_over_found = 0.0;
};

// Build the construction, enumerate up to products_limit moduli m, and for
// each collect every prime p <= x with p = 1 (mod m). Duplicate primes stay
// in the records but are de-duplicated in distinct_primes.
inline HuntAverageResult hunt_average(u64 e, double u, double kappa, double x,
                                      u64 products_limit,
                                      const arith::FactorOptions& opt = {}) {
  HuntAverageResult result;
  result.params = build_construction(e, u, kappa);
  std::vector<u64> products = enumerate_products(result.params, products_limit);
  std::sort(products.begin(), products.end());
  arith::OrderCache cache(opt);
  std::unordered_set<u64> primes_seen;
  u128 n_total = 0;
  u64 x_limit = x >= 2 ? static_cast<u64>(x) : 0;
  for (u64 m : products) {
    // ord and phi from the known prime factors of m (products are squarefree).
    u64 order = 1, phi_m = 1;
    for (u64 r : result.params.q_set) {
      if (m % r != 0) continue;
      order = arith::checked_lcm(order, cache.order(e, r));
      phi_m *= r - 1;
    }
    if (result.params.m_v % order != 0)
      throw InternalError("hunt_average: ord_e(m) does not divide M_v");
    for (u64 p : arith::primes_one_mod(m, x_limit)) {
      auto inst = cycles::make_instance(e, p, 1, opt);
      auto report = cycles::cycle_count(inst, &cache);
      HuntRecord rec{e,
                     order,
                     m,
                     p,
                     Rational(phi_m, order),
                     report.n_cycles,
                     detail::exponent_of(report.n_cycles, p)};
      detail::check_record(rec);
      result.records.push_back(rec);
      primes_seen.insert(p);
      n_total += report.n_cycles;
    }
  }
  std::sort(result.records.begin(), result.records.end(),
            [](const HuntRecord& a, const HuntRecord& b) {
              return a.m != b.m ? a.m < b.m : a.p < b.p;
            });
  result.sum_pi = result.records.size();
  result.distinct_primes = primes_seen.size();
  if (!result.records.empty())
    result.mean_n_over_found = static_cast<double>(n_total) /
                               static_cast<double>(result.records.size());
  return result;
}

// One candidate modulus in the prime-power hunt.
struct PrimePowerRecord {
  u64 m;
  u64 lambda_m;
  u64 k;           // ord_p(m)
  Rational bound;  // m / lambda(m)
  std::optional<u64> verified_n;  // N(e, p^k) when p^k - 1 was tractable
};

// Builds m as products of up to max_factors distinct primes r with
// r - 1 | M_v and r not dividing e*p, computes the m/lambda(m) bound at
// k = ord_p(m), and verifies N(e, p^k) >= bound whenever p^k - 1 both fits
// in 64 bits and factors within budget.
inline std::vector<PrimePowerRecord> hunt_prime_power(
    u64 e, u64 p, u64 v, u64 max_factors,
    const arith::FactorOptions& opt = {}) {
  if (e < 2) throw std::domain_error("hunt_prime_power: e must be >= 2");
  if (!arith::is_prime(p))
    throw std::domain_error("hunt_prime_power: p must be prime");
  if (v < 1) throw std::domain_error("hunt_prime_power: v must be >= 1");
  u64 m_v = 1;
  for (u64 i = 2; i <= v; ++i) m_v = arith::checked_lcm(m_v, i);
  std::vector<u64> eligible;
  for (u64 d : arith::divisors(arith::factorize(m_v))) {
    u64 r = d + 1;
    if (e % r == 0 || r == p) continue;
    if (arith::is_prime(r)) eligible.push_back(r);
  }
  std::sort(eligible.begin(), eligible.end());
  std::vector<PrimePowerRecord> records;
  arith::OrderCache cache(opt);
  for (u64 size = 1; size <= std::min<u64>(max_factors, eligible.size());
       ++size) {
    detail::for_each_combination(
        eligible.size(), size, [&](const std::vector<u64>& idx) {
          PrimePowerRecord rec;
          rec.m = 1;
          rec.lambda_m = 1;
          u64 k = 1;
          for (u64 i : idx) {
            u64 r = eligible[i];
            rec.m = arith::checked_mul(rec.m, r);
            rec.lambda_m = arith::checked_lcm(rec.lambda_m, r - 1);
            k = arith::checked_lcm(k, cache.order(p, r));
          }
          rec.k = k;
          if (m_v % rec.lambda_m != 0 || rec.lambda_m % rec.k != 0)
            throw InternalError("hunt_prime_power: lambda/order chain broken");
          rec.bound = Rational(rec.m, rec.lambda_m);
          try {
            auto inst = cycles::make_instance(e, p, rec.k, opt);
            auto report = cycles::cycle_count(inst, &cache);
            if (Rational(report.n_cycles) < rec.bound)
              throw InternalError("hunt_prime_power: verified N below bound");
            rec.verified_n = report.n_cycles;
          } catch (const WidthError&) {
            // p^k over 64 bits: leave unverified.
          } catch (const BudgetError&) {
            // p^k - 1 out of factoring reach: leave unverified.
          }
          records.push_back(std::move(rec));
          return true;
        });
  }
  std::sort(records.begin(), records.end(),
            [](const PrimePowerRecord& a, const PrimePowerRecord& b) {
              return a.m < b.m;
            });
  return records;
}

}  // namespace powcycles::hunt
