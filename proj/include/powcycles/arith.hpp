#pragma once

// Exact integer number theory on 64-bit values: deterministic primality,
// factorization (trial division + seeded Brent rho with an effort budget),
// divisor enumeration, Euler phi, Carmichael lambda, multiplicative order by
// divisor descent, coprime part, prime sieving and progression counts.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "powcycles/errors.hpp"

namespace powcycles::arith {

using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;

inline u64 mul_mod(u64 a, u64 b, u64 m) {
  return static_cast<u64>(static_cast<u128>(a) * b % m);
}

inline u64 pow_mod(u64 base, u64 exp, u64 m) {
  if (m == 1) return 0;
  u64 result = 1;
  base %= m;
  while (exp > 0) {
    if (exp & 1) result = mul_mod(result, base, m);
    base = mul_mod(base, base, m);
    exp >>= 1;
  }
  return result;
}

inline u64 checked_mul(u64 a, u64 b) {
  u128 p = static_cast<u128>(a) * b;
  if (p > static_cast<u128>(~static_cast<u64>(0)))
    throw WidthError("product exceeds 64 bits");
  return static_cast<u64>(p);
}

// base^exp, throwing WidthError instead of wrapping.
inline u64 checked_pow(u64 base, u64 exp) {
  u64 result = 1;
  for (u64 i = 0; i < exp; ++i) result = checked_mul(result, base);
  return result;
}

inline u64 checked_lcm(u64 a, u64 b) {
  if (a == 0 || b == 0) return 0;
  return checked_mul(a / std::gcd(a, b), b);
}

inline u64 isqrt(u64 n) {
  if (n == 0) return 0;
  u64 r = static_cast<u64>(std::sqrt(static_cast<double>(n)));
  if (r > 4294967295ull) r = 4294967295ull;  // isqrt of a u64 fits 32 bits
  while (r * r > n) --r;
  while (r < 4294967295ull && (r + 1) * (r + 1) <= n) ++r;
  return r;
}

// Deterministic Miller-Rabin for the full 64-bit range. The witness set
// {2, 325, 9375, 28178, 450775, 9780504, 1795265022} has no strong
// pseudoprimes below 2^64.
inline bool is_prime(u64 n) {
  if (n < 2) return false;
  for (u64 p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull,
                29ull, 31ull, 37ull}) {
    if (n % p == 0) return n == p;
  }
  if (n < 41 * 41) return true;
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (u64 a : {2ull, 325ull, 9375ull, 28178ull, 450775ull, 9780504ull,
                1795265022ull}) {
    a %= n;
    if (a == 0) continue;
    u64 x = pow_mod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool witness = true;
    for (int i = 0; i < s - 1; ++i) {
      x = mul_mod(x, x, n);
      if (x == n - 1) {
        witness = false;
        break;
      }
    }
    if (witness) return false;
  }
  return true;
}

// Prime factorization as ordered (prime, exponent) pairs. The empty list is
// the factorization of 1.
struct Factorization {
  struct Entry {
    u64 prime;
    u32 exponent;
  };
  std::vector<Entry> pairs;
  u64 value = 1;
};

// Effort knobs for factorization. `budget` counts iterations of the rho
// cycle walk across one factorize() call; trial division is not metered.
struct FactorOptions {
  u64 budget = 100'000'000;
  u64 seed = 0x9e3779b97f4a7c15ull;
};

namespace detail {

inline constexpr u64 kTrialDivisionBound = 100'000;

inline const std::vector<u32>& trial_primes() {
  static const std::vector<u32> primes = [] {
    std::vector<bool> composite(kTrialDivisionBound + 1, false);
    std::vector<u32> out;
    for (u64 i = 2; i <= kTrialDivisionBound; ++i) {
      if (composite[i]) continue;
      out.push_back(static_cast<u32>(i));
      for (u64 j = i * i; j <= kTrialDivisionBound; j += i) composite[j] = true;
    }
    return out;
  }();
  return primes;
}

struct SplitMix {
  u64 state;
  u64 next() {
    u64 z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
};

// Brent's variant of the rho method with batched gcds. `budget` is shared
// across calls within one factorize() and counts walk steps.
inline u64 brent_rho(u64 n, u64& budget, SplitMix& rng) {
  while (true) {
    u64 c = rng.next() % (n - 2) + 1;
    u64 y = rng.next() % n;
    u64 g = 1, q = 1, ys = y, x = y;
    const u64 batch = 128;
    for (u64 r = 1; g == 1; r <<= 1) {
      if (budget < r) throw BudgetError("factorization budget exceeded");
      budget -= r;
      x = y;
      for (u64 i = 0; i < r; ++i) y = (mul_mod(y, y, n) + c) % n;
      for (u64 k = 0; k < r && g == 1; k += batch) {
        ys = y;
        u64 steps = std::min(batch, r - k);
        if (budget < steps) throw BudgetError("factorization budget exceeded");
        budget -= steps;
        for (u64 i = 0; i < steps; ++i) {
          y = (mul_mod(y, y, n) + c) % n;
          q = mul_mod(q, x > y ? x - y : y - x, n);
        }
        g = std::gcd(q, n);
      }
    }
    if (g == n) {
      // The batched gcd overshot; replay one step at a time.
      g = 1;
      while (g == 1) {
        ys = (mul_mod(ys, ys, n) + c) % n;
        g = std::gcd(x > ys ? x - ys : ys - x, n);
        if (budget == 0) throw BudgetError("factorization budget exceeded");
        --budget;
      }
    }
    if (g != n) return g;
  }
}

}  // namespace detail

inline Factorization factorize(u64 n, const FactorOptions& opt = {}) {
  if (n == 0) throw std::domain_error("factorize: n must be positive");
  Factorization f;
  f.value = n;
  u64 rem = n;
  for (u32 p : detail::trial_primes()) {
    if (static_cast<u64>(p) * p > rem) break;
    if (rem % p == 0) {
      u32 e = 0;
      while (rem % p == 0) {
        rem /= p;
        ++e;
      }
      f.pairs.push_back({p, e});
    }
  }
  if (rem == 1) return f;
  if (rem <= detail::kTrialDivisionBound * detail::kTrialDivisionBound ||
      is_prime(rem)) {
    // No factor <= the trial bound, so a cofactor below its square is prime.
    f.pairs.push_back({rem, 1});
    return f;
  }
  u64 budget = opt.budget;
  detail::SplitMix rng{opt.seed ^ (n * 0xd1342543de82ef95ull)};
  std::vector<u64> pending{rem};
  std::vector<u64> found;
  try {
    while (!pending.empty()) {
      u64 m = pending.back();
      if (is_prime(m)) {
        pending.pop_back();
        found.push_back(m);
        continue;
      }
      u64 d = detail::brent_rho(m, budget, rng);
      pending.pop_back();
      pending.push_back(d);
      pending.push_back(m / d);
    }
  } catch (const BudgetError&) {
    std::sort(found.begin(), found.end());
    std::vector<std::pair<u64, u32>> partial;
    for (const auto& e : f.pairs) partial.emplace_back(e.prime, e.exponent);
    for (u64 p : found) {
      if (!partial.empty() && partial.back().first == p)
        ++partial.back().second;
      else
        partial.emplace_back(p, 1);
    }
    u64 remaining = 1;
    for (u64 m : pending) remaining = checked_mul(remaining, m);
    throw BudgetError("factorize(" + std::to_string(n) +
                          "): budget exceeded",
                      std::move(partial), remaining);
  }
  std::sort(found.begin(), found.end());
  for (u64 p : found) {
    if (!f.pairs.empty() && f.pairs.back().prime == p)
      ++f.pairs.back().exponent;
    else
      f.pairs.push_back({p, 1});
  }
  return f;
}

inline u64 euler_phi(const Factorization& f) {
  u64 phi = 1;
  for (const auto& e : f.pairs) {
    phi *= e.prime - 1;
    for (u32 i = 1; i < e.exponent; ++i) phi *= e.prime;
  }
  return phi;
}

// P(k): the largest prime divisor, with P(1) = 1.
inline u64 largest_prime_factor(const Factorization& f) {
  return f.pairs.empty() ? 1 : f.pairs.back().prime;
}

inline u64 divisor_count(const Factorization& f) {
  u64 count = 1;
  for (const auto& e : f.pairs) count *= e.exponent + 1;
  return count;
}

// All divisors, in no particular order (callers sort if they care).
inline std::vector<u64> divisors(const Factorization& f) {
  std::vector<u64> out{1};
  for (const auto& e : f.pairs) {
    std::size_t base = out.size();
    u64 pp = 1;
    for (u32 i = 1; i <= e.exponent; ++i) {
      pp *= e.prime;
      for (std::size_t j = 0; j < base; ++j) out.push_back(out[j] * pp);
    }
  }
  return out;
}

// (d, phi(d)) for every divisor d, in the same unordered scheme.
inline std::vector<std::pair<u64, u64>> divisors_with_phi(
    const Factorization& f) {
  std::vector<std::pair<u64, u64>> out{{1, 1}};
  for (const auto& e : f.pairs) {
    std::size_t base = out.size();
    u64 pp = 1, phi_pp = 1;
    for (u32 i = 1; i <= e.exponent; ++i) {
      phi_pp = (i == 1) ? e.prime - 1 : phi_pp * e.prime;
      pp *= e.prime;
      for (std::size_t j = 0; j < base; ++j)
        out.emplace_back(out[j].first * pp, out[j].second * phi_pp);
    }
  }
  return out;
}

// lambda(2) = 1, lambda(4) = 2, lambda(2^a) = 2^(a-2) for a >= 3,
// lambda(p^a) = p^(a-1)(p-1) for odd p; lcm over the prime powers.
inline u64 carmichael_lambda(const Factorization& f) {
  u64 lambda = 1;
  for (const auto& e : f.pairs) {
    u64 part;
    if (e.prime == 2) {
      if (e.exponent == 1)
        part = 1;
      else if (e.exponent == 2)
        part = 2;
      else
        part = u64{1} << (e.exponent - 2);
    } else {
      part = e.prime - 1;
      for (u32 i = 1; i < e.exponent; ++i) part *= e.prime;
    }
    lambda = checked_lcm(lambda, part);
  }
  return lambda;
}

// rho: n with every prime shared with e divided out completely.
inline u64 coprime_part(u64 n, u64 e) {
  if (n == 0) throw std::domain_error("coprime_part: n must be positive");
  for (u64 g = std::gcd(n, e); g != 1; g = std::gcd(n, e)) {
    while (n % g == 0) n /= g;
  }
  return n;
}

namespace detail {

// Factorization of lambda(b) given b's factorization; prime powers are
// merged with max exponents, which is exactly the lcm.
inline Factorization lambda_factored(const Factorization& fb,
                                     const FactorOptions& opt) {
  std::unordered_map<u64, u32> exps;
  auto fold = [&](u64 prime, u32 exponent) {
    auto& slot = exps[prime];
    slot = std::max(slot, exponent);
  };
  for (const auto& e : fb.pairs) {
    if (e.prime == 2) {
      if (e.exponent >= 3)
        fold(2, e.exponent - 2);
      else if (e.exponent == 2)
        fold(2, 1);
    } else {
      if (e.exponent >= 2) fold(e.prime, e.exponent - 1);
      Factorization fp = factorize(e.prime - 1, opt);
      for (const auto& q : fp.pairs) fold(q.prime, q.exponent);
    }
  }
  Factorization out;
  for (const auto& [p, a] : exps) {
    out.pairs.push_back({p, a});
    for (u32 i = 0; i < a; ++i) out.value = checked_mul(out.value, p);
  }
  std::sort(out.pairs.begin(), out.pairs.end(),
            [](const auto& a, const auto& b) { return a.prime < b.prime; });
  return out;
}

}  // namespace detail

// Multiplicative order of a modulo b, for gcd(a, b) = 1. Starts from
// lambda(b) and strips prime factors while the congruence still holds; never
// iterates successive powers.
inline u64 mult_order(u64 a, u64 b, const FactorOptions& opt = {}) {
  if (b == 0) throw std::domain_error("mult_order: modulus must be positive");
  if (b == 1) return 1;
  if (a < 2) throw std::domain_error("mult_order: base must be >= 2");
  if (std::gcd(a, b) != 1)
    throw std::domain_error("mult_order: " + std::to_string(a) + " and " +
                            std::to_string(b) + " are not coprime");
  Factorization fb = factorize(b, opt);
  Factorization flam = detail::lambda_factored(fb, opt);
  u64 t = flam.value;
  for (const auto& q : flam.pairs) {
    for (u32 i = 0; i < q.exponent; ++i) {
      if (t % q.prime != 0) break;
      u64 candidate = t / q.prime;
      if (pow_mod(a, candidate, b) != 1) break;
      t = candidate;
    }
  }
  return t;
}

// Memoized mult_order keyed by (a, b). One instance per worker/sweep; reads
// and writes are not synchronized.
class OrderCache {
 public:
  OrderCache() = default;
  explicit OrderCache(FactorOptions opt) : opt_(opt) {}

  u64 order(u64 a, u64 b) {
    u128 key = (static_cast<u128>(a) << 64) | b;
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    u64 value = mult_order(a, b, opt_);
    cache_.emplace(key, value);
    return value;
  }

  std::size_t size() const { return cache_.size(); }

 private:
  struct KeyHash {
    std::size_t operator()(u128 key) const {
      u64 lo = static_cast<u64>(key);
      u64 hi = static_cast<u64>(key >> 64);
      u64 z = lo ^ (hi * 0x9e3779b97f4a7c15ull);
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
      return static_cast<std::size_t>(z ^ (z >> 31));
    }
  };
  std::unordered_map<u128, u64, KeyHash> cache_;
  FactorOptions opt_;
};

namespace detail {

template <typename Fn>
inline void sieve_segment(u64 lo, u64 hi, const std::vector<u32>& base,
                          Fn&& fn) {
  std::vector<bool> composite(hi - lo + 1, false);
  for (u32 p : base) {
    u64 pp = static_cast<u64>(p) * p;
    if (pp > hi) break;
    u64 start = std::max(pp, (lo + p - 1) / p * p);
    for (u64 j = start; j <= hi; j += p) composite[j - lo] = true;
  }
  for (u64 v = std::max<u64>(lo, 2); v <= hi; ++v)
    if (!composite[v - lo]) fn(v);
}

}  // namespace detail

// Visits all primes <= limit in increasing order, in segments.
template <typename Fn>
inline void for_each_prime_up_to(u64 limit, Fn&& fn) {
  if (limit < 2) return;
  u64 root = isqrt(limit);
  std::vector<u32> base;
  for (u32 p : detail::trial_primes()) {
    if (p > root) break;
    base.push_back(p);
  }
  if (root > detail::kTrialDivisionBound) {
    // Grow the base past the cached table; segment size keeps memory flat.
    for (u64 v = detail::kTrialDivisionBound + 1; v <= root; ++v)
      if (is_prime(v)) base.push_back(static_cast<u32>(v));
  }
  const u64 segment = 1u << 20;
  for (u64 lo = 2; lo <= limit; lo += segment) {
    u64 hi = std::min(limit, lo + segment - 1);
    detail::sieve_segment(lo, hi, base, fn);
    if (hi == limit) break;
  }
}

// All primes <= x, increasing. x below 2 yields the empty list.
inline std::vector<u64> primes_up_to(double x) {
  std::vector<u64> out;
  if (!(x >= 2)) return out;
  if (x >= 1.8e19) throw WidthError("primes_up_to: bound exceeds 64 bits");
  for_each_prime_up_to(static_cast<u64>(x), [&](u64 p) { out.push_back(p); });
  return out;
}

struct ProgressionCount {
  double x;
  u64 modulus;
  u64 residue;  // normalized to [0, modulus)
  u64 count;
};

// Exact count of primes p <= x with p congruent to a mod k.
inline ProgressionCount count_primes_in_progression(double x, u64 k, i64 a) {
  if (k == 0)
    throw std::domain_error("count_primes_in_progression: modulus >= 1");
  u64 residue = static_cast<u64>(((a % static_cast<i64>(k)) +
                                  static_cast<i64>(k)) %
                                 static_cast<i64>(k));
  ProgressionCount result{x, k, residue, 0};
  if (!(x >= 2)) return result;
  u64 limit = static_cast<u64>(x);
  // Few candidates: test the progression directly. Many: sieve and filter.
  if (limit / k <= 200'000) {
    for (u64 v = (residue == 0 ? k : residue); v <= limit; v += k) {
      if (is_prime(v)) ++result.count;
      if (v > limit - k) break;  // avoid wrap
    }
  } else {
    for_each_prime_up_to(limit, [&](u64 p) {
      if (p % k == residue) ++result.count;
    });
  }
  return result;
}

// Primes p <= limit with p congruent to 1 mod m, increasing. Scans the
// progression candidates, so it stays cheap when m is large; the m = 1
// degenerate case is every prime.
inline std::vector<u64> primes_one_mod(u64 m, u64 limit) {
  if (m == 0) throw std::domain_error("primes_one_mod: modulus >= 1");
  if (m == 1) return primes_up_to(static_cast<double>(limit));
  std::vector<u64> out;
  if (limit <= 1) return out;
  for (u64 j = 1;; ++j) {
    if (j > (limit - 1) / m) break;
    u64 p = j * m + 1;
    if (is_prime(p)) out.push_back(p);
  }
  return out;
}

}  // namespace powcycles::arith
