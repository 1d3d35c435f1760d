#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "powcycles/arith.hpp"
#include "powcycles/oracle.hpp"
#include "powcycles/rational.hpp"
#include "powcycles/stats.hpp"

using namespace powcycles;
using arith::u64;

namespace {

std::string csv_of(const stats::SweepResult& r, bool with_c) {
  std::ostringstream os;
  stats::write_csv(r.rows, with_c, os);
  return os.str();
}

std::string jsonl_of(const stats::SweepResult& r, bool with_c) {
  std::ostringstream os;
  stats::write_jsonl(r.rows, with_c, os);
  os << stats::summary_json(r.summary) << "\n";
  return os.str();
}

std::string f6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

TEST_CASE("sweep over the first primes") {
  auto result = stats::sweep(2, 10);
  REQUIRE(result.rows.size() == 4);
  std::vector<u64> ps, ns;
  for (auto& row : result.rows) {
    ps.push_back(row.p);
    ns.push_back(row.n_cycles);
  }
  CHECK(ps == std::vector<u64>{2, 3, 5, 7});
  CHECK(ns == std::vector<u64>{1, 1, 1, 2});
  CHECK(result.summary.sum == 5);
  CHECK(result.summary.mean == doctest::Approx(1.25));
  CHECK(result.summary.count == 4);
  CHECK(result.summary.max_row.p == 7);
  CHECK(result.rows[0].exponent == 0.0);  // p = 2 guard
  CHECK(result.rows[3].exponent ==
        doctest::Approx(std::log(2.0) / std::log(7.0)));
}

TEST_CASE("sweep rows are oracle-true for e = 3") {
  auto result = stats::sweep(3, 10);
  std::vector<u64> ns;
  for (auto& row : result.rows) ns.push_back(row.n_cycles);
  CHECK(ns == std::vector<u64>{1, 2, 3, 2});
  for (auto& row : result.rows)
    CHECK(row.n_cycles == oracle::brute_cycle_count_field(3, row.p).n_cycles);
  CHECK(result.summary.sum == 8);
}

TEST_CASE("sweep summary aggregates exactly over its rows") {
  auto result = stats::sweep(2, 5000);
  u64 sum = 0, max_n = 0, max_p = 0;
  for (auto& row : result.rows) {
    sum += row.n_cycles;
    if (row.n_cycles > max_n) {
      max_n = row.n_cycles;
      max_p = row.p;
    }
    CHECK(row.n_cycles >= 1);
    CHECK(row.n_cycles <= row.p - 1);
    CHECK(row.exponent >= 0.0);
    CHECK(row.exponent < 1.0);
  }
  CHECK(result.summary.count == 669);  // pi(5000)
  CHECK(result.summary.sum == sum);
  CHECK(result.summary.max_row.n_cycles == max_n);
  CHECK(result.summary.max_row.p == max_p);
  CHECK(result.summary.mean ==
        doctest::Approx(static_cast<double>(sum) / 669.0));
}

TEST_CASE("sweep is deterministic across worker counts") {
  stats::SweepOptions one;
  one.workers = 1;
  one.block_size = 64;
  stats::SweepOptions four;
  four.workers = 4;
  four.block_size = 64;
  stats::SweepOptions eight;
  eight.workers = 8;
  eight.block_size = 16;
  auto a = stats::sweep(2, 20000, one);
  auto b = stats::sweep(2, 20000, four);
  auto c = stats::sweep(2, 20000, eight);
  CHECK(csv_of(a, false) == csv_of(b, false));
  CHECK(csv_of(a, false) == csv_of(c, false));
  CHECK(jsonl_of(a, false) == jsonl_of(b, false));
  CHECK(a.summary.sum == c.summary.sum);
  CHECK(a.summary.max_row.p == c.summary.max_row.p);
}

TEST_CASE("sweep --verify cross-checks against the oracle") {
  stats::SweepOptions opt;
  opt.verify = true;
  auto result = stats::sweep(2, 2000, opt);
  CHECK(result.summary.count == 303);  // pi(2000); mismatches would have thrown
}

TEST_CASE("sweep with C values") {
  stats::SweepOptions opt;
  opt.with_c = true;
  auto result = stats::sweep(2, 10, opt);
  REQUIRE(result.rows.size() == 4);
  REQUIRE(result.rows[3].c_value.has_value());
  CHECK(*result.rows[3].c_value == Rational(5, 3));
  CHECK(*result.rows[0].c_value == Rational(1));
}

TEST_CASE("sweep rejects an empty domain") {
  CHECK_THROWS_AS(stats::sweep(2, 1.5), std::domain_error);
  CHECK_THROWS_AS(stats::sweep(1, 100), std::domain_error);
}

TEST_CASE("exponent histogram") {
  CHECK(stats::exponent_table({}, 0.1).buckets.empty());
  std::vector<stats::SweepRow> rows{{31, 5, 0.469, std::nullopt}};
  auto hist = stats::exponent_table(rows, 0.1);
  REQUIRE(hist.buckets.size() == 1);
  CHECK(hist.buckets.count(4) == 1);
  CHECK(hist.buckets.at(4) == 1);
  CHECK_THROWS_AS(stats::exponent_table(rows, 0.0), std::domain_error);

  auto sweep = stats::sweep(2, 10000);
  auto full = stats::exponent_table(sweep.rows, 0.1);
  u64 total = 0, low = 0, high = 0;
  for (auto& [bucket, count] : full.buckets) {
    total += count;
    if (bucket <= 4) low += count;
    if (bucket >= 6) high += count;
  }
  CHECK(total == 1229);  // pi(10^4)
  // exponents below 0.5 dominate, with a thin tail past 0.6
  CHECK(low > total * 3 / 4);
  CHECK(high < total / 20);
}

TEST_CASE("csv and jsonl formats are stable") {
  auto result = stats::sweep(2, 10);
  std::string e7 = f6(std::log(2.0) / std::log(7.0));
  CHECK(csv_of(result, false) == "p,n_cycles,exponent\n"
                                 "2,1,0.000000\n"
                                 "3,1,0.000000\n"
                                 "5,1,0.000000\n"
                                 "7,2," + e7 + "\n");
  stats::SweepOptions opt;
  opt.with_c = true;
  auto withc = stats::sweep(2, 10, opt);
  CHECK(csv_of(withc, true) == "p,n_cycles,exponent,c_num,c_den\n"
                               "2,1,0.000000,1,1\n"
                               "3,1,0.000000,1,1\n"
                               "5,1,0.000000,1,1\n"
                               "7,2," + e7 + ",5,3\n");
  CHECK(stats::row_jsonl(withc.rows[3], true) ==
        "{\"p\":7,\"n\":2,\"exp\":" + e7 + ",\"c\":[5,3]}");
  CHECK(stats::summary_json(result.summary) ==
        "{\"summary\":{\"e\":2,\"x\":10.000000,\"count\":4,\"sum\":5,"
        "\"mean\":1.250000,\"benchmark\":" + f6(std::pow(10.0, 0.293)) +
        ",\"max_p\":7,\"max_n\":2}}");
}
