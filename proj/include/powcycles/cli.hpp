#pragma once

// Command-line surface. Human tables by default, csv/jsonl by flag.
// Exit codes: 0 success, 1 usage error, 2 computational budget or width
// limit exceeded, 3 broken internal invariant (always a bug).

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "powcycles/arith.hpp"
#include "powcycles/cycles.hpp"
#include "powcycles/errors.hpp"
#include "powcycles/hunt.hpp"
#include "powcycles/oracle.hpp"
#include "powcycles/rational.hpp"
#include "powcycles/stats.hpp"

namespace powcycles::cli {

using arith::u64;

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitBudget = 2;
inline constexpr int kExitInternal = 3;

// Environment variable overriding the default factorization budget.
inline constexpr const char* kBudgetEnvVar = "POWCYCLES_BUDGET";

namespace detail {

inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

inline std::string rat_json(const Rational& r) {
  return "[" + std::to_string(r.num()) + "," + std::to_string(r.den()) + "]";
}

inline std::string factor_string(const arith::Factorization& f) {
  if (f.pairs.empty()) return "1";
  std::string out;
  for (std::size_t i = 0; i < f.pairs.size(); ++i) {
    if (i > 0) out += " * ";
    out += std::to_string(f.pairs[i].prime);
    if (f.pairs[i].exponent > 1)
      out += "^" + std::to_string(f.pairs[i].exponent);
  }
  return out;
}

struct Format {
  std::string value = "table";
  bool table() const { return value == "table"; }
  bool csv() const { return value == "csv"; }
  bool jsonl() const { return value == "jsonl"; }
};

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err) {
  CLI::App app{"cycle structure of the power map x -> x^e over prime and "
               "prime-power fields"};
  app.require_subcommand(1);

  arith::FactorOptions factor_opt;
  if (const char* env = std::getenv(kBudgetEnvVar)) {
    try {
      factor_opt.budget = std::stoull(env);
    } catch (const std::exception&) {
      err << "warning: ignoring unparsable " << kBudgetEnvVar << "\n";
    }
  }
  app.add_option("--budget", factor_opt.budget,
                 "factorization effort budget (rho iterations)");
  app.add_option("--seed", factor_opt.seed, "seed for randomized factoring");

  detail::Format format;
  app.add_option("--format", format.value, "output format")
      ->check(CLI::IsMember({"table", "csv", "jsonl"}))
      ->capture_default_str();
  std::string out_path;
  app.add_option("--out", out_path, "write rows to this file");

  // count
  auto* count_cmd =
      app.add_subcommand("count", "evaluate N(e, q) with per-divisor terms");
  u64 count_e = 2, count_p = 0, count_k = 1;
  count_cmd->add_option("--e", count_e, "power-map exponent")
      ->required()
      ->check(CLI::Range(u64{2}, ~u64{0}));
  count_cmd->add_option("--p", count_p, "field characteristic")->required();
  count_cmd->add_option("--k", count_k, "field extension degree")
      ->check(CLI::Range(u64{1}, u64{63}));

  // verify
  auto* verify_cmd = app.add_subcommand(
      "verify", "compare formula, field oracle and cyclic oracle");
  u64 verify_e = 2, verify_p = 0;
  verify_cmd->add_option("--e", verify_e, "power-map exponent")
      ->required()
      ->check(CLI::Range(u64{2}, ~u64{0}));
  verify_cmd->add_option("--p", verify_p, "prime")->required();

  // clength
  auto* clength_cmd = app.add_subcommand(
      "clength", "average cycle length C(e, p) with its bounds");
  u64 clength_e = 2, clength_p = 0;
  clength_cmd->add_option("--e", clength_e, "power-map exponent")
      ->required()
      ->check(CLI::Range(u64{2}, ~u64{0}));
  clength_cmd->add_option("--p", clength_p, "prime")->required();

  // hunt-large
  auto* hlarge_cmd = app.add_subcommand(
      "hunt-large", "least prime p = 1 (mod e^k - 1) for each k in a range");
  u64 hl_e = 2, hl_kmin = 1, hl_kmax = 1, hl_pcap = 1'000'000'000;
  hlarge_cmd->add_option("--e", hl_e, "power-map exponent")
      ->required()
      ->check(CLI::Range(u64{2}, ~u64{0}));
  hlarge_cmd->add_option("--kmin", hl_kmin, "smallest k")->required();
  hlarge_cmd->add_option("--kmax", hl_kmax, "largest k")->required();
  hlarge_cmd->add_option("--pcap", hl_pcap, "prime search cap");

  // hunt-average
  auto* havg_cmd = app.add_subcommand(
      "hunt-average",
      "smooth shifted-prime construction and its primes up to x");
  u64 ha_e = 2, ha_limit = 10;
  double ha_u = 0, ha_kappa = 1.0, ha_x = 0;
  havg_cmd->add_option("--e", ha_e, "power-map exponent")
      ->required()
      ->check(CLI::Range(u64{2}, ~u64{0}));
  havg_cmd->add_option("--u", ha_u, "construction size parameter (> 10)")
      ->required();
  havg_cmd->add_option("--kappa", ha_kappa, "interval-width parameter")
      ->capture_default_str();
  havg_cmd->add_option("--x", ha_x, "prime bound")->required();
  havg_cmd->add_option("--limit", ha_limit, "max products to enumerate")
      ->capture_default_str();

  // hunt-prime-power
  auto* hpp_cmd = app.add_subcommand(
      "hunt-prime-power", "m/lambda(m) lower bounds for N(e, p^k)");
  u64 hpp_e = 2, hpp_p = 0, hpp_v = 4, hpp_max = 3;
  hpp_cmd->add_option("--e", hpp_e, "power-map exponent")
      ->required()
      ->check(CLI::Range(u64{2}, ~u64{0}));
  hpp_cmd->add_option("--p", hpp_p, "field characteristic")->required();
  hpp_cmd->add_option("--v", hpp_v, "smoothness parameter (M_v = lcm[1..v])")
      ->capture_default_str();
  hpp_cmd->add_option("--max-factors", hpp_max, "max primes per modulus")
      ->capture_default_str();

  // sweep
  auto* sweep_cmd =
      app.add_subcommand("sweep", "N(e, p) for every prime p <= x");
  u64 sweep_e = 2;
  double sweep_x = 0, hist_width = 0;
  stats::SweepOptions sweep_opt;
  sweep_opt.factor = factor_opt;
  sweep_cmd->add_option("--e", sweep_e, "power-map exponent")
      ->required()
      ->check(CLI::Range(u64{2}, ~u64{0}));
  sweep_cmd->add_option("--x", sweep_x, "prime bound (>= 3)")->required();
  sweep_cmd->add_flag("--with-c", sweep_opt.with_c,
                      "also compute C(e, p) per row");
  sweep_cmd->add_flag("--verify", sweep_opt.verify,
                      "cross-check each row against the brute-force oracle");
  sweep_cmd->add_option("--workers", sweep_opt.workers,
                        "worker threads (0 = hardware)");
  sweep_cmd->add_option("--block-size", sweep_opt.block_size,
                        "primes per work block");
  sweep_cmd->add_option("--oracle-cap", sweep_opt.oracle.field_cap,
                        "verify rows only up to this p");
  sweep_cmd->add_option("--hist", hist_width,
                        "print an exponent histogram with this bucket width");

  // arithmetic utilities
  auto* factor_cmd = app.add_subcommand("factor", "factor an integer");
  u64 factor_n = 0;
  factor_cmd->add_option("n", factor_n, "integer to factor")->required();

  auto* order_cmd =
      app.add_subcommand("order", "multiplicative order of a modulo m");
  u64 order_a = 0, order_m = 0;
  order_cmd->add_option("--a", order_a, "base")->required();
  order_cmd->add_option("--m", order_m, "modulus")->required();

  auto* lambda_cmd =
      app.add_subcommand("lambda", "Carmichael function of an integer");
  u64 lambda_n = 0;
  lambda_cmd->add_option("n", lambda_n, "argument")->required();

  // Global flags (--format, --out, --budget, --seed) may follow the
  // subcommand name.
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("powcycles");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    // Collapse CLI11's themed exit codes onto the documented 0/1 contract.
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  // Re-propagate globals that may have been set after the subcommand copy.
  sweep_opt.factor = factor_opt;

  auto open_sink = [&](std::ofstream& file) -> std::ostream& {
    if (out_path.empty()) return out;
    file.open(out_path);
    if (!file) throw std::domain_error("cannot open " + out_path);
    return file;
  };

  try {
    if (count_cmd->parsed()) {
      auto inst = cycles::make_instance(count_e, count_p, count_k, factor_opt);
      auto report = cycles::cycle_count(inst);
      if (format.jsonl()) {
        for (const auto& c : report.contributions)
          out << "{\"d\":" << c.d << ",\"phi\":" << c.phi_d << ",\"ord\":"
              << c.ord_d << ",\"ratio\":" << detail::rat_json(c.ratio) << "}\n";
        out << "{\"summary\":{\"e\":" << inst.e << ",\"p\":" << inst.p
            << ",\"k\":" << inst.k << ",\"q\":" << inst.n + 1 << ",\"rho\":"
            << report.rho << ",\"n_cycles\":" << report.n_cycles << "}}\n";
      } else if (format.csv()) {
        out << "d,phi,ord,ratio_num,ratio_den\n";
        for (const auto& c : report.contributions)
          out << c.d << "," << c.phi_d << "," << c.ord_d << ","
              << c.ratio.num() << "," << c.ratio.den() << "\n";
      } else {
        out << "N(" << inst.e << ", " << inst.p;
        if (inst.k > 1) out << "^" << inst.k;
        out << "): group order " << inst.n << " = "
            << detail::factor_string(inst.n_fact) << ", rho = " << report.rho
            << "\n\n";
        out << std::setw(12) << "d" << std::setw(12) << "phi(d)"
            << std::setw(12) << "ord_e(d)" << std::setw(14) << "phi/ord"
            << "\n";
        for (const auto& c : report.contributions)
          out << std::setw(12) << c.d << std::setw(12) << c.phi_d
              << std::setw(12) << c.ord_d << std::setw(14) << c.ratio.str()
              << "\n";
        out << "\ntotal cycles: " << report.n_cycles << "\n";
      }
      return kExitOk;
    }

    if (verify_cmd->parsed()) {
      auto inst = cycles::make_instance(verify_e, verify_p, 1, factor_opt);
      auto report = cycles::cycle_count(inst);
      auto field = oracle::brute_cycle_count_field(verify_e, verify_p);
      auto cyclic = oracle::brute_cycle_count_cyclic(verify_e, verify_p - 1);
      bool ok = report.n_cycles == field.n_cycles &&
                field.n_cycles == cyclic.n_cycles;
      if (format.jsonl()) {
        out << "{\"e\":" << verify_e << ",\"p\":" << verify_p
            << ",\"formula\":" << report.n_cycles << ",\"field\":"
            << field.n_cycles << ",\"cyclic\":" << cyclic.n_cycles
            << ",\"ok\":" << (ok ? "true" : "false") << "}\n";
      } else {
        out << "formula=" << report.n_cycles << " field=" << field.n_cycles
            << " cyclic=" << cyclic.n_cycles << (ok ? " OK" : " MISMATCH")
            << "\n";
      }
      if (!ok) throw InternalError("verify: oracle disagreement");
      return kExitOk;
    }

    if (clength_cmd->parsed()) {
      auto inst = cycles::make_instance(clength_e, clength_p, 1, factor_opt);
      auto acl = cycles::average_cycle_length(inst);
      std::optional<Rational> brute;
      oracle::OracleOptions ocap;
      if (clength_p <= ocap.field_cap)
        brute = oracle::brute_average_cycle_length(clength_e, clength_p, ocap);
      if (format.jsonl()) {
        out << "{\"e\":" << clength_e << ",\"p\":" << clength_p << ",\"c\":"
            << detail::rat_json(acl.value) << ",\"lower\":"
            << detail::rat_json(acl.lower) << ",\"upper\":" << acl.upper;
        if (brute) out << ",\"brute\":" << detail::rat_json(*brute);
        out << "}\n";
      } else {
        out << "C(" << clength_e << ", " << clength_p << ") = "
            << acl.value.str() << " ~ " << detail::fmt_double(acl.value.to_double())
            << "\n";
        out << "bounds: " << acl.lower.str() << " <= C <= " << acl.upper
            << "\n";
        if (brute)
          out << "brute-force check: " << brute->str() << " ("
              << (*brute == acl.value ? "match" : "MISMATCH") << ")\n";
      }
      if (brute && *brute != acl.value)
        throw InternalError("clength: formula disagrees with brute force");
      return kExitOk;
    }

    if (hlarge_cmd->parsed()) {
      auto result = hunt::hunt_large(hl_e, hl_kmin, hl_kmax, hl_pcap,
                                     factor_opt);
      if (format.jsonl()) {
        for (const auto& r : result.records)
          out << "{\"k\":" << r.k << ",\"m\":" << r.m << ",\"p\":" << r.p
              << ",\"lower\":" << detail::rat_json(r.guaranteed_lower)
              << ",\"n\":" << r.n_cycles << ",\"exp\":"
              << detail::fmt_double(r.exponent) << "}\n";
        for (const auto& m : result.misses)
          out << "{\"k\":" << m.k << ",\"m\":" << m.m << ",\"miss\":true}\n";
      } else if (format.csv()) {
        out << "k,m,p,lower_num,lower_den,n_cycles,exponent\n";
        for (const auto& r : result.records)
          out << r.k << "," << r.m << "," << r.p << ","
              << r.guaranteed_lower.num() << "," << r.guaranteed_lower.den()
              << "," << r.n_cycles << "," << detail::fmt_double(r.exponent)
              << "\n";
      } else {
        out << std::setw(4) << "k" << std::setw(12) << "m=e^k-1"
            << std::setw(14) << "p" << std::setw(14) << "phi(m)/k"
            << std::setw(12) << "N(e,p)" << std::setw(10) << "exp" << "\n";
        for (const auto& r : result.records)
          out << std::setw(4) << r.k << std::setw(12) << r.m << std::setw(14)
              << r.p << std::setw(14) << r.guaranteed_lower.str()
              << std::setw(12) << r.n_cycles << std::setw(10)
              << detail::fmt_double(r.exponent) << "\n";
        for (const auto& m : result.misses)
          out << std::setw(4) << m.k << std::setw(12) << m.m
              << "  no prime found up to " << m.p_cap << "\n";
      }
      return kExitOk;
    }

    if (havg_cmd->parsed()) {
      auto result =
          hunt::hunt_average(ha_e, ha_u, ha_kappa, ha_x, ha_limit, factor_opt);
      const auto& cp = result.params;
      if (format.jsonl()) {
        out << "{\"construction\":{\"u\":" << detail::fmt_double(cp.u)
            << ",\"kappa\":" << detail::fmt_double(cp.kappa) << ",\"v\":"
            << detail::fmt_double(cp.v) << ",\"w\":" << detail::fmt_double(cp.w)
            << ",\"m_v\":" << cp.m_v << ",\"nu\":" << cp.nu << ",\"q_size\":"
            << cp.q_set.size() << "}}\n";
        for (const auto& r : result.records)
          out << "{\"m\":" << r.m << ",\"p\":" << r.p << ",\"ord\":" << r.k
              << ",\"lower\":" << detail::rat_json(r.guaranteed_lower)
              << ",\"n\":" << r.n_cycles << ",\"exp\":"
              << detail::fmt_double(r.exponent) << "}\n";
        out << "{\"stats\":{\"sum_pi\":" << result.sum_pi
            << ",\"distinct_primes\":" << result.distinct_primes
            << ",\"mean_n\":" << detail::fmt_double(result.mean_n_over_found)
            << "}}\n";
      } else {
        out << "construction: v = " << detail::fmt_double(cp.v) << ", w = "
            << detail::fmt_double(cp.w) << ", M_v = " << cp.m_v << ", nu = "
            << cp.nu << ", |Q| = " << cp.q_set.size() << "\nQ = {";
        for (std::size_t i = 0; i < cp.q_set.size(); ++i)
          out << (i ? ", " : "") << cp.q_set[i];
        out << "}\n\n";
        out << std::setw(14) << "m" << std::setw(12) << "p" << std::setw(10)
            << "ord_e(m)" << std::setw(16) << "phi(m)/ord" << std::setw(10)
            << "N(e,p)" << std::setw(10) << "exp" << "\n";
        for (const auto& r : result.records)
          out << std::setw(14) << r.m << std::setw(12) << r.p << std::setw(10)
              << r.k << std::setw(16) << r.guaranteed_lower.str()
              << std::setw(10) << r.n_cycles << std::setw(10)
              << detail::fmt_double(r.exponent) << "\n";
        out << "\nprimes found (with multiplicity): " << result.sum_pi
            << ", distinct: " << result.distinct_primes
            << ", mean N over records: "
            << detail::fmt_double(result.mean_n_over_found) << "\n";
      }
      return kExitOk;
    }

    if (hpp_cmd->parsed()) {
      auto records =
          hunt::hunt_prime_power(hpp_e, hpp_p, hpp_v, hpp_max, factor_opt);
      if (format.jsonl()) {
        for (const auto& r : records) {
          out << "{\"m\":" << r.m << ",\"lambda\":" << r.lambda_m << ",\"k\":"
              << r.k << ",\"bound\":" << detail::rat_json(r.bound)
              << ",\"verified_n\":";
          if (r.verified_n)
            out << *r.verified_n;
          else
            out << "null";
          out << "}\n";
        }
      } else {
        out << std::setw(12) << "m" << std::setw(12) << "lambda(m)"
            << std::setw(8) << "k" << std::setw(14) << "m/lambda"
            << std::setw(16) << "N(e,p^k)" << "\n";
        for (const auto& r : records) {
          out << std::setw(12) << r.m << std::setw(12) << r.lambda_m
              << std::setw(8) << r.k << std::setw(14) << r.bound.str();
          if (r.verified_n)
            out << std::setw(16) << *r.verified_n;
          else
            out << std::setw(16) << "(unverified)";
          out << "\n";
        }
      }
      return kExitOk;
    }

    if (sweep_cmd->parsed()) {
      if (!(sweep_x >= 3)) throw std::domain_error("sweep: require x >= 3");
      auto result = stats::sweep(sweep_e, sweep_x, sweep_opt);
      std::ofstream file;
      std::ostream& sink = open_sink(file);
      if (format.jsonl()) {
        stats::write_jsonl(result.rows, sweep_opt.with_c, sink);
        sink << stats::summary_json(result.summary) << "\n";
      } else if (format.csv()) {
        stats::write_csv(result.rows, sweep_opt.with_c, sink);
        if (!out_path.empty())
          out << stats::summary_json(result.summary) << "\n";
        else
          sink << stats::summary_json(result.summary) << "\n";
      } else {
        sink << std::setw(12) << "p" << std::setw(10) << "N" << std::setw(12)
             << "exponent";
        if (sweep_opt.with_c) sink << std::setw(14) << "C(e,p)";
        sink << "\n";
        for (const auto& row : result.rows) {
          sink << std::setw(12) << row.p << std::setw(10) << row.n_cycles
               << std::setw(12) << detail::fmt_double(row.exponent);
          if (sweep_opt.with_c && row.c_value)
            sink << std::setw(14) << row.c_value->str();
          sink << "\n";
        }
        const auto& s = result.summary;
        sink << "\nprimes: " << s.count << ", sum N = " << s.sum
             << ", mean N = " << detail::fmt_double(s.mean)
             << " (benchmark x^0.293 = " << detail::fmt_double(s.benchmark)
             << ", reported side by side, not asserted)\n";
        sink << "max: N(" << s.e << ", " << s.max_row.p << ") = "
             << s.max_row.n_cycles << " with exponent "
             << detail::fmt_double(s.max_row.exponent) << "\n";
      }
      if (hist_width > 0) {
        auto hist = stats::exponent_table(result.rows, hist_width);
        if (format.jsonl()) {
          out << "{\"histogram\":{\"bucket_width\":"
              << detail::fmt_double(hist_width) << ",\"buckets\":[";
          bool first = true;
          for (const auto& [bucket, count] : hist.buckets) {
            out << (first ? "" : ",") << "[" << bucket << "," << count << "]";
            first = false;
          }
          out << "]}}\n";
        } else {
          out << "exponent histogram (bucket width "
              << detail::fmt_double(hist_width) << "):\n";
          for (const auto& [bucket, count] : hist.buckets)
            out << "  [" << detail::fmt_double(bucket * hist_width) << ", "
                << detail::fmt_double((bucket + 1) * hist_width) << "): "
                << count << "\n";
        }
      }
      if (sweep_opt.verify)
        err << "verified " << result.summary.count
            << " rows against the brute-force oracle\n";
      return kExitOk;
    }

    if (factor_cmd->parsed()) {
      auto f = arith::factorize(factor_n, factor_opt);
      if (format.jsonl()) {
        out << "{\"n\":" << factor_n << ",\"factors\":[";
        for (std::size_t i = 0; i < f.pairs.size(); ++i)
          out << (i ? "," : "") << "[" << f.pairs[i].prime << ","
              << f.pairs[i].exponent << "]";
        out << "]}\n";
      } else {
        out << detail::factor_string(f) << "\n";
      }
      return kExitOk;
    }

    if (order_cmd->parsed()) {
      u64 value = arith::mult_order(order_a, order_m, factor_opt);
      if (format.jsonl())
        out << "{\"a\":" << order_a << ",\"m\":" << order_m << ",\"order\":"
            << value << "}\n";
      else
        out << value << "\n";
      return kExitOk;
    }

    if (lambda_cmd->parsed()) {
      u64 value = arith::carmichael_lambda(arith::factorize(lambda_n, factor_opt));
      if (format.jsonl())
        out << "{\"n\":" << lambda_n << ",\"lambda\":" << value << "}\n";
      else
        out << value << "\n";
      return kExitOk;
    }
  } catch (const InternalError& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const BudgetError& e) {
    err << "budget exceeded: " << e.what() << "\n";
    if (!e.partial_factors.empty() || e.remaining_cofactor > 1) {
      err << "partial:";
      for (const auto& [p, a] : e.partial_factors)
        err << " " << p << (a > 1 ? "^" + std::to_string(a) : "");
      err << " * (" << e.remaining_cofactor << " unfactored)\n";
    }
    return kExitBudget;
  } catch (const WidthError& e) {
    err << "width limit: " << e.what() << "\n";
    return kExitBudget;
  } catch (const ThinConstructionError& e) {
    err << e.what() << "\n";
    return kExitBudget;
  } catch (const std::domain_error& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "unexpected error: " << e.what() << "\n";
    return kExitInternal;
  }

  err << "no subcommand executed\n";
  return kExitUsage;
}

}  // namespace powcycles::cli
