#include <doctest.h>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "powcycles/cli.hpp"

using namespace powcycles;
using u64 = std::uint64_t;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) lines.push_back(line);
  return lines;
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("count prints the divisor table and total") {
  auto r = run_cli({"count", "--e", "2", "--p", "31"});
  CHECK(r.code == 0);
  CHECK(contains(r.out, "rho = 15"));
  CHECK(contains(r.out, "total cycles: 5"));
  CHECK(lines_of(r.out).size() >= 7);  // header, 4 divisor rows, total
}

TEST_CASE("count jsonl emits parseable objects plus a summary") {
  auto r = run_cli({"--format", "jsonl", "count", "--e", "2", "--p", "31"});
  CHECK(r.code == 0);
  auto lines = lines_of(r.out);
  REQUIRE(lines.size() == 5);  // 4 divisors + summary
  for (const auto& line : lines) {
    auto parsed = nlohmann::json::parse(line, nullptr, false);
    REQUIRE_FALSE(parsed.is_discarded());
  }
  auto summary = nlohmann::json::parse(lines.back());
  CHECK(summary["summary"]["n_cycles"] == 5);
  CHECK(summary["summary"]["rho"] == 15);
}

TEST_CASE("count supports prime powers") {
  auto r = run_cli({"count", "--e", "2", "--p", "3", "--k", "12"});
  CHECK(r.code == 0);
  CHECK(contains(r.out, "total cycles: 993"));
}

TEST_CASE("verify reports three-way agreement") {
  auto r = run_cli({"verify", "--e", "2", "--p", "7"});
  CHECK(r.code == 0);
  CHECK(contains(r.out, "formula=2 field=2 cyclic=2 OK"));
}

TEST_CASE("clength prints the exact value, bounds and brute check") {
  auto r = run_cli({"clength", "--e", "2", "--p", "7"});
  CHECK(r.code == 0);
  CHECK(contains(r.out, "5/3"));
  CHECK(contains(r.out, "2/3 <= C <= 2"));
  CHECK(contains(r.out, "match"));
}

TEST_CASE("factor formats prime powers") {
  auto r = run_cli({"factor", "4095"});
  CHECK(r.code == 0);
  CHECK(r.out == "3^2 * 5 * 7 * 13\n");
  CHECK(run_cli({"factor", "1"}).out == "1\n");
  CHECK(run_cli({"factor", "97"}).out == "97\n");
}

TEST_CASE("order and lambda utilities") {
  CHECK(run_cli({"order", "--a", "2", "--m", "7"}).out == "3\n");
  CHECK(run_cli({"lambda", "8"}).out == "2\n");
  auto r = run_cli({"--format", "jsonl", "order", "--a", "2", "--m", "15"});
  auto parsed = nlohmann::json::parse(r.out);
  CHECK(parsed["order"] == 4);
}

TEST_CASE("usage errors exit with 1") {
  CHECK(run_cli({}).code == 1);
  CHECK(run_cli({"frobnicate"}).code == 1);
  CHECK(run_cli({"count", "--e", "2"}).code == 1);          // missing --p
  CHECK(run_cli({"count", "--e", "1", "--p", "7"}).code == 1);
  CHECK(run_cli({"count", "--e", "2", "--p", "6"}).code == 1);  // not prime
  CHECK(run_cli({"order", "--a", "6", "--m", "15"}).code == 1);
  CHECK(run_cli({"sweep", "--e", "2", "--x", "2"}).code == 1);
}

TEST_CASE("help exits cleanly") {
  auto r = run_cli({"--help"});
  CHECK(r.code == 0);
  CHECK(contains(r.out, "count"));
  CHECK(contains(r.out, "sweep"));
}

TEST_CASE("budget failures exit with 2 and name the partial factorization") {
  auto r = run_cli({"--budget", "0", "factor", "4611686014132420609"});
  CHECK(r.code == 2);
  CHECK(contains(r.err, "budget exceeded"));
  CHECK(contains(r.err, "unfactored"));
}

TEST_CASE("width failures exit with 2") {
  auto r = run_cli({"count", "--e", "2", "--p", "3", "--k", "63"});
  CHECK(r.code == 2);
  CHECK(contains(r.err, "width"));
}

TEST_CASE("thin constructions exit with 2 and report sizes") {
  auto r = run_cli({"hunt-average", "--e", "2", "--u", "3.5e15", "--kappa",
                    "1", "--x", "1000000", "--limit", "5"});
  CHECK(r.code == 2);
  CHECK(contains(r.err, "construction too thin"));
  CHECK(contains(r.err, "|Q| = 2"));
}

TEST_CASE("the budget environment variable sets the default") {
  setenv(cli::kBudgetEnvVar, "0", 1);
  auto r = run_cli({"factor", "4611686014132420609"});
  unsetenv(cli::kBudgetEnvVar);
  CHECK(r.code == 2);
  // an explicit flag still wins
  setenv(cli::kBudgetEnvVar, "0", 1);
  auto ok = run_cli({"--budget", "100000000", "factor", "4611686014132420609"});
  unsetenv(cli::kBudgetEnvVar);
  CHECK(ok.code == 0);
}

TEST_CASE("hunt-large table and jsonl") {
  auto r = run_cli({"hunt-large", "--e", "2", "--kmin", "2", "--kmax", "4",
                    "--pcap", "1000000"});
  CHECK(r.code == 0);
  CHECK(contains(r.out, "31"));
  auto j = run_cli({"--format", "jsonl", "hunt-large", "--e", "2", "--kmin",
                    "2", "--kmax", "4", "--pcap", "1000000"});
  auto lines = lines_of(j.out);
  REQUIRE(lines.size() == 3);
  auto last = nlohmann::json::parse(lines[2]);
  CHECK(last["k"] == 4);
  CHECK(last["p"] == 31);
  CHECK(last["n"] == 5);
  CHECK(last["lower"][0] == 2);
  CHECK(last["lower"][1] == 1);
}

TEST_CASE("hunt-prime-power reports bounds and verified counts") {
  auto r = run_cli({"hunt-prime-power", "--e", "2", "--p", "3", "--v", "4",
                    "--max-factors", "3"});
  CHECK(r.code == 0);
  CHECK(contains(r.out, "455/12"));
  CHECK(contains(r.out, "993"));
}

TEST_CASE("hunt-average dumps the construction and stats") {
  auto r = run_cli({"hunt-average", "--e", "2", "--u", "3.5e15", "--kappa",
                    "3", "--x", "500000", "--limit", "4"});
  CHECK(r.code == 0);
  CHECK(contains(r.out, "M_v = 2520"));
  CHECK(contains(r.out, "nu = 4"));
  CHECK(contains(r.out, "distinct"));
}

TEST_CASE("sweep csv round-trips to the emitted summary") {
  auto r = run_cli({"--format", "csv", "sweep", "--e", "2", "--x", "3000"});
  CHECK(r.code == 0);
  auto lines = lines_of(r.out);
  REQUIRE(lines.size() >= 3);
  CHECK(lines[0] == "p,n_cycles,exponent");
  // last line is the summary object; re-aggregate the rows above it
  auto summary = nlohmann::json::parse(lines.back())["summary"];
  u64 sum = 0, count = 0, max_n = 0, max_p = 0;
  for (std::size_t i = 1; i + 1 < lines.size(); ++i) {
    auto first_comma = lines[i].find(',');
    auto second_comma = lines[i].find(',', first_comma + 1);
    u64 p = std::stoull(lines[i].substr(0, first_comma));
    u64 n = std::stoull(
        lines[i].substr(first_comma + 1, second_comma - first_comma - 1));
    sum += n;
    ++count;
    if (n > max_n) {
      max_n = n;
      max_p = p;
    }
  }
  CHECK(summary["sum"] == sum);
  CHECK(summary["count"] == count);
  CHECK(summary["max_p"] == max_p);
  CHECK(summary["max_n"] == max_n);
  CHECK(summary["mean"].get<double>() ==
        doctest::Approx(static_cast<double>(sum) / count));
}

TEST_CASE("sweep jsonl emits only JSON objects on stdout") {
  // global flags are accepted on either side of the subcommand
  auto r = run_cli({"sweep", "--e", "3", "--x", "100", "--with-c",
                    "--format", "jsonl"});
  CHECK(r.code == 0);
  auto lines = lines_of(r.out);
  REQUIRE(lines.size() == 26);  // pi(100) rows + summary
  for (const auto& line : lines) {
    auto parsed = nlohmann::json::parse(line, nullptr, false);
    REQUIRE_FALSE(parsed.is_discarded());
    REQUIRE(parsed.is_object());
  }
  auto row = nlohmann::json::parse(lines[3]);  // p = 7
  CHECK(row["p"] == 7);
  CHECK(row["n"] == 2);
  CHECK(row["c"][0] == 1);
}

TEST_CASE("sweep --hist prints the exponent histogram") {
  auto r = run_cli({"sweep", "--e", "2", "--x", "1000", "--hist", "0.1"});
  CHECK(r.code == 0);
  CHECK(contains(r.out, "exponent histogram"));
  // jsonl stays pure: the histogram becomes one more object line
  auto j = run_cli({"sweep", "--e", "2", "--x", "1000", "--hist", "0.1",
                    "--format", "jsonl"});
  CHECK(j.code == 0);
  for (const auto& line : lines_of(j.out)) {
    auto parsed = nlohmann::json::parse(line, nullptr, false);
    REQUIRE_FALSE(parsed.is_discarded());
    REQUIRE(parsed.is_object());
  }
}

TEST_CASE("sweep --out writes rows to the file and the summary to stdout") {
  std::string path = "/tmp/powcycles_test_rows.csv";
  std::remove(path.c_str());
  auto r = run_cli({"sweep", "--e", "2", "--x", "40", "--format", "csv",
                    "--out", path});
  CHECK(r.code == 0);
  CHECK(contains(r.out, "\"summary\""));
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream content;
  content << in.rdbuf();
  CHECK(contains(content.str(), "p,n_cycles,exponent"));
  CHECK(contains(content.str(), "31,5,"));
  std::remove(path.c_str());
}

TEST_CASE("sweep --verify reports over stderr") {
  auto r = run_cli({"sweep", "--e", "2", "--x", "500", "--verify"});
  CHECK(r.code == 0);
  CHECK(contains(r.err, "verified 95 rows"));
}
