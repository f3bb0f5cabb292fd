#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "tpda/io.hpp"

namespace {

struct CliResult {
  int code;
  std::string output;
};

CliResult run_cli(const std::string& args) {
  std::string cmd = std::string(TPDA_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  int status = pclose(pipe);
  int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return {code, out};
}

std::string write_tmp(const std::string& name, const std::string& content) {
  std::string path = "/tmp/tpda_cli_test_" + name;
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out << content;
  return path;
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("run renders the trace table and the matching document") {
  auto res = run_cli("run --builtin example1 --order i1,i4,i3,i2 --trace table");
  CHECK(res.code == 0);
  CHECK(contains(res.output, "s1^1"));
  CHECK(contains(res.output, "i3,i4"));
  CHECK(contains(res.output, "i2,i6"));
  CHECK(contains(res.output, "i1,i5"));
  CHECK(contains(res.output, "\"assignments\""));

  auto again = run_cli("run --builtin example1 --order i1,i4,i3,i2 --trace table");
  CHECK(res.output == again.output);
}

TEST_CASE("run emits an event log when asked") {
  auto res = run_cli("run --builtin example1 --order i1,i4,i3,i2 --trace events");
  CHECK(res.code == 0);
  CHECK(contains(res.output, "entrant i1"));
  CHECK(contains(res.output, "evict i4 @ s2"));
}

TEST_CASE("run refuses the out-of-domain fixture") {
  auto res = run_cli("run --builtin prop1");
  CHECK(res.code == 3);
}

TEST_CASE("run requires an entry order when one is needed") {
  CHECK(run_cli("run --builtin example1").code == 2);
  CHECK(run_cli("run --builtin example1 --order i1,i4,i3,i2 --seed 3").code == 2);
  CHECK(run_cli("run --builtin example1 --order i1,i4,i3").code == 2);
}

TEST_CASE("run accepts a seed in place of an order") {
  auto res = run_cli("run --builtin example1 --seed 11");
  CHECK(res.code == 0);
  CHECK(contains(res.output, "\"assignments\""));
}

TEST_CASE("run succeeds on an empty instance") {
  std::string path = write_tmp(
      "empty.json", R"({"version": "1", "students": [], "schools": []})");
  auto res = run_cli("run --instance " + path);
  CHECK(res.code == 0);
  CHECK(contains(res.output, "\"assignments\": []"));
}

TEST_CASE("run rejects malformed instances") {
  std::string path = write_tmp("broken.json", "{");
  CHECK(run_cli("run --instance " + path).code == 2);
  CHECK(run_cli("run --instance /nonexistent/x.json").code == 2);
}

TEST_CASE("run embeds provenance only on request") {
  auto plain = run_cli("run --builtin example1 --order i1,i4,i3,i2");
  CHECK_FALSE(contains(plain.output, "provenance"));
  auto with = run_cli("run --builtin example1 --order i1,i4,i3,i2 --provenance");
  CHECK(contains(with.output, "\"provenance\""));
  CHECK(contains(with.output, "\"order\""));
}

TEST_CASE("audit accepts the mechanism output and rejects the candidate") {
  std::string out_path = "/tmp/tpda_cli_test_outcome.json";
  auto run = run_cli("run --builtin example1 --order i1,i4,i3,i2 --out " +
                     out_path);
  REQUIRE(run.code == 0);
  auto good = run_cli("audit --builtin example1 --matching " + out_path);
  CHECK(good.code == 0);
  CHECK(contains(good.output, "stable: true"));

  auto bad = run_cli(
      "audit --builtin example1 --matching-builtin naive_candidate_example1");
  CHECK(bad.code == 1);
  CHECK(contains(bad.output, "stable: false"));
  CHECK(contains(bad.output, "i4 -> (s1,s1) [both_periods]"));
}

TEST_CASE("audit rejects malformed matching files") {
  std::string path = write_tmp("badmatch.json", R"({"version": "1"})");
  CHECK(run_cli("audit --builtin example1 --matching " + path).code == 2);
}

TEST_CASE("enumerate certifies the counterexample has no stable matching") {
  auto res = run_cli("enumerate --builtin prop1");
  CHECK(res.code == 0);
  CHECK(contains(res.output, "stable matchings: 0"));
  CHECK(contains(res.output, "candidate matchings: 14"));
  CHECK(contains(res.output, "blocked by"));
}

TEST_CASE("enumerate finds the example's stable set") {
  auto res = run_cli("enumerate --builtin example1");
  CHECK(res.code == 0);
  CHECK(contains(res.output,
                 "i1=(-,-) i2=(s2,s2) i3=(s1,s1) i4=(s1,s1) i5=(-,-) i6=(-,s2)"));
}

TEST_CASE("enumerate honors the combination bound") {
  CHECK(run_cli("enumerate --builtin example1 --bound 10").code == 5);
}

TEST_CASE("compare prints both mechanisms side by side") {
  auto res = run_cli("compare --builtin example1 --order i1,i4,i3,i2");
  CHECK(res.code == 0);
  CHECK(contains(res.output, "== adapted two-period mechanism"));
  CHECK(contains(res.output, "== naive per-period baseline"));
  CHECK(contains(res.output, "stable: true"));
  CHECK(contains(res.output, "stable: false"));
}

TEST_CASE("fuzz with no instances reports an empty summary") {
  auto res = run_cli("fuzz --seed 1 --count 0");
  CHECK(res.code == 0);
  CHECK(contains(res.output, "instances: 0"));
  CHECK(contains(res.output, "violations: 0"));
}

TEST_CASE("fuzz runs the selected checks") {
  auto res = run_cli(
      "fuzz --seed 5 --count 20 --checks stability,rho_sensitivity");
  CHECK(res.code == 0);
  CHECK(contains(res.output, "instances: 20"));
  CHECK(contains(res.output, "violations: 0"));
  CHECK(contains(res.output, "rho_agreement"));
}

TEST_CASE("fuzz searches misreports when asked") {
  auto res = run_cli(
      "fuzz --seed 3 --count 5 --max-students 4 --checks strategyproofness");
  CHECK(res.code == 0);
  CHECK(contains(res.output, "violations: 0"));
  CHECK(contains(res.output, "kind_switching_findings: 0"));
}

TEST_CASE("fuzz reruns a single instance by index") {
  auto res = run_cli("fuzz --seed 5 --count 20 --only 3");
  CHECK(res.code == 0);
  CHECK(contains(res.output, "instances: 1"));
}

TEST_CASE("fuzz requires a seed") {
  CHECK(run_cli("fuzz --count 1").code != 0);
}

TEST_CASE("builtin lists and prints fixtures") {
  auto list = run_cli("builtin");
  CHECK(list.code == 0);
  CHECK(contains(list.output, "example1 (instance)"));
  CHECK(contains(list.output, "prop1 (instance)"));
  CHECK(contains(list.output, "naive_candidate_example1 (matching)"));

  auto doc = run_cli("builtin example1");
  CHECK(doc.code == 0);
  CHECK(tpda::parse_instance(doc.output) == tpda::builtin_example1());

  CHECK(run_cli("builtin nope").code == 2);
}
