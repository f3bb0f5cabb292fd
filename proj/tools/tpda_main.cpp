#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tpda/audit.hpp"
#include "tpda/io.hpp"
#include "tpda/mechanism.hpp"
#include "tpda/model.hpp"
#include "tpda/report.hpp"

namespace {

// Documented exit codes. Usage errors surface through CLI11's own nonzero
// codes.
constexpr int kOk = 0;
constexpr int kUnstable = 1;
constexpr int kInvalidInput = 2;
constexpr int kOutOfDomain = 3;
constexpr int kNonTermination = 4;
constexpr int kBoundExceeded = 5;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw tpda::ParseError("cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw tpda::ParseError("cannot open output file: " + path);
  out << text;
}

struct InstanceSource {
  std::string builtin;
  std::string path;

  void add_options(CLI::App* cmd) {
    auto* b = cmd->add_option("--builtin", builtin, "built-in instance name");
    auto* f = cmd->add_option("--instance", path, "instance document path");
    b->excludes(f);
  }

  tpda::Instance load() const {
    if (!builtin.empty() && !path.empty())
      throw tpda::ParseError("give either --builtin or --instance, not both");
    if (!builtin.empty()) return tpda::builtin_instance(builtin);
    if (!path.empty())
      return tpda::parse_instance(read_file(path), {.allow_raw_pairs = true});
    throw tpda::ParseError("an instance is required (--builtin or --instance)");
  }
};

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty() || !out.empty()) out.push_back(cur);
  return out;
}

// Entry order from an explicit list or a seed. Exactly one is required when
// the instance has willingness-to-remain students; the tool never
// self-seeds.
tpda::EntryOrder resolve_order(const tpda::Instance& inst,
                               const std::string& order_csv,
                               const std::optional<std::uint64_t>& seed) {
  const bool has_wtr = !inst.wtr_students().empty();
  if (!order_csv.empty() && seed)
    throw tpda::ParseError("give either --order or --seed, not both");
  if (!order_csv.empty()) return {split_csv(order_csv)};
  if (seed) return tpda::derive_order(inst, *seed);
  if (has_wtr)
    throw tpda::ParseError(
        "the instance has willingness-to-remain students; an entry order is "
        "required (--order or --seed)");
  return {};
}

int dispatch(const std::function<int()>& action) {
  try {
    return action();
  } catch (const tpda::NonTerminationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNonTermination;
  } catch (const tpda::BoundError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBoundExceeded;
  } catch (const tpda::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOutOfDomain;
  } catch (const tpda::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalidInput;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-period seat matching: mechanism runs, stability audits, "
               "brute-force enumeration, and seeded fuzzing"};
  app.require_subcommand(1);
  std::function<int()> action;

  // ---- run -----------------------------------------------------------
  auto* run = app.add_subcommand("run", "run the mechanism on an instance");
  auto run_src = std::make_shared<InstanceSource>();
  run_src->add_options(run);
  auto run_order = std::make_shared<std::string>();
  auto run_seed = std::make_shared<std::optional<std::uint64_t>>();
  auto run_trace = std::make_shared<std::string>("off");
  auto run_out = std::make_shared<std::string>();
  auto run_prov = std::make_shared<bool>(false);
  run->add_option("--order", *run_order,
                  "explicit comma-separated entry order");
  run->add_option("--seed", *run_seed, "entry-order shuffle seed");
  run->add_option("--trace", *run_trace, "trace rendering: off, events, table")
      ->check(CLI::IsMember({"off", "events", "table"}));
  run->add_option("--out", *run_out, "write the matching document here");
  run->add_flag("--provenance", *run_prov,
                "embed mechanism provenance in the matching document");
  run->callback([=, &action] {
    action = [=]() {
      tpda::Instance inst = run_src->load();
      if (inst.has_raw_pairs())
        throw tpda::DomainError(
            "instance carries raw_pairs reports; the mechanism accepts only "
            "priority-only and willingness-to-remain");
      tpda::EntryOrder rho = resolve_order(inst, *run_order, *run_seed);
      tpda::MechanismResult res = tpda::deferred_acceptance(inst, rho);
      if (*run_trace == "table")
        std::cout << tpda::render_trace_table(inst, res.trace, rho);
      else if (*run_trace == "events")
        std::cout << tpda::render_trace_events(res.trace);
      std::optional<tpda::Provenance> prov;
      if (*run_prov) {
        tpda::Provenance p;
        p.mechanism = "two_period_da";
        if (!run_order->empty())
          p.order = rho.order;
        else if (*run_seed)
          p.seed = **run_seed;
        prov = std::move(p);
      }
      write_output(*run_out, tpda::serialize_matching(res.matching, prov));
      return kOk;
    };
  });

  // ---- audit ---------------------------------------------------------
  auto* audit = app.add_subcommand("audit", "audit a matching for stability");
  auto audit_src = std::make_shared<InstanceSource>();
  audit_src->add_options(audit);
  auto audit_matching = std::make_shared<std::string>();
  auto audit_matching_builtin = std::make_shared<std::string>();
  audit->add_option("--matching", *audit_matching, "matching document path");
  audit->add_option("--matching-builtin", *audit_matching_builtin,
                    "built-in matching name");
  audit->callback([=, &action] {
    action = [=]() {
      tpda::Instance inst = audit_src->load();
      tpda::Matching m;
      if (!audit_matching_builtin->empty())
        m = tpda::builtin_matching(*audit_matching_builtin);
      else if (!audit_matching->empty())
        m = tpda::parse_matching(read_file(*audit_matching)).matching;
      else
        throw tpda::ParseError(
            "a matching is required (--matching or --matching-builtin)");
      tpda::AuditReport rep = tpda::is_stable(inst, m);
      std::cout << tpda::render_audit_report(rep);
      return rep.stable ? kOk : kUnstable;
    };
  });

  // ---- enumerate -----------------------------------------------------
  auto* enumerate =
      app.add_subcommand("enumerate", "enumerate the stable set by brute force");
  auto enum_src = std::make_shared<InstanceSource>();
  enum_src->add_options(enumerate);
  auto enum_bound = std::make_shared<std::uint64_t>(10'000'000);
  enumerate->add_option("--bound", *enum_bound,
                        "candidate-combination safety bound");
  enumerate->callback([=, &action] {
    action = [=]() {
      tpda::Instance inst = enum_src->load();
      tpda::EnumerationOutcome out =
          tpda::build_enumeration_report(inst, {*enum_bound});
      std::cout << out.text;
      return kOk;
    };
  });

  // ---- compare -------------------------------------------------------
  auto* compare = app.add_subcommand(
      "compare", "run the mechanism and the naive per-period baseline");
  auto cmp_src = std::make_shared<InstanceSource>();
  cmp_src->add_options(compare);
  auto cmp_order = std::make_shared<std::string>();
  auto cmp_seed = std::make_shared<std::optional<std::uint64_t>>();
  compare->add_option("--order", *cmp_order,
                      "explicit comma-separated entry order");
  compare->add_option("--seed", *cmp_seed, "entry-order shuffle seed");
  compare->callback([=, &action] {
    action = [=]() {
      tpda::Instance inst = cmp_src->load();
      tpda::EntryOrder rho = resolve_order(inst, *cmp_order, *cmp_seed);
      tpda::MechanismComparison cmp = tpda::compare_mechanisms(inst, rho);
      std::cout << tpda::render_comparison(inst, cmp);
      return kOk;
    };
  });

  // ---- fuzz ----------------------------------------------------------
  auto* fuzz = app.add_subcommand(
      "fuzz", "generate seeded instances and check mechanism properties");
  auto fz = std::make_shared<tpda::FuzzParams>();
  auto fz_checks = std::make_shared<std::string>("stability");
  fuzz->add_option("--seed", fz->seed, "master seed")->required();
  fuzz->add_option("--count", fz->count, "number of instances")->required();
  fuzz->add_option("--max-students", fz->max_students, "maximum students");
  fuzz->add_option("--max-schools", fz->max_schools, "maximum schools");
  fuzz->add_option("--wtr-fraction", fz->wtr_fraction,
                   "willingness-to-remain probability");
  fuzz->add_option("--q-min", fz->q_min, "minimum per-period capacity");
  fuzz->add_option("--q-max", fz->q_max, "maximum per-period capacity");
  fuzz->add_option("--only", fz->only, "run only this instance index");
  fuzz->add_option(
      "--checks", *fz_checks,
      "comma-separated: stability, strategyproofness, rho_sensitivity");
  fuzz->callback([=, &action] {
    action = [=]() {
      tpda::FuzzChecks checks{};
      checks.stability = false;
      for (const auto& c : split_csv(*fz_checks)) {
        if (c == "stability")
          checks.stability = true;
        else if (c == "strategyproofness")
          checks.strategyproofness = true;
        else if (c == "rho_sensitivity")
          checks.rho_sensitivity = true;
        else
          throw tpda::ParseError("unknown check \"" + c + "\"");
      }
      tpda::FuzzOutcome out = tpda::run_fuzz(*fz, checks);
      std::cout << out.text;
      return out.violations == 0 ? kOk : kUnstable;
    };
  });

  // ---- builtin -------------------------------------------------------
  auto* builtin =
      app.add_subcommand("builtin", "print a built-in fixture document");
  auto builtin_name = std::make_shared<std::string>();
  builtin->add_option("name", *builtin_name, "fixture name");
  builtin->callback([=, &action] {
    action = [=]() {
      if (builtin_name->empty()) {
        for (const auto& [name, kind] : tpda::builtin_names())
          std::cout << name << " ("
                    << (kind == tpda::BuiltinKind::Instance ? "instance"
                                                            : "matching")
                    << ")\n";
        return kOk;
      }
      for (const auto& [name, kind] : tpda::builtin_names()) {
        if (name != *builtin_name) continue;
        if (kind == tpda::BuiltinKind::Instance)
          std::cout << tpda::serialize_instance(tpda::builtin_instance(name));
        else
          std::cout << tpda::serialize_matching(tpda::builtin_matching(name));
        return kOk;
      }
      throw tpda::ParseError("unknown builtin \"" + *builtin_name + "\"");
    };
  });

  CLI11_PARSE(app, argc, argv);
  return dispatch(action);
}
