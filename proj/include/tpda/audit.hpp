#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "tpda/mechanism.hpp"
#include "tpda/model.hpp"

// Brute-force verification: blocking-coalition enumeration, stable-set
// enumeration on small instances, exhaustive misreport search, and
// mechanism comparison. Everything here is an oracle; none of it reuses
// mechanism internals beyond running the mechanism itself where a run is the
// object under audit.

namespace tpda {

enum class BlockForm { Period1Only, Period2Only, BothPeriods };

inline const char* to_string(BlockForm f) {
  switch (f) {
    case BlockForm::Period1Only: return "period1_only";
    case BlockForm::Period2Only: return "period2_only";
    case BlockForm::BothPeriods: return "both_periods";
  }
  return "?";
}

// A student plus the full assignment pair it would move to. Unchanged
// components are resolved to their current values; the form tag records
// which components changed.
struct BlockingCoalition {
  StudentId student;
  Assignment target;
  BlockForm form;

  bool operator==(const BlockingCoalition&) const = default;
};

struct AuditReport {
  bool individually_rational = false;
  std::vector<BlockingCoalition> blocking;
  bool stable = false;
};

// Pair-level sweep over every candidate target (a,b) in (S u {-})^2 per
// student: a block is a strictly preferred target whose changed components
// all pass the school's choice test against its current roster plus the
// deviator. Subsumes single-period and two-period deviations; deviations to
// "-" need no school consent.
inline std::vector<BlockingCoalition> enumerate_blocking_coalitions(
    const Instance& inst, const Matching& m) {
  Rosters r = rosters_of(inst, m);
  std::vector<std::optional<SchoolId>> comps = {std::nullopt};
  for (const auto& sc : inst.schools) comps.push_back(sc.id);

  auto chosen_with = [&](const SchoolId& s, int period, const StudentId& i) {
    std::vector<StudentId> applicants = r.of(s, period);
    applicants.push_back(i);
    return detail::contains(choice(inst, s, period, applicants), i);
  };

  std::vector<BlockingCoalition> out;
  for (const auto& stu : inst.students) {
    const Assignment cur = m.of(stu.id);
    for (const auto& a : comps) {
      for (const auto& b : comps) {
        Assignment tgt{a, b};
        if (tgt == cur) continue;
        if (!prefers(inst, stu.id, tgt, cur)) continue;
        const bool ch1 = tgt.p1 != cur.p1;
        const bool ch2 = tgt.p2 != cur.p2;
        if (ch1 && tgt.p1 && !chosen_with(*tgt.p1, 1, stu.id)) continue;
        if (ch2 && tgt.p2 && !chosen_with(*tgt.p2, 2, stu.id)) continue;
        BlockForm form = ch1 && ch2   ? BlockForm::BothPeriods
                         : ch1        ? BlockForm::Period1Only
                                      : BlockForm::Period2Only;
        out.push_back({stu.id, tgt, form});
      }
    }
  }
  return out;
}

inline AuditReport is_stable(const Instance& inst, const Matching& m) {
  AuditReport rep;
  rep.individually_rational = is_individually_rational(inst, m);
  rep.blocking = enumerate_blocking_coalitions(inst, m);
  rep.stable = rep.individually_rational && rep.blocking.empty();
  return rep;
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration.

struct EnumerationBound {
  std::uint64_t max_combinations = 10'000'000;
};

// The assignments a student could individually rationally receive, in
// preference order, home last.
inline std::vector<Assignment> acceptable_assignments(const Student& stu) {
  std::vector<Assignment> out;
  switch (stu.pref.kind) {
    case PrefKind::PriorityOnly:
      for (const auto& s : stu.pref.acceptable)
        out.push_back({std::nullopt, s});
      break;
    case PrefKind::WillingnessToRemain:
      for (const auto& s : stu.pref.acceptable) out.push_back({s, s});
      break;
    case PrefKind::RawPairs:
      out = stu.pref.ranked_pairs;
      break;
  }
  out.push_back(Assignment::home());
  return out;
}

// Visits every capacity-feasible matching that gives each student one of its
// acceptable assignments or home. Stability implies individual rationality,
// so restricting the search space this way loses no stable matching.
inline void for_each_ir_matching(const Instance& inst,
                                 const std::function<void(const Matching&)>& fn,
                                 EnumerationBound bound = {}) {
  std::vector<std::vector<Assignment>> options;
  std::uint64_t combos = 1;
  for (const auto& stu : inst.students) {
    options.push_back(acceptable_assignments(stu));
    const std::uint64_t n = options.back().size();
    if (combos > bound.max_combinations / n)
      throw BoundError("instance too large to enumerate: more than " +
                       std::to_string(bound.max_combinations) +
                       " candidate combinations");
    combos *= n;
  }

  std::map<SchoolId, std::array<int, 2>> remaining;
  for (const auto& sc : inst.schools)
    remaining[sc.id] = {sc.quota.q1, sc.quota.q2};

  Matching current;
  std::function<void(std::size_t)> rec = [&](std::size_t k) {
    if (k == inst.students.size()) {
      fn(current);
      return;
    }
    const StudentId& id = inst.students[k].id;
    for (const Assignment& a : options[k]) {
      int* c1 = a.p1 ? &remaining.at(*a.p1)[0] : nullptr;
      int* c2 = a.p2 ? &remaining.at(*a.p2)[1] : nullptr;
      if ((c1 && *c1 <= 0) || (c2 && *c2 <= 0)) continue;
      if (c1) --*c1;
      if (c2) --*c2;
      current.by_student[id] = a;
      rec(k + 1);
      current.by_student.erase(id);
      if (c1) ++*c1;
      if (c2) ++*c2;
    }
  };
  rec(0);
}

inline std::vector<Matching> stable_set(const Instance& inst,
                                        EnumerationBound bound = {}) {
  std::vector<Matching> out;
  for_each_ir_matching(
      inst,
      [&](const Matching& m) {
        if (is_stable(inst, m).stable) out.push_back(m);
      },
      bound);
  return out;
}

// ---------------------------------------------------------------------------
// Strategy-proofness.

// Every report in the supported domain: both kinds crossed with every
// ordered subset of the schools. The empty list reads the same under either
// kind, so it appears once, as priority_only.
inline std::vector<ExtendedPreference> misreport_universe(const Instance& inst) {
  std::vector<std::vector<SchoolId>> lists;
  std::vector<SchoolId> prefix;
  std::vector<bool> used(inst.schools.size(), false);
  std::function<void()> rec = [&]() {
    lists.push_back(prefix);
    for (std::size_t k = 0; k < inst.schools.size(); ++k) {
      if (used[k]) continue;
      used[k] = true;
      prefix.push_back(inst.schools[k].id);
      rec();
      prefix.pop_back();
      used[k] = false;
    }
  };
  rec();

  std::vector<ExtendedPreference> out;
  for (PrefKind kind :
       {PrefKind::PriorityOnly, PrefKind::WillingnessToRemain}) {
    for (const auto& list : lists) {
      if (kind == PrefKind::WillingnessToRemain && list.empty()) continue;
      out.push_back({kind, list, {}});
    }
  }
  return out;
}

struct Deviation {
  StudentId student;
  ExtendedPreference misreport;
  Assignment truthful_outcome;
  Assignment deviating_outcome;
  // True when the misreport changes the student's kind and with it the
  // membership of the entry-order shuffle.
  bool kind_switching = false;
};

// Unilateral exhaustive misreport search. For each student and each
// in-domain report, rebuilds the instance, re-derives the entry order from
// the same seed (the shuffled set may change), reruns the mechanism and
// compares the student's outcome under its true preference. Returns every
// strict improvement.
inline std::vector<Deviation> strategyproofness_audit(const Instance& inst,
                                                      std::uint64_t rho_seed) {
  const Matching truth = deferred_acceptance(inst, derive_order(inst, rho_seed)).matching;
  const std::vector<ExtendedPreference> universe = misreport_universe(inst);
  std::vector<Deviation> out;
  for (std::size_t k = 0; k < inst.students.size(); ++k) {
    const Student& stu = inst.students[k];
    const Assignment truthful = truth.of(stu.id);
    for (const auto& q : universe) {
      if (q == stu.pref) continue;
      Instance alt = inst;
      alt.students[k].pref = q;
      const Matching dev = deferred_acceptance(alt, derive_order(alt, rho_seed)).matching;
      const Assignment outcome = dev.of(stu.id);
      if (prefers(inst, stu.id, outcome, truthful))
        out.push_back({stu.id, q, truthful, outcome,
                       q.kind != stu.pref.kind});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mechanism comparison.

struct MechanismComparison {
  Matching adapted;
  Matching naive;
  AuditReport adapted_audit;
  AuditReport naive_audit;
};

inline MechanismComparison compare_mechanisms(const Instance& inst,
                                              const EntryOrder& rho) {
  MechanismComparison cmp;
  cmp.adapted = deferred_acceptance(inst, rho).matching;
  cmp.naive = naive_per_period_spda(inst);
  cmp.adapted_audit = is_stable(inst, cmp.adapted);
  cmp.naive_audit = is_stable(inst, cmp.naive);
  return cmp;
}

}  // namespace tpda
