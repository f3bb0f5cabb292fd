#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

// Core domain model for two-period school/childcare seat allocation.
//
// A student either seeks only a period-2 priority slot ("priority only") or
// wants the same school in both periods or nothing ("willingness to remain").
// Schools rank students with one priority order used in both periods and admit
// seat-by-seat up to a per-period quota.

namespace tpda {

using StudentId = std::string;
using SchoolId = std::string;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad id references or structurally misused state.
struct InstanceError : Error {
  using Error::Error;
};

// An out-of-domain (raw_pairs) report reached a mechanism entry point.
struct DomainError : Error {
  using Error::Error;
};

// The rejection-chain safety cap was exceeded; indicates a semantics bug.
struct NonTerminationError : Error {
  using Error::Error;
};

// Enumeration work would exceed the configured combination bound.
struct BoundError : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

enum class PrefKind {
  PriorityOnly,
  WillingnessToRemain,
  // Explicit ranked list of (p1,p2) pairs. Outside the supported domain;
  // accepted by audits, rejected by the mechanisms.
  RawPairs,
};

inline const char* to_string(PrefKind k) {
  switch (k) {
    case PrefKind::PriorityOnly: return "priority_only";
    case PrefKind::WillingnessToRemain: return "willingness_to_remain";
    case PrefKind::RawPairs: return "raw_pairs";
  }
  return "?";
}

// One student's seats: p1 = school attended in period 1, p2 = school holding
// the student's period-2 slot. Empty optional = unassigned that period.
struct Assignment {
  std::optional<SchoolId> p1;
  std::optional<SchoolId> p2;

  bool operator==(const Assignment&) const = default;

  static Assignment home() { return {}; }
  bool is_home() const { return !p1 && !p2; }
};

struct ExtendedPreference {
  PrefKind kind = PrefKind::PriorityOnly;
  // PriorityOnly / WillingnessToRemain: schools, most preferred first.
  // Schools absent from the list are unacceptable.
  std::vector<SchoolId> acceptable;
  // RawPairs only: assignment pairs, most preferred first.
  std::vector<Assignment> ranked_pairs;

  bool operator==(const ExtendedPreference&) const = default;

  static ExtendedPreference priority_only(std::vector<SchoolId> prefs) {
    return {PrefKind::PriorityOnly, std::move(prefs), {}};
  }
  static ExtendedPreference willingness_to_remain(std::vector<SchoolId> prefs) {
    return {PrefKind::WillingnessToRemain, std::move(prefs), {}};
  }
  static ExtendedPreference raw_pairs(std::vector<Assignment> pairs) {
    return {PrefKind::RawPairs, {}, std::move(pairs)};
  }
};

struct Student {
  StudentId id;
  ExtendedPreference pref;

  bool operator==(const Student&) const = default;
};

struct CapacityPair {
  int q1 = 0;
  int q2 = 0;

  bool operator==(const CapacityPair&) const = default;
};

struct School {
  SchoolId id;
  // Highest priority first; students absent are unacceptable to the school.
  // The same order applies to both periods.
  std::vector<StudentId> priority;
  CapacityPair quota;

  bool operator==(const School&) const = default;
};

struct Instance {
  std::vector<Student> students;
  std::vector<School> schools;

  bool operator==(const Instance&) const = default;

  const Student* find_student(const StudentId& id) const {
    for (const auto& s : students)
      if (s.id == id) return &s;
    return nullptr;
  }

  const School* find_school(const SchoolId& id) const {
    for (const auto& s : schools)
      if (s.id == id) return &s;
    return nullptr;
  }

  const Student& student(const StudentId& id) const {
    if (const Student* s = find_student(id)) return *s;
    throw InstanceError("unknown student id: " + id);
  }

  const School& school(const SchoolId& id) const {
    if (const School* s = find_school(id)) return *s;
    throw InstanceError("unknown school id: " + id);
  }

  std::size_t student_index(const StudentId& id) const {
    for (std::size_t k = 0; k < students.size(); ++k)
      if (students[k].id == id) return k;
    throw InstanceError("unknown student id: " + id);
  }

  // Position in the school's priority list; nullopt = unacceptable to it.
  std::optional<std::size_t> priority_rank(const SchoolId& s,
                                           const StudentId& i) const {
    const School& sc = school(s);
    for (std::size_t k = 0; k < sc.priority.size(); ++k)
      if (sc.priority[k] == i) return k;
    return std::nullopt;
  }

  int quota(const SchoolId& s, int period) const {
    const School& sc = school(s);
    if (period == 1) return sc.quota.q1;
    if (period == 2) return sc.quota.q2;
    throw InstanceError("period must be 1 or 2");
  }

  std::vector<StudentId> wtr_students() const {
    std::vector<StudentId> out;
    for (const auto& s : students)
      if (s.pref.kind == PrefKind::WillingnessToRemain) out.push_back(s.id);
    return out;
  }

  std::vector<StudentId> priority_only_students() const {
    std::vector<StudentId> out;
    for (const auto& s : students)
      if (s.pref.kind == PrefKind::PriorityOnly) out.push_back(s.id);
    return out;
  }

  bool has_raw_pairs() const {
    for (const auto& s : students)
      if (s.pref.kind == PrefKind::RawPairs) return true;
    return false;
  }

  // Stable sort key used for canonical displays and pool listings.
  void sort_by_student_order(std::vector<StudentId>& ids) const {
    std::sort(ids.begin(), ids.end(),
              [this](const StudentId& a, const StudentId& b) {
                return student_index(a) < student_index(b);
              });
  }
};

struct Matching {
  std::map<StudentId, Assignment> by_student;

  bool operator==(const Matching&) const = default;

  // Students missing from the map are unassigned in both periods.
  Assignment of(const StudentId& id) const {
    auto it = by_student.find(id);
    return it == by_student.end() ? Assignment::home() : it->second;
  }
};

// Per-school member lists derived from a matching, in instance student order.
struct Rosters {
  std::map<SchoolId, std::array<std::vector<StudentId>, 2>> by_school;

  const std::vector<StudentId>& of(const SchoolId& s, int period) const {
    auto it = by_school.find(s);
    if (it == by_school.end()) throw InstanceError("unknown school id: " + s);
    if (period != 1 && period != 2)
      throw InstanceError("period must be 1 or 2");
    return it->second[static_cast<std::size_t>(period - 1)];
  }
};

inline Rosters rosters_of(const Instance& inst, const Matching& m) {
  Rosters r;
  for (const auto& sc : inst.schools) r.by_school[sc.id] = {};
  for (const auto& [id, a] : m.by_student) inst.student(id);
  for (const auto& stu : inst.students) {
    Assignment a = m.of(stu.id);
    if (a.p1) {
      auto it = r.by_school.find(*a.p1);
      if (it == r.by_school.end())
        throw InstanceError("unknown school id: " + *a.p1);
      it->second[0].push_back(stu.id);
    }
    if (a.p2) {
      auto it = r.by_school.find(*a.p2);
      if (it == r.by_school.end())
        throw InstanceError("unknown school id: " + *a.p2);
      it->second[1].push_back(stu.id);
    }
  }
  return r;
}

struct Violation {
  std::string code;
  std::string detail;

  bool operator==(const Violation&) const = default;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(const std::string& code) const {
    for (const auto& v : violations)
      if (v.code == code) return true;
    return false;
  }
};

struct ValidateOptions {
  // Accept raw_pairs reports (audit mode). The default certifies that every
  // report is priority-only or willingness-to-remain.
  bool allow_raw_pairs = false;
};

inline ValidationReport validate_instance(const Instance& inst,
                                          ValidateOptions opts = {}) {
  ValidationReport rep;
  auto add = [&rep](std::string code, std::string detail) {
    rep.violations.push_back({std::move(code), std::move(detail)});
  };

  std::set<StudentId> student_ids;
  std::set<SchoolId> school_ids;
  for (const auto& s : inst.students) {
    if (s.id.empty()) add("empty-id", "student with empty id");
    if (!student_ids.insert(s.id).second)
      add("duplicate-student-id", s.id);
  }
  for (const auto& s : inst.schools) {
    if (s.id.empty()) add("empty-id", "school with empty id");
    if (!school_ids.insert(s.id).second)
      add("duplicate-school-id", s.id);
    if (s.quota.q1 < 0 || s.quota.q2 < 0)
      add("negative-capacity", s.id);
  }

  for (const auto& stu : inst.students) {
    const auto& p = stu.pref;
    if (p.kind == PrefKind::RawPairs) {
      if (!opts.allow_raw_pairs)
        add("out-of-domain-report", stu.id);
      std::set<std::pair<std::optional<SchoolId>, std::optional<SchoolId>>>
          seen;
      for (const auto& a : p.ranked_pairs) {
        for (const auto& side : {a.p1, a.p2})
          if (side && !school_ids.count(*side))
            add("unknown-school", stu.id + " ranks " + *side);
        if (a.is_home())
          add("home-pair-in-list", stu.id);
        if (!seen.insert({a.p1, a.p2}).second)
          add("duplicate-pref-entry", stu.id);
      }
    } else {
      std::set<SchoolId> seen;
      for (const auto& s : p.acceptable) {
        if (!school_ids.count(s))
          add("unknown-school", stu.id + " ranks " + s);
        if (!seen.insert(s).second)
          add("duplicate-pref-entry", stu.id + " lists " + s + " twice");
      }
    }
  }

  for (const auto& sc : inst.schools) {
    std::set<StudentId> seen;
    for (const auto& i : sc.priority) {
      if (!student_ids.count(i))
        add("unknown-student", sc.id + " ranks " + i);
      if (!seen.insert(i).second)
        add("duplicate-priority-entry", sc.id + " lists " + i + " twice");
    }
  }
  return rep;
}

// The school's choice rule: the q_s^t highest-priority applicants among those
// it ranks. Returned in priority order. Duplicate applicants collapse.
inline std::vector<StudentId> choice(const Instance& inst, const SchoolId& s,
                                     int period,
                                     const std::vector<StudentId>& applicants) {
  const int q = inst.quota(s, period);
  std::vector<std::pair<std::size_t, StudentId>> ranked;
  for (const auto& i : applicants) {
    inst.student(i);
    if (auto r = inst.priority_rank(s, i))
      ranked.emplace_back(*r, i);
  }
  std::sort(ranked.begin(), ranked.end());
  ranked.erase(std::unique(ranked.begin(), ranked.end()), ranked.end());
  std::vector<StudentId> out;
  for (const auto& [r, i] : ranked) {
    if (static_cast<int>(out.size()) >= q) break;
    out.push_back(i);
  }
  return out;
}

// Preference rank of an assignment pair; 0 = best, nullopt = unacceptable
// (strictly below staying home). The acceptable pairs of a student are:
//   priority_only:          (-,s) per listed s, then (-,-)
//   willingness_to_remain:  (s,s) per listed s, then (-,-)
//   raw_pairs:              the listed pairs, then (-,-)
// Anything else is unacceptable, including split pairs for
// willingness-to-remain students and any period-1 seat for priority-only
// students.
inline std::optional<std::size_t> assignment_rank(const Instance& inst,
                                                  const StudentId& i,
                                                  const Assignment& a) {
  const Student& stu = inst.student(i);
  if (a.p1) inst.school(*a.p1);
  if (a.p2) inst.school(*a.p2);
  const auto& pref = stu.pref;
  switch (pref.kind) {
    case PrefKind::PriorityOnly: {
      if (a.p1) return std::nullopt;
      if (!a.p2) return pref.acceptable.size();
      auto it =
          std::find(pref.acceptable.begin(), pref.acceptable.end(), *a.p2);
      if (it == pref.acceptable.end()) return std::nullopt;
      return static_cast<std::size_t>(it - pref.acceptable.begin());
    }
    case PrefKind::WillingnessToRemain: {
      if (a.is_home()) return pref.acceptable.size();
      if (!a.p1 || !a.p2 || *a.p1 != *a.p2) return std::nullopt;
      auto it =
          std::find(pref.acceptable.begin(), pref.acceptable.end(), *a.p1);
      if (it == pref.acceptable.end()) return std::nullopt;
      return static_cast<std::size_t>(it - pref.acceptable.begin());
    }
    case PrefKind::RawPairs: {
      auto it =
          std::find(pref.ranked_pairs.begin(), pref.ranked_pairs.end(), a);
      if (it != pref.ranked_pairs.end())
        return static_cast<std::size_t>(it - pref.ranked_pairs.begin());
      if (a.is_home()) return pref.ranked_pairs.size();
      return std::nullopt;
    }
  }
  throw InstanceError("unreachable preference kind");
}

// True iff student i strictly prefers a to b. Unacceptable pairs compare
// worst and mutually equal.
inline bool prefers(const Instance& inst, const StudentId& i,
                    const Assignment& a, const Assignment& b) {
  auto ra = assignment_rank(inst, i, a);
  auto rb = assignment_rank(inst, i, b);
  if (!ra) return false;
  if (!rb) return true;
  return *ra < *rb;
}

// Individual rationality: every student's pair is acceptable and every
// school would choose exactly its own roster (within quota, all ranked).
inline bool is_individually_rational(const Instance& inst, const Matching& m) {
  Rosters r = rosters_of(inst, m);
  for (const auto& stu : inst.students)
    if (!assignment_rank(inst, stu.id, m.of(stu.id))) return false;
  for (const auto& sc : inst.schools)
    for (int t : {1, 2}) {
      const auto& roster = r.of(sc.id, t);
      if (choice(inst, sc.id, t, roster).size() != roster.size())
        return false;
    }
  return true;
}

}  // namespace tpda
