#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tpda/model.hpp"

// The two-step deferred-acceptance mechanism.
//
// Step 1 runs classical student-proposing deferred acceptance for the
// priority-only students on period-2 quotas. Step 2 inserts the
// willingness-to-remain students one at a time in a fixed entry order,
// resolving each rejection chain to quiescence before the next entrant.
// A willingness-to-remain student is admitted only if the school would
// choose her in both periods at once; evicted students re-apply down their
// remaining lists.

namespace tpda {

struct EntryOrder {
  std::vector<StudentId> order;

  bool operator==(const EntryOrder&) const = default;
};

struct PoolPair {
  std::vector<StudentId> p1;
  std::vector<StudentId> p2;

  bool operator==(const PoolPair&) const = default;
};

struct TraceEvent {
  enum class Kind { Entrant, Apply, Accept, Evict, Reject, Exhausted, Snapshot };

  Kind kind;
  StudentId student;  // all kinds except Snapshot
  SchoolId school;    // Apply/Accept/Evict/Reject

  // Snapshot payload: full pool state, students that entered and hold no
  // seat, and the entrants this snapshot covers.
  std::map<SchoolId, PoolPair> pools;
  std::vector<StudentId> unmatched;
  std::vector<StudentId> entrants;

  bool operator==(const TraceEvent&) const = default;
};

using Trace = std::vector<TraceEvent>;

struct MechanismState {
  // Tentatively held students per school per period, in instance order.
  // Willingness-to-remain students appear in both pools of one school or in
  // neither; priority-only students only in period-2 pools.
  std::map<SchoolId, PoolPair> pools;
  // Next preference-list index to try, per student. Never decreases.
  std::map<StudentId, std::size_t> cursor;
  // Students awaiting re-application, oldest first.
  std::deque<StudentId> displaced;

  bool operator==(const MechanismState&) const = default;
};

struct MechanismResult {
  Matching matching;
  Trace trace;
};

namespace detail {

inline bool contains(const std::vector<StudentId>& v, const StudentId& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

inline bool is_wtr(const Instance& inst, const StudentId& i) {
  return inst.student(i).pref.kind == PrefKind::WillingnessToRemain;
}

inline std::vector<StudentId> with(std::vector<StudentId> v, const StudentId& x) {
  v.push_back(x);
  return v;
}

inline void emit(Trace* trace, TraceEvent ev) {
  if (trace) trace->push_back(std::move(ev));
}

inline TraceEvent event(TraceEvent::Kind k, StudentId i, SchoolId s = {}) {
  TraceEvent ev;
  ev.kind = k;
  ev.student = std::move(i);
  ev.school = std::move(s);
  return ev;
}

// School the student currently holds a seat at, if any.
inline std::optional<SchoolId> held_school(const MechanismState& st,
                                           const StudentId& i) {
  for (const auto& [s, pool] : st.pools)
    if (contains(pool.p1, i) || contains(pool.p2, i)) return s;
  return std::nullopt;
}

inline void sort_pool(const Instance& inst, std::vector<StudentId>& v) {
  inst.sort_by_student_order(v);
}

// Settle school s after admitting applicant j (j already passed both choice
// tests against the pre-admission pools). A willingness-to-remain student
// must hold both pools or neither, so anyone dropped from one pool leaves
// the other as well; the choice rule is then re-evaluated without the
// leavers, restoring students who were only displaced by them. Iterates to a
// fixpoint and returns the evicted students in re-application order:
// period-1 leavers before period-2 leavers, each group by priority,
// duplicates collapsed.
inline std::vector<StudentId> settle_admission(const Instance& inst,
                                               MechanismState& st,
                                               const SchoolId& s,
                                               const StudentId& j) {
  PoolPair& pool = st.pools.at(s);
  const bool jw = is_wtr(inst, j);
  const std::vector<StudentId> old1 = pool.p1;
  const std::vector<StudentId> old2 = pool.p2;

  std::vector<StudentId> a1 = jw ? with(old1, j) : old1;
  std::vector<StudentId> a2 = with(old2, j);

  std::set<StudentId> removed;
  std::vector<StudentId> c1, c2;
  for (;;) {
    std::vector<StudentId> f1, f2;
    for (const auto& x : a1)
      if (!removed.count(x)) f1.push_back(x);
    for (const auto& x : a2)
      if (!removed.count(x)) f2.push_back(x);
    c1 = choice(inst, s, 1, f1);
    c2 = choice(inst, s, 2, f2);
    bool changed = false;
    for (const auto& w : f1) {
      // period-1 pools hold willingness-to-remain students only
      if (!contains(c1, w) || !contains(c2, w)) {
        if (w == j)
          throw InstanceError("admitted applicant lost its seat while settling " + s);
        removed.insert(w);
        changed = true;
      }
    }
    if (!changed) break;
  }

  pool.p1 = c1;
  pool.p2 = c2;
  sort_pool(inst, pool.p1);
  sort_pool(inst, pool.p2);

  std::vector<StudentId> ev1, ev2;
  for (const auto& x : old1)
    if (!contains(pool.p1, x)) ev1.push_back(x);
  for (const auto& x : old2)
    if (!contains(pool.p2, x) && !contains(ev1, x)) ev2.push_back(x);
  auto by_priority = [&](std::vector<StudentId>& v) {
    std::sort(v.begin(), v.end(), [&](const StudentId& a, const StudentId& b) {
      return inst.priority_rank(s, a) < inst.priority_rank(s, b);
    });
  };
  by_priority(ev1);
  by_priority(ev2);
  ev1.insert(ev1.end(), ev2.begin(), ev2.end());
  return ev1;
}

}  // namespace detail

inline MechanismState init_state(const Instance& inst) {
  MechanismState st;
  for (const auto& sc : inst.schools) st.pools[sc.id] = {};
  for (const auto& stu : inst.students) st.cursor[stu.id] = 0;
  return st;
}

inline TraceEvent make_snapshot(const Instance& inst, const MechanismState& st,
                                const std::vector<StudentId>& entered,
                                std::vector<StudentId> entrants) {
  TraceEvent ev;
  ev.kind = TraceEvent::Kind::Snapshot;
  ev.pools = st.pools;
  for (const auto& i : entered)
    if (!detail::held_school(st, i)) ev.unmatched.push_back(i);
  inst.sort_by_student_order(ev.unmatched);
  ev.entrants = std::move(entrants);
  return ev;
}

// Step 1: round-based student-proposing deferred acceptance over the
// priority-only students, period-2 quotas only. Period-1 pools stay empty.
inline MechanismState priority_only_spda(const Instance& inst, Trace* trace = nullptr) {
  MechanismState st = init_state(inst);
  std::set<StudentId> exhausted;
  for (;;) {
    std::map<SchoolId, std::vector<StudentId>> proposals;
    bool any = false;
    for (const auto& stu : inst.students) {
      if (stu.pref.kind != PrefKind::PriorityOnly) continue;
      if (detail::held_school(st, stu.id)) continue;
      std::size_t cur = st.cursor.at(stu.id);
      if (cur >= stu.pref.acceptable.size()) {
        if (exhausted.insert(stu.id).second)
          detail::emit(trace, detail::event(TraceEvent::Kind::Exhausted, stu.id));
        continue;
      }
      const SchoolId& s = stu.pref.acceptable[cur];
      proposals[s].push_back(stu.id);
      detail::emit(trace, detail::event(TraceEvent::Kind::Apply, stu.id, s));
      any = true;
    }
    if (!any) break;
    for (const auto& sc : inst.schools) {
      auto it = proposals.find(sc.id);
      if (it == proposals.end()) continue;
      PoolPair& pool = st.pools.at(sc.id);
      std::vector<StudentId> a2 = pool.p2;
      for (const auto& i : it->second) a2.push_back(i);
      std::vector<StudentId> c2 = choice(inst, sc.id, 2, a2);
      for (const auto& x : pool.p2)
        if (!detail::contains(c2, x))
          detail::emit(trace, detail::event(TraceEvent::Kind::Evict, x, sc.id));
      for (const auto& x : it->second) {
        if (detail::contains(c2, x)) {
          detail::emit(trace, detail::event(TraceEvent::Kind::Accept, x, sc.id));
        } else {
          detail::emit(trace, detail::event(TraceEvent::Kind::Reject, x, sc.id));
        }
        ++st.cursor.at(x);
      }
      pool.p2 = c2;
      detail::sort_pool(inst, pool.p2);
    }
  }
  detail::emit(trace, make_snapshot(inst, st, inst.priority_only_students(),
                                    inst.priority_only_students()));
  return st;
}

// Step 2, one entrant: seed the displaced queue with the entrant and process
// it to quiescence. Each dequeued student walks down her remaining list; a
// willingness-to-remain student needs both period choices at once, a
// priority-only student only the period-2 choice. Admission settles the
// school (see settle_admission) and enqueues the evicted.
inline MechanismState insert_wtr_student(const Instance& inst,
                                         MechanismState st,
                                         const StudentId& entrant,
                                         Trace* trace = nullptr) {
  const Student& e = inst.student(entrant);
  if (e.pref.kind != PrefKind::WillingnessToRemain)
    throw InstanceError("entrant " + entrant + " is not willingness-to-remain");
  if (!st.displaced.empty())
    throw InstanceError("displaced queue not empty before insertion");
  if (detail::held_school(st, entrant))
    throw InstanceError("entrant " + entrant + " already holds a seat");

  detail::emit(trace, detail::event(TraceEvent::Kind::Entrant, entrant));
  st.displaced.push_back(entrant);

  const std::size_t cap =
      2 * inst.students.size() * (inst.schools.size() + 1);
  std::size_t steps = 0;
  while (!st.displaced.empty()) {
    if (++steps > cap)
      throw NonTerminationError("rejection chain exceeded " +
                                std::to_string(cap) + " steps inserting " +
                                entrant);
    StudentId j = st.displaced.front();
    st.displaced.pop_front();
    const Student& stu = inst.student(j);
    const bool jw = stu.pref.kind == PrefKind::WillingnessToRemain;
    const auto& list = stu.pref.acceptable;
    bool placed = false;
    std::size_t& cur = st.cursor.at(j);
    while (cur < list.size()) {
      const SchoolId& s = list[cur];
      detail::emit(trace, detail::event(TraceEvent::Kind::Apply, j, s));
      const PoolPair& pool = st.pools.at(s);
      bool ok2 =
          detail::contains(choice(inst, s, 2, detail::with(pool.p2, j)), j);
      bool ok1 =
          !jw ||
          detail::contains(choice(inst, s, 1, detail::with(pool.p1, j)), j);
      if (ok1 && ok2) {
        std::vector<StudentId> evicted =
            detail::settle_admission(inst, st, s, j);
        for (const auto& x : evicted)
          detail::emit(trace, detail::event(TraceEvent::Kind::Evict, x, s));
        detail::emit(trace, detail::event(TraceEvent::Kind::Accept, j, s));
        ++cur;
        for (const auto& x : evicted) st.displaced.push_back(x);
        placed = true;
        break;
      }
      detail::emit(trace, detail::event(TraceEvent::Kind::Reject, j, s));
      ++cur;
    }
    if (!placed)
      detail::emit(trace, detail::event(TraceEvent::Kind::Exhausted, j));
  }
  return st;
}

inline Matching matching_from_state(const Instance& inst,
                                    const MechanismState& st) {
  Matching m;
  for (const auto& stu : inst.students) m.by_student[stu.id] = {};
  for (const auto& [s, pool] : st.pools) {
    for (const auto& i : pool.p1) {
      if (!detail::contains(pool.p2, i))
        throw InstanceError("student " + i + " holds only a period-1 seat at " + s);
      m.by_student[i] = {s, s};
    }
    for (const auto& i : pool.p2) {
      if (detail::contains(pool.p1, i)) continue;
      if (detail::is_wtr(inst, i))
        throw InstanceError("student " + i + " holds only a period-2 seat at " + s);
      m.by_student[i] = {std::nullopt, s};
    }
  }
  return m;
}

namespace detail {

// Throws per the caller's contract: structural problems are instance errors,
// raw_pairs reports are domain errors the mechanism refuses.
inline void require_mechanism_instance(const Instance& inst) {
  ValidationReport rep = validate_instance(inst, {.allow_raw_pairs = true});
  if (!rep.ok())
    throw InstanceError("invalid instance: " + rep.violations.front().code +
                        " (" + rep.violations.front().detail + ")");
  if (inst.has_raw_pairs())
    throw DomainError("instance carries raw_pairs reports; the mechanism "
                      "accepts only priority-only and willingness-to-remain");
}

}  // namespace detail

// The full mechanism: step 1, then one insertion per entry-order element,
// with a pool snapshot after step 1 and after each insertion.
inline MechanismResult deferred_acceptance(const Instance& inst, const EntryOrder& rho) {
  detail::require_mechanism_instance(inst);
  {
    std::vector<StudentId> expect = inst.wtr_students();
    std::vector<StudentId> got = rho.order;
    std::sort(expect.begin(), expect.end());
    std::sort(got.begin(), got.end());
    if (expect != got)
      throw InstanceError(
          "entry order must list each willingness-to-remain student exactly once");
  }

  Trace trace;
  MechanismState st = priority_only_spda(inst, &trace);
  std::vector<StudentId> entered = inst.priority_only_students();
  for (const auto& i : rho.order) {
    st = insert_wtr_student(inst, std::move(st), i, &trace);
    entered.push_back(i);
    trace.push_back(make_snapshot(inst, st, entered, {i}));
  }
  return {matching_from_state(inst, st), std::move(trace)};
}

// Deterministic entry order: willingness-to-remain ids sorted
// lexicographically, then Fisher-Yates shuffled by a seeded std::mt19937_64.
// Same seed and same id set give the same order on any platform.
inline EntryOrder derive_order(const Instance& inst, std::uint64_t seed) {
  std::vector<StudentId> ids = inst.wtr_students();
  std::sort(ids.begin(), ids.end());
  std::mt19937_64 rng(seed);
  for (std::size_t k = ids.size(); k > 1; --k) {
    std::size_t j = static_cast<std::size_t>(rng() % k);
    std::swap(ids[k - 1], ids[j]);
  }
  return {std::move(ids)};
}

namespace detail {

// Classical round-based student-proposing deferred acceptance for one period
// viewed as an isolated market.
inline std::map<StudentId, SchoolId> classical_spda(
    const Instance& inst, const std::vector<StudentId>& participants,
    int period) {
  std::map<StudentId, std::size_t> cursor;
  std::map<StudentId, std::optional<SchoolId>> held;
  for (const auto& i : participants) {
    cursor[i] = 0;
    held[i] = std::nullopt;
  }
  std::map<SchoolId, std::vector<StudentId>> pools;
  for (const auto& sc : inst.schools) pools[sc.id] = {};
  for (;;) {
    std::map<SchoolId, std::vector<StudentId>> proposals;
    bool any = false;
    for (const auto& i : participants) {
      if (held.at(i)) continue;
      const auto& list = inst.student(i).pref.acceptable;
      if (cursor.at(i) >= list.size()) continue;
      proposals[list[cursor.at(i)]].push_back(i);
      any = true;
    }
    if (!any) break;
    for (auto& [s, props] : proposals) {
      std::vector<StudentId> a = pools.at(s);
      for (const auto& i : props) a.push_back(i);
      std::vector<StudentId> c = choice(inst, s, period, a);
      for (const auto& x : pools.at(s))
        if (!contains(c, x)) held.at(x) = std::nullopt;
      for (const auto& x : props) {
        if (contains(c, x)) held.at(x) = s;
        ++cursor.at(x);
      }
      pools.at(s) = c;
    }
  }
  std::map<StudentId, SchoolId> out;
  for (const auto& [i, s] : held)
    if (s) out[i] = *s;
  return out;
}

}  // namespace detail

// Baseline that treats the two periods as unrelated markets: period 1 over
// the willingness-to-remain students with q1, period 2 over all students
// with q2. The per-student results are combined with no cross-period
// consistency, so willingness-to-remain students can end up split.
inline Matching naive_per_period_spda(const Instance& inst) {
  detail::require_mechanism_instance(inst);
  auto m1 = detail::classical_spda(inst, inst.wtr_students(), 1);
  std::vector<StudentId> all;
  for (const auto& stu : inst.students) all.push_back(stu.id);
  auto m2 = detail::classical_spda(inst, all, 2);
  Matching m;
  for (const auto& stu : inst.students) {
    Assignment a;
    if (auto it = m1.find(stu.id); it != m1.end()) a.p1 = it->second;
    if (auto it = m2.find(stu.id); it != m2.end()) a.p2 = it->second;
    m.by_student[stu.id] = a;
  }
  return m;
}

}  // namespace tpda
