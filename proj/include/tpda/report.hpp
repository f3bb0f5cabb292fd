#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "tpda/audit.hpp"
#include "tpda/io.hpp"
#include "tpda/mechanism.hpp"
#include "tpda/model.hpp"

// Plain-text renderings shared by the command-line tool and the test suites.
// All output is deterministic for identical inputs: no timestamps, no
// addresses, fixed orderings.

namespace tpda {

inline std::string render_assignment(const Assignment& a) {
  auto side = [](const std::optional<SchoolId>& s) {
    return s ? *s : std::string("-");
  };
  return "(" + side(a.p1) + "," + side(a.p2) + ")";
}

inline std::string join_ids(const std::vector<StudentId>& ids,
                            const char* sep = ",") {
  std::string out;
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (k) out += sep;
    out += ids[k];
  }
  return out;
}

// One line per student in instance order, e.g. "i1=(s1,s1) i2=(-,-)".
inline std::string render_matching_inline(const Instance& inst,
                                          const Matching& m) {
  std::string out;
  for (std::size_t k = 0; k < inst.students.size(); ++k) {
    if (k) out += " ";
    out += inst.students[k].id + "=" + render_assignment(m.of(inst.students[k].id));
  }
  return out;
}

inline std::string render_audit_report(const AuditReport& rep) {
  std::ostringstream os;
  os << "individually_rational: " << (rep.individually_rational ? "true" : "false")
     << "\n";
  os << "blocking_coalitions: " << rep.blocking.size() << "\n";
  for (const auto& b : rep.blocking)
    os << "  " << b.student << " -> " << render_assignment(b.target) << " ["
       << to_string(b.form) << "]\n";
  os << "stable: " << (rep.stable ? "true" : "false") << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Trace renderings.

inline std::string render_trace_events(const Trace& trace) {
  std::ostringstream os;
  for (const auto& ev : trace) {
    switch (ev.kind) {
      case TraceEvent::Kind::Entrant:
        os << "entrant " << ev.student << "\n";
        break;
      case TraceEvent::Kind::Apply:
        os << "apply " << ev.student << " -> " << ev.school << "\n";
        break;
      case TraceEvent::Kind::Accept:
        os << "accept " << ev.student << " @ " << ev.school << "\n";
        break;
      case TraceEvent::Kind::Evict:
        os << "evict " << ev.student << " @ " << ev.school << "\n";
        break;
      case TraceEvent::Kind::Reject:
        os << "reject " << ev.student << " @ " << ev.school << "\n";
        break;
      case TraceEvent::Kind::Exhausted:
        os << "exhausted " << ev.student << "\n";
        break;
      case TraceEvent::Kind::Snapshot: {
        os << "snapshot";
        for (const auto& [s, pool] : ev.pools)
          os << " " << s << ":{" << join_ids(pool.p1) << "}/{"
             << join_ids(pool.p2) << "}";
        os << " unmatched:{" << join_ids(ev.unmatched) << "}\n";
        break;
      }
    }
  }
  return os.str();
}

// One row per snapshot: per school a period-1 and a period-2 column, then the
// unmatched set, the entry order, and the entrants the row covers.
inline std::string render_trace_table(const Instance& inst, const Trace& trace,
                                      const EntryOrder& rho) {
  std::vector<std::string> header;
  for (const auto& sc : inst.schools) {
    header.push_back(sc.id + "^1");
    header.push_back(sc.id + "^2");
  }
  header.push_back("unmatched");
  header.push_back("rho");
  header.push_back("entrant");

  const std::string rho_cell = "(" + join_ids(rho.order) + ")";
  std::vector<std::vector<std::string>> rows;
  bool first_snapshot = true;
  for (const auto& ev : trace) {
    if (ev.kind != TraceEvent::Kind::Snapshot) continue;
    std::vector<std::string> row;
    for (const auto& sc : inst.schools) {
      const PoolPair& pool = ev.pools.at(sc.id);
      row.push_back(join_ids(pool.p1));
      row.push_back(join_ids(pool.p2));
    }
    row.push_back(join_ids(ev.unmatched));
    row.push_back(first_snapshot ? "" : rho_cell);
    row.push_back(join_ids(ev.entrants));
    rows.push_back(std::move(row));
    first_snapshot = false;
  }

  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& row : rows) width[c] = std::max(width[c], row[c].size());
  }

  std::ostringstream os;
  auto emit_row = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) os << " | ";
      os << row[c];
      for (std::size_t p = row[c].size(); p < width[c]; ++p) os << ' ';
    }
    os << "\n";
  };
  emit_row(header);
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) os << "-+-";
    os << std::string(width[c], '-');
  }
  os << "\n";
  for (const auto& row : rows) emit_row(row);
  return os.str();
}

// ---------------------------------------------------------------------------
// Stable-set enumeration report.

struct EnumerationOutcome {
  std::size_t ir_count = 0;
  std::vector<Matching> stable;
  std::string text;
};

// Enumerates the individually-rational-shaped matchings, audits each, and
// reports the stable set. When no stable matching exists, every enumerated
// matching is printed with the reason it fails (all its blocking coalitions,
// or the individual-rationality verdict).
inline EnumerationOutcome build_enumeration_report(const Instance& inst,
                                                   EnumerationBound bound = {}) {
  EnumerationOutcome out;
  std::ostringstream detail;
  std::vector<std::string> stable_lines;
  for_each_ir_matching(
      inst,
      [&](const Matching& m) {
        ++out.ir_count;
        AuditReport rep = is_stable(inst, m);
        if (rep.stable) {
          out.stable.push_back(m);
          stable_lines.push_back(render_matching_inline(inst, m));
          return;
        }
        detail << "matching " << out.ir_count << ": "
               << render_matching_inline(inst, m) << "\n";
        if (!rep.individually_rational)
          detail << "  not individually rational\n";
        for (const auto& b : rep.blocking)
          detail << "  blocked by " << b.student << " -> "
                 << render_assignment(b.target) << " [" << to_string(b.form)
                 << "]\n";
      },
      bound);

  std::ostringstream os;
  os << "stable matchings: " << out.stable.size() << "\n";
  for (const auto& line : stable_lines) os << "  " << line << "\n";
  os << "candidate matchings: " << out.ir_count << "\n";
  if (out.stable.empty()) os << detail.str();
  out.text = os.str();
  return out;
}

// ---------------------------------------------------------------------------
// Mechanism comparison report.

inline std::string render_comparison(const Instance& inst,
                                     const MechanismComparison& cmp) {
  std::ostringstream os;
  os << "== adapted two-period mechanism\n";
  os << render_matching_inline(inst, cmp.adapted) << "\n";
  os << render_audit_report(cmp.adapted_audit);
  os << "== naive per-period baseline\n";
  os << render_matching_inline(inst, cmp.naive) << "\n";
  os << render_audit_report(cmp.naive_audit);
  return os.str();
}

// ---------------------------------------------------------------------------
// Fuzzing.

struct FuzzChecks {
  bool stability = true;
  bool strategyproofness = false;
  bool rho_sensitivity = false;
};

struct FuzzParams {
  std::uint64_t seed = 0;
  int count = 0;
  int max_students = 6;
  int max_schools = 3;
  double wtr_fraction = 0.5;
  int q_min = 0;
  int q_max = 3;
  // When >= 0, run only the instance with this index (reproduction aid).
  long only = -1;
};

struct FuzzOutcome {
  int instances_run = 0;
  // Violations of asserted checks (stability, kind-preserving
  // strategy-proofness).
  int violations = 0;
  // Kind-switching improvements are findings, reported but not asserted.
  int kind_switching_findings = 0;
  int rho_agreements = 0;
  int rho_checked = 0;
  std::string text;
};

inline FuzzOutcome run_fuzz(const FuzzParams& fp, const FuzzChecks& checks) {
  FuzzOutcome out;
  std::ostringstream os;
  std::ostringstream failures;
  std::mt19937_64 master(fp.seed);
  for (int k = 0; k < fp.count; ++k) {
    GeneratorParams gp;
    gp.n_students = 1 + static_cast<int>(io_detail::bounded(
                            master, static_cast<std::uint64_t>(fp.max_students)));
    gp.n_schools = 1 + static_cast<int>(io_detail::bounded(
                           master, static_cast<std::uint64_t>(fp.max_schools)));
    gp.wtr_fraction = fp.wtr_fraction;
    gp.max_list_length = gp.n_schools;
    gp.q1_min = fp.q_min;
    gp.q1_max = fp.q_max;
    gp.q2_min = fp.q_min;
    gp.q2_max = fp.q_max;
    gp.seed = master();
    const std::uint64_t rho_seed = master();
    if (fp.only >= 0 && k != fp.only) continue;

    const Instance inst = generate(gp);
    ++out.instances_run;
    auto describe = [&](const char* check) {
      failures << "violation[" << check << "] instance " << k
               << " (students=" << gp.n_students << " schools=" << gp.n_schools
               << " gen_seed=" << gp.seed << " rho_seed=" << rho_seed << ")\n"
               << "  reproduce: tpda fuzz --seed " << fp.seed << " --count "
               << fp.count << " --max-students " << fp.max_students
               << " --max-schools " << fp.max_schools << " --wtr-fraction "
               << fp.wtr_fraction << " --q-min " << fp.q_min << " --q-max "
               << fp.q_max << " --checks " << check << " --only " << k << "\n";
    };

    if (checks.stability) {
      Matching m = deferred_acceptance(inst, derive_order(inst, rho_seed)).matching;
      AuditReport rep = is_stable(inst, m);
      if (!rep.stable) {
        ++out.violations;
        describe("stability");
      }
    }
    if (checks.strategyproofness) {
      auto devs = strategyproofness_audit(inst, rho_seed);
      for (const auto& d : devs) {
        if (d.kind_switching) {
          ++out.kind_switching_findings;
          failures << "finding[kind-switching] instance " << k << " student "
                   << d.student << " -> "
                   << render_assignment(d.deviating_outcome) << " over "
                   << render_assignment(d.truthful_outcome) << "\n";
        } else {
          ++out.violations;
          describe("strategyproofness");
        }
      }
    }
    if (checks.rho_sensitivity) {
      Matching base = deferred_acceptance(inst, derive_order(inst, rho_seed)).matching;
      bool agree = true;
      for (std::uint64_t alt = 1; alt <= 4; ++alt) {
        Matching other =
            deferred_acceptance(inst, derive_order(inst, rho_seed + alt)).matching;
        if (!(other == base)) {
          agree = false;
          break;
        }
      }
      ++out.rho_checked;
      if (agree) ++out.rho_agreements;
    }
  }

  os << "instances: " << out.instances_run << "\n";
  os << "violations: " << out.violations << "\n";
  if (checks.strategyproofness)
    os << "kind_switching_findings: " << out.kind_switching_findings << "\n";
  if (checks.rho_sensitivity)
    os << "rho_agreement: " << out.rho_agreements << "/" << out.rho_checked
       << " instances matched across 5 entry orders\n";
  os << failures.str();
  out.text = os.str();
  return out;
}

}  // namespace tpda
