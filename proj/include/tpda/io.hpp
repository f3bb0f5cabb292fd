#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "tpda/model.hpp"

// Document formats, built-in fixtures, and seeded instance generation.
//
// Both document kinds are JSON with a mandatory "version" field. Serialization
// is canonical: fixed key order, two-space indentation, trailing newline, so
// golden files diff cleanly and repeated runs are byte-identical.

namespace tpda {

inline constexpr const char* kDocumentVersion = "1";

struct ParseOptions {
  // Accept raw_pairs reports (audit mode); the default rejects them.
  bool allow_raw_pairs = false;
};

struct Provenance {
  std::string mechanism;
  std::optional<std::vector<StudentId>> order;
  std::optional<std::uint64_t> seed;

  bool operator==(const Provenance&) const = default;
};

struct MatchingDocument {
  Matching matching;
  std::optional<Provenance> provenance;

  bool operator==(const MatchingDocument&) const = default;
};

namespace io_detail {

using json = nlohmann::ordered_json;

inline json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("syntax error: ") + e.what());
  }
}

inline const json& field(const json& obj, const char* key,
                         const std::string& where) {
  if (!obj.is_object() || !obj.contains(key))
    throw ParseError("missing field \"" + std::string(key) + "\" in " + where);
  return obj.at(key);
}

inline std::string string_field(const json& obj, const char* key,
                                const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_string())
    throw ParseError("field \"" + std::string(key) + "\" in " + where +
                     " must be a string");
  return v.get<std::string>();
}

inline int int_field(const json& obj, const char* key,
                     const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_number_integer())
    throw ParseError("field \"" + std::string(key) + "\" in " + where +
                     " must be an integer");
  return v.get<int>();
}

inline std::vector<std::string> string_list(const json& v,
                                            const std::string& where) {
  if (!v.is_array())
    throw ParseError(where + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string())
      throw ParseError(where + " must contain only strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

inline std::optional<SchoolId> school_or_null(const json& v,
                                              const std::string& where) {
  if (v.is_null()) return std::nullopt;
  if (v.is_string()) return v.get<std::string>();
  throw ParseError(where + " must be a school id or null");
}

inline void check_version(const json& doc, const std::string& what) {
  std::string v = string_field(doc, "version", what);
  if (v != kDocumentVersion)
    throw ParseError("unsupported " + what + " version \"" + v +
                     "\" (expected \"" + kDocumentVersion + "\")");
}

}  // namespace io_detail

inline Instance parse_instance(const std::string& text,
                               ParseOptions opts = {}) {
  using io_detail::json;
  json doc = io_detail::parse_json(text);
  io_detail::check_version(doc, "instance document");

  Instance inst;
  const json& students = io_detail::field(doc, "students", "instance document");
  if (!students.is_array())
    throw ParseError("\"students\" must be an array");
  for (const auto& js : students) {
    Student stu;
    stu.id = io_detail::string_field(js, "id", "student entry");
    std::string kind = io_detail::string_field(js, "kind", "student " + stu.id);
    if (kind == "priority_only" || kind == "willingness_to_remain") {
      stu.pref.kind = kind == "priority_only" ? PrefKind::PriorityOnly
                                              : PrefKind::WillingnessToRemain;
      stu.pref.acceptable = io_detail::string_list(
          io_detail::field(js, "prefs", "student " + stu.id),
          "\"prefs\" of student " + stu.id);
    } else if (kind == "raw_pairs") {
      stu.pref.kind = PrefKind::RawPairs;
      const json& pairs = io_detail::field(js, "pairs", "student " + stu.id);
      if (!pairs.is_array())
        throw ParseError("\"pairs\" of student " + stu.id + " must be an array");
      for (const auto& jp : pairs) {
        if (!jp.is_array() || jp.size() != 2)
          throw ParseError("each pair of student " + stu.id +
                           " must be a two-element array");
        Assignment a;
        a.p1 = io_detail::school_or_null(jp[0], "pair of student " + stu.id);
        a.p2 = io_detail::school_or_null(jp[1], "pair of student " + stu.id);
        stu.pref.ranked_pairs.push_back(a);
      }
    } else {
      throw ParseError("student " + stu.id + " has unknown kind \"" + kind +
                       "\"");
    }
    inst.students.push_back(std::move(stu));
  }

  const json& schools = io_detail::field(doc, "schools", "instance document");
  if (!schools.is_array())
    throw ParseError("\"schools\" must be an array");
  for (const auto& js : schools) {
    School sc;
    sc.id = io_detail::string_field(js, "id", "school entry");
    sc.priority = io_detail::string_list(
        io_detail::field(js, "priority", "school " + sc.id),
        "\"priority\" of school " + sc.id);
    sc.quota.q1 = io_detail::int_field(js, "q1", "school " + sc.id);
    sc.quota.q2 = io_detail::int_field(js, "q2", "school " + sc.id);
    if (sc.quota.q1 < 0 || sc.quota.q2 < 0)
      throw ParseError("school " + sc.id + " has a negative capacity");
    inst.schools.push_back(std::move(sc));
  }

  ValidationReport rep =
      validate_instance(inst, {.allow_raw_pairs = opts.allow_raw_pairs});
  if (!rep.ok()) {
    const Violation& v = rep.violations.front();
    throw ParseError(v.code + ": " + v.detail);
  }
  return inst;
}

inline std::string serialize_instance(const Instance& inst) {
  using io_detail::json;
  json doc;
  doc["version"] = kDocumentVersion;
  doc["students"] = json::array();
  for (const auto& stu : inst.students) {
    json js;
    js["id"] = stu.id;
    js["kind"] = to_string(stu.pref.kind);
    if (stu.pref.kind == PrefKind::RawPairs) {
      json pairs = json::array();
      for (const auto& a : stu.pref.ranked_pairs) {
        json jp = json::array();
        jp.push_back(a.p1 ? json(*a.p1) : json(nullptr));
        jp.push_back(a.p2 ? json(*a.p2) : json(nullptr));
        pairs.push_back(std::move(jp));
      }
      js["pairs"] = std::move(pairs);
    } else {
      js["prefs"] = stu.pref.acceptable;
    }
    doc["students"].push_back(std::move(js));
  }
  doc["schools"] = json::array();
  for (const auto& sc : inst.schools) {
    json js;
    js["id"] = sc.id;
    js["priority"] = sc.priority;
    js["q1"] = sc.quota.q1;
    js["q2"] = sc.quota.q2;
    doc["schools"].push_back(std::move(js));
  }
  return doc.dump(2) + "\n";
}

inline MatchingDocument parse_matching(const std::string& text) {
  using io_detail::json;
  json doc = io_detail::parse_json(text);
  io_detail::check_version(doc, "matching document");

  MatchingDocument out;
  const json& assignments =
      io_detail::field(doc, "assignments", "matching document");
  if (!assignments.is_array())
    throw ParseError("\"assignments\" must be an array");
  for (const auto& ja : assignments) {
    std::string id = io_detail::string_field(ja, "id", "assignment entry");
    if (out.matching.by_student.count(id))
      throw ParseError("duplicate assignment for student " + id);
    Assignment a;
    a.p1 = io_detail::school_or_null(io_detail::field(ja, "p1", "student " + id),
                                     "\"p1\" of student " + id);
    a.p2 = io_detail::school_or_null(io_detail::field(ja, "p2", "student " + id),
                                     "\"p2\" of student " + id);
    out.matching.by_student[id] = a;
  }
  if (doc.contains("provenance")) {
    const json& jp = doc.at("provenance");
    Provenance p;
    p.mechanism = io_detail::string_field(jp, "mechanism", "provenance");
    if (jp.contains("order"))
      p.order = io_detail::string_list(jp.at("order"), "provenance order");
    if (jp.contains("seed")) {
      if (!jp.at("seed").is_number_unsigned())
        throw ParseError("provenance seed must be a non-negative integer");
      p.seed = jp.at("seed").get<std::uint64_t>();
    }
    out.provenance = std::move(p);
  }
  return out;
}

inline std::string serialize_matching(
    const Matching& m, const std::optional<Provenance>& provenance = {}) {
  using io_detail::json;
  json doc;
  doc["version"] = kDocumentVersion;
  doc["assignments"] = json::array();
  for (const auto& [id, a] : m.by_student) {
    json ja;
    ja["id"] = id;
    ja["p1"] = a.p1 ? json(*a.p1) : json(nullptr);
    ja["p2"] = a.p2 ? json(*a.p2) : json(nullptr);
    doc["assignments"].push_back(std::move(ja));
  }
  if (provenance) {
    json jp;
    jp["mechanism"] = provenance->mechanism;
    if (provenance->order) jp["order"] = *provenance->order;
    if (provenance->seed) jp["seed"] = *provenance->seed;
    doc["provenance"] = std::move(jp);
  }
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Built-in fixtures.

inline Instance builtin_example1() {
  Instance inst;
  inst.students = {
      {"i1", ExtendedPreference::willingness_to_remain({"s1", "s2"})},
      {"i2", ExtendedPreference::willingness_to_remain({"s1", "s2"})},
      {"i3", ExtendedPreference::willingness_to_remain({"s2", "s1"})},
      {"i4", ExtendedPreference::willingness_to_remain({"s2", "s1"})},
      {"i5", ExtendedPreference::priority_only({"s2", "s1"})},
      {"i6", ExtendedPreference::priority_only({"s1", "s2"})},
  };
  inst.schools = {
      {"s1", {"i3", "i4", "i1", "i2", "i6", "i5"}, {2, 2}},
      {"s2", {"i6", "i2", "i5", "i3", "i4", "i1"}, {2, 2}},
  };
  return inst;
}

// Three students, two schools, q = (1,2) in both periods. Student i1's report
// ranks the split pair (s1,s2) above (s2,s2), which no in-domain kind can
// express; it ships as a raw_pairs report for the no-stable-matching audit.
inline Instance builtin_prop1() {
  Instance inst;
  inst.students = {
      {"i1", ExtendedPreference::raw_pairs({{SchoolId("s1"), SchoolId("s2")},
                                            {SchoolId("s2"), SchoolId("s2")}})},
      {"i2", ExtendedPreference::willingness_to_remain({"s1", "s2"})},
      {"i3", ExtendedPreference::willingness_to_remain({"s2"})},
  };
  inst.schools = {
      {"s1", {"i1", "i2"}, {1, 1}},
      {"s2", {"i2", "i3", "i1"}, {2, 2}},
  };
  return inst;
}

// The candidate matching quoted for the per-period baseline on example1.
inline Matching builtin_naive_candidate_example1() {
  Matching m;
  m.by_student["i1"] = {SchoolId("s1"), SchoolId("s1")};
  m.by_student["i2"] = {SchoolId("s1"), SchoolId("s1")};
  m.by_student["i3"] = {SchoolId("s2"), SchoolId("s2")};
  m.by_student["i4"] = {};
  m.by_student["i5"] = {std::nullopt, SchoolId("s2")};
  m.by_student["i6"] = {};
  return m;
}

enum class BuiltinKind { Instance, Matching };

inline std::vector<std::pair<std::string, BuiltinKind>> builtin_names() {
  return {{"example1", BuiltinKind::Instance},
          {"prop1", BuiltinKind::Instance},
          {"naive_candidate_example1", BuiltinKind::Matching}};
}

inline Instance builtin_instance(const std::string& name) {
  if (name == "example1") return builtin_example1();
  if (name == "prop1") return builtin_prop1();
  throw ParseError("unknown builtin instance \"" + name + "\"");
}

inline Matching builtin_matching(const std::string& name) {
  if (name == "naive_candidate_example1")
    return builtin_naive_candidate_example1();
  throw ParseError("unknown builtin matching \"" + name + "\"");
}

// ---------------------------------------------------------------------------
// Seeded random instances.

struct GeneratorParams {
  int n_students = 0;
  int n_schools = 0;
  double wtr_fraction = 0.5;
  int max_list_length = 0;
  int q1_min = 0;
  int q1_max = 0;
  int q2_min = 0;
  int q2_max = 0;
  std::uint64_t seed = 0;

  bool operator==(const GeneratorParams&) const = default;
};

namespace io_detail {

inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  return n == 0 ? 0 : rng() % n;
}

inline double unit_real(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

// Random ordered subset of ids with the given length.
inline std::vector<std::string> ordered_subset(std::mt19937_64& rng,
                                               std::vector<std::string> ids,
                                               std::size_t len) {
  for (std::size_t k = 0; k < len; ++k) {
    std::size_t j = k + bounded(rng, ids.size() - k);
    std::swap(ids[k], ids[j]);
  }
  ids.resize(len);
  return ids;
}

}  // namespace io_detail

inline void validate_params(const GeneratorParams& p) {
  if (p.n_students < 0 || p.n_schools < 0)
    throw InstanceError("generator: counts must be non-negative");
  if (p.wtr_fraction < 0.0 || p.wtr_fraction > 1.0)
    throw InstanceError("generator: wtr_fraction must lie in [0,1]");
  if (p.max_list_length < 0)
    throw InstanceError("generator: max_list_length must be non-negative");
  if (p.q1_min < 0 || p.q1_min > p.q1_max || p.q2_min < 0 ||
      p.q2_min > p.q2_max)
    throw InstanceError("generator: capacity ranges must satisfy 0 <= min <= max");
}

// Deterministic in seed. Preference lists are random ordered subsets of the
// schools (possibly empty); priority lists are random ordered subsets of the
// students, so schools may find some students unacceptable.
inline Instance generate(const GeneratorParams& p) {
  validate_params(p);
  std::mt19937_64 rng(p.seed);
  Instance inst;

  std::vector<std::string> student_ids, school_ids;
  for (int k = 1; k <= p.n_students; ++k)
    student_ids.push_back("i" + std::to_string(k));
  for (int k = 1; k <= p.n_schools; ++k)
    school_ids.push_back("s" + std::to_string(k));

  const std::size_t max_len = static_cast<std::size_t>(
      std::min(p.max_list_length, p.n_schools));
  for (const auto& id : student_ids) {
    Student stu;
    stu.id = id;
    bool wtr = io_detail::unit_real(rng) < p.wtr_fraction;
    std::size_t len = io_detail::bounded(rng, max_len + 1);
    auto prefs = io_detail::ordered_subset(rng, school_ids, len);
    stu.pref = wtr ? ExtendedPreference::willingness_to_remain(prefs)
                   : ExtendedPreference::priority_only(prefs);
    inst.students.push_back(std::move(stu));
  }
  for (const auto& id : school_ids) {
    School sc;
    sc.id = id;
    std::size_t len = io_detail::bounded(rng, student_ids.size() + 1);
    sc.priority = io_detail::ordered_subset(rng, student_ids, len);
    sc.quota.q1 = p.q1_min + static_cast<int>(io_detail::bounded(
                                 rng, static_cast<std::uint64_t>(p.q1_max - p.q1_min) + 1));
    sc.quota.q2 = p.q2_min + static_cast<int>(io_detail::bounded(
                                 rng, static_cast<std::uint64_t>(p.q2_max - p.q2_min) + 1));
    inst.schools.push_back(std::move(sc));
  }
  return inst;
}

}  // namespace tpda
