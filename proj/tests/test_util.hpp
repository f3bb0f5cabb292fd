#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tpda/model.hpp"

namespace testutil {

inline tpda::Assignment both(const std::string& s) { return {s, s}; }

inline tpda::Assignment p2only(const std::string& s) {
  return {std::nullopt, s};
}

inline tpda::Assignment p1only(const std::string& s) {
  return {s, std::nullopt};
}

inline tpda::Assignment home() { return {}; }

inline tpda::Matching matching_of(
    std::vector<std::pair<std::string, tpda::Assignment>> entries) {
  tpda::Matching m;
  for (auto& [id, a] : entries) m.by_student[id] = a;
  return m;
}

// The mechanism outcome on example1 under entry order (i1,i4,i3,i2).
inline tpda::Matching example1_outcome() {
  return matching_of({{"i1", home()},
                      {"i2", both("s2")},
                      {"i3", both("s1")},
                      {"i4", both("s1")},
                      {"i5", home()},
                      {"i6", p2only("s2")}});
}

}  // namespace testutil
