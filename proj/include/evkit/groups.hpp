#pragma once

#include <array>
#include <cstddef>
#include <string_view>

namespace evkit {

// The 2x2 sort: zaibatsu affiliation x military (Category A) orientation.
enum class Group : std::size_t { ZM = 0, ZN = 1, NM = 2, NN = 3 };

inline constexpr std::array<Group, 4> kGroups{Group::ZM, Group::ZN, Group::NM, Group::NN};

constexpr std::size_t index(Group g) { return static_cast<std::size_t>(g); }
constexpr bool is_zaibatsu(Group g) { return g == Group::ZM || g == Group::ZN; }
constexpr bool is_military(Group g) { return g == Group::ZM || g == Group::NM; }

constexpr Group group_of(bool zaibatsu, bool military) {
  if (zaibatsu) return military ? Group::ZM : Group::ZN;
  return military ? Group::NM : Group::NN;
}

constexpr std::string_view name(Group g) {
  constexpr std::array<std::string_view, 4> names{"zm", "zn", "nm", "nn"};
  return names[index(g)];
}

}  // namespace evkit
