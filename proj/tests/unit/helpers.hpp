#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifndef EVKIT_TEST_DATA
#error "EVKIT_TEST_DATA must point at tests/data"
#endif

namespace testing {

inline std::filesystem::path data(const std::string& rel) { return std::filesystem::path(EVKIT_TEST_DATA) / rel; }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Fresh scratch directory under the build tree.
inline std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("evkit_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testing
