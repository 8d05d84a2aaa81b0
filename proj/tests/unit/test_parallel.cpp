#include <doctest.h>

#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "evkit/parallel.hpp"
#include "evkit/rng.hpp"

using namespace evkit;

TEST_CASE("par::map_indexed matches the serial reference") {
  auto job = [](std::size_t i) {
    Rng rng(derive_seed(7, i));
    std::normal_distribution<double> z;
    double s = 0.0;
    for (int k = 0; k < 100; ++k) s += z(rng);
    return s;
  };
  const auto a = par::map_indexed(500, job);
  const auto b = serial::map_indexed(500, job);
  CHECK(a == b);
  CHECK(par::map_indexed(0, job).empty());
  CHECK(max_threads() >= 1);
}

TEST_CASE("par::map_indexed rethrows the lowest failing job") {
  auto job = [](std::size_t i) -> int {
    if (i % 37 == 5) throw std::runtime_error("job " + std::to_string(i));
    return static_cast<int>(i);
  };
  CHECK_THROWS_WITH_AS(par::map_indexed(200, job), "job 5", std::runtime_error);
  CHECK_THROWS_WITH_AS(serial::map_indexed(200, job), "job 5", std::runtime_error);
}

TEST_CASE("keyed seeds") {
  CHECK(derive_seed(1, "zm") == derive_seed(1, "zm"));
  CHECK(derive_seed(1, "zm") != derive_seed(1, "nn"));
  CHECK(derive_seed(1, "zm") != derive_seed(2, "zm"));
  CHECK(derive_seed(1, std::uint64_t{0}) != derive_seed(1, std::uint64_t{1}));
}
