#pragma once

#include <random>

#include "semimnar/simulation.hpp"

namespace fixtures {

inline semimnar::Dataset discrete(std::size_t n, std::uint64_t seed,
                                  semimnar::ResponseModelId m = semimnar::ResponseModelId::M1) {
  std::mt19937_64 rng(seed);
  return semimnar::gen_discrete(semimnar::make_dgp(semimnar::DgpFamily::discrete, m, n), rng);
}

inline semimnar::Dataset mixed(std::size_t n, std::uint64_t seed,
                               semimnar::ResponseModelId m = semimnar::ResponseModelId::M1) {
  std::mt19937_64 rng(seed);
  return semimnar::gen_mixed(semimnar::make_dgp(semimnar::DgpFamily::mixed, m, n), rng);
}

/// Every row responds; missing outcomes are filled with coin flips (binary)
/// or standard normal draws.
inline semimnar::Dataset complete_version(const semimnar::Dataset& d, std::uint64_t seed,
                                          bool binary) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::vector<semimnar::Observation> rows = d.rows();
  for (auto& o : rows) {
    if (!o.y) o.y = binary ? (z(rng) > 0 ? 1.0 : 0.0) : z(rng);
    o.delta = 1;
  }
  return d.with_rows(std::move(rows));
}

}  // namespace fixtures
