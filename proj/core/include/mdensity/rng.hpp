#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace mdensity {

/// Seeded random stream. One owner at a time; parallel consumers get their
/// own stream through split().
///
/// Child streams are derived counter-style: the child with index i of a
/// stream seeded with s is seeded with splitmix64(s ^ splitmix64(i + 1)).
/// The derivation does not consume draws from the parent.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  /// Independent child stream number `index`.
  Rng split(std::uint64_t index) const;

  double normal();
  double uniform();  // [0, 1)

  Eigen::VectorXd normal_vector(Eigen::Index n);
  Eigen::VectorXd uniform_vector(Eigen::Index n);
  void fill_normal(Eigen::Ref<Eigen::VectorXd> out);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace mdensity
