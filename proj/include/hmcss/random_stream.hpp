#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace hmcss {

/// Reproducible random stream keyed by (seed, stream_id).
///
/// The engine is seeded through std::seed_seq from the four 32-bit halves of
/// the key, so the draw sequence depends only on the key and never on thread
/// scheduling. Child streams for chains and repetitions are derived with
/// substream(), which hashes the parent id together with the child index.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  // Uniform on [0, 1).
  double uniform();
  double normal();
  Eigen::VectorXd normal_vector(Eigen::Index n);
  Eigen::VectorXd uniform_vector(Eigen::Index n);

  RandomStream substream(std::uint64_t index) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace hmcss
