#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qh/sim/descriptor.hpp"

namespace qh::sim {

/// n_paths x n_times matrix of sampled values, row-major.
struct PathEnsemble {
  std::vector<double> times;
  std::size_t n_paths = 0;
  std::vector<double> values;
  std::uint64_t seed = 0;
  ProcessDescriptor descriptor{};

  std::size_t n_times() const { return times.size(); }
  double at(std::size_t path, std::size_t k) const { return values[path * times.size() + k]; }
  std::span<const double> row(std::size_t path) const {
    return {values.data() + path * times.size(), times.size()};
  }
  /// Column index of time t (exact match), or throws GridMismatch.
  std::size_t index_of(double t) const;
};

enum class Exec { Serial, Parallel };

/// Markov forward sampling of `n_paths` paths on `times`. Row i depends only on
/// (seed, i): the serial and parallel kernels produce identical ensembles.
PathEnsemble sample_ensemble(const ProcessDescriptor& d, const std::vector<double>& times, std::size_t n_paths,
                             std::uint64_t seed, Exec exec = Exec::Parallel);

/// One path of `d` on `times` drawn from the stream of (seed, index).
void sample_path(const ProcessDescriptor& d, std::span<const double> times, std::uint64_t seed,
                 std::uint64_t index, std::span<double> out);

}  // namespace qh::sim
