#pragma once

#include <span>
#include <vector>

#include "qh/sim/descriptor.hpp"
#include "qh/sim/sampler.hpp"

namespace qh::sim {

/// Applies `kind` to one path observed on `src_times` (which must contain
/// source_grid(kind, targets)), writing the transformed values at `targets`.
void transform_row(const TransformKind& kind, std::span<const double> src_times, std::span<const double> src,
                   std::span<const double> targets, std::span<double> out);

/// Pathwise transform of a whole ensemble onto `targets`. Throws GridMismatch
/// if the ensemble lacks a required source time, and the conditioning error
/// (NonpositiveK, ...) with the offending path index.
PathEnsemble transform_paths(const PathEnsemble& e, const TransformKind& kind, const std::vector<double>& targets,
                             Exec exec = Exec::Parallel);

}  // namespace qh::sim
