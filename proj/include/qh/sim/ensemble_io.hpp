#pragma once

#include <iosfwd>
#include <string>

#include "qh/sim/sampler.hpp"

namespace qh::sim {

/// Header `path_id,t=<g1>,...`, one row per path, values with 17 significant digits.
void write_ensemble_csv(std::ostream& os, const PathEnsemble& e);
std::string ensemble_csv(const PathEnsemble& e);

/// Reads the CSV format above. Throws ParseError on malformed input and
/// DomainViolation if the grid is not strictly increasing. The descriptor is
/// left default (wiener) and the seed 0; callers restore them from the config.
PathEnsemble read_ensemble_csv(std::istream& is);
PathEnsemble read_ensemble_csv_file(const std::string& path);

}  // namespace qh::sim
