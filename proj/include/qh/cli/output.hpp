#pragma once

#include <ostream>
#include <string>

#include "qh/core/io.hpp"

namespace qh::cli {

/// Writes `content` to a temporary file beside `path` and renames it into place.
void write_atomic(const std::string& path, const std::string& content);

/// Writes to `path`, or to `out` when `path` is empty.
void emit(const std::string& path, const std::string& content, std::ostream& out);

/// `<path>.config.json` beside an output file.
std::string config_path(const std::string& path);

std::string dump(const json& j);

}  // namespace qh::cli
