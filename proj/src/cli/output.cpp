#include "qh/cli/output.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <unistd.h>

namespace qh::cli {

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) raise(ErrorCode::ParseError, "cannot write '" + tmp.string() + "'");
    os << content;
    os.flush();
    if (!os) raise(ErrorCode::ParseError, "write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    raise(ErrorCode::ParseError, "cannot rename onto '" + path + "': " + ec.message());
  }
}

void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty()) {
    out << content;
  } else {
    write_atomic(path, content);
  }
}

std::string config_path(const std::string& path) { return path + ".config.json"; }

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace qh::cli
