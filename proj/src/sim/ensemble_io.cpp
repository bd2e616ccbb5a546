#include "qh/sim/ensemble_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace qh::sim {

namespace {

void put_double(std::string& buf, double x) {
  char tmp[32];
  const int n = std::snprintf(tmp, sizeof tmp, "%.17g", x);
  buf.append(tmp, static_cast<std::size_t>(n));
}

double parse_double(const std::string& field) {
  double x = 0;
  const char* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, x);
  if (ec != std::errc() || ptr != end) raise(ErrorCode::ParseError, "bad number '" + field + "'");
  return x;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void write_ensemble_csv(std::ostream& os, const PathEnsemble& e) {
  std::string buf = "path_id";
  for (double t : e.times) {
    buf += ",t=";
    put_double(buf, t);
  }
  buf += '\n';
  os << buf;
  for (std::size_t i = 0; i < e.n_paths; ++i) {
    buf = std::to_string(i);
    for (double x : e.row(i)) {
      buf += ',';
      put_double(buf, x);
    }
    buf += '\n';
    os << buf;
  }
}

std::string ensemble_csv(const PathEnsemble& e) {
  std::ostringstream os;
  write_ensemble_csv(os, e);
  return os.str();
}

PathEnsemble read_ensemble_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) raise(ErrorCode::ParseError, "empty ensemble file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv(line);
  if (header.size() < 2 || header[0] != "path_id") raise(ErrorCode::ParseError, "header must start with path_id");
  PathEnsemble e;
  for (std::size_t k = 1; k < header.size(); ++k) {
    if (header[k].rfind("t=", 0) != 0) raise(ErrorCode::ParseError, "header field '" + header[k] + "' is not t=<time>");
    e.times.push_back(parse_double(header[k].substr(2)));
    if (k > 1 && !(e.times[k - 2] < e.times[k - 1])) {
      raise(ErrorCode::DomainViolation, "ensemble grid is not strictly increasing");
    }
  }
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != header.size()) {
      raise(ErrorCode::ParseError, "row " + std::to_string(e.n_paths) + " has the wrong number of fields");
    }
    for (std::size_t k = 1; k < fields.size(); ++k) e.values.push_back(parse_double(fields[k]));
    ++e.n_paths;
  }
  return e;
}

PathEnsemble read_ensemble_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::ParseError, "cannot open '" + path + "'");
  return read_ensemble_csv(in);
}

}  // namespace qh::sim
