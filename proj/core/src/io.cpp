#include "stableid/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "stableid/errors.hpp"

namespace stableid {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_matrix(std::ostream& out, const Matrix& m) {
  out << m.rows() << " " << m.cols() << "\n";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << " ";
      out << format_double(m(i, j));
    }
    out << "\n";
  }
}

Matrix read_matrix(std::istream& in) {
  long long rows = 0, cols = 0;
  if (!(in >> rows >> cols)) {
    throw IoError("matrix parse error: expected header \"rows cols\"");
  }
  if (rows <= 0 || cols <= 0) {
    throw IoError("matrix parse error: dimensions must be positive");
  }
  std::vector<double> entries;
  entries.reserve(static_cast<std::size_t>(rows * cols));
  for (long long k = 0; k < rows * cols; ++k) {
    double v;
    if (!(in >> v)) {
      throw IoError("matrix parse error: expected " + std::to_string(rows * cols) +
                    " entries, got " + std::to_string(k));
    }
    entries.push_back(v);
  }
  try {
    return Matrix(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols),
                  std::move(entries));
  } catch (const Error& e) {
    throw IoError(std::string("matrix parse error: ") + e.what());
  }
}

void write_matrix_file(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_matrix(out, m);
  if (!out) throw IoError("write failed for " + path);
}

Matrix read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path + " for reading");
  return read_matrix(in);
}

void write_trajectory(std::ostream& out, const Trajectory& trajectory) {
  const long T = trajectory.horizon();
  out << T << " " << trajectory.dim() << " " << trajectory.seed << "\n";
  for (const auto& x : trajectory.states) {
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (j) out << " ";
      out << format_double(x[j]);
    }
    out << "\n";
  }
}

Trajectory read_trajectory(std::istream& in) {
  long long T = 0, n = 0;
  std::uint64_t seed = 0;
  if (!(in >> T >> n >> seed)) {
    throw IoError("trajectory parse error: expected header \"T n seed\"");
  }
  if (T < 1 || n <= 0) {
    throw IoError("trajectory parse error: need T >= 1 and n > 0");
  }
  Trajectory traj;
  traj.seed = seed;
  traj.states.resize(static_cast<std::size_t>(T) + 1,
                     std::vector<double>(static_cast<std::size_t>(n)));
  for (auto& x : traj.states) {
    for (auto& v : x) {
      if (!(in >> v)) {
        throw IoError("trajectory parse error: truncated state data");
      }
      if (!std::isfinite(v)) {
        throw IoError("trajectory parse error: non-finite state entry");
      }
    }
  }
  return traj;
}

void write_trajectory_file(const std::string& path, const Trajectory& trajectory) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_trajectory(out, trajectory);
  if (!out) throw IoError("write failed for " + path);
}

Trajectory read_trajectory_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path + " for reading");
  return read_trajectory(in);
}

}  // namespace stableid
