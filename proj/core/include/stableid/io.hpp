#pragma once

#include <iosfwd>
#include <string>

#include "stableid/matrix.hpp"
#include "stableid/sysid.hpp"

namespace stableid {

// Decimal rendering with 17 significant digits (lossless round trip for
// doubles). Non-finite values map to "inf", "-inf" and "nan".
std::string format_double(double value);

// Matrix text format: first line "rows cols", then one line per row of
// whitespace-separated decimals.
void write_matrix(std::ostream& out, const Matrix& m);
Matrix read_matrix(std::istream& in);
void write_matrix_file(const std::string& path, const Matrix& m);
Matrix read_matrix_file(const std::string& path);

// Trajectory text format: header "T n seed", then T+1 rows of n decimals.
void write_trajectory(std::ostream& out, const Trajectory& trajectory);
Trajectory read_trajectory(std::istream& in);
void write_trajectory_file(const std::string& path, const Trajectory& trajectory);
Trajectory read_trajectory_file(const std::string& path);

}  // namespace stableid
