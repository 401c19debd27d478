#pragma once

#include <string>

#include <fhmor/types.hpp>

namespace fhmor {

// Reads a Matrix Market file (array or coordinate format, real or integer
// field, general/symmetric/skew-symmetric). Throws ParseError with the file
// name and line number on malformed input.
Eigen::MatrixXd read_matrix_market(const std::string& path);

// Writes dense array format, real general, full double precision.
void write_matrix_market(const Eigen::MatrixXd& M, const std::string& path);

}  // namespace fhmor
