#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "structflow/groups.hpp"

namespace structflow::io {

/// A malformed input line. `what()` reads "<source>:<line>: <message>".
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& message);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Text formats. Blank lines and lines starting with '#' are ignored unless
// noted; numbers are written with 17 significant digits so that a write
// followed by a read reproduces every double exactly.

/// Values separated by newlines, commas or blanks (one per line or one CSV row).
std::vector<double> read_vector(std::istream& in, const std::string& source = "<vector>");
void write_vector(std::ostream& out, std::span<const double> v);

/// Row-major CSV. An optional first line "# <rows> <cols>" is checked
/// against the data.
Eigen::MatrixXd read_matrix(std::istream& in, const std::string& source = "<matrix>");
void write_matrix(std::ostream& out, const Eigen::MatrixXd& m);

/// One group per line, "weight idx1 idx2 ..." with one-based indices, and an
/// optional header line "p=<N>". Without a header the dimension is
/// `dimension` if non-zero, else the largest index seen.
GroupStructure read_groups(std::istream& in, std::size_t dimension = 0,
                           const std::string& source = "<groups>");
void write_groups(std::ostream& out, const GroupStructure& gs);

// File wrappers; they throw std::runtime_error when a file cannot be opened.
std::vector<double> read_vector_file(const std::string& path);
void write_vector_file(const std::string& path, std::span<const double> v);
Eigen::MatrixXd read_matrix_file(const std::string& path);
void write_matrix_file(const std::string& path, const Eigen::MatrixXd& m);
GroupStructure read_groups_file(const std::string& path, std::size_t dimension = 0);
void write_groups_file(const std::string& path, const GroupStructure& gs);

/// Shortest decimal form that reads back to the same double (17 digits).
std::string format_double(double x);

}  // namespace structflow::io
