#include "structflow/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace structflow::io {

namespace {

bool skippable(const std::string& line) {
  const auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == '#';
}

std::vector<std::string> tokens(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',' || c == ' ' || c == '\t' || c == '\r') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

double parse_double(const std::string& tok, const std::string& source, std::size_t line) {
  // strtod accepts inf/nan and hex floats; reject anything non-finite.
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size() || tok.empty()) {
    throw ParseError(source, line, "'" + tok + "' is not a number");
  }
  if (!std::isfinite(v)) throw ParseError(source, line, "'" + tok + "' is not finite");
  return v;
}

long long parse_integer(const std::string& tok, const std::string& source, std::size_t line) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError(source, line, "'" + tok + "' is not an integer index");
  }
  return v;
}

template <class F>
void open_and(const std::string& path, std::ios::openmode mode, F&& f) {
  std::fstream file(path, mode);
  if (!file) throw std::runtime_error("cannot open '" + path + "'");
  f(file);
}

}  // namespace

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& message)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<double> read_vector(std::istream& in, const std::string& source) {
  std::vector<double> v;
  std::string line;
  for (std::size_t no = 1; std::getline(in, line); ++no) {
    if (skippable(line)) continue;
    for (const std::string& tok : tokens(line)) v.push_back(parse_double(tok, source, no));
  }
  return v;
}

void write_vector(std::ostream& out, std::span<const double> v) {
  for (double x : v) out << format_double(x) << '\n';
}

Eigen::MatrixXd read_matrix(std::istream& in, const std::string& source) {
  std::vector<std::vector<double>> rows;
  long long want_rows = -1, want_cols = -1;
  std::string line;
  for (std::size_t no = 1; std::getline(in, line); ++no) {
    if (skippable(line)) {
      // The dimension header is only recognised before the first data row.
      if (rows.empty() && want_rows < 0) {
        std::istringstream hdr(line.substr(line.find('#') == std::string::npos ? 0 : line.find('#') + 1));
        long long r = 0, c = 0;
        if (hdr >> r >> c && r >= 0 && c >= 0) {
          want_rows = r;
          want_cols = c;
        }
      }
      continue;
    }
    std::vector<double> row;
    for (const std::string& tok : tokens(line)) row.push_back(parse_double(tok, source, no));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(source, no,
                       "row has " + std::to_string(row.size()) + " entries, expected " +
                           std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = static_cast<Eigen::Index>(rows.empty() ? 0 : rows.front().size());
  if (want_rows >= 0 && (want_rows != r || want_cols != c)) {
    throw ParseError(source, 1,
                     "header announces " + std::to_string(want_rows) + "x" + std::to_string(want_cols) +
                         " but the data is " + std::to_string(r) + "x" + std::to_string(c));
  }
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  out << "# " << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

GroupStructure read_groups(std::istream& in, std::size_t dimension, const std::string& source) {
  std::vector<std::vector<Index>> groups;
  std::vector<double> weights;
  std::vector<std::size_t> lines;
  std::size_t header = 0;
  long long largest = 0;
  std::string line;
  for (std::size_t no = 1; std::getline(in, line); ++no) {
    if (skippable(line)) continue;
    const auto toks = tokens(line);
    if (toks.size() == 1 && toks[0].rfind("p=", 0) == 0) {
      if (!groups.empty()) throw ParseError(source, no, "the p=<N> header must come before the groups");
      const long long p = parse_integer(toks[0].substr(2), source, no);
      if (p <= 0) throw ParseError(source, no, "dimension must be positive");
      header = static_cast<std::size_t>(p);
      continue;
    }
    if (toks.size() < 2) throw ParseError(source, no, "expected 'weight idx1 idx2 ...'");
    const double w = parse_double(toks[0], source, no);
    if (!(w > 0.0)) throw ParseError(source, no, "group weight must be positive");
    std::vector<Index> g;
    for (std::size_t k = 1; k < toks.size(); ++k) {
      const long long idx = parse_integer(toks[k], source, no);
      if (idx < 1) throw ParseError(source, no, "indices are one-based; got " + toks[k]);
      if (header && static_cast<std::size_t>(idx) > header) {
        throw ParseError(source, no, "index " + toks[k] + " exceeds p=" + std::to_string(header));
      }
      if (std::find(g.begin(), g.end(), static_cast<Index>(idx - 1)) != g.end()) {
        throw ParseError(source, no, "index " + toks[k] + " repeated in the group");
      }
      largest = std::max(largest, idx);
      g.push_back(static_cast<Index>(idx - 1));
    }
    groups.push_back(std::move(g));
    weights.push_back(w);
    lines.push_back(no);
  }
  std::size_t p = header ? header : dimension ? dimension : static_cast<std::size_t>(largest);
  if (!header && dimension && static_cast<std::size_t>(largest) > dimension) {
    for (std::size_t k = 0; k < groups.size(); ++k) {
      for (Index j : groups[k]) {
        if (static_cast<std::size_t>(j) >= dimension) {
          throw ParseError(source, lines[k],
                           "index " + std::to_string(j + 1) + " exceeds p=" + std::to_string(dimension));
        }
      }
    }
  }
  if (p == 0) throw ParseError(source, 1, "no groups and no p=<N> header");
  return GroupStructure(p, groups, std::move(weights));
}

void write_groups(std::ostream& out, const GroupStructure& gs) {
  out << "p=" << gs.dimension() << '\n';
  for (std::size_t g = 0; g < gs.size(); ++g) {
    out << format_double(gs.weight(g));
    for (Index j : gs.group(g)) out << ' ' << (j + 1);
    out << '\n';
  }
}

std::vector<double> read_vector_file(const std::string& path) {
  std::vector<double> v;
  open_and(path, std::ios::in, [&](std::istream& f) { v = read_vector(f, path); });
  return v;
}

void write_vector_file(const std::string& path, std::span<const double> v) {
  open_and(path, std::ios::out | std::ios::trunc, [&](std::ostream& f) { write_vector(f, v); });
}

Eigen::MatrixXd read_matrix_file(const std::string& path) {
  Eigen::MatrixXd m;
  open_and(path, std::ios::in, [&](std::istream& f) { m = read_matrix(f, path); });
  return m;
}

void write_matrix_file(const std::string& path, const Eigen::MatrixXd& m) {
  open_and(path, std::ios::out | std::ios::trunc, [&](std::ostream& f) { write_matrix(f, m); });
}

GroupStructure read_groups_file(const std::string& path, std::size_t dimension) {
  GroupStructure gs;
  open_and(path, std::ios::in, [&](std::istream& f) { gs = read_groups(f, dimension, path); });
  return gs;
}

void write_groups_file(const std::string& path, const GroupStructure& gs) {
  open_and(path, std::ios::out | std::ios::trunc, [&](std::ostream& f) { write_groups(f, gs); });
}

}  // namespace structflow::io
