#include "spades/sample.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace spades {

SampleSet::SampleSet(Eigen::MatrixXd points) : points_(std::move(points)) {
  if (points_.rows() > 0 && points_.cols() < 1) {
    throw std::invalid_argument("SampleSet: points must have dimension >= 1");
  }
  if (!points_.allFinite()) {
    throw std::invalid_argument("SampleSet: non-finite coordinate");
  }
}

SampleSet SampleSet::from_values(const std::vector<double>& values) {
  Eigen::MatrixXd m(static_cast<long>(values.size()), 1);
  for (long i = 0; i < m.rows(); ++i) m(i, 0) = values[static_cast<size_t>(i)];
  return SampleSet(std::move(m));
}

SampleSet SampleSet::subset(const std::vector<long>& rows) const {
  Eigen::MatrixXd m(static_cast<long>(rows.size()), points_.cols());
  for (long i = 0; i < m.rows(); ++i) m.row(i) = points_.row(rows[static_cast<size_t>(i)]);
  return SampleSet(std::move(m));
}

namespace {

bool parse_row(const std::string& line, std::vector<double>& out) {
  out.clear();
  std::string cleaned = line;
  for (char& c : cleaned) {
    if (c == ',' || c == ';' || c == '\t') c = ' ';
  }
  std::istringstream in(cleaned);
  std::string token;
  while (in >> token) {
    size_t used = 0;
    double v;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      return false;
    }
    if (used != token.size()) return false;
    out.push_back(v);
  }
  return true;
}

}  // namespace

SampleSet read_sample(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataParseError("cannot open data file: " + path, 0);

  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 0;
  long cols = -1;
  bool header_allowed = true;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r\n");
    if (first == std::string::npos || line[first] == '#') continue;
    std::vector<double> row;
    if (!parse_row(line, row) || row.empty()) {
      if (header_allowed) {  // one leading header row is fine
        header_allowed = false;
        continue;
      }
      throw DataParseError("malformed data row at line " + std::to_string(line_no),
                           line_no);
    }
    header_allowed = false;
    if (cols < 0) {
      cols = static_cast<long>(row.size());
    } else if (static_cast<long>(row.size()) != cols) {
      throw DataParseError("inconsistent column count at line " + std::to_string(line_no),
                           line_no);
    }
    for (double v : row) {
      if (!std::isfinite(v)) {
        throw DataParseError("non-finite value at line " + std::to_string(line_no),
                             line_no);
      }
    }
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd m(static_cast<long>(rows.size()), cols < 0 ? 1 : cols);
  for (long i = 0; i < m.rows(); ++i) {
    for (long j = 0; j < m.cols(); ++j) {
      m(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
    }
  }
  return SampleSet(std::move(m));
}

void write_sample(const SampleSet& sample, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  char buf[64];
  for (long i = 0; i < sample.size(); ++i) {
    for (int j = 0; j < sample.dim(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", sample.points()(i, j));
      out << (j ? " " : "") << buf;
    }
    out << '\n';
  }
}

}  // namespace spades
