#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace spades {

/// A set of n observations in R^d, one row per observation.
class SampleSet {
 public:
  SampleSet() = default;

  /// Takes ownership of a full matrix of observations. Rejects non-finite
  /// coordinates and zero-dimensional points.
  explicit SampleSet(Eigen::MatrixXd points);

  /// Convenience for d = 1.
  static SampleSet from_values(const std::vector<double>& values);

  long size() const { return points_.rows(); }
  int dim() const { return static_cast<int>(points_.cols()); }
  bool empty() const { return points_.rows() == 0; }

  const Eigen::MatrixXd& points() const { return points_; }
  Eigen::RowVectorXd point(long i) const { return points_.row(i); }
  double value(long i) const { return points_(i, 0); }

  /// Subset by row indices (used for cross-validation folds).
  SampleSet subset(const std::vector<long>& rows) const;

 private:
  Eigen::MatrixXd points_;  // n x d
};

/// Reads a delimiter-separated numeric text file, one observation per row.
/// Accepts spaces, tabs, commas or semicolons as separators; lines starting
/// with '#' are comments; a single leading non-numeric row is treated as a
/// header. Throws DataParseError with the 1-based line number on bad rows.
SampleSet read_sample(const std::string& path);

/// Writes a sample losslessly (round-trips at full double precision).
void write_sample(const SampleSet& sample, const std::string& path);

struct DataParseError : std::runtime_error {
  DataParseError(const std::string& msg, long line)
      : std::runtime_error(msg), line_number(line) {}
  long line_number;
};

}  // namespace spades
