#pragma once

#include <tsdae/error.hpp>
#include <tsdae/types.hpp>

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace tsdae {

enum class GridKind { IntegerRange, Geometric, Uniform, Explicit };

/// A finite, strictly increasing set of time points.
///
/// The forward jump of the last point is the point itself, so its graininess is
/// zero; every other point is right-scattered. Membership tests are exact
/// comparisons on the stored values; use index-based accessors when the caller
/// already knows where it is on the grid.
class TimeScale {
 public:
  static TimeScale integer_range(long long start, long long end) {
    if (end < start) throw Error(Errc::InvalidArgument, "integer range needs start <= end");
    std::vector<double> pts;
    pts.reserve(static_cast<std::size_t>(end - start + 1));
    for (long long k = start; k <= end; ++k) pts.push_back(static_cast<double>(k));
    return TimeScale(std::move(pts), GridKind::IntegerRange);
  }

  /// start * base^k for k = 0..count-1, built by repeated multiplication.
  static TimeScale geometric(double base, double start, std::size_t count) {
    if (!(base > 1.0)) throw Error(Errc::InvalidArgument, "geometric base must exceed 1");
    if (!(start > 0.0)) throw Error(Errc::InvalidArgument, "geometric start must be positive");
    if (count == 0) throw Error(Errc::InvalidArgument, "geometric count must be positive");
    std::vector<double> pts;
    pts.reserve(count);
    double p = start;
    for (std::size_t k = 0; k < count; ++k, p *= base) pts.push_back(p);
    return TimeScale(std::move(pts), GridKind::Geometric);
  }

  static TimeScale uniform(double a, double b, std::size_t points) {
    if (points < 2) throw Error(Errc::InvalidArgument, "uniform grid needs at least 2 points");
    if (!(b > a)) throw Error(Errc::InvalidArgument, "uniform grid needs a < b");
    std::vector<double> pts(points);
    const auto last = static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) {
      pts[i] = a + (b - a) * (static_cast<double>(i) / last);
    }
    pts.back() = b;
    return TimeScale(std::move(pts), GridKind::Uniform);
  }

  static TimeScale explicit_points(std::vector<double> points) {
    return TimeScale(std::move(points), GridKind::Explicit);
  }

  std::span<const double> points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  double operator[](std::size_t i) const { return points_.at(i); }
  double front() const noexcept { return points_.front(); }
  double back() const noexcept { return points_.back(); }
  GridKind kind() const noexcept { return kind_; }

  bool contains(double t) const noexcept {
    return std::binary_search(points_.begin(), points_.end(), t);
  }

  std::size_t index_of(double t) const {
    auto it = std::lower_bound(points_.begin(), points_.end(), t);
    if (it == points_.end() || *it != t) {
      throw Error(Errc::NotAGridPoint, std::to_string(t) + " is not a point of the time scale");
    }
    return static_cast<std::size_t>(it - points_.begin());
  }

  bool is_last(std::size_t i) const noexcept { return i + 1 == points_.size(); }

  /// Forward jump by index: the successor, or the last point itself.
  double sigma_at(std::size_t i) const {
    return is_last(i) ? points_.at(i) : points_.at(i + 1);
  }

  double mu_at(std::size_t i) const { return sigma_at(i) - points_.at(i); }

  double sigma(double t) const { return sigma_at(index_of(t)); }
  double graininess(double t) const { return mu_at(index_of(t)); }

 private:
  TimeScale(std::vector<double> points, GridKind kind) : points_(std::move(points)), kind_(kind) {
    if (points_.empty()) throw Error(Errc::InvalidArgument, "time scale needs at least one point");
    for (std::size_t i = 1; i < points_.size(); ++i) {
      if (!(points_[i] > points_[i - 1])) {
        throw Error(Errc::InvalidArgument, "time scale points must be strictly increasing");
      }
    }
  }

  std::vector<double> points_;
  GridKind kind_;
};

/// One matrix per grid point, all of the same shape.
class GridMatrixSamples {
 public:
  GridMatrixSamples(TimeScale ts, std::vector<Matrix> values)
      : ts_(std::move(ts)), values_(std::move(values)) {
    if (values_.size() != ts_.size()) {
      throw Error(Errc::DimensionMismatch, "need exactly one sample per grid point");
    }
    for (const auto& v : values_) {
      if (v.rows() != values_.front().rows() || v.cols() != values_.front().cols()) {
        throw Error(Errc::DimensionMismatch, "all samples must share one shape");
      }
    }
  }

  const TimeScale& timescale() const noexcept { return ts_; }
  const std::vector<Matrix>& values() const noexcept { return values_; }
  const Matrix& operator[](std::size_t i) const { return values_.at(i); }
  const Matrix& at(double t) const { return values_.at(ts_.index_of(t)); }
  Eigen::Index rows() const noexcept { return values_.front().rows(); }
  Eigen::Index cols() const noexcept { return values_.front().cols(); }

  /// (F(sigma(t_i)) - F(t_i)) / mu(t_i); the last point has no delta derivative.
  Matrix delta_at(std::size_t i) const {
    if (ts_.is_last(i)) {
      throw Error(Errc::LastPointUndefined, "no delta derivative at the last grid point");
    }
    return (values_.at(i + 1) - values_.at(i)) / ts_.mu_at(i);
  }

 private:
  TimeScale ts_;
  std::vector<Matrix> values_;
};

inline Matrix delta_derivative(const GridMatrixSamples& samples, double t) {
  return samples.delta_at(samples.timescale().index_of(t));
}

struct RegressivityPoint {
  double t;
  double smallest_singular_value;
  bool regressive;
};

struct RegressivityReport {
  std::vector<RegressivityPoint> points;  // every non-final grid point
  bool all_regressive() const {
    return std::all_of(points.begin(), points.end(), [](const auto& p) { return p.regressive; });
  }
};

/// Tests invertibility of I + mu(t) M(t) at every non-final grid point.
inline RegressivityReport check_regressive(const GridMatrixSamples& samples, double tol) {
  if (samples.rows() != samples.cols()) {
    throw Error(Errc::NonSquare, "regressivity needs square samples");
  }
  const auto& ts = samples.timescale();
  RegressivityReport report;
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    const Matrix shifted = identity(samples.rows()) + ts.mu_at(i) * samples[i];
    Eigen::JacobiSVD<Matrix> svd(shifted);
    const double smin = svd.singularValues().size() ? svd.singularValues().minCoeff() : 0.0;
    report.points.push_back({ts[i], smin, smin > tol});
  }
  return report;
}

}  // namespace tsdae
