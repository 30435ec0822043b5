#ifndef GPCOV_COMMON_HPP
#define GPCOV_COMMON_HPP

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace gpcov {

template <typename Scalar> using Point2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar> using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar> using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar> using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
/// Column-major list of planar points, one point per column.
template <typename Scalar> using Points2 = Eigen::Matrix<Scalar, 2, Eigen::Dynamic>;

using Point = Point2<double>;

/// A position or query fell outside the domain rectangle.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Inconsistent or out-of-range configuration.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A structural precondition on an input (symmetry, consistency) was violated.
class InvariantError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// A rank-deficient update was requested; the caller is expected to skip it.
class SingularityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Axis-aligned rectangle [lower, upper].
template <typename Scalar> struct Box {
  Point2<Scalar> lower;
  Point2<Scalar> upper;

  bool contains(const Point2<Scalar> &p) const {
    return p.x() >= lower.x() && p.x() <= upper.x() && p.y() >= lower.y() &&
           p.y() <= upper.y();
  }

  Point2<Scalar> clamp(const Point2<Scalar> &p) const {
    return p.cwiseMax(lower).cwiseMin(upper);
  }
};

} // namespace gpcov

#endif // GPCOV_COMMON_HPP
