#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <utility>

namespace fruitwm {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Regularization added to the diagonal of a near-singular covariance (m^2).
inline constexpr double kCovarianceEpsilon = 1e-9;

/// Multivariate Gaussian over a 3D position.
struct Gaussian
{
  Vec3 mean = Vec3::Zero();
  Mat3 cov = Mat3::Identity();
};

/// Rigid transform mapping points from a child frame into a parent frame
/// (for camera poses: robot <- camera).
struct Pose
{
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return {}; }

  bool is_valid(double tol = 1e-9) const
  {
    if (!rotation.allFinite() || !translation.allFinite())
      return false;
    const double ortho = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
    return ortho <= tol && std::abs(rotation.determinant() - 1.0) <= tol;
  }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  Pose inverse() const
  {
    Pose inv;
    inv.rotation = rotation.transpose();
    inv.translation = -(inv.rotation * translation);
    return inv;
  }

  Eigen::Matrix4d matrix() const
  {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation;
    m.topRightCorner<3, 1>() = translation;
    return m;
  }

  static Pose from_matrix(const Eigen::Matrix4d& m)
  {
    Pose p;
    p.rotation = m.topLeftCorner<3, 3>();
    p.translation = m.topRightCorner<3, 1>();
    return p;
  }

  bool operator==(const Pose&) const = default;
};

/// Axis-aligned image box, top-left corner plus size, in pixels.
struct BBox2D
{
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double area() const { return std::max(0.0, w) * std::max(0.0, h); }
  double center_x() const { return x + 0.5 * w; }
  double center_y() const { return y + 0.5 * h; }

  bool operator==(const BBox2D&) const = default;
};

/// Pinhole intrinsics (no distortion) plus image size.
struct Intrinsics
{
  double fx = 500.0;
  double fy = 500.0;
  double cx = 480.0;
  double cy = 270.0;
  int width = 960;
  int height = 540;

  bool operator==(const Intrinsics&) const = default;
};

struct SphereFit
{
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
  double rms_residual = 0.0;
  bool valid_geometry = false;
};

/// Condition number above which the normalized sphere design matrix is
/// treated as rank deficient.
inline constexpr double kSphereFitMaxCondition = 1e8;

inline Vec3 centroid(std::span<const Vec3> points)
{
  Vec3 c = Vec3::Zero();
  for (const auto& p : points)
    c += p;
  return c / static_cast<double>(points.size());
}

namespace detail {

inline double rms_sphere_residual(std::span<const Vec3> points, const Vec3& center, double radius)
{
  double acc = 0.0;
  for (const auto& p : points) {
    const double r = (p - center).norm() - radius;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(points.size()));
}

}  // namespace detail

/// Algebraic least-squares sphere fit.
///
/// Solves |p|^2 = 2 c.p + k for (c, k) with k = r^2 - |c|^2. Points are first
/// shifted to their centroid and scaled to unit RMS spread so that the
/// conditioning test only reflects the geometry of the sample. Fewer than four
/// points, a rank-deficient design (coplanar or collinear samples) or a
/// non-positive r^2 fall back to the centroid with radius 0.
inline SphereFit fit_sphere(std::span<const Vec3> points)
{
  if (points.empty())
    throw std::invalid_argument("no points");

  const Vec3 mean = centroid(points);
  SphereFit fallback;
  fallback.center = mean;
  fallback.radius = 0.0;
  fallback.rms_residual = detail::rms_sphere_residual(points, mean, 0.0);
  fallback.valid_geometry = false;

  if (points.size() < 4)
    return fallback;

  double spread = 0.0;
  for (const auto& p : points)
    spread += (p - mean).squaredNorm();
  spread = std::sqrt(spread / static_cast<double>(points.size()));
  if (!(spread > 0.0) || !std::isfinite(spread))
    return fallback;

  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd design(n, 4);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec3 q = (points[static_cast<std::size_t>(i)] - mean) / spread;
    design(i, 0) = 2.0 * q.x();
    design(i, 1) = 2.0 * q.y();
    design(i, 2) = 2.0 * q.z();
    design(i, 3) = 1.0;
    rhs(i) = q.squaredNorm();
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (!(sv(3) > 0.0) || sv(0) / sv(3) > kSphereFitMaxCondition)
    return fallback;

  const Eigen::Vector4d sol = svd.solve(rhs);
  const Vec3 c = sol.head<3>();
  const double r2 = sol(3) + c.squaredNorm();
  if (!(r2 > 0.0) || !sol.allFinite())
    return fallback;

  SphereFit fit;
  fit.center = mean + spread * c;
  fit.radius = spread * std::sqrt(r2);
  fit.rms_residual = detail::rms_sphere_residual(points, fit.center, fit.radius);
  fit.valid_geometry = true;
  return fit;
}

/// Maps a Gaussian through a rigid transform: mean' = R mean + t, cov' = R cov R^T.
inline Gaussian transform_gaussian(const Gaussian& g, const Pose& pose)
{
  if (!pose.is_valid())
    throw std::invalid_argument("invalid pose");
  Gaussian out;
  out.mean = pose.apply(g.mean);
  const Mat3 c = pose.rotation * g.cov * pose.rotation.transpose();
  out.cov = 0.5 * (c + c.transpose());
  return out;
}

/// Symmetrized covariance with kCovarianceEpsilon added to the diagonal when
/// its smallest eigenvalue falls below that value.
inline Mat3 regularized_covariance(const Mat3& cov)
{
  Mat3 sym = 0.5 * (cov + cov.transpose());
  Eigen::SelfAdjointEigenSolver<Mat3> eig;
  eig.computeDirect(sym, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues()(0) < kCovarianceEpsilon)
    sym.diagonal().array() += kCovarianceEpsilon;
  return sym;
}

/// Precomputed inverse covariance for repeated squared-Mahalanobis queries.
class MahalanobisMetric
{
public:
  MahalanobisMetric(const Vec3& mean, const Mat3& cov)
      : mean_(mean), information_(regularized_covariance(cov).inverse())
  {
  }

  double operator()(const Vec3& x) const
  {
    const Vec3 d = x - mean_;
    return std::max(0.0, d.dot(information_ * d));
  }

private:
  Vec3 mean_;
  Mat3 information_;
};

inline double mahalanobis_sq(const Vec3& x, const Vec3& mean, const Mat3& cov)
{
  return MahalanobisMetric(mean, cov)(x);
}

inline double bbox_iou(const BBox2D& a, const BBox2D& b)
{
  const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = ix * iy;
  // Areas from the same edge differences as the overlap, so IoU(a, a) is exactly 1.
  const auto extent_area = [](const BBox2D& r) {
    return std::max(0.0, (r.x + r.w) - r.x) * std::max(0.0, (r.y + r.h) - r.y);
  };
  const double uni = extent_area(a) + extent_area(b) - inter;
  if (!(uni > 0.0))
    return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

/// Image box of a sphere seen by a pinhole camera.
///
/// Approximation: the box of the circle of radius (fx r / z, fy r / z)
/// centred on the projected sphere centre, not the exact conic outline.
inline BBox2D project_sphere(const Vec3& center_cam, double radius, const Intrinsics& k)
{
  const double z = center_cam.z();
  if (!(z > radius) || !(radius >= 0.0))
    throw std::invalid_argument("not projectable");
  const double u = k.fx * center_cam.x() / z + k.cx;
  const double v = k.fy * center_cam.y() / z + k.cy;
  const double hw = k.fx * radius / z;
  const double hh = k.fy * radius / z;
  return {u - hw, v - hh, 2.0 * hw, 2.0 * hh};
}

/// Projection of a camera-frame point to pixel coordinates.
inline Eigen::Vector2d project_point(const Vec3& p_cam, const Intrinsics& k)
{
  return {k.fx * p_cam.x() / p_cam.z() + k.cx, k.fy * p_cam.y() / p_cam.z() + k.cy};
}

}  // namespace fruitwm
