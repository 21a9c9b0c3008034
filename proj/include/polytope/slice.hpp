#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "polytope/code.hpp"
#include "polytope/net.hpp"

namespace polytope {

// A 2-D plane through activation space with an orthonormal in-plane basis.
struct Plane {
  Eigen::VectorXd origin;
  Eigen::VectorXd u;
  Eigen::VectorXd v;

  Eigen::VectorXd point_at(double s, double t) const { return origin + s * u + t * v; }
  // In-plane coordinates of p's projection.
  std::pair<double, double> project(const Eigen::VectorXd& p) const {
    return {u.dot(p - origin), v.dot(p - origin)};
  }
};

// Plane holding all three points: origin = a, u along b-a, v the
// Gram-Schmidt completion of c-a. Throws on (near-)collinear inputs.
Plane plane_from_three(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                       const Eigen::VectorXd& c);

struct Extent {
  double s_min = 0.0, s_max = 1.0;
  double t_min = 0.0, t_max = 1.0;
};

// Bounding box of the three anchor projections, padded by 25% per side.
Extent default_extent(const Plane& plane, const Eigen::VectorXd& a,
                      const Eigen::VectorXd& b, const Eigen::VectorXd& c);

struct CodeGrid {
  int rows = 0, cols = 0;
  std::vector<SplineCode> codes;  // row-major

  const SplineCode& at(int i, int j) const { return codes[i * cols + j]; }
};

// Codes at pixel (i,j) = plane point (s_i, t_j) on the uniform lattice over
// the extent (s along rows, t along columns). Rows evaluate in parallel.
CodeGrid evaluate_grid(const PwlNetwork& net, const LayerSpan& span, const Plane& plane,
                       int rows, int cols, const Extent& extent);

struct BoundaryField {
  int rows = 0, cols = 0;
  Eigen::MatrixXd values;
  Extent extent;
};

// Per-pixel Hamming distance to the right and lower neighbors (edge pixels
// use the neighbors that exist).
BoundaryField boundary_field(const CodeGrid& grid);

// Separable Gaussian blur, kernel truncated at 3*sigma and normalized,
// half-sample reflective boundaries (mass-preserving). sigma = 0 is identity.
BoundaryField gaussian_smooth(const BoundaryField& field, double sigma);

enum class GrayScale { kLinear, kLog1p };

// 8-bit binary portable graymap ("P5"), values scaled then normalized by the
// maximum; an all-zero field renders black.
void export_image(const BoundaryField& field, const std::string& path, GrayScale scale);

}  // namespace polytope
