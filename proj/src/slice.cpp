#include "polytope/slice.hpp"

#include <cmath>
#include <fstream>

#include "polytope/parallel.hpp"

namespace polytope {

Plane plane_from_three(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                       const Eigen::VectorXd& c) {
  if (a.size() != b.size() || a.size() != c.size()) {
    throw ValidationError("plane_from_three: dimension mismatch");
  }
  const Eigen::VectorXd ab = b - a;
  const double ab_norm = ab.norm();
  if (ab_norm < 1e-10) throw ValidationError("plane_from_three: a and b coincide");
  Plane plane;
  plane.origin = a;
  plane.u = ab / ab_norm;
  const Eigen::VectorXd ac = c - a;
  const Eigen::VectorXd residual = ac - plane.u.dot(ac) * plane.u;
  const double residual_norm = residual.norm();
  if (residual_norm < 1e-10) {
    throw ValidationError("plane_from_three: points are collinear");
  }
  plane.v = residual / residual_norm;
  return plane;
}

Extent default_extent(const Plane& plane, const Eigen::VectorXd& a,
                      const Eigen::VectorXd& b, const Eigen::VectorXd& c) {
  Extent extent;
  const auto [sa, ta] = plane.project(a);
  const auto [sb, tb] = plane.project(b);
  const auto [sc, tc] = plane.project(c);
  extent.s_min = std::min({sa, sb, sc});
  extent.s_max = std::max({sa, sb, sc});
  extent.t_min = std::min({ta, tb, tc});
  extent.t_max = std::max({ta, tb, tc});
  const double s_pad = 0.25 * (extent.s_max - extent.s_min);
  const double t_pad = 0.25 * (extent.t_max - extent.t_min);
  extent.s_min -= s_pad;
  extent.s_max += s_pad;
  extent.t_min -= t_pad;
  extent.t_max += t_pad;
  return extent;
}

CodeGrid evaluate_grid(const PwlNetwork& net, const LayerSpan& span, const Plane& plane,
                       int rows, int cols, const Extent& extent) {
  span.validate(net);
  if (rows < 2 || cols < 2) throw ValidationError("evaluate_grid: resolution must be >= 2x2");
  if (!(extent.s_max > extent.s_min) || !(extent.t_max > extent.t_min)) {
    throw ValidationError("evaluate_grid: empty extent");
  }
  CodeGrid grid;
  grid.rows = rows;
  grid.cols = cols;
  grid.codes.resize(static_cast<std::size_t>(rows) * cols);
  parallel_for(rows, [&](std::int64_t i) {
    const double s =
        extent.s_min + (extent.s_max - extent.s_min) * static_cast<double>(i) / (rows - 1);
    for (int j = 0; j < cols; ++j) {
      const double t =
          extent.t_min + (extent.t_max - extent.t_min) * static_cast<double>(j) / (cols - 1);
      grid.codes[i * cols + j] = span_code(net, span, plane.point_at(s, t));
    }
  });
  return grid;
}

BoundaryField boundary_field(const CodeGrid& grid) {
  if (grid.rows < 2 || grid.cols < 2) {
    throw ValidationError("boundary_field: grid must be at least 2x2");
  }
  BoundaryField field;
  field.rows = grid.rows;
  field.cols = grid.cols;
  field.values = Eigen::MatrixXd::Zero(grid.rows, grid.cols);
  parallel_for(grid.rows, [&](std::int64_t i) {
    for (int j = 0; j < grid.cols; ++j) {
      double value = 0.0;
      if (j + 1 < grid.cols) value += hamming(grid.at(i, j), grid.at(i, j + 1));
      if (i + 1 < grid.rows) value += hamming(grid.at(i, j), grid.at(i + 1, j));
      field.values(i, j) = value;
    }
  });
  return field;
}

namespace {

// Half-sample reflection keeps convolution with a normalized kernel
// mass-preserving.
int reflect_index(int i, int n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - 1 - i;
  }
  return i;
}

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double total = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    kernel[k + radius] = std::exp(-0.5 * (k * k) / (sigma * sigma));
    total += kernel[k + radius];
  }
  for (double& w : kernel) w /= total;
  return kernel;
}

}  // namespace

BoundaryField gaussian_smooth(const BoundaryField& field, double sigma) {
  if (sigma < 0.0) throw ValidationError("gaussian_smooth: sigma must be >= 0");
  if (sigma == 0.0) return field;
  const std::vector<double> kernel = gaussian_kernel(sigma);
  const int radius = static_cast<int>(kernel.size() / 2);

  BoundaryField out = field;
  Eigen::MatrixXd tmp(field.rows, field.cols);
  // Along columns (vertical pass).
  parallel_for(field.cols, [&](std::int64_t j) {
    for (int i = 0; i < field.rows; ++i) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        acc += kernel[k + radius] * field.values(reflect_index(i + k, field.rows), j);
      }
      tmp(i, j) = acc;
    }
  });
  // Along rows (horizontal pass).
  parallel_for(field.rows, [&](std::int64_t i) {
    for (int j = 0; j < field.cols; ++j) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        acc += kernel[k + radius] * tmp(i, reflect_index(j + k, field.cols));
      }
      out.values(i, j) = acc;
    }
  });
  return out;
}

void export_image(const BoundaryField& field, const std::string& path, GrayScale scale) {
  Eigen::MatrixXd scaled = field.values;
  if (scale == GrayScale::kLog1p) {
    scaled = scaled.unaryExpr([](double v) { return std::log1p(v); });
  }
  const double max_value = scaled.maxCoeff();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeFailure("cannot write " + path);
  out << "P5\n" << field.cols << " " << field.rows << "\n255\n";
  std::vector<unsigned char> row(field.cols);
  for (int i = 0; i < field.rows; ++i) {
    for (int j = 0; j < field.cols; ++j) {
      double byte = max_value > 0.0 ? std::floor(255.0 * scaled(i, j) / max_value) : 0.0;
      row[j] = static_cast<unsigned char>(std::clamp(byte, 0.0, 255.0));
    }
    out.write(reinterpret_cast<const char*>(row.data()), row.size());
  }
  if (!out) throw RuntimeFailure("write failed for " + path);
}

}  // namespace polytope
