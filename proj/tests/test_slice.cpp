#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "polytope/rng.hpp"
#include "polytope/slice.hpp"

using namespace polytope;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<int>(values.size()));
  int i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

BoundaryField make_field(std::initializer_list<std::initializer_list<double>> rows) {
  BoundaryField field;
  field.rows = static_cast<int>(rows.size());
  field.cols = static_cast<int>(rows.begin()->size());
  field.values.resize(field.rows, field.cols);
  int i = 0;
  for (const auto& row : rows) {
    int j = 0;
    for (double v : row) field.values(i, j++) = v;
    ++i;
  }
  return field;
}

}  // namespace

TEST_CASE("plane_from_three handles the axis-aligned case") {
  const Plane plane =
      plane_from_three(vec({0, 0, 0}), vec({2, 0, 0}), vec({0, 3, 0}));
  CHECK(plane.u == vec({1, 0, 0}));
  CHECK(plane.v == vec({0, 1, 0}));
  CHECK(plane.origin == vec({0, 0, 0}));
}

TEST_CASE("the three defining points reproject onto the plane") {
  Rng rng(44);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd a(5), b(5), c(5);
    for (int i = 0; i < 5; ++i) {
      a[i] = rng.normal();
      b[i] = rng.normal();
      c[i] = rng.normal();
    }
    const Plane plane = plane_from_three(a, b, c);
    CHECK(std::abs(plane.u.dot(plane.v)) < 1e-10);
    CHECK(plane.u.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(plane.v.norm() == doctest::Approx(1.0).epsilon(1e-12));
    for (const Eigen::VectorXd& p : {a, b, c}) {
      const auto [s, t] = plane.project(p);
      CHECK((p - plane.point_at(s, t)).norm() < 1e-9);
    }
  }
}

TEST_CASE("collinear anchors are rejected") {
  CHECK_THROWS_AS(plane_from_three(vec({0, 0}), vec({1, 1}), vec({2, 2})),
                  ValidationError);
  CHECK_THROWS_AS(plane_from_three(vec({0, 0}), vec({0, 0}), vec({1, 2})),
                  ValidationError);
}

TEST_CASE("grid over a linear network has one constant code") {
  PwlNetwork net;
  net.layers.push_back({Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2),
                        ActivationKind::kIdentity});
  const Plane plane = plane_from_three(vec({0, 0}), vec({1, 0}), vec({0, 1}));
  const CodeGrid grid = evaluate_grid(net, {0, 1}, plane, 8, 8, {0, 1, 0, 1});
  for (const SplineCode& code : grid.codes) {
    CHECK(code.m == 0);
    CHECK(code == grid.codes[0]);
  }
  const BoundaryField field = boundary_field(grid);
  CHECK(field.values.isZero(0.0));
}

TEST_CASE("grid codes match pointwise extraction") {
  const PwlNetwork net = init_random({3, 6, 4, 2}, 19);
  const LayerSpan span{0, 3};
  const Plane plane = plane_from_three(vec({0, 0, 0}), vec({1, 0.5, 0}), vec({-0.3, 1, 0.8}));
  const Extent extent{-1.5, 1.5, -2.0, 1.0};
  const CodeGrid grid = evaluate_grid(net, span, plane, 64, 64, extent);
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int i = static_cast<int>(rng.uniform_int(64));
    const int j = static_cast<int>(rng.uniform_int(64));
    const double s = extent.s_min + (extent.s_max - extent.s_min) * i / 63.0;
    const double t = extent.t_min + (extent.t_max - extent.t_min) * j / 63.0;
    CHECK(grid.at(i, j) == span_code(net, span, plane.point_at(s, t)));
  }
}

TEST_CASE("a single vertical hyperplane paints one column of ones") {
  // One neuron whose boundary is orthogonal to u and crosses between two
  // sample columns: hamming to the right neighbor is 1 along that column.
  PwlNetwork net;
  Eigen::MatrixXd w(1, 2);
  w << 0.0, 1.0;  // pre = t - c, boundary at t = c in plane coordinates
  const double c = 0.37;
  net.layers.push_back({w, vec({-c}), ActivationKind::kRelu});
  const Plane plane = plane_from_three(vec({0, 0}), vec({1, 0}), vec({0, 1}));

  const int n = 16;
  const CodeGrid grid = evaluate_grid(net, {0, 1}, plane, n, n, {0, 1, 0, 1});
  const BoundaryField field = boundary_field(grid);

  // t_j = j/(n-1); boundary falls between j=5 (0.333) and j=6 (0.4).
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      CHECK(field.values(i, j) == (j == 5 ? 1.0 : 0.0));
    }
  }
}

TEST_CASE("boundary field total matches a naive double loop") {
  const PwlNetwork net = init_random({2, 7, 3}, 29);
  const LayerSpan span{0, 2};
  const Plane plane = plane_from_three(vec({0, 0}), vec({1, 0}), vec({0, 1}));
  const Extent extent{-2, 2, -2, 2};
  const CodeGrid grid = evaluate_grid(net, span, plane, 32, 32, extent);
  const BoundaryField field = boundary_field(grid);

  double expected = 0.0;
  for (int i = 0; i < 32; ++i) {
    for (int j = 0; j < 32; ++j) {
      if (j + 1 < 32) expected += hamming(grid.at(i, j), grid.at(i, j + 1));
      if (i + 1 < 32) expected += hamming(grid.at(i, j), grid.at(i + 1, j));
    }
  }
  CHECK(field.values.sum() == doctest::Approx(expected).epsilon(1e-12));

  // The total is direction-agnostic: transposing the grid and re-summing
  // gives the same mass.
  CodeGrid transposed;
  transposed.rows = grid.cols;
  transposed.cols = grid.rows;
  transposed.codes.resize(grid.codes.size());
  for (int i = 0; i < grid.rows; ++i) {
    for (int j = 0; j < grid.cols; ++j) {
      transposed.codes[j * transposed.cols + i] = grid.at(i, j);
    }
  }
  CHECK(boundary_field(transposed).values.sum() ==
        doctest::Approx(field.values.sum()).epsilon(1e-12));
}

TEST_CASE("gaussian smoothing: identity at sigma 0, constants fixed, mass kept") {
  const BoundaryField field = make_field({{0, 1, 2, 0}, {3, 0, 1, 1}, {0, 2, 0, 4}});
  const BoundaryField same = gaussian_smooth(field, 0.0);
  CHECK(same.values == field.values);

  BoundaryField constant = make_field({{2, 2, 2}, {2, 2, 2}, {2, 2, 2}});
  for (double sigma : {0.5, 1.0, 3.0}) {
    const BoundaryField smoothed = gaussian_smooth(constant, sigma);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        CHECK(smoothed.values(i, j) == doctest::Approx(2.0).epsilon(1e-12));
      }
    }
  }

  for (double sigma : {0.7, 1.5, 2.0}) {
    const BoundaryField smoothed = gaussian_smooth(field, sigma);
    CHECK(smoothed.values.sum() ==
          doctest::Approx(field.values.sum()).epsilon(1e-6));
    CHECK(smoothed.values.minCoeff() >= 0.0);
  }

  CHECK_THROWS_AS(gaussian_smooth(field, -0.1), ValidationError);
}

TEST_CASE("an impulse smooths to the separable kernel") {
  BoundaryField impulse;
  impulse.rows = impulse.cols = 15;
  impulse.values = Eigen::MatrixXd::Zero(15, 15);
  impulse.values(7, 7) = 1.0;
  const double sigma = 1.0;
  const BoundaryField smoothed = gaussian_smooth(impulse, sigma);

  // Direct kernel evaluation: w_k = exp(-k^2/2sigma^2) / sum, radius 3sigma.
  const int radius = 3;
  double norm = 0.0;
  std::vector<double> kernel(2 * radius + 1);
  for (int k = -radius; k <= radius; ++k) {
    kernel[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma));
    norm += kernel[k + radius];
  }
  for (double& w : kernel) w /= norm;
  CHECK(smoothed.values(7, 7) ==
        doctest::Approx(kernel[radius] * kernel[radius]).epsilon(1e-12));
  CHECK(smoothed.values(7, 8) ==
        doctest::Approx(kernel[radius] * kernel[radius + 1]).epsilon(1e-12));
}

TEST_CASE("export_image writes the expected pgm bytes") {
  const std::string path =
      (std::filesystem::temp_directory_path() / "polytope_field.pgm").string();

  const BoundaryField field = make_field({{0, 1}, {2, 4}});
  export_image(field, path, GrayScale::kLinear);
  std::ifstream in(path, std::ios::binary);
  std::string header;
  int cols = 0, rows = 0, maxval = 0;
  in >> header >> cols >> rows >> maxval;
  in.get();  // single whitespace byte after the header
  CHECK(header == "P5");
  CHECK(cols == 2);
  CHECK(rows == 2);
  CHECK(maxval == 255);
  unsigned char bytes[4];
  in.read(reinterpret_cast<char*>(bytes), 4);
  CHECK(bytes[0] == 0);
  CHECK(bytes[1] == 63);
  CHECK(bytes[2] == 127);
  CHECK(bytes[3] == 255);
  in.close();

  const BoundaryField zero = make_field({{0, 0}, {0, 0}});
  export_image(zero, path, GrayScale::kLog1p);
  std::ifstream in2(path, std::ios::binary);
  in2 >> header >> cols >> rows >> maxval;
  in2.get();
  in2.read(reinterpret_cast<char*>(bytes), 4);
  for (unsigned char b : bytes) CHECK(b == 0);
  in2.close();
  std::filesystem::remove(path);
}

TEST_CASE("default extent pads the anchor bounding box by a quarter") {
  const Eigen::VectorXd a = vec({0, 0, 0});
  const Eigen::VectorXd b = vec({2, 0, 0});
  const Eigen::VectorXd c = vec({0, 3, 0});
  const Plane plane = plane_from_three(a, b, c);
  const Extent extent = default_extent(plane, a, b, c);
  CHECK(extent.s_min == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(extent.s_max == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(extent.t_min == doctest::Approx(-0.75).epsilon(1e-12));
  CHECK(extent.t_max == doctest::Approx(3.75).epsilon(1e-12));
}
