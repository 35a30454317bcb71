#include "core/shift.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace topt {

namespace {

constexpr int kStencil[6] = {-2, -1, 0, 1, 2, 3};

// Splitting z/dx into an integer base and theta in [0, 1): row i of the shift
// operator interpolates at index position i - z/dx = (i + base) + theta.
struct SplitShift {
  long base;
  double theta;
};

SplitShift split_shift(double z, double dx) {
  const double s = -z / dx;
  double b = std::floor(s);
  double theta = s - b;
  // floor can leave theta == 1 when s sits just below an integer
  if (theta >= 1.0) {
    b += 1.0;
    theta -= 1.0;
  }
  return {static_cast<long>(b), theta};
}

int wrap_index(long i, int m) {
  long r = i % m;
  if (r < 0)
    r += m;
  return static_cast<int>(r);
}

} // namespace

LagrangeWeights lagrange_weights(double theta) {
  LagrangeWeights w;
  for (int j = 0; j < 6; ++j) {
    const double oj = kStencil[j];
    // Denominator of the j-th cardinal polynomial.
    double denom = 1.0;
    for (int k = 0; k < 6; ++k)
      if (k != j)
        denom *= oj - kStencil[k];

    double value = 1.0;
    for (int k = 0; k < 6; ++k)
      if (k != j)
        value *= theta - kStencil[k];
    w.value[j] = value / denom;

    // Sum-of-products forms stay finite when theta hits a stencil node.
    double d1 = 0.0, d2 = 0.0;
    for (int k = 0; k < 6; ++k) {
      if (k == j)
        continue;
      double prod = 1.0;
      for (int l = 0; l < 6; ++l)
        if (l != j && l != k)
          prod *= theta - kStencil[l];
      d1 += prod;
      for (int l = 0; l < 6; ++l) {
        if (l == j || l == k)
          continue;
        double prod2 = 1.0;
        for (int p = 0; p < 6; ++p)
          if (p != j && p != k && p != l)
            prod2 *= theta - kStencil[p];
        d2 += prod2;
      }
    }
    w.d1[j] = d1 / denom;
    w.d2[j] = d2 / denom;
  }
  return w;
}

namespace {

// Weight row for the requested derivative, with the z-direction chain factors
// d theta / dz = -1/dx applied.
void derivative_weights(const LagrangeWeights& w, int derivative, double dx, double out[6]) {
  switch (derivative) {
  case 0:
    for (int j = 0; j < 6; ++j)
      out[j] = w.value[j];
    return;
  case 1:
    for (int j = 0; j < 6; ++j)
      out[j] = -w.d1[j] / dx;
    return;
  case 2:
    for (int j = 0; j < 6; ++j)
      out[j] = w.d2[j] / (dx * dx);
    return;
  default:
    throw Error::invalid("shift operator derivative must be 0, 1, or 2");
  }
}

} // namespace

SpMatrix build_shift_operator(const SpatialGrid& grid, double z, int derivative) {
  const auto [base, theta] = split_shift(z, grid.dx);
  const LagrangeWeights lw = lagrange_weights(theta);
  double w[6];
  derivative_weights(lw, derivative, grid.dx, w);

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(grid.m) * 6);
  for (int i = 0; i < grid.m; ++i)
    for (int j = 0; j < 6; ++j)
      trips.emplace_back(i, wrap_index(i + base + kStencil[j], grid.m), w[j]);
  SpMatrix op(grid.m, grid.m);
  op.setFromTriplets(trips.begin(), trips.end());
  op.makeCompressed();
  return op;
}

namespace {

Matrix gather_apply(const SpatialGrid& grid, const Matrix& a, double z, int derivative,
                    bool transpose) {
  if (a.rows() != grid.m)
    throw Error::invalid("shifted matrix must have one row per grid node");
  const auto [base, theta] = split_shift(z, grid.dx);
  const LagrangeWeights lw = lagrange_weights(theta);
  double w[6];
  derivative_weights(lw, derivative, grid.dx, w);

  Matrix out = Matrix::Zero(a.rows(), a.cols());
  for (int j = 0; j < 6; ++j) {
    const double wj = w[j];
    // Row i of the operator reads column i + base + o; the transpose
    // therefore reads the mirrored offset.
    const long off = transpose ? -(base + kStencil[j]) : base + kStencil[j];
    for (int i = 0; i < grid.m; ++i)
      out.row(i) += wj * a.row(wrap_index(i + off, grid.m));
  }
  return out;
}

} // namespace

Matrix apply_shift(const SpatialGrid& grid, const Matrix& a, double z, int derivative) {
  return gather_apply(grid, a, z, derivative, false);
}

Matrix apply_shift_transpose(const SpatialGrid& grid, const Matrix& a, double z, int derivative) {
  return gather_apply(grid, a, z, derivative, true);
}

Vector estimate_shifts(const SpatialGrid& grid, const Matrix& snapshots) {
  if (snapshots.rows() != grid.m || snapshots.cols() < 1)
    throw Error::invalid("snapshots must have one row per grid node");
  const int m = grid.m;
  const int n = static_cast<int>(snapshots.cols());

  const Vector ref = snapshots.col(0);
  const double ref_dev = (ref.array() - ref.mean()).matrix().norm();
  if (ref_dev <= 1e-12 * std::sqrt(double(m)) * (1.0 + std::abs(ref.mean())))
    throw Error::degenerate("shift estimation: reference snapshot is nearly constant");

  // Doubled copy of the reference turns each circular lag into one
  // contiguous dot product.
  Vector ref2(2 * m);
  for (int t = 0; t < 2 * m; ++t)
    ref2(t) = ref(t % m);

  Vector shifts(n);
  shifts(0) = 0.0;
  Vector corr(m);
  for (int col = 1; col < n; ++col) {
    const Vector q = snapshots.col(col);
    const double dev = (q.array() - q.mean()).matrix().norm();
    if (dev <= 1e-12 * std::sqrt(double(m)) * (1.0 + std::abs(q.mean())))
      throw Error::degenerate("shift estimation: snapshot column " + std::to_string(col) +
                              " is nearly constant");

    // corr(k) pairs the reference moved right by k grid cells with the column.
    for (int k = 0; k < m; ++k)
      corr(k) = ref2.segment(m - k, m).dot(q);
    int kmax = 0;
    corr.maxCoeff(&kmax);
    const double r0 = corr(kmax);
    const double rm = corr(wrap_index(kmax - 1, m));
    const double rp = corr(wrap_index(kmax + 1, m));
    const double curv = rm - 2.0 * r0 + rp;
    // Parabolic sub-cell refinement; a non-concave triple means the peak is
    // flat at working precision, so keep the integer estimate.
    const double delta = curv < 0.0 ? 0.5 * (rm - rp) / curv : 0.0;
    double z = (kmax + delta) * grid.dx;

    // Unwrap against the previous column so the track crosses the periodic
    // boundary continuously.
    const double prev = shifts(col - 1);
    z += grid.length * std::round((prev - z) / grid.length);
    shifts(col) = z;
  }
  return shifts;
}

} // namespace topt
