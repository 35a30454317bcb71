#pragma once

#include "core/types.hpp"

namespace topt {

// Thin singular value decomposition a = u * s.asDiagonal() * vt with
// k = min(rows, cols) columns in u, rows in vt, and s sorted descending.
struct Svd {
  Matrix u;
  Vector s;
  Matrix vt;
};

Svd thin_svd(const Matrix& a);

} // namespace topt
