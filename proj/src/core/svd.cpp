#include "core/svd.hpp"

#include <lapacke.h>

#include <string>

namespace topt {

Svd thin_svd(const Matrix& a) {
  if (a.rows() == 0 || a.cols() == 0)
    throw Error::invalid("thin_svd: empty matrix");

  const lapack_int m = static_cast<lapack_int>(a.rows());
  const lapack_int n = static_cast<lapack_int>(a.cols());
  const lapack_int k = std::min(m, n);

  Matrix work = a; // dgesdd destroys its input
  Svd out;
  out.u.resize(m, k);
  out.s.resize(k);
  out.vt.resize(k, n);

  const lapack_int info =
      LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'S', m, n, work.data(), m, out.s.data(), out.u.data(), m,
                     out.vt.data(), k);
  if (info != 0)
    throw Error::runtime("thin_svd: dgesdd failed with info=" + std::to_string(info));
  return out;
}

} // namespace topt
