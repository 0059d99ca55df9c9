#pragma once

#include <drop/core.hpp>
#include <drop/rng.hpp>

namespace drop::testing {

inline Matrix normal_matrix(RngStream& rng, Index n, Index p) {
  Matrix x(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) x(i, j) = rng.normal();
  return x;
}

/// Symmetric, diagonally dominant, about half the off-diagonals nonzero.
inline Matrix random_precision(RngStream& rng, Index p) {
  Matrix k = Matrix::Zero(p, p);
  for (Index i = 0; i < p; ++i)
    for (Index j = i + 1; j < p; ++j) k(i, j) = k(j, i) = rng.bernoulli(0.5) ? 0.0 : 0.6 * (2.0 * rng.uniform() - 1.0);
  for (Index i = 0; i < p; ++i) k(i, i) = 1.0 + k.row(i).cwiseAbs().sum() + rng.uniform();
  return k;
}

}  // namespace drop::testing
