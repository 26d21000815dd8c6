#pragma once

#include <random>

#include "lsi/matfun.hpp"

namespace lsi {

using Rng = std::mt19937_64;

/// Hermitian matrix with independent complex Gaussian entries of the given scale.
Matrix random_hermitian(Rng& rng, Index n, double scale = 1.0);

/// Haar-distributed unitary from the QR decomposition of a complex Gaussian matrix.
Matrix random_unitary(Rng& rng, Index n);

/// Positive matrix with spectrum drawn uniformly from [lo, hi] in a random eigenbasis.
Matrix random_positive(Rng& rng, Index n, double lo, double hi);

/// random_positive rescaled so that tr(rho) = n.
Matrix random_state(Rng& rng, Index n, double lo = 0.05, double hi = 1.0);

/// Kraus operators of a random channel: sum_i K_i^* K_i = 1.
std::vector<Matrix> random_kraus(Rng& rng, Index n, int count);

}  // namespace lsi
