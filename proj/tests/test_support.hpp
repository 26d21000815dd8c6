#pragma once

#include <initializer_list>

#include "lsi/matfun.hpp"

namespace lsi::testing {

inline Matrix pauli_x() { return (Matrix(2, 2) << 0, 1, 1, 0).finished(); }
inline Matrix pauli_y() { return (Matrix(2, 2) << 0, cplx(0, -1), cplx(0, 1), 0).finished(); }
inline Matrix pauli_z() { return (Matrix(2, 2) << 1, 0, 0, -1).finished(); }

inline Matrix diag(std::initializer_list<double> values) {
    Vector v(static_cast<Index>(values.size()));
    Index i = 0;
    for (double x : values) v(i++) = x;
    return v.cast<cplx>().asDiagonal();
}

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace lsi::testing
