#include "lsi/random.hpp"

namespace lsi {

namespace {

Matrix gaussian(Rng& rng, Index rows, Index cols) {
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) m(i, j) = cplx(g(rng), g(rng));
    return m;
}

}  // namespace

Matrix random_hermitian(Rng& rng, Index n, double scale) {
    const Matrix g = gaussian(rng, n, n);
    return scale * (g + g.adjoint()) / 2.0;
}

Matrix random_unitary(Rng& rng, Index n) {
    const Matrix g = gaussian(rng, n, n);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(n, n);
    const Matrix r = qr.matrixQR();
    for (Index j = 0; j < n; ++j) {
        const double a = std::abs(r(j, j));
        if (a > 0) q.col(j) *= r(j, j) / a;
    }
    return q;
}

Matrix random_positive(Rng& rng, Index n, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    Vector spectrum(n);
    for (Index i = 0; i < n; ++i) spectrum(i) = u(rng);
    const Matrix q = random_unitary(rng, n);
    Matrix out = q * spectrum.cast<cplx>().asDiagonal() * q.adjoint();
    return (out + out.adjoint()) / 2.0;
}

Matrix random_state(Rng& rng, Index n, double lo, double hi) {
    Matrix rho = random_positive(rng, n, lo, hi);
    return rho * (static_cast<double>(n) / rho.trace().real());
}

std::vector<Matrix> random_kraus(Rng& rng, Index n, int count) {
    std::vector<Matrix> ks;
    Matrix total = Matrix::Zero(n, n);
    for (int i = 0; i < count; ++i) {
        ks.push_back(gaussian(rng, n, n));
        total += ks.back().adjoint() * ks.back();
    }
    // K_i -> K_i total^{-1/2} makes the family trace preserving.
    const Matrix inv_sqrt = matrix_function((total + total.adjoint()) / 2.0,
                                            [](double x) { return 1.0 / std::sqrt(x); });
    for (Matrix& k : ks) k = k * inv_sqrt;
    return ks;
}

}  // namespace lsi
