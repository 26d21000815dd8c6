#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lsi/errors.hpp"

namespace lsi {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kPositivityFloor = 1e-12;
inline constexpr double kDiagonalLimit = 1e-9;
inline constexpr double kKernelThreshold = 1e-9;

/// Largest entry of |a - a*|, relative to max(1, max|a_ij|).
template <typename Derived>
double hermiticity_defect(const Eigen::MatrixBase<Derived>& a) {
    if (a.rows() != a.cols()) return INFINITY;
    if (a.size() == 0) return 0.0;
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    return (a - a.adjoint()).cwiseAbs().maxCoeff() / scale;
}

template <typename Derived>
void require_hermitian(const Eigen::MatrixBase<Derived>& a, const char* what) {
    if (a.rows() != a.cols())
        throw DimensionError(std::string(what) + " is not square");
    if (hermiticity_defect(a) > kHermitianTolerance)
        throw NotHermitianError(std::string(what) + " is not Hermitian");
}

template <typename Scalar>
struct SpectralDecomposition {
    Vector eigenvalues;                // ascending
    DenseMatrix<Scalar> eigenvectors;  // unitary, columns

    Index dim() const { return eigenvalues.size(); }

    template <typename F>
    DenseMatrix<Scalar> map(F&& f) const {
        DenseMatrix<Scalar> scaled = eigenvectors;
        for (Index j = 0; j < dim(); ++j) scaled.col(j) *= Scalar(f(eigenvalues(j)));
        return scaled * eigenvectors.adjoint();
    }

    DenseMatrix<Scalar> reconstruct() const {
        return map([](double x) { return x; });
    }
};

template <typename Derived>
SpectralDecomposition<typename Derived::Scalar> eig_hermitian(
    const Eigen::MatrixBase<Derived>& h) {
    using Scalar = typename Derived::Scalar;
    require_hermitian(h, "eig_hermitian input");
    Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>> solver(h.derived());
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("Hermitian eigensolver failed to converge");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

/// Throws DomainError when an eigenvalue lies below the positivity floor.
template <typename Scalar>
void require_positive_spectrum(const SpectralDecomposition<Scalar>& sd, const char* what) {
    if (sd.dim() == 0) return;
    const double lo = sd.eigenvalues.minCoeff();
    if (!(lo >= kPositivityFloor))
        throw DomainError(std::string(what) + ": eigenvalue " + std::to_string(lo) +
                              " below positivity floor",
                          lo);
}

template <typename Derived, typename F>
DenseMatrix<typename Derived::Scalar> matrix_function(const Eigen::MatrixBase<Derived>& h,
                                                      F&& f) {
    return eig_hermitian(h).map(std::forward<F>(f));
}

template <typename Derived>
DenseMatrix<typename Derived::Scalar> matrix_log(const Eigen::MatrixBase<Derived>& h) {
    auto sd = eig_hermitian(h);
    require_positive_spectrum(sd, "matrix_log");
    return sd.map([](double x) { return std::log(x); });
}

template <typename Derived>
DenseMatrix<typename Derived::Scalar> matrix_power(const Eigen::MatrixBase<Derived>& h,
                                                   double p) {
    auto sd = eig_hermitian(h);
    require_positive_spectrum(sd, "matrix_power");
    return sd.map([p](double x) { return std::pow(x, p); });
}

template <typename A, typename B>
DenseMatrix<typename A::Scalar> commutator(const Eigen::MatrixBase<A>& a,
                                           const Eigen::MatrixBase<B>& b) {
    return a * b - b * a;
}

// Difference-quotient kernels for double operator integrals.
class ScalarKernel {
public:
    enum class Kind { LogQuotient, PowerQuotient, Tilt, Custom };

    static ScalarKernel log_quotient();
    static ScalarKernel power_quotient(double p);
    static ScalarKernel tilt();
    static ScalarKernel custom(std::string name, std::function<double(double, double)> off_diagonal,
                               std::function<double(double)> diagonal, bool needs_positive);

    Kind kind() const { return kind_; }
    double exponent() const { return p_; }
    const std::string& name() const { return name_; }
    bool needs_positive() const { return needs_positive_; }

    double operator()(double x, double y) const;

    /// K_ij = k(lambda_i, mu_j).
    RealMatrix matrix(const Vector& lambda, const Vector& mu) const;

private:
    Kind kind_ = Kind::LogQuotient;
    double p_ = 0.0;
    std::string name_;
    bool needs_positive_ = true;
    std::function<double(double, double)> off_;
    std::function<double(double)> diag_;
};

/// U (K o (U* T V)) V* in the eigenbases U of rho and V of sigma.
template <typename Scalar, typename Derived>
DenseMatrix<Scalar> doi_apply(const SpectralDecomposition<Scalar>& rho,
                              const SpectralDecomposition<Scalar>& sigma, const ScalarKernel& k,
                              const Eigen::MatrixBase<Derived>& t) {
    if (t.rows() != rho.dim() || t.cols() != sigma.dim())
        throw DimensionError("doi_apply: operand dimension mismatch");
    if (k.needs_positive()) {
        require_positive_spectrum(rho, "doi_apply rho");
        require_positive_spectrum(sigma, "doi_apply sigma");
    }
    DenseMatrix<Scalar> inner = rho.eigenvectors.adjoint() * t * sigma.eigenvectors;
    inner = inner.cwiseProduct(k.matrix(rho.eigenvalues, sigma.eigenvalues).template cast<Scalar>());
    return rho.eigenvectors * inner * sigma.eigenvectors.adjoint();
}

template <typename R, typename S, typename T>
DenseMatrix<typename R::Scalar> doi_apply(const Eigen::MatrixBase<R>& rho,
                                          const Eigen::MatrixBase<S>& sigma, const ScalarKernel& k,
                                          const Eigen::MatrixBase<T>& t) {
    if (rho.rows() != sigma.rows()) throw DimensionError("doi_apply: rho and sigma differ in size");
    return doi_apply(eig_hermitian(rho), eig_hermitian(sigma), k, t);
}

/// The map T -> doi_apply(rho, sigma, k, T) as an n^2 x n^2 matrix on column-stacked vectors.
Matrix doi_superoperator(const Matrix& rho, const Matrix& sigma, const ScalarKernel& k);

struct QuadratureRule {
    Vector nodes;
    Vector weights;
};

/// Gauss-Legendre rule with n points on [a, b].
QuadratureRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

/// Integral of (rho + r)^{-1} T (rho + r)^{-1} over r in [0, inf), refined by doubling.
Matrix quadrature_oracle_resolvent(const Matrix& rho, const Matrix& t, int points = 64);

/// Integral of rho^r T rho^{1-r} over r in [0, 1], refined by doubling.
Matrix quadrature_oracle_tilt(const Matrix& rho, const Matrix& t, int points = 64);

// Column-stacking vectorization: X -> A X B is (B^T kron A).
inline Eigen::VectorXcd vec(const Matrix& x) { return x.reshaped(); }

inline Matrix unvec(const Eigen::VectorXcd& v, Index n) {
    return v.reshaped(n, n);
}

Matrix kron(const Matrix& a, const Matrix& b);

/// Self-adjoint, positive semidefinite generator on M_n with cached spectrum.
class SpectralSuperoperator {
public:
    static SpectralSuperoperator from_matrix(Index n, Matrix m);

    Index dim() const { return n_; }
    const Matrix& matrix() const { return matrix_; }
    const Vector& spectrum() const { return spectrum_; }
    const Matrix& eigenbasis() const { return basis_; }
    const std::vector<Matrix>& generators() const { return generators_; }
    bool has_generators() const { return has_generators_; }

    Matrix apply(const Matrix& x) const;

private:
    friend SpectralSuperoperator superop_from_generators(const std::vector<Matrix>&, Index);
    SpectralSuperoperator() = default;
    void finalize();

    Index n_ = 0;
    Matrix matrix_;
    Vector spectrum_;
    Matrix basis_;
    std::vector<Matrix> generators_;
    bool has_generators_ = false;
};

/// rho -> sum_k [a_k, [a_k, rho]].
SpectralSuperoperator superop_from_generators(const std::vector<Matrix>& generators, Index n = -1);

/// e^{-tS} x for t >= 0.
Matrix semigroup_apply(const SpectralSuperoperator& s, double t, const Matrix& x);

/// e^{-tS} x for any real t (the group extension, used for two-sided differences).
Matrix spectral_flow(const SpectralSuperoperator& s, double t, const Matrix& x);

/// Smallest eigenvalue above the kernel threshold.
double spectral_gap(const SpectralSuperoperator& s);

/// Same for a real symmetric (classical) generator.
double spectral_gap(const RealMatrix& generator);

/// Normalized trace tr(x)/n.
template <typename Derived>
typename Derived::Scalar ntrace(const Eigen::MatrixBase<Derived>& x) {
    return x.trace() / static_cast<double>(x.rows());
}

}  // namespace lsi
