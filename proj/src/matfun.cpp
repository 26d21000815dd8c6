#include "lsi/matfun.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <numbers>

namespace lsi {

namespace {

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// Doubles the point count from `points` until two successive estimates agree.
template <typename Eval>
Matrix refine_quadrature(int points, Eval&& eval, const char* what) {
    constexpr int kMaxPoints = 512;
    constexpr double kConverged = 1e-8;
    constexpr double kAcceptable = 1e-6;
    if (points < 1) throw std::invalid_argument(std::string(what) + ": points must be positive");
    Matrix prev = eval(points);
    double diff = INFINITY;
    for (int pts = 2 * points; pts <= kMaxPoints; pts *= 2) {
        Matrix cur = eval(pts);
        diff = max_abs(cur - prev) / std::max(1.0, max_abs(cur));
        prev = std::move(cur);
        if (diff < kConverged) return prev;
    }
    if (std::isfinite(diff) && diff > kAcceptable)
        throw QuadratureError(std::string(what) + ": refinements differ by " + std::to_string(diff));
    return prev;
}

}  // namespace

ScalarKernel ScalarKernel::log_quotient() {
    ScalarKernel k;
    k.kind_ = Kind::LogQuotient;
    k.name_ = "log-quotient";
    return k;
}

ScalarKernel ScalarKernel::power_quotient(double p) {
    ScalarKernel k;
    k.kind_ = Kind::PowerQuotient;
    k.p_ = p;
    k.name_ = "power-quotient";
    return k;
}

ScalarKernel ScalarKernel::tilt() {
    ScalarKernel k;
    k.kind_ = Kind::Tilt;
    k.name_ = "tilt";
    return k;
}

ScalarKernel ScalarKernel::custom(std::string name, std::function<double(double, double)> off_diagonal,
                                  std::function<double(double)> diagonal, bool needs_positive) {
    ScalarKernel k;
    k.kind_ = Kind::Custom;
    k.name_ = std::move(name);
    k.off_ = std::move(off_diagonal);
    k.diag_ = std::move(diagonal);
    k.needs_positive_ = needs_positive;
    return k;
}

double ScalarKernel::operator()(double x, double y) const {
    // Evaluate with x >= y so that k(x, y) == k(y, x) bit for bit.
    if (x < y) std::swap(x, y);
    const double d = x - y;
    const bool on_diagonal = d < kDiagonalLimit * std::abs(x) || d == 0.0;
    // Inside the window the derivative is taken at the midpoint, which keeps the symmetry.
    if (on_diagonal) x = 0.5 * (x + y);
    // log1p(d / y) = ln x - ln y without cancellation when x is close to y.
    switch (kind_) {
        case Kind::LogQuotient:
            return on_diagonal ? 1.0 / x : std::log1p(d / y) / d;
        case Kind::Tilt:
            return on_diagonal ? x : d / std::log1p(d / y);
        case Kind::PowerQuotient: {
            const double a = p_ - 1.0;
            if (on_diagonal) return a * std::pow(x, a - 1.0);
            return std::pow(y, a) * std::expm1(a * std::log1p(d / y)) / d;
        }
        case Kind::Custom:
            return on_diagonal ? diag_(x) : off_(x, y);
    }
    return 0.0;
}

RealMatrix ScalarKernel::matrix(const Vector& lambda, const Vector& mu) const {
    RealMatrix k(lambda.size(), mu.size());
    for (Index i = 0; i < lambda.size(); ++i)
        for (Index j = 0; j < mu.size(); ++j) k(i, j) = (*this)(lambda(i), mu(j));
    return k;
}

Matrix kron(const Matrix& a, const Matrix& b) { return Eigen::kroneckerProduct(a, b).eval(); }

Matrix doi_superoperator(const Matrix& rho, const Matrix& sigma, const ScalarKernel& k) {
    auto r = eig_hermitian(rho);
    auto s = eig_hermitian(sigma);
    if (k.needs_positive()) {
        require_positive_spectrum(r, "doi_superoperator rho");
        require_positive_spectrum(s, "doi_superoperator sigma");
    }
    const RealMatrix km = k.matrix(r.eigenvalues, s.eigenvalues);
    const Eigen::VectorXcd weights = km.reshaped().cast<cplx>();
    // T -> U* T V is (V^T kron U*); the reverse map is (conj(V) kron U).
    const Matrix into = kron(s.eigenvectors.transpose(), r.eigenvectors.adjoint());
    const Matrix back = kron(s.eigenvectors.conjugate(), r.eigenvectors);
    return back * weights.asDiagonal() * into;
}

QuadratureRule gauss_legendre(int n, double a, double b) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
    QuadratureRule rule{Vector(n), Vector(n)};
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 1.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes(i) = 0.5 * (b - a) * x + 0.5 * (b + a);
        rule.weights(i) = 0.5 * (b - a) * w;
    }
    return rule;
}

Matrix quadrature_oracle_resolvent(const Matrix& rho, const Matrix& t, int points) {
    require_hermitian(rho, "resolvent oracle rho");
    if (t.rows() != rho.rows() || t.cols() != rho.cols())
        throw DimensionError("resolvent oracle: operand dimension mismatch");
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    if (!(lo >= kPositivityFloor)) throw DomainError("resolvent oracle: rho not positive", lo);
    // r = c tan(theta) with c the geometric mean of the extreme eigenvalues.
    const double c = std::sqrt(lo * es.eigenvalues().maxCoeff());
    const Index n = rho.rows();
    const Matrix id = Matrix::Identity(n, n);
    auto eval = [&](int pts) {
        const QuadratureRule q = gauss_legendre(pts, 0.0, std::numbers::pi / 2);
        Matrix acc = Matrix::Zero(n, n);
        for (int i = 0; i < pts; ++i) {
            const double th = q.nodes(i);
            const double r = c * std::tan(th);
            const double jac = c / (std::cos(th) * std::cos(th));
            const Eigen::PartialPivLU<Matrix> lu(rho + r * id);
            const Matrix left = lu.solve(t);
            const Matrix full = lu.solve(left.adjoint()).adjoint();  // left (rho + r)^{-1}
            acc += (q.weights(i) * jac) * full;
        }
        return acc;
    };
    return refine_quadrature(points, eval, "resolvent oracle");
}

Matrix quadrature_oracle_tilt(const Matrix& rho, const Matrix& t, int points) {
    if (t.rows() != rho.rows() || t.cols() != rho.cols())
        throw DimensionError("tilt oracle: operand dimension mismatch");
    const auto sd = eig_hermitian(rho);
    require_positive_spectrum(sd, "tilt oracle rho");
    const Index n = rho.rows();
    auto eval = [&](int pts) {
        const QuadratureRule q = gauss_legendre(pts, 0.0, 1.0);
        Matrix acc = Matrix::Zero(n, n);
        for (int i = 0; i < pts; ++i) {
            const double r = q.nodes(i);
            const Matrix left = sd.map([r](double x) { return std::pow(x, r); });
            const Matrix right = sd.map([r](double x) { return std::pow(x, 1.0 - r); });
            acc += q.weights(i) * (left * t * right);
        }
        return acc;
    };
    return refine_quadrature(points, eval, "tilt oracle");
}

SpectralSuperoperator SpectralSuperoperator::from_matrix(Index n, Matrix m) {
    if (n < 1 || m.rows() != n * n || m.cols() != n * n)
        throw DimensionError("superoperator must be n^2 x n^2");
    const double scale = std::max(1.0, max_abs(m));
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw NotHermitianError("superoperator is not Hilbert-Schmidt self-adjoint");
    SpectralSuperoperator s;
    s.n_ = n;
    s.matrix_ = (m + m.adjoint()) / 2.0;
    s.finalize();
    return s;
}

void SpectralSuperoperator::finalize() {
    Eigen::SelfAdjointEigenSolver<Matrix> es(matrix_);
    if (es.info() != Eigen::Success) throw std::runtime_error("superoperator eigensolver failed");
    spectrum_ = es.eigenvalues();
    basis_ = es.eigenvectors();
    const double scale = std::max(1.0, spectrum_.cwiseAbs().maxCoeff());
    if (spectrum_.size() > 0 && spectrum_(0) < -1e-10 * scale)
        throw std::invalid_argument("superoperator is not positive semidefinite");
    const Eigen::VectorXcd one = vec(Matrix::Identity(n_, n_));
    if ((matrix_ * one).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw std::invalid_argument("superoperator does not annihilate the identity");
}

Matrix SpectralSuperoperator::apply(const Matrix& x) const {
    if (x.rows() != n_ || x.cols() != n_) throw DimensionError("superoperator operand has wrong size");
    return unvec(matrix_ * vec(x), n_);
}

SpectralSuperoperator superop_from_generators(const std::vector<Matrix>& generators, Index n) {
    if (generators.empty() && n < 1)
        throw DimensionError("empty generator list needs an explicit dimension");
    if (!generators.empty()) {
        if (n >= 1 && generators.front().rows() != n) throw DimensionError("generator dimension mismatch");
        n = generators.front().rows();
    }
    const Matrix id = Matrix::Identity(n, n);
    Matrix s = Matrix::Zero(n * n, n * n);
    for (const Matrix& a : generators) {
        if (a.rows() != n || a.cols() != n) throw DimensionError("generator dimension mismatch");
        require_hermitian(a, "generator");
        const Matrix a2 = a * a;
        s += kron(id, a2) + kron(a2.transpose(), id) - 2.0 * kron(a.transpose(), a);
    }
    SpectralSuperoperator out = SpectralSuperoperator::from_matrix(n, std::move(s));
    out.generators_ = generators;
    out.has_generators_ = true;
    return out;
}

Matrix spectral_flow(const SpectralSuperoperator& s, double t, const Matrix& x) {
    const Index n = s.dim();
    if (x.rows() != n || x.cols() != n) throw DimensionError("semigroup operand has wrong size");
    const Eigen::VectorXcd decay = (-t * s.spectrum().array()).exp().cast<cplx>().matrix();
    const Eigen::VectorXcd coeffs = s.eigenbasis().adjoint() * vec(x);
    Matrix out = unvec(s.eigenbasis() * decay.cwiseProduct(coeffs), n);
    if (hermiticity_defect(x) <= kHermitianTolerance) out = (out + out.adjoint()) / 2.0;
    return out;
}

Matrix semigroup_apply(const SpectralSuperoperator& s, double t, const Matrix& x) {
    if (!(t >= 0.0)) throw std::invalid_argument("semigroup_apply: t must be nonnegative");
    return spectral_flow(s, t, x);
}

double spectral_gap(const SpectralSuperoperator& s) {
    for (Index i = 0; i < s.spectrum().size(); ++i)
        if (s.spectrum()(i) > kKernelThreshold) return s.spectrum()(i);
    throw DegenerateGeneratorError("generator has no eigenvalue above the kernel threshold");
}

double spectral_gap(const RealMatrix& generator) {
    if (generator.rows() != generator.cols()) throw DimensionError("generator is not square");
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(generator, Eigen::EigenvaluesOnly);
    for (Index i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()(i) > kKernelThreshold) return es.eigenvalues()(i);
    throw DegenerateGeneratorError("generator has no eigenvalue above the kernel threshold");
}

}  // namespace lsi
