#include "lsi/lindblad.hpp"

#include <cmath>
#include <numbers>

namespace lsi {

// Conditional expectations

namespace {

void require_mask_shape(const RealMatrix& mask) {
    if (mask.rows() != mask.cols() || mask.rows() < 1) throw DimensionError("pinching mask must be square");
}

}  // namespace

ConditionalExpectation ConditionalExpectation::edge(int r, int s, Index n) {
    if (r > s) std::swap(r, s);
    if (r < 0 || r == s || s >= n) throw GraphError("edge indices out of range");
    ConditionalExpectation e;
    e.kind_ = Kind::Edge;
    e.n_ = n;
    e.mask_ = RealMatrix::Zero(n, n);
    auto in_edge = [&](Index i) { return i == r || i == s; };
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) e.mask_(i, j) = in_edge(i) == in_edge(j) ? 1.0 : 0.0;
    return e;
}

ConditionalExpectation ConditionalExpectation::diagonal(Index n) {
    if (n < 1) throw DimensionError("dimension must be positive");
    ConditionalExpectation e;
    e.kind_ = Kind::Diagonal;
    e.n_ = n;
    e.mask_ = RealMatrix::Identity(n, n);
    return e;
}

ConditionalExpectation ConditionalExpectation::trace(Index n) {
    if (n < 1) throw DimensionError("dimension must be positive");
    ConditionalExpectation e;
    e.kind_ = Kind::Trace;
    e.n_ = n;
    return e;
}

ConditionalExpectation ConditionalExpectation::pinching(const RealMatrix& mask) {
    require_mask_shape(mask);
    const Index n = mask.rows();
    for (Index i = 0; i < n; ++i) {
        if (mask(i, i) != 1.0) throw std::invalid_argument("pinching mask must have a unit diagonal");
        for (Index j = 0; j < n; ++j) {
            if (mask(i, j) != 0.0 && mask(i, j) != 1.0) throw std::invalid_argument("pinching mask must be 0/1");
            if (mask(i, j) != mask(j, i)) throw std::invalid_argument("pinching mask must be symmetric");
        }
    }
    // Transitivity: i~j and j~k imply i~k.
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            for (Index k = 0; k < n; ++k)
                if (mask(i, j) == 1.0 && mask(j, k) == 1.0 && mask(i, k) != 1.0)
                    throw std::invalid_argument("pinching mask is not an equivalence relation");
    ConditionalExpectation e;
    e.kind_ = Kind::CustomPinching;
    e.n_ = n;
    e.mask_ = mask;
    return e;
}

ConditionalExpectation ConditionalExpectation::block_pinching(const std::vector<int>& labels) {
    const Index n = static_cast<Index>(labels.size());
    RealMatrix mask(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            mask(i, j) = labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)] ? 1.0 : 0.0;
    return pinching(mask);
}

ConditionalExpectation ConditionalExpectation::kernel_projection(const SpectralSuperoperator& s) {
    Index k = 0;
    while (k < s.spectrum().size() && s.spectrum()(k) <= kKernelThreshold) ++k;
    // Ergodic generators fix only the multiples of the identity.
    if (k <= 1) return trace(s.dim());
    ConditionalExpectation e;
    e.kind_ = Kind::KernelProjection;
    e.n_ = s.dim();
    const Matrix basis = s.eigenbasis().leftCols(k);
    e.projector_ = basis * basis.adjoint();
    return e;
}

Index ConditionalExpectation::rank() const {
    switch (kind_) {
        case Kind::Trace:
            return 1;
        case Kind::KernelProjection:
            return static_cast<Index>(std::llround(projector_.trace().real()));
        default:
            return static_cast<Index>(std::llround(mask_.sum()));
    }
}

Matrix ConditionalExpectation::apply(const Matrix& x) const {
    if (x.rows() != n_ || x.cols() != n_) throw DimensionError("conditional expectation applied to wrong dimension");
    switch (kind_) {
        case Kind::Trace:
            return ntrace(x) * Matrix::Identity(n_, n_);
        case Kind::KernelProjection:
            return unvec(projector_ * vec(x), n_);
        default:
            return x.cwiseProduct(mask_.cast<cplx>());
    }
}

Matrix ConditionalExpectation::superoperator() const {
    switch (kind_) {
        case Kind::Trace: {
            const Eigen::VectorXcd one = vec(Matrix::Identity(n_, n_));
            return one * one.adjoint() / static_cast<double>(n_);
        }
        case Kind::KernelProjection:
            return projector_;
        default: {
            const Eigen::VectorXcd m = mask_.reshaped().cast<cplx>();
            return m.asDiagonal();
        }
    }
}

ConditionalExpectation operator*(const ConditionalExpectation& a, const ConditionalExpectation& b) {
    if (!a.is_schur() || !b.is_schur()) throw std::invalid_argument("only Schur pinchings compose in closed form");
    if (a.n_ != b.n_) throw DimensionError("conditional expectations differ in dimension");
    ConditionalExpectation e;
    e.kind_ = ConditionalExpectation::Kind::CustomPinching;
    e.n_ = a.n_;
    e.mask_ = a.mask_.cwiseProduct(b.mask_);
    if (e.mask_ == RealMatrix::Identity(e.n_, e.n_)) e.kind_ = ConditionalExpectation::Kind::Diagonal;
    return e;
}

// Generators

EdgeGenerator edge_generator(int r, int s, Index n) {
    if (r < 0 || r >= s || s >= n) throw GraphError("edge generator needs 0 <= r < s < n");
    EdgeGenerator g;
    g.r = r;
    g.s = s;
    g.n = n;
    g.antisymmetric = RealMatrix::Zero(n, n);
    g.antisymmetric(r, s) = 1.0;
    g.antisymmetric(s, r) = -1.0;
    g.hermitian = cplx(0, 1) * g.antisymmetric.cast<cplx>();
    return g;
}

SpectralSuperoperator graph_lindblad(const WeightedGraph& g) {
    std::vector<Matrix> generators;
    for (const Edge& e : g.edges()) generators.push_back(std::sqrt(e.w) * edge_generator(e.u, e.v, g.n()).hermitian);
    return superop_from_generators(generators, g.n());
}

ConditionalExpectation edge_expectation(int r, int s, Index n) {
    if (r < 0 || r >= s || s >= n) throw GraphError("edge expectation needs 0 <= r < s < n");
    return ConditionalExpectation::edge(r, s, n);
}

ConditionalExpectation diagonal_expectation(Index n) { return ConditionalExpectation::diagonal(n); }

FixedPointSpace fixed_point_dim(const SpectralSuperoperator& s) {
    Index k = 0;
    while (k < s.spectrum().size() && s.spectrum()(k) <= kKernelThreshold) ++k;
    std::vector<Matrix> basis;
    // Unit vectors in vec form have Hilbert-Schmidt norm 1.
    for (Index i = 0; i < k; ++i) basis.push_back(unvec(s.eigenbasis().col(i), s.dim()));
    return FixedPointSpace{k, std::move(basis), ConditionalExpectation::kernel_projection(s)};
}

Matrix sign_flip_average(int i, const Matrix& rho) {
    const Index n = rho.rows();
    if (rho.cols() != n) throw DimensionError("sign_flip_average needs a square matrix");
    if (i < 0 || i >= n - 1) throw std::out_of_range("sign flip index must satisfy 0 <= i < n - 1");
    Matrix out = rho;
    for (Index j = 0; j < n; ++j) {
        if (j == i) continue;
        out(i, j) = 0.0;
        out(j, i) = 0.0;
    }
    return out;
}

SpectralSuperoperator pauli_system() {
    Matrix x(2, 2), y(2, 2);
    x << 0, 1, 1, 0;
    y << 0, cplx(0, -1), cplx(0, 1), 0;
    return superop_from_generators({x / 2.0, y / 2.0});
}

SpectralSuperoperator depolarizing(Index n) {
    if (n < 2) throw DimensionError("depolarizing generator needs n >= 2");
    const Matrix id = Matrix::Identity(n * n, n * n);
    return SpectralSuperoperator::from_matrix(n, id - ConditionalExpectation::trace(n).superoperator());
}

IntegerSpectrumLindbladian integer_spectrum_lindblad(const Matrix& x) {
    const auto sd = eig_hermitian(x);
    for (Index i = 0; i < sd.dim(); ++i) {
        const double v = sd.eigenvalues(i);
        if (std::abs(v - std::round(v)) > 1e-8)
            throw std::invalid_argument("eigenvalue " + std::to_string(v) + " is not an integer");
    }
    return {superop_from_generators({x}), 1.0 / (5.0 * std::numbers::pi * std::numbers::pi)};
}

SpectralSuperoperator collective_lindblad(const std::vector<Matrix>& xs, int m) {
    if (xs.empty()) throw DimensionError("collective system needs at least one generator");
    if (m < 1) throw DimensionError("number of copies must be positive");
    const Index n = xs.front().rows();
    Index total = 1;
    for (int j = 0; j < m; ++j) {
        total *= 2 * n;
        if (total > kCollectiveDimensionCap)
            throw DimensionError("collective dimension exceeds " + std::to_string(kCollectiveDimensionCap));
    }
    std::vector<Matrix> generators;
    for (const Matrix& x : xs) {
        if (x.rows() != n || x.cols() != n) throw DimensionError("collective generators differ in size");
        require_hermitian(x, "collective generator");
        Matrix hat = Matrix::Zero(2 * n, 2 * n);
        hat.topLeftCorner(n, n) = x;
        hat.bottomRightCorner(n, n) = x.transpose();
        Index before = 1;
        for (int j = 0; j < m; ++j) {
            const Index after = total / (before * 2 * n);
            generators.push_back(kron(kron(Matrix::Identity(before, before), hat), Matrix::Identity(after, after)));
            before *= 2 * n;
        }
    }
    return superop_from_generators(generators, total);
}

namespace {

// Applies f to every n x n sub-matrix x(i m + a, j m + b) with (a, b) fixed.
template <typename F>
Matrix apply_left_factor(Index n, Index m, const Matrix& x, F&& f) {
    if (x.rows() != n * m || x.cols() != n * m) throw DimensionError("amplified input has the wrong dimension");
    Matrix out(n * m, n * m);
    Matrix block(n, n);
    for (Index a = 0; a < m; ++a)
        for (Index b = 0; b < m; ++b) {
            for (Index i = 0; i < n; ++i)
                for (Index j = 0; j < n; ++j) block(i, j) = x(i * m + a, j * m + b);
            const Matrix image = f(block);
            for (Index i = 0; i < n; ++i)
                for (Index j = 0; j < n; ++j) out(i * m + a, j * m + b) = image(i, j);
        }
    return out;
}

// Applies f to every contiguous m x m block.
template <typename F>
Matrix apply_right_factor(Index n, Index m, const Matrix& x, F&& f) {
    Matrix out(n * m, n * m);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) out.block(i * m, j * m, m, m) = f(Matrix(x.block(i * m, j * m, m, m)));
    return out;
}

}  // namespace

Matrix amplify_apply(const SpectralSuperoperator& s, Index m, const Matrix& x) {
    return apply_left_factor(s.dim(), m, x, [&](const Matrix& b) { return s.apply(b); });
}

Matrix amplify_apply(const ConditionalExpectation& e, Index m, const Matrix& x) {
    return apply_left_factor(e.dim(), m, x, [&](const Matrix& b) { return e.apply(b); });
}

SpectralSuperoperator tensor_sum(const SpectralSuperoperator& a, const SpectralSuperoperator& b) {
    const Index n1 = a.dim(), n2 = b.dim(), n = n1 * n2;
    if (a.has_generators() && b.has_generators()) {
        std::vector<Matrix> generators;
        for (const Matrix& g : a.generators()) generators.push_back(kron(g, Matrix::Identity(n2, n2)));
        for (const Matrix& g : b.generators()) generators.push_back(kron(Matrix::Identity(n1, n1), g));
        return superop_from_generators(generators, n);
    }
    Matrix m(n * n, n * n);
    for (Index c = 0; c < n * n; ++c) {
        Matrix unit = Matrix::Zero(n, n);
        unit(c % n, c / n) = 1.0;
        const Matrix image = amplify_apply(a, n2, unit) +
                             apply_right_factor(n1, n2, unit, [&](const Matrix& blk) { return b.apply(blk); });
        m.col(c) = vec(image);
    }
    return SpectralSuperoperator::from_matrix(n, m);
}

namespace {

double gradient_norm(const std::vector<Matrix>& generators, const Matrix& rho, const Matrix& a) {
    const auto sd = eig_hermitian(rho);
    const ScalarKernel k = ScalarKernel::tilt();
    double total = 0.0;
    for (const Matrix& g : generators) {
        const Matrix v = cplx(0, 1) * commutator(g, a);
        total += ntrace(Matrix(v.adjoint() * doi_apply(sd, sd, k, v))).real();
    }
    return total;
}

}  // namespace

GradientEstimateReport gradient_estimate_check(const std::vector<Matrix>& generators, double lambda,
                                               const State& rho, const Matrix& a,
                                               const std::vector<double>& t_grid) {
    const SpectralSuperoperator s = superop_from_generators(generators, rho.dim());
    require_hermitian(a, "gradient test observable");
    GradientEstimateReport report;
    report.max_residual = -INFINITY;
    for (double t : t_grid) {
        GradientEstimateRow row;
        row.t = t;
        Matrix evolved_state = semigroup_apply(s, t, rho.matrix());
        evolved_state = (evolved_state + evolved_state.adjoint()) / 2.0;
        row.lhs = gradient_norm(generators, rho.matrix(), semigroup_apply(s, t, a));
        row.rhs = std::exp(-2.0 * lambda * t) * gradient_norm(generators, evolved_state, a);
        row.residual = row.lhs - row.rhs;
        report.max_residual = std::max(report.max_residual, row.residual);
        if (row.residual > 1e-9) report.holds = false;
        report.rows.push_back(row);
    }
    return report;
}

}  // namespace lsi
