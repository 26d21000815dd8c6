#include "catch_amalgamated.hpp"

#include <numbers>

#include "lsi/matfun.hpp"
#include "lsi/random.hpp"

using namespace lsi;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Matrix pauli_x() { return (Matrix(2, 2) << 0, 1, 1, 0).finished(); }
Matrix pauli_y() { return (Matrix(2, 2) << 0, cplx(0, -1), cplx(0, 1), 0).finished(); }
Matrix pauli_z() { return (Matrix(2, 2) << 1, 0, 0, -1).finished(); }

Matrix diag(std::initializer_list<double> values) {
    Vector v(static_cast<Index>(values.size()));
    Index i = 0;
    for (double x : values) v(i++) = x;
    return v.cast<cplx>().asDiagonal();
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("eig_hermitian sorts and reconstructs", "[matfun]") {
    SECTION("diagonal input") {
        auto sd = eig_hermitian(diag({1, 2, 3}));
        CHECK(sd.eigenvalues.isApprox(Vector::LinSpaced(3, 1, 3)));
        CHECK(max_abs(sd.eigenvectors.cwiseAbs().cast<cplx>() - Matrix::Identity(3, 3)) < 1e-14);
    }
    SECTION("Pauli X") {
        auto sd = eig_hermitian(pauli_x());
        CHECK_THAT(sd.eigenvalues(0), WithinAbs(-1.0, 1e-15));
        CHECK_THAT(sd.eigenvalues(1), WithinAbs(1.0, 1e-15));
    }
    SECTION("random 4x4") {
        Rng rng(11);
        const Matrix h = random_hermitian(rng, 4);
        auto sd = eig_hermitian(h);
        CHECK((sd.reconstruct() - h).norm() / h.norm() < 1e-10);
        CHECK(max_abs(sd.eigenvectors.adjoint() * sd.eigenvectors - Matrix::Identity(4, 4)) < 1e-10);
        for (Index i = 1; i < 4; ++i) CHECK(sd.eigenvalues(i - 1) <= sd.eigenvalues(i));
    }
    SECTION("real scalar type") {
        RealMatrix h(2, 2);
        h << 2, 1, 1, 2;
        auto sd = eig_hermitian(h);
        CHECK_THAT(sd.eigenvalues(0), WithinAbs(1.0, 1e-14));
        CHECK_THAT(sd.eigenvalues(1), WithinAbs(3.0, 1e-14));
    }
    SECTION("non-Hermitian input rejected") {
        Matrix a = pauli_x();
        a(0, 1) = 2.0;
        CHECK_THROWS_AS(eig_hermitian(a), NotHermitianError);
    }
}

TEST_CASE("matrix_function applies the functional calculus", "[matfun]") {
    const double e = std::numbers::e;
    CHECK(max_abs(matrix_log(diag({1, e})) - diag({0, 1})) < 1e-15);
    Rng rng(3);
    const Matrix rho = random_positive(rng, 4, 0.1, 3.0);
    CHECK(max_abs(matrix_function(rho, [](double x) { return x; }) - rho) < 1e-12);
    CHECK(max_abs(matrix_function(rho, [](double x) { return x * x; }) - rho * rho) < 1e-10);

    SECTION("positivity floor is a hard error naming the eigenvalue") {
        try {
            (void)matrix_log(diag({1.0, 1e-13}));
            FAIL("expected DomainError");
        } catch (const DomainError& err) {
            CHECK_THAT(err.eigenvalue(), WithinRel(1e-13, 1e-9));
        }
        CHECK_THROWS_AS(matrix_power(diag({1.0, -0.5}), 0.5), DomainError);
    }
}

TEST_CASE("scalar kernels and their diagonal limits", "[matfun]") {
    const auto lq = ScalarKernel::log_quotient();
    const auto tilt = ScalarKernel::tilt();
    const auto pq = ScalarKernel::power_quotient(1.5);
    CHECK_THAT(lq(4.0, 1.0), WithinRel(std::log(4.0) / 3.0, 1e-15));
    CHECK_THAT(lq(2.0, 2.0), WithinRel(0.5, 1e-15));
    CHECK_THAT(tilt(std::numbers::e, 1.0), WithinRel(std::numbers::e - 1.0, 1e-15));
    CHECK_THAT(tilt(3.0, 3.0), WithinRel(3.0, 1e-15));
    CHECK_THAT(pq(4.0, 1.0), WithinRel((2.0 - 1.0) / 3.0, 1e-15));
    CHECK_THAT(pq(4.0, 4.0), WithinRel(0.5 * std::pow(4.0, -0.5), 1e-15));
    // Just outside the diagonal window the quotient is still accurate.
    const double x = 2.0, y = 2.0 * (1 + 3e-9);
    CHECK_THAT(lq(x, y), WithinRel(1.0 / 2.0, 1e-8));
    CHECK_THAT(tilt(x, y), WithinRel(2.0, 1e-8));
    CHECK(lq(x, y) == lq(y, x));
}

TEST_CASE("double operator integrals", "[matfun]") {
    Rng rng(5);
    SECTION("log-quotient on the identity is the identity map") {
        const Matrix t = random_hermitian(rng, 3);
        const Matrix id = Matrix::Identity(3, 3);
        CHECK(max_abs(doi_apply(id, id, ScalarKernel::log_quotient(), t) - t) < 1e-14);
    }
    SECTION("derivation identity delta(ln rho) = Q(delta rho)") {
        for (int trial = 0; trial < 40; ++trial) {
            const Index n = 2 + trial % 4;
            const Matrix rho = random_positive(rng, n, 0.05, 20.0);
            const Matrix x = random_hermitian(rng, n);
            const Matrix lhs = commutator(x, matrix_log(rho));
            const Matrix rhs = doi_apply(rho, rho, ScalarKernel::log_quotient(), commutator(x, rho));
            CHECK(max_abs(lhs - rhs) < 1e-10);
        }
    }
    SECTION("tilt kernel on diag(1, e)") {
        const Matrix rho = diag({1, std::numbers::e});
        const Matrix out = doi_apply(rho, rho, ScalarKernel::tilt(), pauli_x());
        CHECK_THAT(out(0, 1).real(), WithinAbs(1.718281828459045, 1e-14));
        CHECK_THAT(out(1, 0).real(), WithinAbs(1.718281828459045, 1e-14));
        CHECK(std::abs(out(0, 0)) < 1e-15);
    }
    SECTION("Hermitian and linear in T") {
        for (const auto& k : {ScalarKernel::log_quotient(), ScalarKernel::tilt(), ScalarKernel::power_quotient(1.3)}) {
            const Matrix rho = random_positive(rng, 4, 0.1, 5.0);
            const Matrix a = random_hermitian(rng, 4), b = random_hermitian(rng, 4);
            const Matrix qa = doi_apply(rho, rho, k, a);
            CHECK(hermiticity_defect(qa) < 1e-12);
            const Matrix lin = doi_apply(rho, rho, k, Matrix(2.0 * a - 0.7 * b));
            CHECK(max_abs(lin - (2.0 * qa - 0.7 * doi_apply(rho, rho, k, b))) < 1e-10);
        }
    }
    SECTION("superoperator form matches direct application") {
        const Matrix rho = random_positive(rng, 3, 0.1, 2.0);
        const Matrix sigma = random_positive(rng, 3, 0.1, 2.0);
        const Matrix t = random_hermitian(rng, 3);
        const Matrix q = doi_superoperator(rho, sigma, ScalarKernel::tilt());
        CHECK(max_abs(unvec(q * vec(t), 3) - doi_apply(rho, sigma, ScalarKernel::tilt(), t)) < 1e-12);
    }
    SECTION("non-positive spectrum rejected") {
        CHECK_THROWS_AS(doi_apply(diag({1, 0}), diag({1, 1}), ScalarKernel::log_quotient(), pauli_x()), DomainError);
    }
}

TEST_CASE("Gauss-Legendre rule is exact to degree 2n-1", "[matfun]") {
    const QuadratureRule q = gauss_legendre(8, 0.0, 2.0);
    CHECK_THAT(q.weights.sum(), WithinRel(2.0, 1e-14));
    double s = 0;
    for (Index i = 0; i < 8; ++i) s += q.weights(i) * std::pow(q.nodes(i), 15);
    CHECK_THAT(s, WithinRel(std::pow(2.0, 16) / 16.0, 1e-13));
}

TEST_CASE("quadrature oracles agree with the kernel forms", "[matfun]") {
    Rng rng(17);
    SECTION("resolvent") {
        const Matrix id = Matrix::Identity(3, 3);
        CHECK(max_abs(quadrature_oracle_resolvent(id, id) - id) < 1e-12);
        const Matrix off = quadrature_oracle_resolvent(diag({1, 4}), pauli_x());
        CHECK_THAT(off(0, 1).real(), WithinAbs(0.46209812037329684, 1e-9));
        for (int trial = 0; trial < 10; ++trial) {
            const Matrix rho = random_positive(rng, 3, 0.05, 20.0);
            const Matrix t = random_hermitian(rng, 3);
            CHECK(max_abs(quadrature_oracle_resolvent(rho, t) -
                          doi_apply(rho, rho, ScalarKernel::log_quotient(), t)) < 1e-6);
        }
    }
    SECTION("tilt") {
        const Matrix t = random_hermitian(rng, 3);
        CHECK(max_abs(quadrature_oracle_tilt(Matrix::Identity(3, 3), t) - t) < 1e-12);
        const Matrix rho = diag({0.5, 2.0, 7.0});
        const Matrix out = quadrature_oracle_tilt(rho, t);
        const double l[3] = {0.5, 2.0, 7.0};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double k = i == j ? l[i] : (l[i] - l[j]) / (std::log(l[i]) - std::log(l[j]));
                CHECK(std::abs(out(i, j) - k * t(i, j)) < 1e-9);
            }
        for (int trial = 0; trial < 10; ++trial) {
            const Matrix r = random_positive(rng, 3, 0.05, 20.0);
            const Matrix tt = random_hermitian(rng, 3);
            CHECK(max_abs(quadrature_oracle_tilt(r, tt) - doi_apply(r, r, ScalarKernel::tilt(), tt)) < 1e-6);
        }
    }
}

TEST_CASE("superoperators from generators", "[matfun]") {
    SECTION("single generator Z/2") {
        auto s = superop_from_generators({pauli_z() / 2.0});
        const Vector expected = (Vector(4) << 0, 0, 1, 1).finished();
        CHECK((s.spectrum() - expected).cwiseAbs().maxCoeff() < 1e-12);
    }
    SECTION("Pauli pair acts with rates (0,1,1,2)") {
        auto s = superop_from_generators({pauli_x() / 2.0, pauli_y() / 2.0});
        CHECK(max_abs(s.apply(Matrix::Identity(2, 2))) < 1e-14);
        CHECK(max_abs(s.apply(pauli_x()) - pauli_x()) < 1e-14);
        CHECK(max_abs(s.apply(pauli_y()) - pauli_y()) < 1e-14);
        CHECK(max_abs(s.apply(pauli_z()) - 2.0 * pauli_z()) < 1e-14);
        CHECK_THAT(spectral_gap(s), WithinAbs(1.0, 1e-12));
        CHECK(max_abs(s.matrix() - s.matrix().adjoint()) < 1e-14);
    }
    SECTION("empty list gives the zero operator") {
        auto s = superop_from_generators({}, 3);
        CHECK(s.matrix().isZero());
        CHECK_THROWS_AS(spectral_gap(s), DegenerateGeneratorError);
    }
    SECTION("random generators annihilate the identity and are self-adjoint") {
        Rng rng(23);
        auto s = superop_from_generators({random_hermitian(rng, 3), random_hermitian(rng, 3)});
        CHECK(max_abs(s.apply(Matrix::Identity(3, 3))) < 1e-10);
        const Matrix x = random_hermitian(rng, 3), y = random_hermitian(rng, 3);
        CHECK(std::abs((x.adjoint() * s.apply(y)).trace() - (s.apply(x).adjoint() * y).trace()) < 1e-10);
    }
    SECTION("mismatched dimensions rejected") {
        CHECK_THROWS_AS(superop_from_generators({pauli_x(), Matrix::Identity(3, 3)}), DimensionError);
    }
}

TEST_CASE("semigroup evolution", "[matfun]") {
    auto s = superop_from_generators({pauli_x() / 2.0, pauli_y() / 2.0});
    Rng rng(29);
    const Matrix rho = random_state(rng, 2);
    CHECK(max_abs(semigroup_apply(s, 0.0, rho) - rho) < 1e-14);
    CHECK(max_abs(semigroup_apply(s, 1.0, pauli_x()) - std::exp(-1.0) * pauli_x()) < 1e-14);
    CHECK(max_abs(semigroup_apply(s, 50.0, rho) - Matrix::Identity(2, 2)) < 1e-8);
    CHECK_THROWS(semigroup_apply(s, -1.0, rho));

    auto big = superop_from_generators({random_hermitian(rng, 4), random_hermitian(rng, 4)});
    const Matrix r4 = random_state(rng, 4);
    for (double t : {0.0, 0.3, 1.0, 4.0, 10.0}) {
        const Matrix out = semigroup_apply(big, t, r4);
        CHECK(std::abs(out.trace() - r4.trace()) < 1e-10);
        CHECK(eig_hermitian(out).eigenvalues.minCoeff() >= -1e-10);
    }
}

TEST_CASE("spectral gaps", "[matfun]") {
    // id - E_tau on M_2: identity minus the rank-one projection onto vec(1)/sqrt(2).
    const Eigen::VectorXcd one = vec(Matrix::Identity(2, 2)) / std::sqrt(2.0);
    auto dep = SpectralSuperoperator::from_matrix(2, Matrix::Identity(4, 4) - one * one.adjoint());
    CHECK_THAT(spectral_gap(dep), WithinAbs(1.0, 1e-12));

    RealMatrix cycle(3, 3);
    cycle << 4, -2, -2, -2, 4, -2, -2, -2, 4;  // 2 x Laplacian of Z_3
    CHECK_THAT(spectral_gap(cycle), WithinAbs(2.0 * (2.0 - 2.0 * std::cos(2 * std::numbers::pi / 3)), 1e-12));
    CHECK_THAT(spectral_gap(cycle), WithinAbs(6.0, 1e-12));
}
