#include "catch_amalgamated.hpp"

#include <cmath>
#include <numbers>

#include "lsi/entropy.hpp"
#include "lsi/lindblad.hpp"
#include "lsi/random.hpp"
#include "test_support.hpp"

using namespace lsi;
using namespace lsi::testing;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// (1.5 ln 1.5 + 0.5 ln 0.5)/2, evaluated at 30 digits.
constexpr double kTwoLevelEntropy = 0.130812035941136959129;

// tau(rho ln rho - rho ln sigma - rho + sigma) straight from matrix logarithms.
double naive_lindblad_entropy(const Matrix& rho, const Matrix& sigma) {
    const Matrix m = rho * matrix_log(rho) - rho * matrix_log(sigma) - rho + sigma;
    return ntrace(m).real();
}

std::vector<int> random_labels(Rng& rng, Index n) {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(n) - 1);
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (int& l : labels) l = pick(rng);
    return labels;
}

SpectralSuperoperator complement_of(const ConditionalExpectation& e) {
    const Index n = e.dim();
    return SpectralSuperoperator::from_matrix(n, Matrix::Identity(n * n, n * n) - e.superoperator());
}

WeightedGraph triangle() { return WeightedGraph(3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}}); }

}  // namespace

TEST_CASE("State validates positivity, hermiticity and trace", "[entropy]") {
    CHECK_NOTHROW(State(diag({1.5, 0.5})));
    CHECK_THROWS_AS(State(diag({2.0, 0.0})), DomainError);
    CHECK_THROWS_AS(State(diag({1.0, 2.0})), std::invalid_argument);
    Matrix skew = diag({1.0, 1.0});
    skew(0, 1) = 0.3;
    CHECK_THROWS_AS(State(skew), NotHermitianError);
    const State s = State::normalized(diag({3.0, 1.0}));
    CHECK_THAT(s.matrix()(0, 0).real(), WithinAbs(1.5, 1e-15));
}

TEST_CASE("rel_entropy values and support", "[entropy]") {
    const State rho(diag({1.5, 0.5}));
    CHECK_THAT(rel_entropy(rho, rho.matrix()).value, WithinAbs(0.0, 1e-15));
    const EntropyValue v = rel_entropy(rho, Matrix::Identity(2, 2));
    CHECK_FALSE(v.infinite);
    CHECK_THAT(v.value, WithinRel(kTwoLevelEntropy, 1e-14));

    const EntropyValue inf = rel_entropy(rho, diag({2.0, 0.0}));
    CHECK(inf.infinite);
    CHECK(std::isinf(inf.value));

    CHECK_THROWS_AS(rel_entropy(rho, Matrix::Identity(3, 3)), DimensionError);
}

TEST_CASE("lindblad_rel_entropy", "[entropy]") {
    const Matrix id = Matrix::Identity(2, 2);
    CHECK_THAT(lindblad_rel_entropy(id, id), WithinAbs(0.0, 1e-16));
    CHECK_THAT(lindblad_rel_entropy(2.0 * id, id), WithinRel(0.386294361119890618834, 1e-14));

    Rng rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        const Index n = 2 + trial % 4;
        const Matrix rho = random_positive(rng, n, 0.1, 2.0);
        const Matrix sigma = random_positive(rng, n, 0.1, 2.0);
        const double d = lindblad_rel_entropy(rho, sigma);
        CHECK(d >= -1e-12);
        CHECK_THAT(d, WithinAbs(naive_lindblad_entropy(rho, sigma), 1e-11));
    }
}

TEST_CASE("bregman near branch agrees with the direct formula", "[entropy]") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const Index n = 3;
        const Matrix sigma = random_positive(rng, n, 0.5, 1.5);
        const double lo = eig_hermitian(sigma).eigenvalues(0);
        Matrix dir = random_hermitian(rng, n);
        dir /= dir.norm();
        for (double scale : {0.49, 0.51}) {
            const Matrix rho = sigma + scale * lo * dir;
            for (const EntropyKind& kind : {EntropyKind::logarithmic(), EntropyKind::power(1.5)}) {
                const BregmanEvaluation b = bregman(rho, sigma, kind);
                const auto fr = eig_hermitian(rho).map([&](double x) { return kind.potential(x); });
                const auto fs = eig_hermitian(sigma).map([&](double x) { return kind.potential(x); });
                const Matrix gs = eig_hermitian(sigma).map([&](double x) { return kind.gradient(x); });
                const Matrix gr = eig_hermitian(rho).map([&](double x) { return kind.gradient(x); });
                const double direct = ntrace(Matrix(fr - fs - gs * (rho - sigma))).real();
                CHECK_THAT(b.divergence, WithinAbs(direct, 1e-12));
                CHECK(max_abs(b.gradient_gap - (gr - gs)) < 1e-12);
            }
        }
    }
}

TEST_CASE("bregman keeps relative accuracy next to sigma", "[entropy]") {
    const double e = 1e-6;
    const Matrix rho = Matrix::Identity(2, 2) + e * pauli_z();
    const double d = lindblad_rel_entropy(rho, Matrix::Identity(2, 2));
    // Series of ((1+a)ln(1+a) - a + (1-b)ln(1-b) + b)/2 with the offsets a, b actually stored.
    const double a = rho(0, 0).real() - 1.0, b = 1.0 - rho(1, 1).real();
    const double series = (a * a + b * b) / 4 + (b * b * b - a * a * a) / 12 + (std::pow(a, 4) + std::pow(b, 4)) / 24;
    CHECK_THAT(d, WithinRel(series, 1e-12));
}

TEST_CASE("p_rel_entropy", "[entropy]") {
    const Matrix id = Matrix::Identity(2, 2);
    CHECK_THAT(p_rel_entropy(id, id, 1.5), WithinAbs(0.0, 1e-16));
    // ((1.5^1.5 + 0.5^1.5)/2 - 1), evaluated at 30 digits.
    CHECK_THAT(p_rel_entropy(diag({1.5, 0.5}), id, 1.5), WithinRel(0.0953353488403286679242, 1e-14));
    CHECK_THROWS_AS(p_rel_entropy(id, id, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(p_rel_entropy(id, id, 2.0), std::invalid_argument);

    Rng rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        const Index n = 2 + trial % 3;
        const Matrix rho = random_positive(rng, n, 0.2, 2.0);
        const Matrix sigma = random_positive(rng, n, 0.2, 2.0);
        const double d = lindblad_rel_entropy(rho, sigma);
        CHECK(p_rel_entropy(rho, sigma, 1.5) >= -1e-12);
        CHECK_THAT(p_rel_entropy(rho, sigma, 1.001) / 0.001, WithinRel(d, 1e-2));
    }
}

TEST_CASE("entropy_to_expectation", "[entropy]") {
    const ConditionalExpectation diag_e = ConditionalExpectation::diagonal(2);
    CHECK_THAT(entropy_to_expectation(State(diag({1.5, 0.5})), diag_e), WithinAbs(0.0, 1e-15));

    // I + X/2 has spectrum {1.5, 0.5} and pinches to the identity.
    const State rho(Matrix(Matrix::Identity(2, 2) + 0.5 * pauli_x()));
    CHECK_THAT(entropy_to_expectation(rho, diag_e), WithinRel(kTwoLevelEntropy, 1e-13));

    SECTION("chain rule for commuting pinchings") {
        Rng rng(21);
        for (int trial = 0; trial < 30; ++trial) {
            const Index n = 3 + trial % 3;
            const State s(random_state(rng, n));
            const auto e1 = ConditionalExpectation::block_pinching(random_labels(rng, n));
            const auto e2 = ConditionalExpectation::block_pinching(random_labels(rng, n));
            const auto both = e1 * e2;
            CHECK(entropy_to_expectation(s, both) <=
                  entropy_to_expectation(s, e1) + entropy_to_expectation(s, e2) + 1e-12);
            for (double p : {1.2, 1.7})
                CHECK(p_entropy_to_expectation(s, both, p) <=
                      p_entropy_to_expectation(s, e1, p) + p_entropy_to_expectation(s, e2, p) + 1e-12);
        }
    }

    SECTION("data processing under block pinchings") {
        Rng rng(22);
        for (int trial = 0; trial < 30; ++trial) {
            const Index n = 2 + trial % 5;
            const State rho_s(random_state(rng, n));
            const State sigma_s(random_state(rng, n));
            const auto pin = ConditionalExpectation::block_pinching(random_labels(rng, n));
            const double before = rel_entropy(rho_s, sigma_s.matrix()).value;
            const double after = rel_entropy(State(pin.apply(rho_s.matrix())), pin.apply(sigma_s.matrix())).value;
            CHECK(after <= before + 1e-12);
        }
    }
}

TEST_CASE("fisher_lindblad", "[entropy]") {
    const SpectralSuperoperator a2 = depolarizing(2);
    CHECK_THAT(fisher_lindblad(a2, State(Matrix::Identity(2, 2))), WithinAbs(0.0, 1e-15));
    // tau(rho ln rho) - tau(rho) tau(ln rho) = (ln 3)/4.
    CHECK_THAT(fisher_lindblad(a2, State(diag({1.5, 0.5}))), WithinRel(0.274653072167027422849, 1e-14));

    SECTION("trace and derivation forms agree") {
        Rng rng(8);
        std::vector<SpectralSuperoperator> ops{pauli_system(), graph_lindblad(triangle())};
        ops.push_back(superop_from_generators({random_hermitian(rng, 3), random_hermitian(rng, 3)}));
        for (const auto& s : ops)
            for (int trial = 0; trial < 10; ++trial) {
                const Matrix rho = random_state(rng, s.dim(), 0.1, 1.0);
                for (const EntropyKind& kind : {EntropyKind::logarithmic(), EntropyKind::power(1.4)}) {
                    const auto [trace_form, derivation_form] = fisher_forms(s, rho, kind);
                    CHECK(trace_form >= -1e-10);
                    CHECK_THAT(trace_form, WithinAbs(derivation_form, 1e-8));
                }
            }
    }

    SECTION("scaling covariance") {
        Rng rng(9);
        const SpectralSuperoperator s = graph_lindblad(triangle());
        const ConditionalExpectation e = ConditionalExpectation::kernel_projection(s);
        for (int trial = 0; trial < 10; ++trial) {
            const Matrix rho = random_state(rng, 3);
            const double c = 0.3 + trial;
            const double d1 = lindblad_rel_entropy(rho, e.apply(rho));
            const double dc = lindblad_rel_entropy(c * rho, e.apply(c * rho));
            CHECK_THAT(dc, WithinRel(c * d1, 1e-10));
            const auto log_kind = EntropyKind::logarithmic();
            CHECK_THAT(fisher_forms(s, c * rho, log_kind).first,
                       WithinRel(c * fisher_forms(s, rho, log_kind).first, 1e-10));
        }
    }

    SECTION("derivative of relative entropy along the semigroup") {
        Rng rng(10);
        const SpectralSuperoperator s = graph_lindblad(triangle());
        const ConditionalExpectation e = ConditionalExpectation::kernel_projection(s);
        const double h = 1e-4;
        for (int trial = 0; trial < 10; ++trial) {
            const State rho(random_state(rng, 3, 0.2, 1.0));
            const Matrix fixed = e.apply(rho.matrix());
            const double forward = lindblad_rel_entropy(spectral_flow(s, h, rho.matrix()), fixed);
            const double backward = lindblad_rel_entropy(spectral_flow(s, -h, rho.matrix()), fixed);
            CHECK_THAT((forward - backward) / (2 * h), WithinRel(-fisher_lindblad(s, rho), 1e-5));
        }
    }
}

TEST_CASE("p_fisher", "[entropy]") {
    const SpectralSuperoperator pauli = pauli_system();
    CHECK_THAT(p_fisher(pauli, State(Matrix::Identity(2, 2)), 1.5), WithinAbs(0.0, 1e-15));
    CHECK_THROWS_AS(p_fisher(pauli, State(Matrix::Identity(2, 2)), 2.5), std::invalid_argument);

    Rng rng(12);
    const SpectralSuperoperator s = graph_lindblad(triangle());
    for (int trial = 0; trial < 10; ++trial) {
        const State rho(random_state(rng, 3, 0.1, 1.0));
        CHECK_THAT(p_fisher(s, rho, 1.001) / 0.001, WithinRel(fisher_lindblad(s, rho), 1e-2));
    }

    SECTION("p d^p(rho || E rho) <= I^p of id - E for pinchings") {
        for (double p : {1.1, 1.5, 1.9})
            for (int trial = 0; trial < 15; ++trial) {
                const Index n = 2 + trial % 4;
                const auto pin = ConditionalExpectation::block_pinching(random_labels(rng, n));
                const State rho(random_state(rng, n, 0.05, 1.0));
                const double lhs = p * p_entropy_to_expectation(rho, pin, p);
                CHECK(lhs <= p_fisher(complement_of(pin), rho, p) + 1e-12);
            }
    }
}

TEST_CASE("fisher_graph", "[entropy]") {
    const WeightedGraph k2(2, {{0, 1, 1.0}});
    CHECK_THAT(fisher_graph(k2, MatrixField::scalar(Vector::Constant(2, 0.7))), WithinAbs(0.0, 1e-16));
    CHECK_THAT(fisher_graph(k2, MatrixField::scalar(Vector{{1.0, std::numbers::e}})),
               WithinRel(1.71828182845904523536, 1e-14));
    CHECK_THROWS_AS(MatrixField::scalar(Vector{{1.0, 0.0}}), DomainError);

    SECTION("matches tau(A f ln f) with A twice the Laplacian") {
        Rng rng(13);
        const std::vector<WeightedGraph> graphs{
            triangle(), WeightedGraph(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}}),
            WeightedGraph(5, {{0, 1, 1.0}, {0, 2, 1.0}, {0, 3, 1.0}, {3, 4, 1.0}, {1, 2, 1.0}})};
        std::uniform_real_distribution<double> u(0.1, 3.0);
        for (const auto& g : graphs)
            for (int trial = 0; trial < 10; ++trial) {
                Vector f(g.n());
                for (Index x = 0; x < f.size(); ++x) f(x) = u(rng);
                const Vector af = 2.0 * g.laplacian() * f;
                const double expected = (af.array() * f.array().log()).mean();
                CHECK_THAT(fisher_graph(g, MatrixField::scalar(f)), WithinAbs(expected, 1e-12));
            }
    }
}

TEST_CASE("entropy_graph", "[entropy]") {
    const WeightedGraph k2(2, {{0, 1, 1.0}});
    CHECK_THAT(entropy_graph(k2, MatrixField::scalar(Vector::Constant(2, 1.0)), true), WithinAbs(0.0, 1e-16));
    CHECK_THAT(entropy_graph(k2, MatrixField::scalar(Vector{{1.5, 0.5}}), true), WithinRel(kTwoLevelEntropy, 1e-14));
    CHECK_THROWS_AS(entropy_graph(k2, MatrixField::scalar(Vector{{3.0, 0.5}}), true), std::invalid_argument);

    SECTION("matrix blocks against the block-diagonal embedding") {
        const MatrixField f({diag({1.5, 0.5}), Matrix::Identity(2, 2)});
        const double value = entropy_graph(k2, f, true);
        // Sum over blocks of mu(x) tau_2(f ln f - f ln xi), xi = diag(1.25, 0.75); 30-digit evaluation.
        CHECK_THAT(value, WithinRel(0.0338220755686052300004, 1e-13));
        Matrix embedded = Matrix::Zero(4, 4), average = Matrix::Zero(4, 4);
        embedded.topLeftCorner(2, 2) = f[0];
        embedded.bottomRightCorner(2, 2) = f[1];
        average.topLeftCorner(2, 2) = average.bottomRightCorner(2, 2) = diag({1.25, 0.75});
        CHECK_THAT(value, WithinRel(rel_entropy(State(embedded), average).value, 1e-13));
    }

    SECTION("change of measure") {
        Rng rng(14);
        const auto edges = std::vector<Edge>{{0, 1, 1.0}, {1, 2, 2.0}, {2, 3, 0.5}, {0, 3, 1.0}};
        std::uniform_real_distribution<double> u(0.2, 1.0);
        for (int trial = 0; trial < 20; ++trial) {
            Vector m1(4), m2(4);
            for (Index i = 0; i < 4; ++i) {
                m1(i) = u(rng);
                m2(i) = u(rng);
            }
            m1 /= m1.sum();
            m2 /= m2.sum();
            const WeightedGraph g1(4, edges, m1), g2(4, edges, m2);
            const double c1 = (m1.array() / m2.array()).maxCoeff();
            const double c2 = (m1.array() / m2.array()).minCoeff();
            std::vector<Matrix> blocks;
            for (int x = 0; x < 4; ++x) blocks.push_back(random_positive(rng, 2, 0.1, 2.0));
            const MatrixField f(blocks);
            CHECK(entropy_graph(g1, f, false) <= c1 * entropy_graph(g2, f, false) + 1e-12);
            CHECK(fisher_graph(g1, f) >= c2 * fisher_graph(g2, f) - 1e-12);
        }
    }
}

TEST_CASE("hook_integral_check", "[entropy]") {
    const Matrix s = diag({0.4, 1.3});
    CHECK(hook_integral_check(s, s) < 1e-15);
    CHECK(hook_integral_check(diag({0.2, 1.9, 0.7}), diag({1.1, 0.3, 0.6})) < 1e-10);
    Rng rng(15);
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix rho = random_positive(rng, 3, 0.1, 2.0);
        const Matrix sigma = random_positive(rng, 3, 0.1, 2.0);
        CHECK(hook_integral_check(rho, sigma, 64) < 1e-8);
    }
}
