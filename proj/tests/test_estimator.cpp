#include "catch_amalgamated.hpp"

#include <cmath>

#include "lsi/estimator.hpp"
#include "lsi/lindblad.hpp"
#include "lsi/random.hpp"
#include "test_support.hpp"

using namespace lsi;
using namespace lsi::testing;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

EstimateOptions quick(int restarts, std::uint64_t seed = 7) {
    EstimateOptions o;
    o.restarts = restarts;
    o.seed = seed;
    return o;
}

WeightedGraph triangle() { return WeightedGraph(3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}}); }
WeightedGraph path3() { return WeightedGraph(3, {{0, 1, 1.0}, {1, 2, 1.0}}); }
WeightedGraph cycle4() { return WeightedGraph(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {0, 3, 1.0}}); }

// D(1 + eps Z || 1) on M_2.
double two_level_divergence(double eps) {
    return ((1 + eps) * std::log1p(eps) + (1 - eps) * std::log1p(-eps)) / 2;
}

}  // namespace

TEST_CASE("ratio_at reproduces the two-level witness", "[estimator]") {
    const SpectralSuperoperator a2 = depolarizing(2);
    const RatioValue r = ratio_at(a2, ConditionalExpectation::trace(2), diag({1.5, 0.5}), EntropyKind::logarithmic());
    // (ln 3 / 4) / ((1.5 ln 1.5 + 0.5 ln 0.5) / 2) at 30 digits.
    CHECK_THAT(r.ratio, WithinRel(2.09960092885196220122, 1e-13));
    CHECK_THAT(r.fisher, WithinRel(0.274653072167027422849, 1e-14));
}

TEST_CASE("mlsi_estimate windows", "[estimator]") {
    SECTION("Pauli system") {
        const SpectralSuperoperator s = pauli_system();
        const auto e = ConditionalExpectation::kernel_projection(s);
        const EstimateReport r = mlsi_estimate(s, e, quick(40), "pauli");
        CHECK(r.value >= 2.0 - 1e-9);
        CHECK(r.value <= 2.10);
        CHECK(r.restart_minima.size() == 40);
        REQUIRE(r.spectral_gap.has_value());
        CHECK_THAT(*r.spectral_gap, WithinAbs(1.0, 1e-12));
        // The witness reproduces the value exactly.
        CHECK(ratio_at(s, e, r.witness, EntropyKind::logarithmic()).ratio == r.value);
        for (double v : r.restart_minima) CHECK(v >= r.value);
    }
    SECTION("depolarizing A_2") {
        const SpectralSuperoperator s = depolarizing(2);
        const EstimateReport r = mlsi_estimate(s, ConditionalExpectation::trace(2), quick(40));
        CHECK(r.value >= 1.5);
        CHECK(r.value <= 2.05);
        CHECK(r.value <= 2.09960092885196220122);
    }
}

TEST_CASE("estimates are deterministic", "[estimator]") {
    const SpectralSuperoperator s = graph_lindblad(triangle());
    const auto e = ConditionalExpectation::kernel_projection(s);
    EstimateOptions serial = quick(12, 99), parallel = quick(12, 99);
    parallel.threads = 4;
    const EstimateReport a = mlsi_estimate(s, e, serial);
    const EstimateReport b = mlsi_estimate(s, e, serial);
    const EstimateReport c = mlsi_estimate(s, e, parallel);
    CHECK(a.restart_minima == b.restart_minima);
    CHECK(a.restart_minima == c.restart_minima);
    CHECK(a.witness == c.witness);
    CHECK(dump_json(report_to_json(a)) == dump_json(report_to_json(b)));
}

TEST_CASE("cpsi_estimate", "[estimator]") {
    for (Index n : {2, 3})
        for (double p : {1.2, 1.5, 1.8}) {
            const EstimateReport r = cpsi_estimate(depolarizing(n), ConditionalExpectation::trace(n), p, quick(10));
            CHECK(r.value >= p - 0.05);
            CHECK(r.p == p);
        }
    const SpectralSuperoperator s = pauli_system();
    const auto e = ConditionalExpectation::kernel_projection(s);
    const double mlsi = mlsi_estimate(s, e, quick(20)).value;
    CHECK_THAT(cpsi_estimate(s, e, 1.001, quick(20)).value, WithinRel(mlsi, 0.05));
    CHECK_THROWS_AS(cpsi_estimate(s, e, 2.0, quick(2)), std::invalid_argument);
}

TEST_CASE("degenerate starts", "[estimator]") {
    const SpectralSuperoperator s = pauli_system();
    EstimateOptions o = quick(3);
    o.start = Matrix::Identity(2, 2);
    CHECK_THROWS_AS(mlsi_estimate(s, ConditionalExpectation::kernel_projection(s), o), DegenerateStartError);
    // Every state is fixed by the zero generator.
    const SpectralSuperoperator zero = collective_lindblad({Matrix::Constant(1, 1, 1.0)}, 1);
    CHECK_THROWS_AS(mlsi_estimate(zero, ConditionalExpectation::kernel_projection(zero), quick(2)),
                    DegenerateStartError);
    EstimateOptions bad = quick(0);
    CHECK_THROWS_AS(mlsi_estimate(s, ConditionalExpectation::kernel_projection(s), bad), std::invalid_argument);
}

TEST_CASE("scaling invariance of the ratio", "[estimator]") {
    Rng rng(41);
    const SpectralSuperoperator s = graph_lindblad(triangle());
    const auto e = ConditionalExpectation::kernel_projection(s);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix rho = random_state(rng, 3);
        const double c = 0.1 + 2.0 * trial;
        const RatioValue r1 = ratio_at(s, e, rho, EntropyKind::logarithmic());
        const RatioValue rc = ratio_at(s, e, Matrix(c * rho), EntropyKind::logarithmic());
        CHECK_THAT(rc.ratio, WithinRel(r1.ratio, 1e-10));
        CHECK_THAT(rc.divergence, WithinRel(c * r1.divergence, 1e-10));
        const State renormalized = State::normalized(c * rho);
        CHECK_THAT(ratio_at(s, e, renormalized.matrix(), EntropyKind::logarithmic()).ratio, WithinRel(r1.ratio, 1e-10));
    }
}

TEST_CASE("clsi_probe", "[estimator]") {
    const SpectralSuperoperator pauli = pauli_system();
    const auto e = ConditionalExpectation::kernel_projection(pauli);
    CHECK(clsi_probe(pauli, 1, quick(10)).value == mlsi_estimate(pauli, e, quick(10)).value);
    const EstimateReport two = clsi_probe(pauli, 2, quick(6));
    CHECK(two.value >= 2.0 - 1e-9);
    CHECK(two.value <= 2.15);

    const SpectralSuperoperator tri = graph_lindblad(triangle());
    const double m1 = clsi_probe(tri, 1, quick(6)).value;
    const double m2 = clsi_probe(tri, 2, quick(4)).value;
    CHECK(m2 <= m1 + 1e-6);
    CHECK_THROWS_AS(clsi_probe(tri, 5, quick(1)), DimensionError);
}

TEST_CASE("decay_curve", "[estimator]") {
    const SpectralSuperoperator s = pauli_system();
    const auto e = ConditionalExpectation::kernel_projection(s);
    const State rho0 = State::normalized(Matrix(Matrix::Identity(2, 2) + 0.5 * pauli_z()));
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(0.1 * i);
    const DecayCurve curve = decay_curve(s, e, rho0, grid);
    REQUIRE(curve.rows.size() == grid.size());
    for (const DecayRow& r : curve.rows) {
        // The Z component decays as e^{-2t}.
        CHECK_THAT(r.divergence, WithinRel(two_level_divergence(0.5 * std::exp(-2 * r.t)), 1e-12));
        CHECK(r.divergence <= std::exp(-2 * r.t) * curve.rows.front().divergence + 1e-10);
    }
    CHECK(curve.fitted_rate >= 1.999);
    CHECK(curve.fitted_points == 21);
    CHECK(decay_csv(curve).rfind("t,D,lnD\n0.0000000000000000e0,", 0) == 0);

    CHECK_THROWS_AS(decay_curve(s, e, State(Matrix::Identity(2, 2)), grid), DegenerateStartError);
    CHECK_THROWS_AS(decay_curve(s, e, rho0, {0.5, 0.1}), std::invalid_argument);
    CHECK_THROWS_AS(decay_curve(s, e, rho0, {-0.1, 0.1}), std::invalid_argument);

    SECTION("triangle graph from a random state") {
        Rng rng(42);
        const SpectralSuperoperator tri = graph_lindblad(triangle());
        const State rho(random_state(rng, 3));
        const DecayCurve c = decay_curve(tri, ConditionalExpectation::kernel_projection(tri), rho, grid);
        const double certified = certified_bound(triangle()).lindblad;
        for (std::size_t i = 0; i < c.rows.size(); ++i) {
            if (i > 0) CHECK(c.rows[i].divergence <= c.rows[i - 1].divergence);
            CHECK(c.rows[i].divergence <= std::exp(-certified * c.rows[i].t) * c.rows[0].divergence + 1e-10);
        }
    }
}

TEST_CASE("Fisher information decays exponentially on the Pauli system", "[estimator]") {
    Rng rng(43);
    const SpectralSuperoperator s = pauli_system();
    for (int trial = 0; trial < 10; ++trial) {
        const State rho(random_state(rng, 2, 0.05, 1.0));
        const double initial = fisher_lindblad(s, rho);
        for (double t = 0.0; t <= 2.0; t += 0.25) {
            const State evolved(Matrix((semigroup_apply(s, t, rho.matrix()) +
                                        semigroup_apply(s, t, rho.matrix()).adjoint()) / 2.0));
            CHECK(fisher_lindblad(s, evolved) <= std::exp(-2 * t) * initial * (1 + 1e-8));
        }
    }
}

TEST_CASE("classical estimate and sandwich", "[estimator]") {
    for (const WeightedGraph& g : {triangle(), path3(), cycle4()}) {
        const SandwichReport r = sandwich_check(g, quick(6));
        INFO("violations: " << r.block.violations.size());
        CHECK(r.block.ok());
        CHECK(r.matrix.sandwich.has_value());
        CHECK(r.block.certified_graph <= r.block.classical_estimate);
    }
    const SandwichReport z4 = sandwich_check(cycle4(), quick(4));
    CHECK(z4.block.certified_graph == 1.0 / 45.0);

    const WeightedGraph skewed(3, {{0, 1, 1.0}, {1, 2, 1.0}}, Vector{{0.5, 0.25, 0.25}});
    CHECK_THROWS_AS(sandwich_check(skewed, quick(2)), std::invalid_argument);
    CHECK_THROWS_AS(sandwich_check(WeightedGraph(4, {{0, 1, 1.0}, {2, 3, 1.0}}), quick(2)), DisconnectedGraphError);
    const WeightedGraph six(6, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {3, 4, 1.0}, {4, 5, 1.0}});
    CHECK_THROWS_AS(sandwich_check(six, quick(2)), DimensionError);
}

TEST_CASE("report JSON", "[estimator]") {
    const SpectralSuperoperator s = depolarizing(2);
    const EstimateReport r = mlsi_estimate(s, ConditionalExpectation::trace(2), quick(3, 5), "depolarizing:2");
    const Json j = report_to_json(r);
    CHECK(j["schema_version"] == 1);
    CHECK(j["seed"] == 5);
    CHECK(j["options"]["restarts"] == 3);
    CHECK(j["target"] == "depolarizing:2");
    CHECK(j["restart_minima"].size() == 3);
    CHECK(matrix_from_json(j["witness"]) == r.witness);
}
