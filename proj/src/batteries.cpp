#include "lsi/batteries.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "lsi/entropy.hpp"
#include "lsi/format.hpp"
#include "lsi/lindblad.hpp"
#include "lsi/random.hpp"

namespace lsi {

namespace {

using Runner = std::function<BatteryResult(const BatteryOptions&)>;

struct Tally {
    BatteryResult result;
    Tally(std::string name, double tolerance, const BatteryOptions& o) {
        result.name = std::move(name);
        result.tolerance = o.tolerance.value_or(tolerance);
        result.max_residual = -INFINITY;
    }
    // Records a residual that must stay at or below the tolerance.
    void record(double residual) {
        ++result.cases;
        if (!(residual <= result.tolerance)) result.passed = false;
        if (std::isnan(residual)) result.max_residual = NAN;
        else if (!std::isnan(result.max_residual)) result.max_residual = std::max(result.max_residual, residual);
    }
    BatteryResult done() {
        if (result.cases == 0) result.max_residual = 0.0;
        return result;
    }
};

int trials_or(const BatteryOptions& o, int fallback) { return o.trials.value_or(fallback); }

Index dim_for(const BatteryOptions& o, Rng& rng, int lo, int hi) {
    if (o.dims) return *o.dims;
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

double relative_gap(const Matrix& a, const Matrix& b) {
    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    return (a - b).cwiseAbs().maxCoeff() / scale;
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

BatteryResult doi_identity(const BatteryOptions& o) {
    Tally t("doi-identity", 1e-10, o);
    Rng rng(o.seed);
    const ScalarKernel k = ScalarKernel::log_quotient();
    for (int i = 0; i < trials_or(o, 100); ++i) {
        const Index n = dim_for(o, rng, 2, 5);
        const Matrix rho = random_state(rng, n, 0.05, 1.0);
        const Matrix a = random_hermitian(rng, n);
        // delta = i[a, .] is a derivation, so delta(ln rho) = Q^rho(delta(rho)).
        const Matrix lhs = cplx(0, 1) * commutator(a, matrix_log(rho));
        const Matrix rhs = doi_apply(rho, rho, k, Matrix(cplx(0, 1) * commutator(a, rho)));
        t.record(relative_gap(rhs, lhs));
    }
    return t.done();
}

BatteryResult doi_quadrature(const BatteryOptions& o) {
    Tally t("doi-quadrature", 1e-6, o);
    Rng rng(o.seed);
    for (int i = 0; i < trials_or(o, 100); ++i) {
        const Index n = dim_for(o, rng, 2, 5);
        const Matrix rho = random_state(rng, n, 0.05, 1.0);
        const Matrix x = random_hermitian(rng, n);
        const auto sd = eig_hermitian(rho);
        const Matrix log_kernel = doi_apply(sd, sd, ScalarKernel::log_quotient(), x);
        const Matrix tilt_kernel = doi_apply(sd, sd, ScalarKernel::tilt(), x);
        t.record(relative_gap(quadrature_oracle_resolvent(rho, x), log_kernel));
        t.record(relative_gap(quadrature_oracle_tilt(rho, x), tilt_kernel));
    }
    return t.done();
}

BatteryResult hook_integral(const BatteryOptions& o) {
    Tally t("hook-integral", 1e-8, o);
    Rng rng(o.seed);
    for (int i = 0; i < trials_or(o, 50); ++i) {
        const Index n = o.dims.value_or(3);
        const Matrix rho = random_positive(rng, n, 0.1, 2.0);
        const Matrix sigma = random_positive(rng, n, 0.1, 2.0);
        t.record(hook_integral_check(rho, sigma, 64));
    }
    return t.done();
}

BatteryResult hiai_petz(const BatteryOptions& o) {
    // Residual: minus the smallest eigenvalue of Q^{B rho, B sigma} - B Q^{rho, sigma} B*.
    Tally t("hiai-petz", 1e-9, o);
    Rng rng(o.seed);
    const ScalarKernel k = ScalarKernel::tilt();
    for (int i = 0; i < trials_or(o, 100); ++i) {
        const Index n = dim_for(o, rng, 2, 3);
        const int count = std::uniform_int_distribution<int>(1, 4)(rng);
        const std::vector<Matrix> kraus = random_kraus(rng, n, count);
        Matrix channel = Matrix::Zero(n * n, n * n);
        for (const Matrix& km : kraus) channel += kron(km.conjugate(), km);
        const Matrix rho = random_state(rng, n, 0.05, 1.0);
        const Matrix sigma = random_state(rng, n, 0.05, 1.0);
        auto push = [&](const Matrix& x) {
            const Matrix y = unvec(channel * vec(x), n);
            return Matrix((y + y.adjoint()) / 2.0);
        };
        const Matrix diff = doi_superoperator(push(rho), push(sigma), k) -
                            channel * doi_superoperator(rho, sigma, k) * channel.adjoint();
        Eigen::SelfAdjointEigenSolver<Matrix> es((diff + diff.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
        t.record(-es.eigenvalues()(0));
    }
    return t.done();
}

BatteryResult edge_expectations(const BatteryOptions& o) {
    Tally t("edge-expectation", 0.0, o);
    for (const WeightedGraph& g : lemma_graphs()) {
        std::vector<ConditionalExpectation> edges;
        for (const Edge& e : g.edges()) edges.push_back(edge_expectation(e.u, e.v, g.n()));
        ConditionalExpectation product = edges.front();
        for (const auto& e : edges) product = product * e;
        t.record((product.mask() - diagonal_expectation(g.n()).mask()).cwiseAbs().maxCoeff());
        for (const auto& a : edges)
            for (const auto& b : edges) t.record(((a * b).mask() - (b * a).mask()).cwiseAbs().maxCoeff());
    }
    return t.done();
}

BatteryResult conditional_expectations(const BatteryOptions& o) {
    Tally t("conditional-expectations", 1e-10, o);
    Rng rng(o.seed);
    std::vector<ConditionalExpectation> all;
    for (const WeightedGraph& g : lemma_graphs()) {
        for (const Edge& e : g.edges()) all.push_back(edge_expectation(e.u, e.v, g.n()));
        all.push_back(ConditionalExpectation::kernel_projection(graph_lindblad(g)));
    }
    for (Index n = 2; n <= 5; ++n) {
        all.push_back(diagonal_expectation(n));
        all.push_back(ConditionalExpectation::trace(n));
        all.push_back(ConditionalExpectation::block_pinching(random_labels(rng, n)));
    }
    all.push_back(ConditionalExpectation::kernel_projection(graph_lindblad(WeightedGraph(2, {{0, 1, 1.0}}))));
    all.push_back(ConditionalExpectation::kernel_projection(
        graph_lindblad(WeightedGraph(4, {{0, 1, 1.0}, {2, 3, 1.0}}))));
    const int per = std::max(1, trials_or(o, 100) / static_cast<int>(all.size()) + 1);
    for (const auto& e : all) {
        const Index n = e.dim();
        const Matrix id = Matrix::Identity(n, n);
        t.record(relative_gap(e.apply(id), id));
        for (int i = 0; i < per; ++i) {
            const Matrix x = random_hermitian(rng, n) + cplx(0, 1) * random_hermitian(rng, n);
            const Matrix ex = e.apply(x);
            t.record(relative_gap(e.apply(ex), ex));
            t.record(std::abs(ex.trace() - x.trace()));
            Matrix image = e.apply(random_state(rng, n, 0.05, 1.0));
            image = (image + image.adjoint()) / 2.0;
            t.record(-eig_hermitian(image).eigenvalues(0));
        }
    }
    return t.done();
}

// Residual lhs - rhs of an inequality lhs <= rhs over random states on the lemma graphs.
BatteryResult pinching_lemma(const BatteryOptions& o, bool entropy_bound) {
    Tally t(entropy_bound ? "diagon" : "diagon2", 1e-12, o);
    Rng rng(o.seed);
    const double constant = 5.0 * std::numbers::pi * std::numbers::pi;
    for (const WeightedGraph& g : lemma_graphs()) {
        const SpectralSuperoperator s = graph_lindblad(g);
        const ConditionalExpectation diag_e = diagonal_expectation(g.n());
        for (int i = 0; i < trials_or(o, 100); ++i) {
            const State rho(random_state(rng, g.n(), 0.02, 1.0));
            const double fisher = fisher_lindblad(s, rho);
            if (entropy_bound) {
                t.record(entropy_to_expectation(rho, diag_e) - constant * fisher);
            } else {
                t.record(fisher_lindblad(s, State(diag_e.apply(rho.matrix()))) - fisher);
            }
        }
    }
    return t.done();
}

BatteryResult bardet_p(const BatteryOptions& o) {
    Tally t("bardet-p", 1e-12, o);
    Rng rng(o.seed);
    for (double p : {1.1, 1.5, 1.9})
        for (int i = 0; i < trials_or(o, 100); ++i) {
            const Index n = dim_for(o, rng, 2, 5);
            std::vector<int> labels = random_labels(rng, n);
            // A single block is the identity map, for which both sides vanish.
            while (std::all_of(labels.begin(), labels.end(), [&](int l) { return l == labels.front(); }))
                labels = random_labels(rng, n);
            const auto pin = ConditionalExpectation::block_pinching(labels);
            const State rho(random_state(rng, n, 0.02, 1.0));
            t.record(p * p_entropy_to_expectation(rho, pin, p) - p_fisher(complement_of(pin), rho, p));
        }
    return t.done();
}

BatteryResult p_limits(const BatteryOptions& o) {
    Tally t("p-limits", 1e-2, o);
    Rng rng(o.seed);
    const double p = 1.001;
    for (int i = 0; i < trials_or(o, 50); ++i) {
        const Index n = dim_for(o, rng, 2, 4);
        const Matrix rho = random_state(rng, n, 0.1, 1.0);
        const Matrix sigma = random_state(rng, n, 0.1, 1.0);
        const double d = lindblad_rel_entropy(rho, sigma);
        t.record(std::abs(p_rel_entropy(rho, sigma, p) / (p - 1) - d) / d);
        const SpectralSuperoperator s = superop_from_generators({random_hermitian(rng, n), random_hermitian(rng, n)});
        const State state(rho);
        const double fisher = fisher_lindblad(s, state);
        t.record(std::abs(p_fisher(s, state, p) / (p - 1) - fisher) / fisher);
    }
    return t.done();
}

BatteryResult fisher_derivative(const BatteryOptions& o) {
    Tally t("fisher-derivative", 1e-5, o);
    Rng rng(o.seed);
    const double h = 1e-5;
    const auto graphs = lemma_graphs();
    for (int i = 0; i < trials_or(o, 50); ++i) {
        SpectralSuperoperator s = pauli_system();
        switch (i % 3) {
            case 0:
                s = graph_lindblad(graphs[static_cast<std::size_t>(i) % graphs.size()]);
                break;
            case 1: {
                const Index n = dim_for(o, rng, 2, 4);
                s = superop_from_generators({random_hermitian(rng, n, 0.7), random_hermitian(rng, n, 0.7)});
                break;
            }
            default:
                break;
        }
        const ConditionalExpectation e = ConditionalExpectation::kernel_projection(s);
        const State rho(random_state(rng, s.dim(), 0.1, 1.0));
        const Matrix fixed = e.apply(rho.matrix());
        auto entropy_at = [&](double time) {
            Matrix x = spectral_flow(s, time, rho.matrix());
            return lindblad_rel_entropy(Matrix((x + x.adjoint()) / 2.0), Matrix((fixed + fixed.adjoint()) / 2.0));
        };
        const double derivative = (entropy_at(h) - entropy_at(-h)) / (2 * h);
        const double fisher = fisher_lindblad(s, rho);
        t.record(std::abs(derivative + fisher) / std::abs(fisher));
    }
    return t.done();
}

BatteryResult constant_chain(const BatteryOptions&) {
    const ConstantChainReport r = verify_constant_chain();
    BatteryResult out;
    out.name = "constant-chain";
    out.tolerance = 1e-12;
    out.passed = r.ok;
    out.cases = r.grid_points + static_cast<int>(r.chain_residuals.size());
    for (const auto& [n, residual] : r.chain_residuals) out.max_residual = std::max(out.max_residual, residual);
    std::ostringstream detail;
    detail << "grid=" << r.grid_points << " lower=" << format_real(r.lower) << " upper=" << format_real(r.upper)
           << " ratio=" << format_real(r.ratio);
    for (const auto& v : r.violations) detail << " violation=" << v;
    out.detail = detail.str();
    return out;
}

BatteryResult gradient_estimate(const BatteryOptions& o) {
    Tally t("gradient-estimate", 1e-9, o);
    Rng rng(o.seed);
    const Matrix x = (Matrix(2, 2) << 0, 1, 1, 0).finished();
    const Matrix y = (Matrix(2, 2) << 0, cplx(0, -1), cplx(0, 1), 0).finished();
    const std::vector<Matrix> generators{x / 2.0, y / 2.0};
    const std::vector<double> grid{0.1, 0.5, 1.0};
    bool inflated_rejected = false;
    for (int i = 0; i < trials_or(o, 20); ++i) {
        const State rho(random_state(rng, 2, 0.05, 1.0));
        const Matrix a = random_hermitian(rng, 2);
        const auto report = gradient_estimate_check(generators, 1.0, rho, a, grid);
        for (const auto& row : report.rows) t.record(row.residual);
        if (!gradient_estimate_check(generators, 5.0, rho, a, grid).holds) inflated_rejected = true;
    }
    BatteryResult out = t.done();
    if (!inflated_rejected) out.passed = false;
    out.detail = std::string("lambda=5 ") + (inflated_rejected ? "rejected" : "accepted");
    return out;
}

BatteryResult kernel_dim(const BatteryOptions&) {
    BatteryResult out;
    out.name = "kernel-dim";
    std::ostringstream detail;
    int connected_ok = 0, connected_total = 0;
    for (const WeightedGraph& g : lemma_graphs()) {
        ++connected_total;
        if (fixed_point_dim(graph_lindblad(g)).dim == 1) ++connected_ok;
    }
    const WeightedGraph hexagon(6, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {3, 4, 1.0}, {4, 5, 1.0}, {0, 5, 1.0}});
    ++connected_total;
    if (fixed_point_dim(graph_lindblad(hexagon)).dim == 1) ++connected_ok;
    const Index k2 = fixed_point_dim(graph_lindblad(WeightedGraph(2, {{0, 1, 1.0}}))).dim;
    const Index split = fixed_point_dim(graph_lindblad(WeightedGraph(4, {{0, 1, 1.0}, {2, 3, 1.0}}))).dim;
    const Index isolated = fixed_point_dim(graph_lindblad(WeightedGraph(3, {{0, 1, 1.0}}))).dim;
    out.passed = connected_ok == connected_total && k2 == 2 && split >= 2 && isolated >= 2;
    out.cases = connected_total + 3;
    detail << "connected=" << connected_ok << "/" << connected_total << " K2=" << k2 << " disconnected=" << split
           << "," << isolated;
    out.detail = detail.str();
    return out;
}

const std::map<std::string, Runner>& runners() {
    static const std::map<std::string, Runner> table{
        {"doi-identity", doi_identity},
        {"doi-quadrature", doi_quadrature},
        {"hook-integral", hook_integral},
        {"hiai-petz", hiai_petz},
        {"edge-expectation", edge_expectations},
        {"conditional-expectations", conditional_expectations},
        {"diagon", [](const BatteryOptions& o) { return pinching_lemma(o, true); }},
        {"diagon2", [](const BatteryOptions& o) { return pinching_lemma(o, false); }},
        {"bardet-p", bardet_p},
        {"p-limits", p_limits},
        {"fisher-derivative", fisher_derivative},
        {"constant-chain", constant_chain},
        {"gradient-estimate", gradient_estimate},
        {"kernel-dim", kernel_dim},
    };
    return table;
}

}  // namespace

const std::vector<std::string>& battery_names() {
    static const std::vector<std::string> names{
        "doi-identity",     "doi-quadrature",    "hook-integral",  "hiai-petz",
        "edge-expectation", "conditional-expectations", "diagon", "diagon2",
        "bardet-p",         "p-limits",          "fisher-derivative", "constant-chain",
        "gradient-estimate", "kernel-dim"};
    return names;
}

BatteryResult run_battery(const std::string& name, const BatteryOptions& opts) {
    const auto& table = runners();
    const auto it = table.find(name);
    if (it == table.end()) throw std::invalid_argument("unknown battery '" + name + "'");
    if (opts.dims && *opts.dims < 2) throw std::invalid_argument("dims must be at least 2");
    if (opts.trials && *opts.trials < 1) throw std::invalid_argument("trials must be positive");
    if (opts.tolerance && !(*opts.tolerance >= 0.0)) throw std::invalid_argument("tolerance must be nonnegative");
    return it->second(opts);
}

std::vector<WeightedGraph> lemma_graphs() {
    return {
        WeightedGraph(3, {{0, 1, 1.0}, {1, 2, 1.0}}),
        WeightedGraph(3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}}),
        WeightedGraph(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {0, 3, 1.0}}),
        WeightedGraph(4, {{0, 1, 1.0}, {0, 2, 1.0}, {0, 3, 1.0}}),
        WeightedGraph(5, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {3, 4, 1.0}}),
        WeightedGraph(5, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {3, 4, 1.0}, {0, 4, 1.0}, {0, 2, 1.0}}),
    };
}

std::vector<std::pair<std::string, WeightedGraph>> sandwich_battery() {
    auto unit = [](int n, std::vector<std::pair<int, int>> pairs) {
        std::vector<Edge> edges;
        for (auto [u, v] : pairs) edges.push_back({u, v, 1.0});
        return WeightedGraph(n, std::move(edges));
    };
    return {
        {"P3", unit(3, {{0, 1}, {1, 2}})},
        {"K3", unit(3, {{0, 1}, {1, 2}, {0, 2}})},
        {"P3-weighted", WeightedGraph(3, {{0, 1, 1.0}, {1, 2, 2.0}})},
        {"K3-weighted", WeightedGraph(3, {{0, 1, 1.0}, {1, 2, 2.0}, {0, 2, 3.0}})},
        {"P4", unit(4, {{0, 1}, {1, 2}, {2, 3}})},
        {"C4", unit(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}})},
        {"K1,3", unit(4, {{0, 1}, {0, 2}, {0, 3}})},
        {"K4", unit(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}})},
        {"paw", unit(4, {{0, 1}, {1, 2}, {0, 2}, {2, 3}})},
        {"diamond", unit(4, {{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 3}})},
        {"C4-weighted", WeightedGraph(4, {{0, 1, 0.5}, {1, 2, 1.0}, {2, 3, 2.0}, {0, 3, 1.5}})},
        {"P5", unit(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}})},
        {"C5", unit(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}})},
        {"K1,4", unit(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}})},
        {"K5", unit(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {1, 2}, {1, 3}, {1, 4}, {2, 3}, {2, 4}, {3, 4}})},
        {"bull", unit(5, {{0, 1}, {1, 2}, {0, 2}, {1, 3}, {2, 4}})},
        {"house", unit(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}, {1, 4}})},
        {"wheel", unit(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {1, 2}, {2, 3}, {3, 4}, {1, 4}})},
        {"P5-weighted", WeightedGraph(5, {{0, 1, 2.0}, {1, 2, 0.5}, {2, 3, 1.0}, {3, 4, 3.0}})},
        {"K2,3", unit(5, {{0, 2}, {0, 3}, {0, 4}, {1, 2}, {1, 3}, {1, 4}})},
    };
}

}  // namespace lsi
