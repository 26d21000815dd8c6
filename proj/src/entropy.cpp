#include "lsi/entropy.hpp"

#include <limits>

namespace lsi {

namespace {

constexpr int kSegmentNodes = 16;

// tau(a b) for square a, b without forming the product.
cplx trace_product(const Matrix& a, const Matrix& b) {
    return a.cwiseProduct(b.transpose()).sum() / static_cast<double>(a.rows());
}

void require_same_dim(const Matrix& a, const Matrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError(std::string(what) + ": dimension mismatch");
}

void require_p(double p) {
    if (!(p > 1.0 && p < 2.0)) throw std::invalid_argument("p must lie in (1, 2)");
}

}  // namespace

State::State(Matrix rho) : rho_(std::move(rho)) {
    require_hermitian(rho_, "state");
    rho_ = (rho_ + rho_.adjoint()) / 2.0;
    spectrum_ = eig_hermitian(rho_);
    const double lo = spectrum_.eigenvalues.minCoeff();
    if (!(lo >= kStateFloor)) throw DomainError("state is not strictly positive", lo);
    if (std::abs(ntrace(rho_).real() - 1.0) > 1e-10) throw std::invalid_argument("state does not have normalized trace 1");
}

State State::normalized(const Matrix& positive) {
    require_hermitian(positive, "state");
    const double tr = positive.trace().real();
    if (!(tr > 0.0)) throw std::invalid_argument("cannot normalize a matrix with nonpositive trace");
    return State(positive * (static_cast<double>(positive.rows()) / tr));
}

EntropyKind EntropyKind::power(double p) {
    require_p(p);
    return EntropyKind(p);
}

double EntropyKind::potential(double x) const {
    return is_logarithmic() ? x * std::log(x) - x : std::pow(x, p_);
}

double EntropyKind::gradient(double x) const {
    return is_logarithmic() ? std::log(x) : p_ * std::pow(x, p_ - 1.0);
}

ScalarKernel EntropyKind::hessian_kernel() const {
    return is_logarithmic() ? ScalarKernel::log_quotient() : ScalarKernel::power_quotient(p_);
}

BregmanEvaluation bregman(const Matrix& rho, const Matrix& sigma, const EntropyKind& kind) {
    require_same_dim(rho, sigma, "bregman");
    require_hermitian(rho, "rho");
    const auto ss = eig_hermitian(sigma);
    require_positive_spectrum(ss, "sigma");
    const Matrix delta = rho - sigma;
    const Index n = rho.rows();
    BregmanEvaluation out;

    if (delta.norm() <= 0.5 * ss.eigenvalues(0)) {
        // F(rho) - F(sigma) - F'(sigma) D = int_0^1 (1 - t) tau(D Q^{g(t)}(D)) dt, g(t) = sigma + t D,
        // and F'(rho) - F'(sigma) = int_0^1 Q^{g(t)}(D) dt.
        const ScalarKernel k = kind.hessian_kernel();
        const QuadratureRule q = gauss_legendre(kSegmentNodes, 0.0, 1.0);
        out.gradient_gap = Matrix::Zero(n, n);
        for (int i = 0; i < kSegmentNodes; ++i) {
            const double t = q.nodes(i);
            Matrix g = sigma + t * delta;
            g = (g + g.adjoint()) / 2.0;
            const auto sg = eig_hermitian(g);
            const Matrix qd = kind.hessian_scale() * doi_apply(sg, sg, k, delta);
            out.divergence += q.weights(i) * (1.0 - t) * trace_product(delta, qd).real();
            out.gradient_gap += q.weights(i) * qd;
        }
        return out;
    }

    const auto rs = eig_hermitian(rho);
    require_positive_spectrum(rs, "rho");
    double f_rho = 0.0, f_sigma = 0.0;
    for (Index i = 0; i < n; ++i) {
        f_rho += kind.potential(rs.eigenvalues(i));
        f_sigma += kind.potential(ss.eigenvalues(i));
    }
    const Matrix grad_sigma = ss.map([&](double x) { return kind.gradient(x); });
    const Matrix grad_rho = rs.map([&](double x) { return kind.gradient(x); });
    out.divergence = (f_rho - f_sigma) / static_cast<double>(n) - trace_product(grad_sigma, delta).real();
    out.gradient_gap = grad_rho - grad_sigma;
    return out;
}

EntropyValue rel_entropy(const State& rho, const Matrix& sigma) {
    require_same_dim(rho.matrix(), sigma, "rel_entropy");
    require_hermitian(sigma, "sigma");
    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma, Eigen::EigenvaluesOnly);
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    const double lo = es.eigenvalues().minCoeff();
    if (lo < -1e-10 * scale) throw std::invalid_argument("sigma is not positive semidefinite");
    // rho has full support, so any kernel of sigma violates the support condition.
    if (lo <= kPositivityFloor * scale) return {std::numeric_limits<double>::infinity(), true};
    const double dlin = bregman(rho.matrix(), sigma, EntropyKind::logarithmic()).divergence;
    return {dlin + 1.0 - ntrace(sigma).real(), false};
}

double lindblad_rel_entropy(const Matrix& rho, const Matrix& sigma) {
    return bregman(rho, sigma, EntropyKind::logarithmic()).divergence;
}

double p_rel_entropy(const Matrix& rho, const Matrix& sigma, double p) {
    return bregman(rho, sigma, EntropyKind::power(p)).divergence;
}

namespace {

Matrix expectation_of(const State& rho, const ConditionalExpectation& e) {
    if (e.dim() != rho.dim()) throw DimensionError("conditional expectation has the wrong dimension");
    Matrix sigma = e.apply(rho.matrix());
    sigma = (sigma + sigma.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma, Eigen::EigenvaluesOnly);
    if (!(es.eigenvalues().minCoeff() >= kPositivityFloor))
        throw ConsistencyError("conditional expectation returned a non-positive matrix");
    return sigma;
}

}  // namespace

double entropy_to_expectation(const State& rho, const ConditionalExpectation& e) {
    return rel_entropy(rho, expectation_of(rho, e)).value;
}

double p_entropy_to_expectation(const State& rho, const ConditionalExpectation& e, double p) {
    return p_rel_entropy(rho.matrix(), expectation_of(rho, e), p);
}

std::pair<double, double> fisher_forms(const SpectralSuperoperator& s, const Matrix& rho, const EntropyKind& kind) {
    if (rho.rows() != s.dim()) throw DimensionError("fisher: state dimension differs from generator");
    const auto rs = eig_hermitian(rho);
    require_positive_spectrum(rs, "fisher rho");
    const Matrix grad = rs.map([&](double x) { return kind.gradient(x); });
    const double trace_form = trace_product(s.apply(rho), grad).real();
    double derivation_form = std::numeric_limits<double>::quiet_NaN();
    if (s.has_generators()) {
        derivation_form = 0.0;
        const ScalarKernel k = kind.hessian_kernel();
        for (const Matrix& a : s.generators()) {
            const Matrix d = cplx(0, 1) * commutator(a, rho);
            derivation_form += kind.hessian_scale() * trace_product(d, doi_apply(rs, rs, k, d)).real();
        }
    }
    return {trace_form, derivation_form};
}

namespace {

double checked_fisher(const SpectralSuperoperator& s, const Matrix& rho, const EntropyKind& kind) {
    const auto [trace_form, derivation_form] = fisher_forms(s, rho, kind);
    if (!std::isnan(derivation_form) &&
        std::abs(trace_form - derivation_form) > 1e-6 * std::max(1.0, std::abs(trace_form)))
        throw ConsistencyError("Fisher information forms disagree: " + std::to_string(trace_form) + " vs " +
                               std::to_string(derivation_form));
    return trace_form;
}

}  // namespace

double fisher_lindblad(const SpectralSuperoperator& s, const State& rho) {
    return checked_fisher(s, rho.matrix(), EntropyKind::logarithmic());
}

double p_fisher(const SpectralSuperoperator& s, const State& rho, double p) {
    return checked_fisher(s, rho.matrix(), EntropyKind::power(p));
}

MatrixField::MatrixField(std::vector<Matrix> blocks) : blocks_(std::move(blocks)) {
    if (blocks_.empty()) throw DimensionError("matrix field needs at least one block");
    m_ = blocks_.front().rows();
    for (const Matrix& b : blocks_) {
        if (b.rows() != m_ || b.cols() != m_) throw DimensionError("matrix field blocks differ in size");
        const auto sd = eig_hermitian(b);
        require_positive_spectrum(sd, "matrix field block");
    }
}

MatrixField MatrixField::scalar(const Vector& values) {
    std::vector<Matrix> blocks;
    for (Index i = 0; i < values.size(); ++i) blocks.push_back(Matrix::Constant(1, 1, values(i)));
    return MatrixField(std::move(blocks));
}

double fisher_graph(const WeightedGraph& g, const MatrixField& f) {
    if (f.size() != g.n()) throw DimensionError("field has the wrong number of vertices");
    const EntropyKind log_kind = EntropyKind::logarithmic();
    double total = 0.0;
    // Both orientations of an edge give the same term, weighted by mu(u) and mu(v).
    // The log difference comes from the Bregman gradient gap, which stays accurate for close blocks.
    for (const Edge& e : g.edges()) {
        const Matrix log_gap = bregman(f[e.v], f[e.u], log_kind).gradient_gap;
        const double term = trace_product(Matrix(f[e.v] - f[e.u]), log_gap).real();
        total += e.w * (g.measure()(e.u) + g.measure()(e.v)) * term;
    }
    return total;
}

double entropy_graph(const WeightedGraph& g, const MatrixField& f, bool normalized) {
    if (f.size() != g.n()) throw DimensionError("field has the wrong number of vertices");
    Matrix xi = Matrix::Zero(f.block_size(), f.block_size());
    for (int x = 0; x < f.size(); ++x) xi += g.measure()(x) * f[x];
    if (normalized && std::abs(ntrace(xi).real() - 1.0) > 1e-10)
        throw std::invalid_argument("field is flagged normalized but its average has trace " +
                                    std::to_string(ntrace(xi).real()));
    // sum mu tau(f - xi) = 0, so each vertex may use the nonnegative Lindblad form.
    double total = 0.0;
    for (int x = 0; x < f.size(); ++x) total += g.measure()(x) * lindblad_rel_entropy(f[x], xi);
    return total;
}

double hook_integral_check(const Matrix& rho, const Matrix& sigma, int points) {
    require_same_dim(rho, sigma, "hook_integral_check");
    const Matrix delta = rho - sigma;
    const QuadratureRule q = gauss_legendre(points, 0.0, 1.0);
    const ScalarKernel k = ScalarKernel::log_quotient();
    double lhs = 0.0;
    for (int i = 0; i < points; ++i) {
        Matrix g = sigma + q.nodes(i) * delta;
        g = (g + g.adjoint()) / 2.0;
        const auto sg = eig_hermitian(g);
        lhs += q.weights(i) * trace_product(delta, doi_apply(sg, sg, k, delta)).real();
    }
    const double rhs = trace_product(delta, Matrix(matrix_log(rho) - matrix_log(sigma))).real();
    return std::abs(lhs - rhs);
}

}  // namespace lsi
