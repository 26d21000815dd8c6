#pragma once

#include <vector>

#include "lsi/expectation.hpp"
#include "lsi/graphs.hpp"
#include "lsi/matfun.hpp"

namespace lsi {

inline constexpr double kStateFloor = 1e-10;

/// Strictly positive Hermitian matrix with normalized trace 1 (matrix trace n).
class State {
public:
    explicit State(Matrix rho);
    /// Rescales a strictly positive matrix to matrix trace n.
    static State normalized(const Matrix& positive);

    const Matrix& matrix() const { return rho_; }
    Index dim() const { return rho_.rows(); }
    const SpectralDecomposition<cplx>& spectrum() const { return spectrum_; }

private:
    Matrix rho_;
    SpectralDecomposition<cplx> spectrum_;
};

/// Relative entropy that may be +infinity; the flag is authoritative.
struct EntropyValue {
    double value = 0.0;
    bool infinite = false;
};

EntropyValue rel_entropy(const State& rho, const Matrix& sigma);

/// tau(rho ln rho - rho ln sigma - rho + sigma) for strictly positive rho and sigma.
double lindblad_rel_entropy(const Matrix& rho, const Matrix& sigma);

/// tau(rho^p - sigma^p) - p tau((rho - sigma) sigma^{p-1}), p in (1, 2).
double p_rel_entropy(const Matrix& rho, const Matrix& sigma, double p);

/// D(rho || E rho).
double entropy_to_expectation(const State& rho, const ConditionalExpectation& e);
double p_entropy_to_expectation(const State& rho, const ConditionalExpectation& e, double p);

/// Convex potential F with F(x) = x ln x - x (logarithmic) or F(x) = x^p (power).
class EntropyKind {
public:
    static EntropyKind logarithmic() { return EntropyKind(1.0); }
    static EntropyKind power(double p);

    bool is_logarithmic() const { return p_ == 1.0; }
    double p() const { return p_; }
    double potential(double x) const;
    double gradient(double x) const;  // F'
    /// Kernel of the double operator integral representing the derivative of F'.
    ScalarKernel hessian_kernel() const;
    double hessian_scale() const { return is_logarithmic() ? 1.0 : p_; }

private:
    explicit EntropyKind(double p) : p_(p) {}
    double p_;
};

struct BregmanEvaluation {
    double divergence = 0.0;  // tau(F(rho) - F(sigma) - F'(sigma)(rho - sigma))
    Matrix gradient_gap;      // F'(rho) - F'(sigma)
};

/// Bregman divergence of F. Close to sigma it is computed from the Taylor remainder
/// integral over the segment sigma + t (rho - sigma), which avoids cancellation.
BregmanEvaluation bregman(const Matrix& rho, const Matrix& sigma, const EntropyKind& kind);

/// tau(S(rho) ln rho), cross-checked against the sum of tau(d_k rho Q(d_k rho)) when generators exist.
double fisher_lindblad(const SpectralSuperoperator& s, const State& rho);

/// p tau(S(rho) rho^{p-1}).
double p_fisher(const SpectralSuperoperator& s, const State& rho, double p);

/// Both forms of tau(S(rho) F'(rho)): {trace form, derivation form or NaN}.
std::pair<double, double> fisher_forms(const SpectralSuperoperator& s, const Matrix& rho, const EntropyKind& kind);

/// Positive m x m blocks indexed by graph vertices.
class MatrixField {
public:
    explicit MatrixField(std::vector<Matrix> blocks);
    static MatrixField scalar(const Vector& values);

    Index block_size() const { return m_; }
    int size() const { return static_cast<int>(blocks_.size()); }
    const Matrix& operator[](int x) const { return blocks_[static_cast<std::size_t>(x)]; }

private:
    Index m_;
    std::vector<Matrix> blocks_;
};

/// Sum over ordered adjacent pairs of mu(x) w tau((f(y) - f(x))(ln f(y) - ln f(x))).
double fisher_graph(const WeightedGraph& g, const MatrixField& f);

/// Sum of mu(x) tau(f(x)(ln f(x) - ln xi)) with xi the mu-average block.
double entropy_graph(const WeightedGraph& g, const MatrixField& f, bool normalized);

/// |integral_0^1 tau(D Q^{g(t)}(D)) dt - tau(D (ln rho - ln sigma))| with D = rho - sigma.
double hook_integral_check(const Matrix& rho, const Matrix& sigma, int points = 64);

}  // namespace lsi
