#pragma once

#include <vector>

#include "lsi/entropy.hpp"
#include "lsi/expectation.hpp"
#include "lsi/graphs.hpp"
#include "lsi/matfun.hpp"

namespace lsi {

/// X = |r><s| - |s><r| and its Hermitian form x = iX.
struct EdgeGenerator {
    int r = 0;
    int s = 0;
    Index n = 0;
    RealMatrix antisymmetric;
    Matrix hermitian;
};

EdgeGenerator edge_generator(int r, int s, Index n);

/// rho -> sum_e w_e [x_e, [x_e, rho]].
SpectralSuperoperator graph_lindblad(const WeightedGraph& g);

ConditionalExpectation edge_expectation(int r, int s, Index n);
ConditionalExpectation diagonal_expectation(Index n);

struct FixedPointSpace {
    Index dim = 0;
    std::vector<Matrix> basis;  // Hilbert-Schmidt orthonormal
    ConditionalExpectation projection;
};

FixedPointSpace fixed_point_dim(const SpectralSuperoperator& s);

/// (U_i rho U_i + rho)/2 with U_i = diag(1, .., -1 (slot i), .., 1).
Matrix sign_flip_average(int i, const Matrix& rho);

/// Generators X/2 and Y/2 on M_2.
SpectralSuperoperator pauli_system();

/// id - E_tau on M_n.
SpectralSuperoperator depolarizing(Index n);

struct IntegerSpectrumLindbladian {
    SpectralSuperoperator op;
    double certified_bound = 0.0;  // 1/(5 pi^2)
};

IntegerSpectrumLindbladian integer_spectrum_lindblad(const Matrix& x);

/// Per-site sum over copies j and inputs k of [pi_j(Xhat_k), [pi_j(Xhat_k), .]] on (2n)^m dimensions,
/// Xhat = diag(X, X^T).
SpectralSuperoperator collective_lindblad(const std::vector<Matrix>& xs, int m);

inline constexpr Index kCollectiveDimensionCap = 64;

/// S1 (x) id + id (x) S2 on M_{n1 n2}.
SpectralSuperoperator tensor_sum(const SpectralSuperoperator& a, const SpectralSuperoperator& b);

/// (S (x) id_m)(x) for x in M_{n m}, without forming the amplified superoperator.
Matrix amplify_apply(const SpectralSuperoperator& s, Index m, const Matrix& x);
Matrix amplify_apply(const ConditionalExpectation& e, Index m, const Matrix& x);

struct GradientEstimateRow {
    double t = 0.0;
    double lhs = 0.0;       // |grad P_t a|^2 at rho
    double rhs = 0.0;       // e^{-2 lambda t} |grad a|^2 at P_t rho
    double residual = 0.0;  // lhs - rhs
};

struct GradientEstimateReport {
    std::vector<GradientEstimateRow> rows;
    double max_residual = 0.0;
    bool holds = true;  // every residual <= 1e-9
};

/// Checks |grad P_t a|^2_rho <= e^{-2 lambda t} |grad a|^2_{P_t rho}, where grad a = (i[a_k, a])_k and
/// |v|^2_rho = sum_k tau(v_k^* [rho](v_k)) with [rho] the logarithmic-mean multiplication.
GradientEstimateReport gradient_estimate_check(const std::vector<Matrix>& generators, double lambda,
                                               const State& rho, const Matrix& a,
                                               const std::vector<double>& t_grid);

}  // namespace lsi
