#pragma once

#include "lsi/matfun.hpp"

namespace lsi {

/// Trace-preserving conditional expectation on M_n: a Schur-mask pinching, the tracial
/// projection onto multiples of the identity, or the spectral kernel projection of a generator.
class ConditionalExpectation {
public:
    enum class Kind { Edge, Diagonal, Trace, KernelProjection, CustomPinching };

    /// Keeps the {r,s} x {r,s} block and the complement block.
    static ConditionalExpectation edge(int r, int s, Index n);
    static ConditionalExpectation diagonal(Index n);
    static ConditionalExpectation trace(Index n);
    /// 0/1 mask of an equivalence relation on the basis indices.
    static ConditionalExpectation pinching(const RealMatrix& mask);
    /// Pinching onto the blocks of a partition given as a block label per index.
    static ConditionalExpectation block_pinching(const std::vector<int>& labels);
    /// Hilbert-Schmidt orthogonal projection onto the kernel of s.
    static ConditionalExpectation kernel_projection(const SpectralSuperoperator& s);

    Kind kind() const { return kind_; }
    Index dim() const { return n_; }
    bool is_schur() const { return kind_ == Kind::Edge || kind_ == Kind::Diagonal || kind_ == Kind::CustomPinching; }
    const RealMatrix& mask() const { return mask_; }
    /// Rank of the projection (dimension of the range algebra).
    Index rank() const;

    Matrix apply(const Matrix& x) const;
    /// Action as an n^2 x n^2 matrix on column-stacked vectors.
    Matrix superoperator() const;

    /// Composition of two Schur pinchings (masks multiply entrywise).
    friend ConditionalExpectation operator*(const ConditionalExpectation& a, const ConditionalExpectation& b);

private:
    ConditionalExpectation() = default;

    Kind kind_ = Kind::Trace;
    Index n_ = 0;
    RealMatrix mask_;
    Matrix projector_;
};

}  // namespace lsi
