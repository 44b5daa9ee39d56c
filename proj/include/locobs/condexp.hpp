#pragma once

// Conditional expectations B(H1 (x) H2) -> B(H1): the tracial one (normalized
// partial trace), slicing with a state on H2, Haar twirls over the full
// unitary group of H2 (Monte Carlo) and over the subgroups
// U(P) = {(1-P) + V : V unitary on ran P} (closed form), plus a Choi-matrix
// test for complete positivity.

#include <algorithm>
#include <utility>

#include "locobs/opcore.hpp"

namespace locobs {

/// Normalized partial trace over the second factor.
inline Matrix e_tr(const BipartiteOperator& a) {
    return partial_trace_2(a) / static_cast<double>(a.d2());
}

/// id (x) rho: entry (i,j) is Tr(rho A_ij) with A_ij the (i,j) block of A.
inline Matrix e_rho(const BipartiteOperator& a, const DensityMatrix& rho) {
    if (rho.dim() != a.d2())
        throw DimensionError("e_rho: state has dimension " + std::to_string(rho.dim()) + " but d2 = " +
                             std::to_string(a.d2()));
    Matrix out(a.d1(), a.d1());
    for (Index i = 0; i < a.d1(); ++i)
        for (Index j = 0; j < a.d1(); ++j) out(i, j) = rho.expectation(a.block(i, j));
    return out;
}

struct TwirlEstimate {
    BipartiteOperator average;    ///< (1/N) sum_i (1 (x) U_i*) A (1 (x) U_i)
    double max_commutator_norm;   ///< max_i ||[A, 1 (x) U_i]||
};

/// Monte-Carlo Haar twirl over U(d2). The returned average satisfies
/// ||A - average|| <= max_commutator_norm for every sample set.
inline TwirlEstimate mc_twirl(const BipartiteOperator& a, Index n_samples, RngSeed seed) {
    if (n_samples < 1) throw PreconditionError("mc_twirl: n_samples must be at least 1");
    auto engine = make_engine(seed);
    const Matrix& m = a.matrix();
    Matrix sum = Matrix::Zero(a.dim(), a.dim());
    double worst = 0.0;
    for (Index s = 0; s < n_samples; ++s) {
        const Matrix u = embed_right(a.d1(), haar_unitary(a.d2(), engine));
        const Matrix mu = m * u;
        sum.noalias() += u.adjoint() * mu;
        worst = std::max(worst, op_norm(mu - u * m));
    }
    sum /= static_cast<double>(n_samples);
    return {BipartiteOperator(std::move(sum), a.d1(), a.d2()), worst};
}

/// Orthogonal projection P on H2 and the compact group U(P) it defines.
class ProjectedSubgroup {
public:
    static constexpr double kTol = 1e-10;

    explicit ProjectedSubgroup(Matrix projector) : projector_(std::move(projector)) {
        if (projector_.rows() != projector_.cols() || projector_.rows() < 1)
            throw DimensionError("projected subgroup: projector must be a non-empty square matrix");
        const double scale = std::max(1.0, max_abs(projector_));
        if (max_abs(projector_ - projector_.adjoint()) > kTol * scale ||
            max_abs(projector_ * projector_ - projector_) > kTol * scale)
            throw PreconditionError("projected subgroup: matrix is not an orthogonal projection");

        Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (projector_ + projector_.adjoint()));
        const Index d = projector_.rows();
        rank_ = 0;
        for (Index k = 0; k < d; ++k)
            if (eig.eigenvalues()(k) > 0.5) ++rank_;
        // Eigenvalues ascend, so the range vectors are the trailing columns.
        basis_.resize(d, d);
        basis_.leftCols(rank_) = eig.eigenvectors().rightCols(rank_);
        basis_.rightCols(d - rank_) = eig.eigenvectors().leftCols(d - rank_);
    }

    /// Projector onto the span of the first `rank` columns of `frame`.
    static ProjectedSubgroup from_frame(const Matrix& frame, Index rank) {
        if (rank < 0 || rank > frame.cols()) throw DimensionError("from_frame: rank out of range");
        const Matrix w = frame.leftCols(rank);
        return ProjectedSubgroup(w * w.adjoint());
    }

    const Matrix& projector() const noexcept { return projector_; }
    Index d2() const noexcept { return projector_.rows(); }
    Index rank() const noexcept { return rank_; }

    /// Unitary whose first rank() columns span ran P and the rest ker P.
    const Matrix& adapted_basis() const noexcept { return basis_; }
    auto range_basis() const { return basis_.leftCols(rank_); }
    auto kernel_basis() const { return basis_.rightCols(d2() - rank_); }

    /// (1 - P) + W V W* with V Haar on U(rank).
    Matrix embed(const Matrix& v) const {
        if (v.rows() != rank_ || v.cols() != rank_) throw DimensionError("embed: block has wrong size");
        Matrix u = Matrix::Identity(d2(), d2()) - projector_;
        if (rank_ > 0) u += range_basis() * v * range_basis().adjoint();
        return u;
    }

    Matrix sample(Engine& engine) const {
        if (rank_ == 0) return Matrix::Identity(d2(), d2());
        return embed(haar_unitary(rank_, engine));
    }

private:
    Matrix projector_;
    Matrix basis_;
    Index rank_ = 0;
};

/// Exact Haar average of (1 (x) U*) A (1 (x) U) over U in U(P).
///
/// In a basis adapted to H2 = ran P (+) ker P every d2 x d2 block of A splits
/// into four sub-blocks. The average replaces the (ran, ran) sub-block by its
/// normalized trace times the identity, zeroes both off-diagonal sub-blocks
/// (E[V] = 0 on U(r) for every r >= 1, the circle average when r = 1) and
/// leaves the (ker, ker) sub-block alone.
inline BipartiteOperator exact_projected_twirl(const BipartiteOperator& a, const ProjectedSubgroup& sub) {
    if (sub.d2() != a.d2())
        throw DimensionError("exact_projected_twirl: subgroup acts on dimension " + std::to_string(sub.d2()) +
                             " but d2 = " + std::to_string(a.d2()));
    const Index r = sub.rank();
    if (r == 0) return a;

    const Index d1 = a.d1();
    const Index d2 = a.d2();
    const Matrix w = embed_right(d1, sub.adapted_basis());
    Matrix rotated = w.adjoint() * a.matrix() * w;
    for (Index i = 0; i < d1; ++i)
        for (Index j = 0; j < d1; ++j) {
            auto blk = rotated.block(i * d2, j * d2, d2, d2);
            const Complex mean = blk.topLeftCorner(r, r).trace() / static_cast<double>(r);
            blk.topLeftCorner(r, r) = mean * Matrix::Identity(r, r);
            blk.topRightCorner(r, d2 - r).setZero();
            blk.bottomLeftCorner(d2 - r, r).setZero();
        }
    return BipartiteOperator(w * rotated * w.adjoint(), d1, d2);
}

/// Choi matrix sum_ij Phi(E_ij) (x) E_ij of a linear map from d_in x d_in
/// to d_out x d_out matrices.
class ChoiMatrix {
public:
    ChoiMatrix(Matrix matrix, Index d_in, Index d_out) : matrix_(std::move(matrix)), d_in_(d_in), d_out_(d_out) {
        if (matrix_.rows() != d_in * d_out || matrix_.cols() != d_in * d_out)
            throw DimensionError("choi matrix: size does not match d_in*d_out");
    }

    const Matrix& matrix() const noexcept { return matrix_; }
    Index d_in() const noexcept { return d_in_; }
    Index d_out() const noexcept { return d_out_; }

    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (matrix_ + matrix_.adjoint()), Eigen::EigenvaluesOnly);
        return eig.eigenvalues()(0);
    }

private:
    Matrix matrix_;
    Index d_in_;
    Index d_out_;
};

/// `map` must accept a d_in x d_in Matrix and return a d_out x d_out Matrix.
template <typename Map>
ChoiMatrix choi_of_map(Map&& map, Index d_in, Index d_out) {
    if (d_in < 1 || d_out < 1) throw DimensionError("choi_of_map: dimensions must be positive");
    Matrix choi = Matrix::Zero(d_in * d_out, d_in * d_out);
    Matrix unit = Matrix::Zero(d_in, d_in);
    for (Index i = 0; i < d_in; ++i)
        for (Index j = 0; j < d_in; ++j) {
            unit(i, j) = 1.0;
            const Matrix image = map(std::as_const(unit));
            if (image.rows() != d_out || image.cols() != d_out)
                throw DimensionError("choi_of_map: map returned " + shape_str(image) + ", expected " +
                                     std::to_string(d_out) + "x" + std::to_string(d_out));
            choi += kron(image, unit);
            unit(i, j) = 0.0;
        }
    return ChoiMatrix(std::move(choi), d_in, d_out);
}

/// Complete positivity: the Choi matrix is Hermitian and its smallest
/// eigenvalue is at least -tol.
inline bool is_cp(const ChoiMatrix& choi, double tol) {
    if (!is_hermitian(choi.matrix(), std::max(tol, kHermitianTol))) return false;
    return choi.min_eigenvalue() >= -tol;
}

} // namespace locobs
