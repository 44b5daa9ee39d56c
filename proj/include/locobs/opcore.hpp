#pragma once

// Dense complex-matrix foundation shared by every other header: tensor
// products with a fixed first-factor-major index convention, norms,
// commutators, partial traces, Hermitian matrix functions and random
// matrix ensembles.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include "locobs/random.hpp"

namespace locobs {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

/// Operand shapes do not fit together.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An input violates a documented precondition (non-Hermitian, non-unitary, ...).
class PreconditionError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kUnitaryTol = 1e-10;

inline std::string shape_str(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

inline double max_abs(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const Matrix& m, double tol = kHermitianTol) {
    if (m.rows() != m.cols()) return false;
    return max_abs(m - m.adjoint()) <= tol * std::max(1.0, max_abs(m));
}

inline bool is_unitary(const Matrix& m, double tol = kUnitaryTol) {
    if (m.rows() != m.cols()) return false;
    return max_abs(m.adjoint() * m - Matrix::Identity(m.rows(), m.cols())) <= tol;
}

/// Kronecker product; entry (i*b.rows()+k, j*b.cols()+l) = a(i,j) * b(k,l).
inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// Largest singular value.
inline double op_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::BDCSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

inline Matrix commutator(const Matrix& a, const Matrix& b) {
    if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
        throw DimensionError("commutator: operands " + shape_str(a) + " and " + shape_str(b) +
                             " are not square of equal size");
    return a * b - b * a;
}

/// A square matrix on H1 (x) H2 together with its factor dimensions.
/// Basis state |i>|k> sits at flat index i*d2 + k.
class BipartiteOperator {
public:
    BipartiteOperator(Matrix matrix, Index d1, Index d2) : matrix_(std::move(matrix)), d1_(d1), d2_(d2) {
        if (d1 < 1 || d2 < 1)
            throw DimensionError("bipartite operator: factor dimensions must be positive");
        if (matrix_.rows() != d1 * d2 || matrix_.cols() != d1 * d2)
            throw DimensionError("bipartite operator: matrix is " + shape_str(matrix_) + " but d1*d2 = " +
                                 std::to_string(d1 * d2));
        if (!matrix_.allFinite())
            throw PreconditionError("bipartite operator: matrix has non-finite entries");
    }

    const Matrix& matrix() const noexcept { return matrix_; }
    Index d1() const noexcept { return d1_; }
    Index d2() const noexcept { return d2_; }
    Index dim() const noexcept { return d1_ * d2_; }

    /// Block <i| (x) 1 . A . |j> (x) 1, a d2 x d2 matrix.
    auto block(Index i, Index j) const { return matrix_.block(i * d2_, j * d2_, d2_, d2_); }

private:
    Matrix matrix_;
    Index d1_;
    Index d2_;
};

/// Unnormalized trace over the second factor: (i,j) -> sum_k A(i*d2+k, j*d2+k).
inline Matrix partial_trace_2(const BipartiteOperator& a) {
    Matrix out(a.d1(), a.d1());
    for (Index i = 0; i < a.d1(); ++i)
        for (Index j = 0; j < a.d1(); ++j) out(i, j) = a.block(i, j).trace();
    return out;
}

/// Unnormalized trace over the first factor: (k,l) -> sum_i A(i*d2+k, i*d2+l).
inline Matrix partial_trace_1(const BipartiteOperator& a) {
    Matrix out = Matrix::Zero(a.d2(), a.d2());
    for (Index i = 0; i < a.d1(); ++i) out += a.block(i, i);
    return out;
}

/// A' (x) 1_{d2}.
inline BipartiteOperator embed_left(const Matrix& a_prime, Index d2) {
    if (a_prime.rows() != a_prime.cols())
        throw DimensionError("embed_left: operand " + shape_str(a_prime) + " is not square");
    return BipartiteOperator(kron(a_prime, Matrix::Identity(d2, d2)), a_prime.rows(), d2);
}

/// 1_{d1} (x) B.
inline Matrix embed_right(Index d1, const Matrix& b) {
    return kron(Matrix::Identity(d1, d1), b);
}

/// exp(scale * h) for Hermitian h through its eigendecomposition.
inline Matrix herm_expm(const Matrix& h, Complex scale) {
    if (!is_hermitian(h))
        throw PreconditionError("herm_expm: input is not Hermitian within tolerance");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (h + h.adjoint()));
    Vector phases = (scale * eig.eigenvalues().cast<Complex>().array()).exp().matrix();
    return eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
}

/// Independent standard complex Gaussians, real and imaginary parts of
/// variance 1/2 each.
inline Matrix ginibre(Index rows, Index cols, Engine& engine) {
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    Matrix g(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) {
            const double re = normal(engine);
            const double im = normal(engine);
            g(i, j) = Complex(re, im);
        }
    return g;
}

inline Matrix ginibre(Index rows, Index cols, RngSeed seed) {
    auto engine = make_engine(seed);
    return ginibre(rows, cols, engine);
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the column phases
/// fixed so that R has a real positive diagonal.
inline Matrix haar_unitary(Index d, Engine& engine) {
    if (d < 1) throw DimensionError("haar_unitary: dimension must be positive");
    Matrix z = ginibre(d, d, engine);
    Eigen::HouseholderQR<Matrix> qr(z);
    Matrix q = qr.householderQ() * Matrix::Identity(d, d);
    const Matrix& r = qr.matrixQR();
    for (Index j = 0; j < d; ++j) {
        const double mag = std::abs(r(j, j));
        const Complex phase = mag > 0.0 ? r(j, j) / mag : Complex(1.0, 0.0);
        q.col(j) *= phase;
    }
    return q;
}

inline Matrix haar_unitary(Index d, RngSeed seed) {
    auto engine = make_engine(seed);
    return haar_unitary(d, engine);
}

/// Unitary factor of the polar decomposition, M (M* M)^{-1/2} when M is well
/// conditioned and U V* from the SVD otherwise.
inline Matrix polar_unitary(const Matrix& m) {
    if (m.rows() == m.cols()) {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(m.adjoint() * m);
        const auto& lam = eig.eigenvalues();
        if (lam(0) > 1e-6 * lam(lam.size() - 1)) {
            const Eigen::VectorXd inv_sqrt = lam.cwiseSqrt().cwiseInverse();
            return m * (eig.eigenvectors() * inv_sqrt.cast<Complex>().asDiagonal() * eig.eigenvectors().adjoint());
        }
    }
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().adjoint();
}

/// Positive semidefinite unit-trace matrix (a normal state on B(C^d)).
class DensityMatrix {
public:
    static constexpr double kTol = 1e-12;

    explicit DensityMatrix(Matrix matrix) : matrix_(std::move(matrix)) {
        if (matrix_.rows() != matrix_.cols() || matrix_.rows() < 1)
            throw DimensionError("density matrix: expected a non-empty square matrix, got " + shape_str(matrix_));
        if (!matrix_.allFinite()) throw PreconditionError("density matrix: non-finite entries");
        if (!is_hermitian(matrix_, kTol)) throw PreconditionError("density matrix: not Hermitian");
        if (std::abs(matrix_.trace() - Complex(1.0, 0.0)) > kTol)
            throw PreconditionError("density matrix: trace is not 1");
        Eigen::SelfAdjointEigenSolver<Matrix> eig(matrix_, Eigen::EigenvaluesOnly);
        if (eig.eigenvalues().minCoeff() < -kTol)
            throw PreconditionError("density matrix: negative eigenvalue");
    }

    static DensityMatrix maximally_mixed(Index d) {
        return DensityMatrix(Matrix::Identity(d, d) / static_cast<double>(d));
    }

    static DensityMatrix pure_basis(Index d, Index k) {
        if (k < 0 || k >= d) throw DimensionError("pure_basis: index out of range");
        Matrix m = Matrix::Zero(d, d);
        m(k, k) = 1.0;
        return DensityMatrix(std::move(m));
    }

    static DensityMatrix pure(const Vector& psi) {
        const double n = psi.norm();
        if (!(n > 0.0)) throw PreconditionError("pure state: zero vector");
        Vector v = psi / n;
        Matrix m = v * v.adjoint();
        return DensityMatrix(hermitize(m));
    }

    /// G G* / Tr(G G*) with G Ginibre.
    static DensityMatrix wishart(Index d, Engine& engine) {
        Matrix g = ginibre(d, d, engine);
        Matrix m = g * g.adjoint();
        m /= m.trace().real();
        return DensityMatrix(hermitize(m));
    }

    const Matrix& matrix() const noexcept { return matrix_; }
    Index dim() const noexcept { return matrix_.rows(); }

    /// rho(B) = Tr(rho B).
    Complex expectation(const Matrix& b) const {
        return (matrix_.transpose().cwiseProduct(b)).sum();
    }

private:
    static Matrix hermitize(Matrix m) {
        Matrix h = 0.5 * (m + m.adjoint());
        const Complex tr = h.trace();
        h /= tr.real();
        return h;
    }

    Matrix matrix_;
};

} // namespace locobs
