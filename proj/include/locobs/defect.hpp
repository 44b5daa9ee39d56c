#pragma once

// Lower bounds on sup_U ||[A, 1 (x) U]|| over the unitary group of H2. In
// finite dimensions the unitaries are the extreme points of the unit ball of
// B(H2), so this supremum equals eps(A) * ||A|| for the smallest eps with
// ||[A, 1 (x) B]|| <= eps ||A|| ||B|| for all B.

#include <string>
#include <vector>

#include "locobs/opcore.hpp"
#include "locobs/parallel.hpp"

namespace locobs {

struct OptimizerConfig {
    int restarts = 20;
    int max_iters = 500;
    double step_init = 0.1;
    double grad_tol = 1e-8;
    RngSeed seed{0};

    void validate() const {
        if (restarts < 1) throw PreconditionError("optimizer: restarts must be positive");
        if (max_iters < 1) throw PreconditionError("optimizer: max_iters must be positive");
        if (!(step_init > 0.0)) throw PreconditionError("optimizer: step_init must be positive");
        if (!(grad_tol > 0.0)) throw PreconditionError("optimizer: grad_tol must be positive");
    }
};

struct DefectEstimate {
    double value = 0.0;    ///< ||[A, 1 (x) witness]||, attained hence a lower bound
    Matrix witness;        ///< d2 x d2 unitary
    int restarts_used = 0;
    bool converged = false;
    int iterations = 0;    ///< iterations of the restart that produced the witness
};

inline void require_factor2_operator(const BipartiteOperator& a, const Matrix& u, const char* who) {
    if (u.rows() != a.d2() || u.cols() != a.d2())
        throw DimensionError(std::string(who) + ": expected a " + std::to_string(a.d2()) + "x" +
                             std::to_string(a.d2()) + " operator, got " + shape_str(u));
}

/// ||A (1 (x) u) - (1 (x) u) A||.
inline double commutator_norm(const BipartiteOperator& a, const Matrix& u) {
    require_factor2_operator(a, u, "commutator_norm");
    const Matrix lifted = embed_right(a.d1(), u);
    return op_norm(a.matrix() * lifted - lifted * a.matrix());
}

/// ||A - (1 (x) U*) A (1 (x) U)||; equals commutator_norm for unitary U.
inline double twirl_gap(const BipartiteOperator& a, const Matrix& u) {
    require_factor2_operator(a, u, "twirl_gap");
    if (!is_unitary(u)) throw PreconditionError("twirl_gap: operator is not unitary");
    const Matrix lifted = embed_right(a.d1(), u);
    return op_norm(a.matrix() - lifted.adjoint() * a.matrix() * lifted);
}

namespace detail {

struct AscentResult {
    double value = 0.0;
    Matrix witness;
    bool converged = false;
    int iterations = 0;
};

struct CommutatorProbe {
    double sigma = 0.0;
    Vector left;   // u1
    Vector right;  // v1
};

// [A, 1 (x) u] without forming the Kronecker product.
inline Matrix lifted_commutator(const BipartiteOperator& a, const Matrix& u) {
    const Index d1 = a.d1();
    const Index d2 = a.d2();
    const Matrix& m = a.matrix();
    Matrix c(a.dim(), a.dim());
    for (Index j = 0; j < d1; ++j) c.middleCols(j * d2, d2).noalias() = m.middleCols(j * d2, d2) * u;
    for (Index i = 0; i < d1; ++i) c.middleRows(i * d2, d2).noalias() -= u * m.middleRows(i * d2, d2);
    return c;
}

// The top singular pair comes from the Hermitian eigenproblem of C* C, which
// is several times cheaper than a full SVD at these sizes.
inline CommutatorProbe probe(const BipartiteOperator& a, const Matrix& u) {
    const Matrix c = lifted_commutator(a, u);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(c.adjoint() * c);
    const Index top = c.cols() - 1;
    CommutatorProbe p;
    p.sigma = std::sqrt(std::max(0.0, eig.eigenvalues()(top)));
    p.right = eig.eigenvectors().col(top);
    const Vector cv = c * p.right;
    const double n = cv.norm();
    p.left = n > 0.0 ? Vector(cv / n) : Vector(Vector::Unit(c.rows(), 0));
    return p;
}

inline double value_at(const BipartiteOperator& a, const Matrix& u) {
    const Matrix c = lifted_commutator(a, u);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(c.adjoint() * c, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, eig.eigenvalues()(c.cols() - 1)));
}

/// Riemannian ascent direction X (skew-Hermitian, step U -> U + t U X) for
/// f(U) = sigma_max([A, 1 (x) U]) from the top singular pair (u1, v1).
///
/// df = Re tr((1 (x) dU) M), M = v1 u1* A - A v1 u1*, which reduces to
/// Re tr(dU N) with N = Tr_1 M. For dU = U X the steepest skew direction is
/// X = (K* - K)/2 with K = N U, and df = ||X||_F^2.
inline Matrix ascent_direction(const BipartiteOperator& a, const Matrix& u, const CommutatorProbe& p) {
    const Matrix& m = a.matrix();
    const Vector av = m * p.right;
    const Eigen::RowVectorXcd ua = p.left.adjoint() * m;
    const Matrix mixed = p.right * ua - av * p.left.adjoint();
    const Matrix n = partial_trace_1(BipartiteOperator(mixed, a.d1(), a.d2()));
    const Matrix k = n * u;
    return 0.5 * (k.adjoint() - k);
}

inline AscentResult ascend(const BipartiteOperator& a, const OptimizerConfig& cfg, Matrix u) {
    constexpr double kMinStep = 1e-15;
    AscentResult res;
    CommutatorProbe p = probe(a, u);
    double step = cfg.step_init;
    int it = 0;
    for (; it < cfg.max_iters; ++it) {
        const Matrix x = ascent_direction(a, u, p);
        if (x.norm() < cfg.grad_tol) {
            res.converged = true;
            break;
        }
        bool improved = false;
        for (double t = step; t >= kMinStep; t *= 0.5) {
            Matrix trial = polar_unitary(u + t * (u * x));
            const double f = value_at(a, trial);
            if (f > p.sigma) {
                u = std::move(trial);
                p = probe(a, u);
                step = 2.0 * t;
                improved = true;
                break;
            }
        }
        if (!improved) {
            // line search exhausted: stationary up to machine precision
            res.converged = true;
            break;
        }
    }
    res.iterations = it;
    res.value = p.sigma;
    res.witness = std::move(u);
    return res;
}

} // namespace detail

/// Multi-start subgradient ascent of sigma_max([A, 1 (x) U]) on U(d2) with
/// polar retraction and step halving. Restart r starts from a Haar unitary
/// drawn from derive_seed(cfg.seed, r); the best restart wins, lowest index
/// on ties, so the result does not depend on `workers`.
inline DefectEstimate defect_lower_bound(const BipartiteOperator& a, const OptimizerConfig& cfg,
                                         unsigned workers = 1) {
    cfg.validate();
    if (!(op_norm(a.matrix()) > 0.0)) throw PreconditionError("defect_lower_bound: zero operator");

    std::vector<detail::AscentResult> runs(static_cast<std::size_t>(cfg.restarts));
    parallel_for(runs.size(), workers, [&](std::size_t r) {
        runs[r] = detail::ascend(a, cfg, haar_unitary(a.d2(), derive_seed(cfg.seed, r)));
    });

    std::size_t best = 0;
    for (std::size_t r = 1; r < runs.size(); ++r)
        if (runs[r].value > runs[best].value) best = r;

    DefectEstimate est;
    est.witness = std::move(runs[best].witness);
    est.value = commutator_norm(a, est.witness);
    est.restarts_used = cfg.restarts;
    est.converged = runs[best].converged;
    est.iterations = runs[best].iterations;
    return est;
}

/// Max of commutator_norm over n Haar unitaries drawn sequentially from one
/// stream, so a smaller n sees a prefix of the same samples.
inline DefectEstimate defect_sampled(const BipartiteOperator& a, Index n, RngSeed seed) {
    if (n < 1) throw PreconditionError("defect_sampled: n must be at least 1");
    auto engine = make_engine(seed);
    DefectEstimate est;
    est.value = -1.0;
    for (Index s = 0; s < n; ++s) {
        Matrix u = haar_unitary(a.d2(), engine);
        const double v = commutator_norm(a, u);
        if (v > est.value) {
            est.value = v;
            est.witness = std::move(u);
        }
    }
    est.restarts_used = static_cast<int>(n);
    est.converged = true;
    est.iterations = static_cast<int>(n);
    return est;
}

} // namespace locobs
