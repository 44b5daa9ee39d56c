#pragma once

// Randomized invariant suite over the condexp, defect and quasilocal
// headers. Hard checks are exact identities or inequalities that must hold
// for every instance; soft checks depend on the optimizer reaching the
// supremum; negative controls are expected to fail the property they probe.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "locobs/condexp.hpp"
#include "locobs/defect.hpp"
#include "locobs/experiments.hpp"
#include "locobs/quasilocal.hpp"

namespace locobs {

enum class CheckKind { hard, soft, negative_control };

inline const char* to_string(CheckKind k) {
    switch (k) {
        case CheckKind::hard: return "hard";
        case CheckKind::soft: return "soft";
        case CheckKind::negative_control: return "negative-control";
    }
    return "?";
}

struct CheckResult {
    std::string suite;
    std::string name;
    CheckKind kind = CheckKind::hard;
    bool passed = false;
    double observed = 0.0;   ///< worst violation (or, for negative controls, the witness value)
    double tolerance = 0.0;
    int instances = 0;
};

struct CheckOptions {
    RngSeed seed{1};
    int instances = 20;
    OptimizerConfig optimizer{};
};

namespace detail {

// Runs body(engine) -> deviation over `n` instances and keeps the worst one.
template <typename Body>
double worst_over(int n, RngSeed seed, Body&& body) {
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        auto engine = make_engine(derive_seed(seed, static_cast<std::uint64_t>(i)));
        worst = std::max(worst, body(engine));
    }
    return worst;
}

inline BipartiteOperator random_bipartite(Index d1, Index d2, Engine& e) {
    return BipartiteOperator(ginibre(d1 * d2, d1 * d2, e), d1, d2);
}

inline Matrix swap_operator(Index d) {
    Matrix s = Matrix::Zero(d * d, d * d);
    for (Index i = 0; i < d; ++i)
        for (Index k = 0; k < d; ++k) s(i * d + k, k * d + i) = 1.0;
    return s;
}

inline std::vector<Region> all_regions(std::size_t n) {
    std::vector<Region> out;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        std::vector<std::size_t> s;
        for (std::size_t x = 0; x < n; ++x)
            if (mask & (1u << x)) s.push_back(x);
        out.emplace_back(std::move(s));
    }
    return out;
}

inline LatticeSystem random_lattice(const std::vector<Index>& dims, Engine& e) {
    std::vector<DensityMatrix> states;
    for (Index d : dims) states.push_back(DensityMatrix::wishart(d, e));
    return LatticeSystem(dims, std::move(states));
}

} // namespace detail

inline std::vector<CheckResult> run_invariant_checks(const CheckOptions& opt = {}) {
    std::vector<CheckResult> out;
    const int n = opt.instances;
    int tag = 0;
    auto add = [&](std::string suite, std::string name, CheckKind kind, double tol, auto&& body) {
        const RngSeed s = derive_seed(opt.seed, static_cast<std::uint64_t>(tag++));
        const double worst = detail::worst_over(n, s, body);
        out.push_back({std::move(suite), std::move(name), kind, worst <= tol, worst, tol, n});
    };
    const Index d1 = 2, d2 = 3;

    // --- condexp -------------------------------------------------------
    add("condexp", "unitality", CheckKind::hard, 1e-12, [&](Engine& e) {
        const Matrix ap = ginibre(d1, d1, e);
        const BipartiteOperator a = embed_left(ap, d2);
        const DensityMatrix rho = DensityMatrix::wishart(d2, e);
        return std::max(max_abs(e_tr(a) - ap), max_abs(e_rho(a, rho) - ap));
    });
    add("condexp", "bimodule", CheckKind::hard, 1e-12, [&](Engine& e) {
        const BipartiteOperator a = detail::random_bipartite(d1, d2, e);
        const Matrix c = ginibre(d1, d1, e), d = ginibre(d1, d1, e);
        const DensityMatrix rho = DensityMatrix::wishart(d2, e);
        const Matrix cl = embed_left(c, d2).matrix(), dl = embed_left(d, d2).matrix();
        const BipartiteOperator cad(cl * a.matrix() * dl, d1, d2);
        return std::max(op_norm(e_tr(cad) - c * e_tr(a) * d), op_norm(e_rho(cad, rho) - c * e_rho(a, rho) * d));
    });
    add("condexp", "bimodule_projected", CheckKind::hard, 1e-12, [&](Engine& e) {
        const BipartiteOperator a = detail::random_bipartite(d1, d2, e);
        const ProjectedSubgroup sub = ProjectedSubgroup::from_frame(haar_unitary(d2, e), 2);
        auto commuting = [&] {
            // X (x) P + (1 (x) K) Z (1 (x) K*) commutes with 1 (x) U(P)
            const Matrix k = sub.kernel_basis();
            const Matrix z = ginibre(d1 * k.cols(), d1 * k.cols(), e);
            const Matrix lift = kron(Matrix::Identity(d1, d1), k);
            return Matrix(kron(ginibre(d1, d1, e), sub.projector()) + lift * z * lift.adjoint());
        };
        const Matrix c = commuting(), d = commuting();
        const BipartiteOperator cad(c * a.matrix() * d, d1, d2);
        return op_norm(exact_projected_twirl(cad, sub).matrix() - c * exact_projected_twirl(a, sub).matrix() * d);
    });
    add("condexp", "contractivity", CheckKind::hard, 1e-12, [&](Engine& e) {
        const BipartiteOperator a = detail::random_bipartite(d1, d2, e);
        const DensityMatrix rho = DensityMatrix::wishart(d2, e);
        const ProjectedSubgroup sub = ProjectedSubgroup::from_frame(haar_unitary(d2, e), 2);
        const double na = op_norm(a.matrix());
        return std::max({0.0, op_norm(e_rho(a, rho)) - na, op_norm(e_tr(a)) - na,
                         op_norm(exact_projected_twirl(a, sub).matrix()) - na});
    });
    add("condexp", "projected_twirl_extremes", CheckKind::hard, 1e-12, [&](Engine& e) {
        const BipartiteOperator a = detail::random_bipartite(d1, d2, e);
        const Matrix w = haar_unitary(d2, e);
        const double full = max_abs(exact_projected_twirl(a, ProjectedSubgroup::from_frame(w, d2)).matrix() -
                                    embed_left(e_tr(a), d2).matrix());
        const double none = max_abs(exact_projected_twirl(a, ProjectedSubgroup::from_frame(w, 0)).matrix() - a.matrix());
        return std::max(full, none);
    });
    add("condexp", "nested_subgroup_commutation", CheckKind::hard, 1e-10, [&](Engine& e) {
        const Index dd = 4;
        const BipartiteOperator a = detail::random_bipartite(d1, dd, e);
        const Matrix w = haar_unitary(dd, e);
        std::uniform_int_distribution<Index> pick(1, dd);
        const Index rp = pick(e);
        std::uniform_int_distribution<Index> pick_q(0, rp);
        const Index rq = pick_q(e);
        const Matrix ep = exact_projected_twirl(a, ProjectedSubgroup::from_frame(w, rp)).matrix();
        const Matrix u = embed_right(d1, ProjectedSubgroup::from_frame(w, rq).sample(e));
        return op_norm(u * ep - ep * u);
    });
    add("condexp", "chain_inequality", CheckKind::hard, kChainTol, [&](Engine& e) {
        const BipartiteOperator a = detail::random_bipartite(d1, d2, e);
        const DensityMatrix rho = DensityMatrix::wishart(d2, e);
        return std::max(0.0, slice_error(a, rho) - 2.0 * tracial_error(a));
    });
    add("condexp", "sampled_twirl_triangle", CheckKind::hard, kTriangleTol, [&](Engine& e) {
        const BipartiteOperator a = detail::random_bipartite(3, 3, e);
        const TwirlEstimate tw = mc_twirl(a, 50, RngSeed{e()});
        return std::max(0.0, op_norm(a.matrix() - tw.average.matrix()) - tw.max_commutator_norm);
    });
    add("condexp", "cp_tracial_and_slice", CheckKind::hard, 1e-10, [&](Engine& e) {
        const DensityMatrix rho = DensityMatrix::wishart(d2, e);
        const double tr = choi_of_map([&](const Matrix& x) { return e_tr(BipartiteOperator(x, d1, d2)); },
                                      d1 * d2, d1).min_eigenvalue();
        const double sl = choi_of_map([&](const Matrix& x) { return e_rho(BipartiteOperator(x, d1, d2), rho); },
                                      d1 * d2, d1).min_eigenvalue();
        return std::max(0.0, -std::min(tr, sl));
    });
    {
        // The transpose map is positive but not completely positive; its
        // Choi matrix is the swap with eigenvalue -1.
        const double min_eig =
            choi_of_map([](const Matrix& x) { return Matrix(x.transpose()); }, 2, 2).min_eigenvalue();
        out.push_back({"condexp", "transpose_not_cp", CheckKind::negative_control, min_eig < -0.4, min_eig, -0.4, 1});
    }

    // --- defect --------------------------------------------------------
    OptimizerConfig cfg = opt.optimizer;
    add("defect", "witness_consistency", CheckKind::hard, 1e-10, [&](Engine& e) {
        const BipartiteOperator a = detail::random_bipartite(2, 2, e);
        OptimizerConfig c = cfg;
        c.seed = RngSeed{e()};
        const DefectEstimate est = defect_lower_bound(a, c);
        const double range = std::max(0.0, est.value - 2.0 * op_norm(a.matrix()));
        return std::max({std::abs(est.value - commutator_norm(a, est.witness)), range,
                         is_unitary(est.witness) ? 0.0 : 1.0});
    });
    add("defect", "swap_saturation", CheckKind::soft, 1e-6, [&](Engine& e) {
        OptimizerConfig c = cfg;
        c.seed = RngSeed{e()};
        double worst = 0.0;
        for (Index d : {2, 3}) {
            const BipartiteOperator s(detail::swap_operator(d), d, d);
            worst = std::max(worst, std::abs(defect_lower_bound(s, c).value - 2.0));
        }
        return worst;
    });
    add("defect", "tracial_error_below_defect", CheckKind::soft, kDefectTol, [&](Engine& e) {
        double worst = 0.0;
        for (auto [p, q] : {std::pair<Index, Index>{2, 2}, {3, 3}, {2, 5}}) {
            const BipartiteOperator a = detail::random_bipartite(p, q, e);
            OptimizerConfig c = cfg;
            c.seed = RngSeed{e()};
            double v = defect_lower_bound(a, c).value;
            if (tracial_error(a) > v + kDefectTol) {
                c.restarts *= 5;
                v = std::max(v, defect_lower_bound(a, c).value);
            }
            worst = std::max(worst, tracial_error(a) - v);
        }
        return worst;
    });
    add("defect", "first_factor_invariance", CheckKind::soft, 1e-6, [&](Engine& e) {
        const BipartiteOperator a = detail::random_bipartite(2, 2, e);
        const Matrix v = embed_left(haar_unitary(2, e), 2).matrix();
        const Matrix w = embed_left(haar_unitary(2, e), 2).matrix();
        OptimizerConfig c = cfg;
        c.seed = RngSeed{e()};
        const double base = defect_lower_bound(a, c).value;
        const double moved = defect_lower_bound(BipartiteOperator(v * a.matrix() * w, 2, 2), c).value;
        return std::abs(base - moved);
    });

    // --- quasilocal ----------------------------------------------------
    const std::vector<Index> chain{2, 3, 2, 2};
    const auto regions = detail::all_regions(chain.size());
    add("quasilocal", "compatibility", CheckKind::hard, 1e-12, [&](Engine& e) {
        const LatticeSystem sys = detail::random_lattice(chain, e);
        const Matrix a = ginibre(sys.total_dim(), sys.total_dim(), e);
        double worst = 0.0;
        for (const Region& big : regions) {
            const Matrix outer = e_region(a, big, sys);
            for (const Region& small : regions) {
                if (!std::includes(big.sites().begin(), big.sites().end(), small.sites().begin(), small.sites().end()))
                    continue;
                worst = std::max(worst, op_norm(e_region(outer, small, sys) - e_region(a, small, sys)));
            }
        }
        return worst;
    });
    add("quasilocal", "contraction_fixing_bimodule", CheckKind::hard, 1e-12, [&](Engine& e) {
        const LatticeSystem sys = detail::random_lattice({2, 3, 2}, e);
        const Matrix a = ginibre(sys.total_dim(), sys.total_dim(), e);
        double worst = 0.0;
        for (const Region& r : detail::all_regions(3)) {
            const Index dr = region_dim(r, sys);
            const Matrix x = embed_region(ginibre(dr, dr, e), r, sys);
            const Matrix c = embed_region(ginibre(dr, dr, e), r, sys);
            const Matrix d = embed_region(ginibre(dr, dr, e), r, sys);
            worst = std::max({worst, op_norm(e_region(a, r, sys)) - op_norm(a),
                              op_norm(e_region(x, r, sys) - x),
                              op_norm(e_region(c * a * d, r, sys) - c * e_region(a, r, sys) * d)});
        }
        return std::max(0.0, worst);
    });
    add("quasilocal", "localization_bound", CheckKind::soft, 1e-3, [&](Engine& e) {
        const LatticeSystem sys = detail::random_lattice({2, 2, 2}, e);
        const Matrix a = ginibre(sys.total_dim(), sys.total_dim(), e);
        OptimizerConfig c = cfg;
        c.seed = RngSeed{e()};
        double worst = 0.0;
        for (const Region& r : {Region({0}), Region({1}), Region({0, 1})}) {
            double eps = complement_defect(a, r, sys, c).value;
            const double err = op_norm(e_region(a, r, sys) - a);
            if (err > 2.0 * eps + 1e-3) {
                OptimizerConfig more = c;
                more.restarts *= 5;
                eps = std::max(eps, complement_defect(a, r, sys, more).value);
            }
            worst = std::max(worst, err - 2.0 * eps);
        }
        return worst;
    });
    return out;
}

inline bool hard_checks_pass(const std::vector<CheckResult>& rows) {
    return std::all_of(rows.begin(), rows.end(),
                       [](const CheckResult& r) { return r.kind != CheckKind::hard || r.passed; });
}

} // namespace locobs
