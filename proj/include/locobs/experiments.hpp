#pragma once

// Random-matrix campaigns around the approximation bounds:
//
//  * factor-2 trials: for Ginibre A on C^d1 (x) C^d2 and a pure reference
//    state rho, compare delta = ||E_rho(A) (x) 1 - A|| with the largest twirl
//    gap ||A - (1 (x) U*) A (1 (x) U)|| the optimizer can find. Success means
//    some U reaches delta, i.e. the bound holds for A without the factor 2.
//  * bound suites: the exact chain inequality
//    ||E_rho(A) (x) 1 - A|| <= 2 ||E_tr(A) (x) 1 - A||, the tracial bound
//    against the optimized defect, and the sampled-twirl triangle bound.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <limits>
#include <vector>

#include "locobs/condexp.hpp"
#include "locobs/defect.hpp"
#include "locobs/parallel.hpp"

namespace locobs {

inline constexpr double kSuccessTol = 1e-9;
inline constexpr double kChainTol = 1e-10;
inline constexpr double kDefectTol = 1e-4;
inline constexpr double kTriangleTol = 1e-10;

struct TrialRecord {
    std::int64_t trial_id = 0;
    RngSeed seed{};
    double delta = 0.0;     ///< ||E_rho(A) (x) 1 - A||
    double best_gap = 0.0;  ///< best ||A - (1 (x) U*) A (1 (x) U)|| found
    bool success = false;   ///< best_gap >= delta - kSuccessTol
    double ratio = 0.0;     ///< best_gap / delta, 0 when delta == 0
    Matrix witness;         ///< the U attaining best_gap
};

struct CampaignReport {
    Index d1 = 0;
    Index d2 = 0;
    std::int64_t n_trials = 0;
    std::int64_t n_success = 0;
    double min_ratio = 0.0;
    double median_ratio = 0.0;
    double max_ratio = 0.0;
    RngSeed base_seed{};
    OptimizerConfig optimizer;
    double wall_seconds = 0.0;  ///< not part of the canonical serialization
    std::vector<TrialRecord> trials;
};

/// ||E_rho(A) (x) 1 - A||.
inline double slice_error(const BipartiteOperator& a, const DensityMatrix& rho) {
    return op_norm(embed_left(e_rho(a, rho), a.d2()).matrix() - a.matrix());
}

/// ||E_tr(A) (x) 1 - A||.
inline double tracial_error(const BipartiteOperator& a) {
    return op_norm(embed_left(e_tr(a), a.d2()).matrix() - a.matrix());
}

/// One factor-2 trial on a given operator with rho = |0><0| on H2.
inline TrialRecord factor2_trial_on(const BipartiteOperator& a, RngSeed seed, const OptimizerConfig& cfg,
                                    std::int64_t trial_id = 0) {
    TrialRecord rec;
    rec.trial_id = trial_id;
    rec.seed = seed;
    rec.delta = slice_error(a, DensityMatrix::pure_basis(a.d2(), 0));
    DefectEstimate est = defect_lower_bound(a, cfg);
    rec.best_gap = est.value;
    rec.witness = std::move(est.witness);
    rec.success = rec.best_gap >= rec.delta - kSuccessTol;
    rec.ratio = rec.delta > 0.0 ? rec.best_gap / rec.delta : 0.0;
    return rec;
}

/// Factor-2 trial on A = ginibre(d1*d2, d1*d2, seed).
inline TrialRecord factor2_trial(Index d1, Index d2, RngSeed seed, const OptimizerConfig& cfg,
                                 std::int64_t trial_id = 0) {
    if (d1 < 2 || d2 < 2) throw PreconditionError("factor2_trial: d1 and d2 must be at least 2");
    return factor2_trial_on(BipartiteOperator(ginibre(d1 * d2, d1 * d2, seed), d1, d2), seed, cfg, trial_id);
}

inline double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Trial i uses seed derive_seed(base_seed, i) for the operator and
/// derive_seed(trial seed, cfg.seed) for the optimizer. Trials run on up to
/// `workers` threads; the report does not depend on the worker count.
inline CampaignReport factor2_campaign(Index d1, Index d2, std::int64_t n_trials, RngSeed base_seed,
                                       const OptimizerConfig& cfg, unsigned workers = 1) {
    if (n_trials < 1) throw PreconditionError("factor2_campaign: n_trials must be at least 1");
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();

    CampaignReport rep;
    rep.d1 = d1;
    rep.d2 = d2;
    rep.n_trials = n_trials;
    rep.base_seed = base_seed;
    rep.optimizer = cfg;
    rep.trials.resize(static_cast<std::size_t>(n_trials));
    parallel_for(rep.trials.size(), workers, [&](std::size_t i) {
        const RngSeed s = derive_seed(base_seed, i);
        OptimizerConfig trial_cfg = cfg;
        trial_cfg.seed = derive_seed(s, cfg.seed.value);
        rep.trials[i] = factor2_trial(d1, d2, s, trial_cfg, static_cast<std::int64_t>(i));
    });

    std::vector<double> ratios;
    for (const auto& t : rep.trials) {
        if (t.success) ++rep.n_success;
        if (t.delta > 0.0) ratios.push_back(t.ratio);
    }
    if (!ratios.empty()) {
        const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
        rep.min_ratio = *lo;
        rep.max_ratio = *hi;
        rep.median_ratio = median_of(ratios);
    }
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

/// Both sides of the three bound checks for one (A, rho) instance.
struct BoundInstance {
    double chain_lhs = 0.0;     ///< ||E_rho(A) (x) 1 - A||
    double chain_rhs = 0.0;     ///< 2 ||E_tr(A) (x) 1 - A||
    double defect_lhs = 0.0;     ///< ||E_tr(A) (x) 1 - A||
    double defect_rhs = 0.0;     ///< defect lower bound
    double triangle_lhs = 0.0;  ///< ||A - A_N||
    double triangle_rhs = 0.0;  ///< max_i ||[A, 1 (x) U_i]||
    bool defect_rerun = false;

    double chain_margin() const { return chain_rhs + kChainTol - chain_lhs; }
    double defect_margin() const { return defect_rhs + kDefectTol - defect_lhs; }
    double triangle_margin() const { return triangle_rhs + kTriangleTol - triangle_lhs; }
};

inline constexpr Index kBoundTwirlSamples = 50;

/// Evaluates the three checks. A failing tracial-vs-defect check is rerun
/// with five times the restarts before it is reported, since the defect is
/// only an attained lower bound.
inline BoundInstance check_bounds(const BipartiteOperator& a, const DensityMatrix& rho, const OptimizerConfig& cfg,
                                  RngSeed twirl_seed) {
    BoundInstance b;
    b.defect_lhs = tracial_error(a);
    b.chain_lhs = slice_error(a, rho);
    b.chain_rhs = 2.0 * b.defect_lhs;
    b.defect_rhs = op_norm(a.matrix()) > 0.0 ? defect_lower_bound(a, cfg).value : 0.0;
    if (b.defect_margin() < 0.0) {
        OptimizerConfig more = cfg;
        more.restarts *= 5;
        b.defect_rhs = std::max(b.defect_rhs, defect_lower_bound(a, more).value);
        b.defect_rerun = true;
    }
    const TwirlEstimate tw = mc_twirl(a, kBoundTwirlSamples, twirl_seed);
    b.triangle_lhs = op_norm(a.matrix() - tw.average.matrix());
    b.triangle_rhs = tw.max_commutator_norm;
    return b;
}

struct BoundDimsResult {
    Index d1 = 0;
    Index d2 = 0;
    std::int64_t n = 0;
    std::int64_t chain_pass = 0;
    std::int64_t defect_pass = 0;
    std::int64_t defect_reruns = 0;
    std::int64_t triangle_pass = 0;
    double worst_chain_margin = 0.0;
    double worst_defect_margin = 0.0;
    double worst_triangle_margin = 0.0;
};

struct BoundSuiteReport {
    std::vector<BoundDimsResult> dims;

    bool chain_all_pass() const {
        return std::all_of(dims.begin(), dims.end(), [](const auto& d) { return d.chain_pass == d.n; });
    }
};

/// Random Ginibre A and normalized-Wishart rho per instance; instance i of
/// dims entry k draws everything from derive_seed(derive_seed(base_seed, k), i).
inline BoundSuiteReport bound_suite(const std::vector<std::pair<Index, Index>>& dims, std::int64_t n_per_dim,
                                    RngSeed base_seed, const OptimizerConfig& cfg, unsigned workers = 1) {
    cfg.validate();
    if (n_per_dim < 1) throw PreconditionError("bound_suite: n must be at least 1");
    BoundSuiteReport rep;
    for (std::size_t k = 0; k < dims.size(); ++k) {
        const auto [d1, d2] = dims[k];
        if (d1 < 1 || d2 < 1 || d1 * d2 > 64)
            throw PreconditionError("bound_suite: total dimension must lie in [1, 64]");
        const RngSeed dim_seed = derive_seed(base_seed, k);
        std::vector<BoundInstance> inst(static_cast<std::size_t>(n_per_dim));
        parallel_for(inst.size(), workers, [&](std::size_t i) {
            const RngSeed s = derive_seed(dim_seed, i);
            auto engine = make_engine(derive_seed(s, 1));
            const BipartiteOperator a(ginibre(d1 * d2, d1 * d2, derive_seed(s, 0)), d1, d2);
            const DensityMatrix rho = DensityMatrix::wishart(d2, engine);
            OptimizerConfig c = cfg;
            c.seed = derive_seed(s, 3);
            inst[i] = check_bounds(a, rho, c, derive_seed(s, 2));
        });

        BoundDimsResult r;
        r.d1 = d1;
        r.d2 = d2;
        r.n = n_per_dim;
        r.worst_chain_margin = r.worst_defect_margin = r.worst_triangle_margin = std::numeric_limits<double>::infinity();
        for (const auto& b : inst) {
            r.chain_pass += b.chain_margin() >= 0.0;
            r.defect_pass += b.defect_margin() >= 0.0;
            r.defect_reruns += b.defect_rerun;
            r.triangle_pass += b.triangle_margin() >= 0.0;
            r.worst_chain_margin = std::min(r.worst_chain_margin, b.chain_margin());
            r.worst_defect_margin = std::min(r.worst_defect_margin, b.defect_margin());
            r.worst_triangle_margin = std::min(r.worst_triangle_margin, b.triangle_margin());
        }
        rep.dims.push_back(r);
    }
    return rep;
}

} // namespace locobs
