#pragma once

// Finite chains of sites with a product reference state. For a region L the
// map E_L = id_L (x) rho_{L^c} contracts every site outside L with its
// reference state and re-embeds the result, giving a compatible family
// E_L0 = E_L0 o E_L for L0 inside L.

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "locobs/defect.hpp"
#include "locobs/opcore.hpp"

namespace locobs {

/// Total Hilbert-space dimension exceeds what dense evolution can handle.
class DimensionGuardError : public std::length_error {
public:
    using std::length_error::length_error;
};

inline constexpr Index kMaxChainDimension = 4096;

class LatticeSystem {
public:
    LatticeSystem(std::vector<Index> site_dims, std::vector<DensityMatrix> site_states)
        : dims_(std::move(site_dims)), states_(std::move(site_states)) {
        if (dims_.empty()) throw DimensionError("lattice: at least one site is required");
        if (dims_.size() != states_.size())
            throw DimensionError("lattice: " + std::to_string(dims_.size()) + " site dimensions but " +
                                 std::to_string(states_.size()) + " site states");
        double total = 1.0;
        for (std::size_t x = 0; x < dims_.size(); ++x) {
            if (dims_[x] < 1) throw DimensionError("lattice: site " + std::to_string(x) + " has dimension < 1");
            if (states_[x].dim() != dims_[x])
                throw DimensionError("lattice: state of site " + std::to_string(x) + " has the wrong dimension");
            total *= static_cast<double>(dims_[x]);
        }
        if (total > static_cast<double>(kMaxChainDimension))
            throw DimensionGuardError("lattice: total dimension " + std::to_string(static_cast<long long>(total)) +
                                      " exceeds the " + std::to_string(kMaxChainDimension) + " guard");
        total_ = static_cast<Index>(total);
    }

    static LatticeSystem maximally_mixed(const std::vector<Index>& site_dims) {
        std::vector<DensityMatrix> states;
        states.reserve(site_dims.size());
        for (Index d : site_dims) {
            if (d < 1) throw DimensionError("lattice: site dimension < 1");
            states.push_back(DensityMatrix::maximally_mixed(d));
        }
        return LatticeSystem(site_dims, std::move(states));
    }

    std::size_t size() const noexcept { return dims_.size(); }
    Index dim(std::size_t site) const { return dims_.at(site); }
    const std::vector<Index>& dims() const noexcept { return dims_; }
    const DensityMatrix& state(std::size_t site) const { return states_.at(site); }
    Index total_dim() const noexcept { return total_; }

private:
    std::vector<Index> dims_;
    std::vector<DensityMatrix> states_;
    Index total_ = 1;
};

/// Sorted set of distinct site indices.
class Region {
public:
    Region() = default;

    explicit Region(std::vector<std::size_t> sites) : sites_(std::move(sites)) {
        std::sort(sites_.begin(), sites_.end());
        if (std::adjacent_find(sites_.begin(), sites_.end()) != sites_.end())
            throw DimensionError("region: duplicate site index");
    }

    /// Sites within path-graph distance `radius` of `center`, clipped to the chain.
    static Region ball(std::size_t center, std::size_t radius, std::size_t n_sites) {
        if (center >= n_sites) throw DimensionError("ball: center outside the chain");
        const std::size_t lo = center >= radius ? center - radius : 0;
        const std::size_t hi = std::min(n_sites - 1, center + radius);
        std::vector<std::size_t> s;
        for (std::size_t x = lo; x <= hi; ++x) s.push_back(x);
        return Region(std::move(s));
    }

    static Region all(std::size_t n_sites) { return ball(0, n_sites, n_sites); }

    const std::vector<std::size_t>& sites() const noexcept { return sites_; }
    bool contains(std::size_t x) const { return std::binary_search(sites_.begin(), sites_.end(), x); }
    std::size_t size() const noexcept { return sites_.size(); }

    void validate(const LatticeSystem& sys) const {
        if (!sites_.empty() && sites_.back() >= sys.size())
            throw DimensionError("region: site " + std::to_string(sites_.back()) + " outside a chain of " +
                                 std::to_string(sys.size()) + " sites");
    }

    friend bool operator==(const Region&, const Region&) = default;

private:
    std::vector<std::size_t> sites_;
};

namespace detail {

// Splits a full-chain flat index into a region part and a complement part:
// full = region_offset[r] + complement_offset[k], with r and k enumerating
// their factors in site order (first site most significant).
struct IndexSplit {
    std::vector<Index> region_offset;
    std::vector<Index> complement_offset;
    std::vector<std::size_t> complement_sites;
};

inline std::vector<Index> offsets_for(const LatticeSystem& sys, const std::vector<std::size_t>& sites) {
    std::vector<Index> stride(sys.size());
    Index s = 1;
    for (std::size_t x = sys.size(); x-- > 0;) {
        stride[x] = s;
        s *= sys.dim(x);
    }
    std::vector<Index> offs{0};
    for (std::size_t x : sites) {
        std::vector<Index> next;
        next.reserve(offs.size() * static_cast<std::size_t>(sys.dim(x)));
        for (Index base : offs)
            for (Index v = 0; v < sys.dim(x); ++v) next.push_back(base + v * stride[x]);
        offs = std::move(next);
    }
    return offs;
}

inline IndexSplit split(const Region& region, const LatticeSystem& sys) {
    region.validate(sys);
    IndexSplit out;
    for (std::size_t x = 0; x < sys.size(); ++x)
        if (!region.contains(x)) out.complement_sites.push_back(x);
    out.region_offset = offsets_for(sys, region.sites());
    out.complement_offset = offsets_for(sys, out.complement_sites);
    return out;
}

inline void require_full(const Matrix& a, const LatticeSystem& sys, const char* who) {
    if (a.rows() != sys.total_dim() || a.cols() != sys.total_dim())
        throw DimensionError(std::string(who) + ": operator is " + shape_str(a) + " but the chain has dimension " +
                             std::to_string(sys.total_dim()));
}

} // namespace detail

inline Index region_dim(const Region& region, const LatticeSystem& sys) {
    region.validate(sys);
    Index d = 1;
    for (std::size_t x : region.sites()) d *= sys.dim(x);
    return d;
}

/// a_loc (x) 1 on the complement, with factors in site order.
inline Matrix embed_region(const Matrix& a_loc, const Region& region, const LatticeSystem& sys) {
    const auto sp = detail::split(region, sys);
    const auto dr = static_cast<Index>(sp.region_offset.size());
    if (a_loc.rows() != dr || a_loc.cols() != dr)
        throw DimensionError("embed_region: operator is " + shape_str(a_loc) + " but the region has dimension " +
                             std::to_string(dr));
    Matrix out = Matrix::Zero(sys.total_dim(), sys.total_dim());
    for (Index k : sp.complement_offset)
        for (Index r = 0; r < dr; ++r)
            for (Index c = 0; c < dr; ++c) out(sp.region_offset[r] + k, sp.region_offset[c] + k) = a_loc(r, c);
    return out;
}

/// Reduced operator on the region: the complement is contracted with the
/// product of its reference states.
inline Matrix reduce_region(const Matrix& a, const Region& region, const LatticeSystem& sys) {
    detail::require_full(a, sys, "reduce_region");
    const auto sp = detail::split(region, sys);
    Matrix rho = Matrix::Identity(1, 1);
    for (std::size_t x : sp.complement_sites) rho = kron(rho, sys.state(x).matrix());

    const auto dr = static_cast<Index>(sp.region_offset.size());
    const auto dc = static_cast<Index>(sp.complement_offset.size());
    Matrix out = Matrix::Zero(dr, dr);
    // Tr(rho B) = sum_{k,l} rho(l,k) B(k,l)
    for (Index k = 0; k < dc; ++k)
        for (Index l = 0; l < dc; ++l) {
            const Complex w = rho(l, k);
            if (w == Complex(0.0, 0.0)) continue;
            const Index ok = sp.complement_offset[k];
            const Index ol = sp.complement_offset[l];
            for (Index r = 0; r < dr; ++r)
                for (Index c = 0; c < dr; ++c) out(r, c) += w * a(sp.region_offset[r] + ok, sp.region_offset[c] + ol);
        }
    return out;
}

/// E_L(a) = id_L (x) rho_{L^c}, as a full-chain operator.
inline Matrix e_region(const Matrix& a, const Region& region, const LatticeSystem& sys) {
    return embed_region(reduce_region(a, region, sys), region, sys);
}

/// Reorders the chain so that the region is the first tensor factor and its
/// complement the second.
inline BipartiteOperator to_bipartite(const Matrix& a, const Region& region, const LatticeSystem& sys) {
    detail::require_full(a, sys, "to_bipartite");
    const auto sp = detail::split(region, sys);
    const auto dr = static_cast<Index>(sp.region_offset.size());
    const auto dc = static_cast<Index>(sp.complement_offset.size());
    std::vector<Index> perm(static_cast<std::size_t>(dr * dc));
    for (Index r = 0; r < dr; ++r)
        for (Index k = 0; k < dc; ++k) perm[static_cast<std::size_t>(r * dc + k)] = sp.region_offset[r] + sp.complement_offset[k];
    Matrix out(dr * dc, dr * dc);
    for (Index i = 0; i < dr * dc; ++i)
        for (Index j = 0; j < dr * dc; ++j) out(i, j) = a(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    return BipartiteOperator(std::move(out), dr, dc);
}

/// Nearest-neighbour Hamiltonian sum_x h_{x,x+1}.
struct ChainHamiltonian {
    struct Term {
        std::size_t site;  ///< acts on (site, site+1)
        Matrix coupling;
    };
    std::vector<Term> terms;

    void validate(const LatticeSystem& sys) const {
        for (const auto& t : terms) {
            if (t.site + 1 >= sys.size()) throw DimensionError("hamiltonian: bond outside the chain");
            const Index d = sys.dim(t.site) * sys.dim(t.site + 1);
            if (t.coupling.rows() != d || t.coupling.cols() != d)
                throw DimensionError("hamiltonian: coupling on bond " + std::to_string(t.site) + " has the wrong size");
            if (!is_hermitian(t.coupling)) throw PreconditionError("hamiltonian: coupling is not Hermitian");
        }
    }

    Matrix dense(const LatticeSystem& sys) const {
        validate(sys);
        Matrix h = Matrix::Zero(sys.total_dim(), sys.total_dim());
        for (const auto& t : terms) h += embed_region(t.coupling, Region({t.site, t.site + 1}), sys);
        return h;
    }

    /// (sx sx + sy sy + sz sz)/4 on every bond of a spin-1/2 chain.
    static ChainHamiltonian heisenberg(const LatticeSystem& sys) {
        for (std::size_t x = 0; x < sys.size(); ++x)
            if (sys.dim(x) != 2) throw DimensionError("heisenberg: every site must be a qubit");
        Matrix sx(2, 2), sy(2, 2), sz(2, 2);
        sx << 0, 1, 1, 0;
        sy << 0, Complex(0, -1), Complex(0, 1), 0;
        sz << 1, 0, 0, -1;
        const Matrix bond = (kron(sx, sx) + kron(sy, sy) + kron(sz, sz)) / 4.0;
        ChainHamiltonian h;
        for (std::size_t x = 0; x + 1 < sys.size(); ++x) h.terms.push_back({x, bond});
        return h;
    }
};

/// Heisenberg picture e^{itH} a e^{-itH}.
inline Matrix evolve(const Matrix& a, const ChainHamiltonian& h, double t, const LatticeSystem& sys) {
    detail::require_full(a, sys, "evolve");
    const Matrix u = herm_expm(h.dense(sys), Complex(0.0, t));
    return u * a * u.adjoint();
}

struct CurvePoint {
    std::size_t radius;
    double error;  ///< ||E_{B_r}(a) - a||
};

inline std::vector<CurvePoint> localization_curve(const Matrix& a, std::size_t center, const LatticeSystem& sys,
                                                  const std::vector<std::size_t>& radii) {
    detail::require_full(a, sys, "localization_curve");
    if (center >= sys.size()) throw DimensionError("localization_curve: center outside the chain");
    if (!std::is_sorted(radii.begin(), radii.end()))
        throw DimensionError("localization_curve: radii must be sorted ascending");
    std::vector<CurvePoint> out;
    out.reserve(radii.size());
    for (std::size_t r : radii) {
        const Region ball = Region::ball(center, r, sys.size());
        out.push_back({r, op_norm(e_region(a, ball, sys) - a)});
    }
    return out;
}

/// Attained lower bound on sup_U ||[a, 1_L (x) U]|| over unitaries U on the
/// complement of L.
inline DefectEstimate complement_defect(const Matrix& a, const Region& region, const LatticeSystem& sys,
                                        const OptimizerConfig& cfg) {
    return defect_lower_bound(to_bipartite(a, region, sys), cfg);
}

} // namespace locobs
