#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "linalg.hpp"
#include "paths.hpp"
#include "states.hpp"

namespace decphase {

inline constexpr double kVisibilityFloor = 1e-9;  // below this, arguments carry no information

// Interference sum broken into its contributions. `phase` is the principal
// argument of the term sum, `magnitude` its modulus (the visibility of the
// interference fringe the sum describes).
struct PhaseResult {
    double phase = 0.0;
    double magnitude = 0.0;
    std::vector<cxd> terms;
};

namespace detail {

inline PhaseResult make_phase_result(std::vector<cxd> terms, const std::string& where) {
    cxd sum = 0.0;
    for (const cxd& t : terms) sum += t;
    PhaseResult r;
    r.magnitude = std::abs(sum);
    if (r.magnitude < kVisibilityFloor)
        throw UndefinedPhase(where + ": interference magnitude " + std::to_string(r.magnitude) +
                             " below the visibility floor",
                             r.magnitude);
    r.phase = normalize_angle(std::arg(sum));
    r.terms = std::move(terms);
    return r;
}

// Per-eigenvector contributions w_l <l|U(tau)|l> exp(-int <l|U†Udot|l> dt).
// Shared by every geometric functional so single-member reductions agree
// bit-for-bit with the mixed-state evaluation.
inline std::vector<cxd> geometric_terms(const DensityOperator& rho, const UnitaryPath& path) {
    if (rho.dim() != path.dim())
        throw DimensionMismatch("geometric phase: state and path dimensions differ");
    const EigenSystem& spec = rho.nondegenerate_spectrum();
    const ComplexMatrix& basis = spec.vectors;
    const ComplexVector factors = accumulated_phase_factors(path, basis);
    const ComplexMatrix endpoint_in_basis = basis.adjoint() * path.endpoint() * basis;
    std::vector<cxd> terms(rho.dim());
    for (int l = 0; l < rho.dim(); ++l)
        terms[l] = spec.values(l) * endpoint_in_basis(l, l) * factors(l);
    return terms;
}

}  // namespace detail

// ---------------- endpoint functionals ----------------

// arg Tr(rho U): the interference phase the initial state picks up against its
// unitarily moved copy. Terms are listed per eigenvector of rho.
inline PhaseResult pancharatnam_phase(const DensityOperator& rho, const ComplexMatrix& u) {
    require_square(u, "pancharatnam_phase");
    if (u.rows() != rho.dim()) throw DimensionMismatch("pancharatnam_phase: dimension mismatch");
    const double ures = unitarity_residual(u);
    if (ures > kUnitaryTol)
        throw ValidationError("pancharatnam_phase: operator is not unitary (residual " +
                              std::to_string(ures) + ")");
    const EigenSystem& spec = rho.spectrum();
    const ComplexMatrix in_basis = spec.vectors.adjoint() * u * spec.vectors;
    std::vector<cxd> terms(rho.dim());
    for (int l = 0; l < rho.dim(); ++l) terms[l] = spec.values(l) * in_basis(l, l);
    return detail::make_phase_result(std::move(terms), "pancharatnam_phase");
}

// Geometric phase of a single state under one path: endpoint overlaps weighted
// by the accumulated connection factors, summed over the spectrum.
inline PhaseResult mixed_geometric_phase(const DensityOperator& rho, const UnitaryPath& path) {
    return detail::make_phase_result(detail::geometric_terms(rho, path),
                                     "mixed_geometric_phase");
}

// ---------------- decomposition functionals ----------------

// arg sum_k w_k Tr(rho_k U_k(tau)): relative phase of the evolving ensemble.
inline PhaseResult decomposition_relative_phase(const DecompositionPath& dp) {
    std::vector<cxd> terms(dp.size());
    for (int k = 0; k < dp.size(); ++k)
        terms[k] = dp.decomposition().weight(k) *
                   (dp.decomposition().component(k).matrix() * dp.path(k).endpoint()).trace();
    return detail::make_phase_result(std::move(terms), "decomposition_relative_phase");
}

// Geometric phase of the ensemble: member terms scaled by their weights,
// flattened in member-major order.
inline PhaseResult decomposition_geometric_phase(const DecompositionPath& dp) {
    std::vector<cxd> terms;
    terms.reserve(static_cast<std::size_t>(dp.size()) * dp.dim());
    for (int k = 0; k < dp.size(); ++k) {
        const std::vector<cxd> member =
            detail::geometric_terms(dp.decomposition().component(k), dp.path(k));
        const double w = dp.decomposition().weight(k);
        for (const cxd& t : member) terms.push_back(w * t);
    }
    return detail::make_phase_result(std::move(terms), "decomposition_geometric_phase");
}

// ---------------- operation-sum (Kraus) views ----------------

// sqrt(w_k) Tr(rho U_k(t_j)): magnitude and phase of one operation branch at a
// grid node.
inline PhaseResult kraus_relative_phase(const DensityOperator& rho, double weight,
                                        const UnitaryPath& path, int t_index) {
    if (rho.dim() != path.dim())
        throw DimensionMismatch("kraus_relative_phase: dimension mismatch");
    if (!(weight >= 0.0) || weight > 1.0 + kTraceTol)
        throw ValidationError("kraus_relative_phase: weight outside [0, 1]");
    if (t_index < 0 || t_index >= path.nodes())
        throw IndexOutOfRange("kraus_relative_phase: node index");
    const cxd z = std::sqrt(weight) * (rho.matrix() * path.unitary(t_index)).trace();
    return detail::make_phase_result({z}, "kraus_relative_phase");
}

// Geometric phase collected along one operation branch. Identical code path to
// mixed_geometric_phase by construction.
inline PhaseResult per_kraus_geometric_phase(const DensityOperator& rho, const UnitaryPath& path) {
    return detail::make_phase_result(detail::geometric_terms(rho, path),
                                     "per_kraus_geometric_phase");
}

// Fringe visibility of one branch: the modulus of the geometric term sum.
// Never throws for small values; a vanishing visibility is the answer.
inline double visibility(const DensityOperator& rho, const UnitaryPath& path) {
    cxd sum = 0.0;
    for (const cxd& t : detail::geometric_terms(rho, path)) sum += t;
    const double v = std::abs(sum);
    if (v > 1.0 + kUnitaryTol)
        throw Error("visibility: modulus " + std::to_string(v) + " exceeds 1 beyond tolerance");
    return v;
}

// Largest deviation of sum_k w_k U_k†(t_j) U_k(t_j) from the identity over all
// grid nodes: the completeness defect of the branch family.
inline double kraus_completeness_residual(const std::vector<double>& weights,
                                          const std::vector<UnitaryPath>& paths) {
    if (weights.empty() || weights.size() != paths.size())
        throw DimensionMismatch("kraus_completeness_residual: weights and paths must match");
    const int n = paths.front().dim();
    const int nodes = paths.front().nodes();
    for (const auto& p : paths) {
        if (p.dim() != n) throw DimensionMismatch("kraus_completeness_residual: dimensions differ");
        if (p.nodes() != nodes) throw GridMismatch("kraus_completeness_residual: grids differ");
    }
    double res = 0.0;
    for (int j = 0; j < nodes; ++j) {
        ComplexMatrix acc = ComplexMatrix::Zero(n, n);
        for (std::size_t k = 0; k < paths.size(); ++k)
            acc += weights[k] * (paths[k].unitary(j).adjoint() * paths[k].unitary(j));
        res = std::max(res, max_abs(acc - ComplexMatrix::Identity(n, n)));
    }
    return res;
}

// Geometric phase of the channel t -> sum_k w_k U_k(t) rho U_k(t)†: the
// ensemble functional with every member equal to the channel input.
inline PhaseResult cp_geometric_phase(const DensityOperator& rho,
                                      const std::vector<double>& weights,
                                      const std::vector<UnitaryPath>& paths) {
    if (weights.size() != paths.size())
        throw DimensionMismatch("cp_geometric_phase: weights and paths must match");
    std::vector<DensityOperator> comps(weights.size(), rho);
    Decomposition d(weights, std::move(comps));
    return decomposition_geometric_phase(DecompositionPath(std::move(d), paths));
}

// arg sum_k w_k r_k e^{i gamma_k}: recombine branch visibilities and phases
// into the ensemble phase.
inline PhaseResult recombine(const std::vector<double>& weights,
                             const std::vector<double>& magnitudes,
                             const std::vector<double>& angles) {
    if (weights.empty() || weights.size() != magnitudes.size() || weights.size() != angles.size())
        throw DimensionMismatch("recombine: weights, magnitudes and angles must match");
    std::vector<cxd> terms(weights.size());
    for (std::size_t k = 0; k < weights.size(); ++k) {
        if (!(weights[k] >= 0.0) || !(magnitudes[k] >= 0.0))
            throw ValidationError("recombine: weights and magnitudes must be nonnegative");
        terms[k] = weights[k] * magnitudes[k] * std::exp(kI * angles[k]);
    }
    return detail::make_phase_result(std::move(terms), "recombine");
}

}  // namespace decphase
