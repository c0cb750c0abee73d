#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "linalg.hpp"
#include "paths.hpp"
#include "phases.hpp"
#include "states.hpp"

namespace decphase {

// Brute-force cross-check in an enlarged Hilbert space. Everything here works
// on explicitly built product-space operators and state vectors, so none of it
// shares a code path with the ensemble functionals it is used to verify.

inline constexpr int kDefaultLiftCap = 256;

// Pure state on system x ancilla_a x ancilla_b with dimensions N, M, N*M.
// Component index layout: flat = (s*M + a)*(N*M) + b, and the b level paired
// with member k, eigenvector l is b = k*N + l.
struct LiftedState {
    ComplexVector amplitudes;
    int system_dim = 0;
    int component_count = 0;

    int b_dim() const { return system_dim * component_count; }
    int total_dim() const { return system_dim * component_count * b_dim(); }
};

// Purify an ensemble: sqrt(w_k) sqrt(m_l^k) |k_l> |a_k> |b_kl| summed over
// members k and member eigenvectors l. Tracing out both ancillas returns the
// mixture; tracing out only ancilla_b returns the block embedding.
inline LiftedState lift(const Decomposition& d, int dim_cap = kDefaultLiftCap) {
    const int n = d.dim();
    const int m = d.size();
    const long total = static_cast<long>(n) * m * n * m;
    if (total > dim_cap)
        throw ValidationError("lift: enlarged dimension " + std::to_string(total) +
                              " exceeds cap " + std::to_string(dim_cap));
    LiftedState psi;
    psi.system_dim = n;
    psi.component_count = m;
    psi.amplitudes = ComplexVector::Zero(static_cast<int>(total));
    const int bd = n * m;
    for (int k = 0; k < m; ++k) {
        const EigenSystem& spec = d.component(k).nondegenerate_spectrum();
        const double wk = std::sqrt(d.weight(k));
        for (int l = 0; l < n; ++l) {
            const double ml = std::sqrt(std::max(spec.values(l), 0.0));
            const int b = k * n + l;
            for (int s = 0; s < n; ++s)
                psi.amplitudes((s * m + k) * bd + b) += wk * ml * spec.vectors(s, l);
        }
    }
    return psi;
}

// Apply sum_k U_k(t_j) (x) |a_k><a_k| (x) 1_b to a lifted state: each
// (ancilla_a = k, ancilla_b = b) system slice rotates under member k's node
// unitary. t_index 0 leaves the state untouched by construction.
inline LiftedState evolve_lift(const LiftedState& psi, const DecompositionPath& dp, int t_index) {
    if (psi.system_dim != dp.dim() || psi.component_count != dp.size())
        throw DimensionMismatch("evolve_lift: lifted state does not match the ensemble");
    if (t_index < 0 || t_index >= dp.path(0).nodes())
        throw IndexOutOfRange("evolve_lift: node index");
    const int n = psi.system_dim;
    const int m = psi.component_count;
    const int bd = psi.b_dim();
    LiftedState out = psi;
    ComplexVector slice(n);
    for (int k = 0; k < m; ++k) {
        const ComplexMatrix& u = dp.path(k).unitary(t_index);
        for (int b = 0; b < bd; ++b) {
            for (int s = 0; s < n; ++s) slice(s) = psi.amplitudes((s * m + k) * bd + b);
            const ComplexVector rotated = u * slice;
            for (int s = 0; s < n; ++s) out.amplitudes((s * m + k) * bd + b) = rotated(s);
        }
    }
    return out;
}

// <psi(0)|psi(t)> as a phase result: the interference of the purification with
// its evolved copy.
inline PhaseResult lift_overlap_phase(const Decomposition& d, const DecompositionPath& dp,
                                      int t_index, int dim_cap = kDefaultLiftCap) {
    const LiftedState psi = lift(d, dim_cap);
    const LiftedState moved = evolve_lift(psi, dp, t_index);
    return detail::make_phase_result({psi.amplitudes.dot(moved.amplitudes)},
                                     "lift_overlap_phase");
}

// Relative phase computed on system x ancilla_a operators: build the block
// embedding and the block-diagonal endpoint unitary explicitly, then trace.
inline PhaseResult enlarged_relative_phase(const Decomposition& d, const DecompositionPath& dp) {
    if (d.dim() != dp.dim() || d.size() != dp.size())
        throw DimensionMismatch("enlarged_relative_phase: ensemble and paths do not match");
    const int m = d.size();
    const ComplexMatrix rho_sa = embed(d).matrix();
    ComplexMatrix u_sa = ComplexMatrix::Zero(rho_sa.rows(), rho_sa.cols());
    for (int k = 0; k < m; ++k) {
        ComplexMatrix ekk = ComplexMatrix::Zero(m, m);
        ekk(k, k) = 1.0;
        u_sa += kron(dp.path(k).endpoint(), ekk);
    }
    return detail::make_phase_result({(rho_sa * u_sa).trace()}, "enlarged_relative_phase");
}

// Whether the ensemble phase can be produced by a single interference term:
// returns (sum_k w_k^2, 1). Equality holds exactly when one weight is 1, so a
// strict gap certifies the obstruction.
inline std::pair<double, double> one_term_obstruction(const Decomposition& d) {
    const ComplexMatrix rho_sa = embed(d).matrix();
    const ComplexMatrix ancilla = partial_trace(rho_sa, {d.dim(), d.size()}, {1});
    return {(ancilla * ancilla).trace().real(), 1.0};
}

}  // namespace decphase
