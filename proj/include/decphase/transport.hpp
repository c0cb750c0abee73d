#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "linalg.hpp"
#include "paths.hpp"
#include "random.hpp"
#include "states.hpp"

namespace decphase {

inline constexpr double kTransportTol = 1e-8;        // acceptable residual after parallelize
inline constexpr double kTransportSolveTol = 1e-13;  // per-interval solve target

// ---------------- residuals ----------------

// Entry (k, l): the largest connection magnitude of member k's l-th eigenvector
// over all grid intervals. Zero rows/columns mean the member path is parallel.
inline RealMatrix transport_residuals(const DecompositionPath& dp) {
    const int m = dp.size();
    const int n = dp.dim();
    RealMatrix out = RealMatrix::Zero(m, n);
    for (int k = 0; k < m; ++k) {
        const ComplexMatrix& basis = dp.decomposition().component(k).nondegenerate_spectrum().vectors;
        const UnitaryPath& p = dp.path(k);
        for (int j = 0; j < p.intervals(); ++j) {
            if (p.has_generators()) {
                const ComplexMatrix w = p.unitary(j) * basis;
                const ComplexMatrix hw = p.generator(j) * w;
                for (int l = 0; l < n; ++l)
                    out(k, l) = std::max(out(k, l), std::abs(w.col(l).dot(hw.col(l))));
            } else {
                const ComplexMatrix w0 = p.unitary(j) * basis;
                const ComplexMatrix w1 = p.unitary(j + 1) * basis;
                const double dt = p.dt(j);
                for (int l = 0; l < n; ++l)
                    out(k, l) = std::max(out(k, l),
                                         std::abs(w0.col(l).dot(w1.col(l) - w0.col(l)) / dt));
            }
        }
    }
    return out;
}

// Largest commutator entry max_j |[rho, V(t_j)]| over the path nodes; zero for
// gauges diagonal in the eigenbasis of rho (the admissible ones).
inline double commutation_residual(const DensityOperator& rho, const UnitaryPath& gauge) {
    if (rho.dim() != gauge.dim())
        throw DimensionMismatch("commutation_residual: dimension mismatch");
    double res = 0.0;
    for (int j = 0; j < gauge.nodes(); ++j) {
        const ComplexMatrix& v = gauge.unitary(j);
        res = std::max(res, max_abs(rho.matrix() * v - v * rho.matrix()));
    }
    return res;
}

// ---------------- parallelize ----------------

namespace detail {

// Diagonal phases delta with diag(log(g * diag(e^{i delta}))) = 0. Newton in
// the N phases; the diagonal of the log responds to delta with unit slope, so
// a couple of sweeps reach machine level for well-resolved steps.
inline RealVector counter_phases(const ComplexMatrix& g, const std::string& where) {
    const Eigen::Index n = g.rows();
    RealVector delta = RealVector::Zero(n);
    double residual = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 10; ++iter) {
        ComplexMatrix gd = g;
        for (Eigen::Index l = 0; l < n; ++l) gd.col(l) *= std::exp(kI * delta(l));
        const ComplexMatrix k = unitary_log_hermitian(gd);  // gd = exp(-iK)
        residual = 0.0;
        for (Eigen::Index l = 0; l < n; ++l) residual = std::max(residual, std::abs(k(l, l)));
        if (residual <= kTransportSolveTol) return delta;
        for (Eigen::Index l = 0; l < n; ++l) delta(l) += k(l, l).real();  // log diag = -i K_ll
    }
    if (residual > 100 * kTransportSolveTol)
        throw Error(where + ": transport solve stalled at residual " + std::to_string(residual) +
                    " (grid too coarse for the motion?)");
    return delta;
}

}  // namespace detail

// Right-multiply each member path by the diagonal counter-rotation in its
// eigenbasis that cancels the connection on every interval. Orbit and grid are
// untouched; the result carries reconstructed generators and has transport
// residuals at solver level (far below kTransportTol). Idempotent: running it
// on a parallel path solves to zero phases.
inline DecompositionPath parallelize(const DecompositionPath& dp) {
    std::vector<UnitaryPath> out;
    out.reserve(dp.size());
    for (int k = 0; k < dp.size(); ++k) {
        const ComplexMatrix& basis =
            dp.decomposition().component(k).nondegenerate_spectrum().vectors;
        const UnitaryPath& p = dp.path(k);
        const int n = p.dim();
        std::vector<ComplexMatrix> nodes(p.nodes());
        std::vector<ComplexMatrix> gens(p.intervals());
        nodes[0] = ComplexMatrix::Identity(n, n);
        ComplexVector vdiag = ComplexVector::Ones(n);
        for (int j = 0; j < p.intervals(); ++j) {
            const ComplexMatrix g =
                basis.adjoint() * (p.unitary(j).adjoint() * p.unitary(j + 1)) * basis;
            const RealVector delta = detail::counter_phases(g, "parallelize");
            for (int l = 0; l < n; ++l) vdiag(l) *= std::exp(kI * delta(l));
            nodes[j + 1] = p.unitary(j + 1) * (basis * vdiag.asDiagonal() * basis.adjoint());
            gens[j] = unitary_log_hermitian(nodes[j + 1] * nodes[j].adjoint()) / p.dt(j);
        }
        out.emplace_back(p.times(), std::move(nodes), std::move(gens));
    }
    return DecompositionPath(dp.decomposition(), std::move(out));
}

// ---------------- admissible gauges ----------------

// Build the member gauges V_k(t_j) = sum_l e^{i theta_kl(t_j)} |k_l><k_l| from
// sampled phase profiles (rows: eigenvector index, columns: grid nodes).
// Diagonal in each member's eigenbasis, so the orbit is untouched.
inline std::vector<UnitaryPath> admissible_gauge(const Decomposition& d,
                                                 const std::vector<double>& times,
                                                 const std::vector<RealMatrix>& profiles) {
    if (static_cast<int>(profiles.size()) != d.size())
        throw DimensionMismatch("admissible_gauge: one profile block per member required");
    if (times.empty()) throw GridMismatch("admissible_gauge: empty grid");
    const int n = d.dim();
    const long nodes = static_cast<long>(times.size());
    std::vector<UnitaryPath> out;
    out.reserve(profiles.size());
    for (int k = 0; k < d.size(); ++k) {
        const RealMatrix& theta = profiles[k];
        if (theta.rows() != n || theta.cols() != nodes)
            throw DimensionMismatch("admissible_gauge: profile block " + std::to_string(k) +
                                    " has wrong shape");
        if (theta.col(0).cwiseAbs().maxCoeff() > 0.0)
            throw ValidationError("admissible_gauge: profiles must vanish at t = 0");
        const ComplexMatrix& basis = d.component(k).nondegenerate_spectrum().vectors;
        std::vector<ComplexMatrix> vs(nodes);
        std::vector<ComplexMatrix> gens(nodes - 1);
        vs[0] = ComplexMatrix::Identity(n, n);
        for (long j = 1; j < nodes; ++j) {
            ComplexVector ph(n);
            for (int l = 0; l < n; ++l) ph(l) = std::exp(kI * theta(l, j));
            vs[j] = basis * ph.asDiagonal() * basis.adjoint();
        }
        for (long j = 0; j + 1 < nodes; ++j) {
            const double dt = times[j + 1] - times[j];
            RealVector rate(n);
            for (int l = 0; l < n; ++l) rate(l) = -(theta(l, j + 1) - theta(l, j)) / dt;
            ComplexMatrix h = basis * rate.asDiagonal().toDenseMatrix().cast<cxd>() * basis.adjoint();
            gens[j] = 0.5 * (h + h.adjoint());
        }
        out.emplace_back(std::vector<double>(times), std::move(vs), std::move(gens));
    }
    return out;
}

// Smooth random profiles vanishing at t = 0 with slopes bounded by ~3*amplitude*pi/T,
// for gauge-invariance exercises.
inline std::vector<RealMatrix> random_gauge_profiles(const Decomposition& d,
                                                     const std::vector<double>& times, Rng& rng,
                                                     double amplitude = 0.1) {
    const int n = d.dim();
    const long nodes = static_cast<long>(times.size());
    const double tau = times.back();
    std::vector<RealMatrix> out;
    out.reserve(d.size());
    for (int k = 0; k < d.size(); ++k) {
        RealMatrix theta(n, nodes);
        for (int l = 0; l < n; ++l) {
            const double a = rng.uniform(-amplitude, amplitude);
            const double b = rng.uniform(-amplitude, amplitude);
            for (long j = 0; j < nodes; ++j) {
                const double t = times[j];
                theta(l, j) = a * std::sin(kPi * t / tau) + b * (1.0 - std::cos(2.0 * kPi * t / tau));
            }
            theta(l, 0) = 0.0;
        }
        out.push_back(std::move(theta));
    }
    return out;
}

// Compose every member path with its gauge.
inline DecompositionPath gauge_compose(const DecompositionPath& dp,
                                       const std::vector<UnitaryPath>& gauges) {
    if (static_cast<int>(gauges.size()) != dp.size())
        throw DimensionMismatch("gauge_compose: one gauge per member required");
    std::vector<UnitaryPath> out;
    out.reserve(gauges.size());
    for (int k = 0; k < dp.size(); ++k) out.push_back(gauge_compose(dp.path(k), gauges[k]));
    return DecompositionPath(dp.decomposition(), std::move(out));
}

}  // namespace decphase
