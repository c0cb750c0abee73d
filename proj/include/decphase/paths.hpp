#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "linalg.hpp"
#include "states.hpp"

namespace decphase {

inline constexpr double kNodeUnitaryTol = 1e-8;   // per-node unitarity residual
inline constexpr double kStartTol = 1e-10;        // distance of node 0 from I
inline constexpr double kStepRelationTol = 1e-9;  // |U_{j+1} - exp(-iH dt) U_j|
inline constexpr double kGridTol = 1e-12;         // node time agreement across paths

struct HamiltonianSegment {
    ComplexMatrix hamiltonian;
    double duration;
};

// ---------------- UnitaryPath ----------------

// Discretized unitary evolution: node times t_0=0 < ... < t_J, node unitaries
// with U(t_0) = I, and optionally one Hermitian generator per interval with
// U(t_{j+1}) = exp(-i H_j dt_j) U(t_j). With a generator the connection
// <v|U†(t) H_j U(t)|v> is constant across interval j (exp(-iH_j s) commutes
// with H_j), so node-sampled sums below are exact interval integrals.
class UnitaryPath {
public:
    UnitaryPath(std::vector<double> times, std::vector<ComplexMatrix> unitaries,
                std::vector<ComplexMatrix> generators = {})
        : times_(std::move(times)), nodes_(std::move(unitaries)), gens_(std::move(generators)) {
        if (times_.empty() || times_.size() != nodes_.size())
            throw GridMismatch("UnitaryPath: node times and unitaries must match and be nonempty");
        if (times_.front() != 0.0)
            throw ValidationError("UnitaryPath: the grid must start at t = 0");
        for (std::size_t j = 0; j + 1 < times_.size(); ++j)
            if (!(times_[j + 1] > times_[j]))
                throw ValidationError("UnitaryPath: node times must increase strictly");
        const Eigen::Index n = nodes_.front().rows();
        for (const auto& u : nodes_) {
            require_square(u, "UnitaryPath");
            if (u.rows() != n) throw DimensionMismatch("UnitaryPath: node dimensions differ");
            const double res = unitarity_residual(u);
            if (res > kNodeUnitaryTol)
                throw ValidationError("UnitaryPath: node unitarity residual " +
                                      std::to_string(res));
        }
        const double start = max_abs(nodes_.front() - ComplexMatrix::Identity(n, n));
        if (start > kStartTol)
            throw ValidationError("UnitaryPath: path must start at the identity, residual " +
                                  std::to_string(start));
        nodes_.front() = ComplexMatrix::Identity(n, n);

        if (!gens_.empty()) {
            if (gens_.size() + 1 != nodes_.size())
                throw GridMismatch("UnitaryPath: expected one generator per interval");
            ComplexMatrix cached_step;
            for (std::size_t j = 0; j < gens_.size(); ++j) {
                require_hermitian(gens_[j], kHermitianTol, "UnitaryPath generator");
                if (gens_[j].rows() != n)
                    throw DimensionMismatch("UnitaryPath: generator dimension differs from nodes");
                const double step = dt(static_cast<int>(j));
                const bool reuse = j > 0 && dt(static_cast<int>(j) - 1) == step &&
                                   max_abs(gens_[j] - gens_[j - 1]) == 0.0;
                if (!reuse) cached_step = step_unitary(gens_[j], step);
                const double res = max_abs(nodes_[j + 1] - cached_step * nodes_[j]);
                if (res > kStepRelationTol)
                    throw ValidationError("UnitaryPath: step relation residual " +
                                          std::to_string(res) + " at interval " +
                                          std::to_string(j));
            }
        }
    }

    int dim() const { return static_cast<int>(nodes_.front().rows()); }
    int nodes() const { return static_cast<int>(nodes_.size()); }
    int intervals() const { return nodes() - 1; }
    bool has_generators() const { return !gens_.empty(); }
    const std::vector<double>& times() const { return times_; }
    double duration() const { return times_.back(); }

    const ComplexMatrix& unitary(int j) const {
        if (j < 0 || j >= nodes()) throw IndexOutOfRange("UnitaryPath::unitary");
        return nodes_[j];
    }
    const ComplexMatrix& generator(int j) const {
        if (!has_generators()) throw IndexOutOfRange("UnitaryPath::generator: path carries none");
        if (j < 0 || j >= intervals()) throw IndexOutOfRange("UnitaryPath::generator");
        return gens_[j];
    }
    double dt(int j) const {
        if (j < 0 || j >= intervals()) throw IndexOutOfRange("UnitaryPath::dt");
        return times_[j + 1] - times_[j];
    }
    const ComplexMatrix& endpoint() const { return nodes_.back(); }

private:
    std::vector<double> times_;
    std::vector<ComplexMatrix> nodes_;
    std::vector<ComplexMatrix> gens_;
};

// ---------------- construction ----------------

// Piecewise-constant-generator path: each segment contributes `steps[s]`
// uniform intervals of exp(-i H_s dt). Node times are exact at segment
// boundaries.
inline UnitaryPath path_from_hamiltonians(const std::vector<HamiltonianSegment>& segments,
                                          const std::vector<int>& steps) {
    if (segments.empty()) throw ValidationError("path_from_hamiltonians: no segments");
    if (steps.size() != segments.size())
        throw GridMismatch("path_from_hamiltonians: one step count per segment required");
    const Eigen::Index n = segments.front().hamiltonian.rows();
    for (const auto& seg : segments) {
        require_hermitian(seg.hamiltonian, kHermitianTol, "path_from_hamiltonians");
        if (seg.hamiltonian.rows() != n)
            throw DimensionMismatch("path_from_hamiltonians: segment dimensions differ");
        if (!(seg.duration > 0.0) || !std::isfinite(seg.duration))
            throw ValidationError("path_from_hamiltonians: segment duration must be positive");
    }
    for (int s : steps)
        if (s < 1) throw ValidationError("path_from_hamiltonians: step count must be >= 1");

    std::vector<double> times{0.0};
    std::vector<ComplexMatrix> nodes{ComplexMatrix::Identity(n, n)};
    std::vector<ComplexMatrix> gens;
    double start = 0.0;
    for (std::size_t s = 0; s < segments.size(); ++s) {
        const double dt = segments[s].duration / steps[s];
        const ComplexMatrix step = step_unitary(segments[s].hamiltonian, dt);
        for (int i = 1; i <= steps[s]; ++i) {
            times.push_back(i == steps[s] ? start + segments[s].duration : start + i * dt);
            nodes.push_back(step * nodes.back());
            gens.push_back(segments[s].hamiltonian);
        }
        start += segments[s].duration;
    }
    return UnitaryPath(std::move(times), std::move(nodes), std::move(gens));
}

inline UnitaryPath path_from_hamiltonians(const std::vector<HamiltonianSegment>& segments,
                                          int steps_per_segment) {
    return path_from_hamiltonians(segments,
                                  std::vector<int>(segments.size(), steps_per_segment));
}

// ---------------- connection ----------------

namespace detail {

inline void require_unit(const ComplexVector& v, const std::string& where) {
    if (std::abs(v.norm() - 1.0) > 1e-8)
        throw ValidationError(where + ": vector is not normalized");
}

}  // namespace detail

// Connection coefficient of |v> over interval j: -i <v|U†(t_j) H_j U(t_j)|v>
// with a generator (exact for the whole interval), else the forward-difference
// quotient <v|U†(t_j)(U(t_{j+1}) - U(t_j))|v> / dt_j, which is first-order
// accurate and picks up a nonpositive real part at O(dt).
inline cxd connection(const UnitaryPath& path, const ComplexVector& v, int j) {
    if (v.size() != path.dim()) throw DimensionMismatch("connection: vector dimension mismatch");
    detail::require_unit(v, "connection");
    if (j < 0 || j >= path.intervals()) throw IndexOutOfRange("connection: interval index");
    if (path.has_generators()) {
        const ComplexVector u = path.unitary(j) * v;
        return -kI * u.dot(path.generator(j) * u);
    }
    const ComplexVector u0 = path.unitary(j) * v;
    const ComplexVector u1 = path.unitary(j + 1) * v;
    return u0.dot(u1 - u0) / path.dt(j);
}

// Accumulated connection factors exp(-sum_j a(j) dt_j) for every column of
// `basis` at once. Exact for generator-carrying paths (interval-constant
// connection), first-order for the fallback.
inline ComplexVector accumulated_phase_factors(const UnitaryPath& path,
                                               const ComplexMatrix& basis) {
    if (basis.rows() != path.dim())
        throw DimensionMismatch("accumulated_phase_factors: basis dimension mismatch");
    const Eigen::Index cols = basis.cols();
    ComplexVector sums = ComplexVector::Zero(cols);
    if (path.has_generators()) {
        for (int j = 0; j < path.intervals(); ++j) {
            const ComplexMatrix w = path.unitary(j) * basis;
            const ComplexMatrix hw = path.generator(j) * w;
            const double dt = path.dt(j);
            for (Eigen::Index c = 0; c < cols; ++c)
                sums(c) += (-kI * w.col(c).dot(hw.col(c))) * dt;
        }
    } else {
        for (int j = 0; j < path.intervals(); ++j) {
            const ComplexMatrix w0 = path.unitary(j) * basis;
            const ComplexMatrix w1 = path.unitary(j + 1) * basis;
            for (Eigen::Index c = 0; c < cols; ++c)
                sums(c) += w0.col(c).dot(w1.col(c) - w0.col(c));
        }
    }
    ComplexVector out(cols);
    for (Eigen::Index c = 0; c < cols; ++c) out(c) = std::exp(-sums(c));
    return out;
}

inline cxd accumulated_phase_factor(const UnitaryPath& path, const ComplexVector& v) {
    if (v.size() != path.dim())
        throw DimensionMismatch("accumulated_phase_factor: vector dimension mismatch");
    detail::require_unit(v, "accumulated_phase_factor");
    return accumulated_phase_factors(path, v)(0);
}

// ---------------- composition ----------------

namespace detail {

inline void require_shared_grid(const std::vector<double>& a, const std::vector<double>& b,
                                const std::string& where) {
    if (a.size() != b.size()) throw GridMismatch(where + ": node counts differ");
    for (std::size_t j = 0; j < a.size(); ++j)
        if (std::abs(a[j] - b[j]) > kGridTol)
            throw GridMismatch(where + ": node times differ at index " + std::to_string(j));
}

}  // namespace detail

// Nodewise product U(t_j) V(t_j). The composite per-interval generator is
// recovered as the principal log of each composed step, so the result keeps
// exact connection integrals; dropping to the finite-difference fallback here
// would contaminate downstream phase functionals at first order in dt.
inline UnitaryPath gauge_compose(const UnitaryPath& path, const UnitaryPath& gauge) {
    if (path.dim() != gauge.dim()) throw DimensionMismatch("gauge_compose: dimension mismatch");
    detail::require_shared_grid(path.times(), gauge.times(), "gauge_compose");
    std::vector<ComplexMatrix> nodes(path.nodes());
    for (int j = 0; j < path.nodes(); ++j) nodes[j] = path.unitary(j) * gauge.unitary(j);
    std::vector<ComplexMatrix> gens(path.intervals());
    for (int j = 0; j < path.intervals(); ++j) {
        const ComplexMatrix w = nodes[j + 1] * nodes[j].adjoint();
        gens[j] = unitary_log_hermitian(w) / path.dt(j);
    }
    return UnitaryPath(path.times(), std::move(nodes), std::move(gens));
}

// ---------------- DecompositionPath ----------------

// A decomposition at t = 0 plus one unitary path per member, all on one grid:
// the orbit t -> {w_k, U_k(t) rho_k U_k(t)†}.
class DecompositionPath {
public:
    DecompositionPath(Decomposition decomposition, std::vector<UnitaryPath> paths)
        : d_(std::move(decomposition)), paths_(std::move(paths)) {
        if (static_cast<int>(paths_.size()) != d_.size())
            throw DimensionMismatch("DecompositionPath: expected one path per member");
        for (const auto& p : paths_) {
            if (p.dim() != d_.dim())
                throw DimensionMismatch("DecompositionPath: path dimension differs from state");
            detail::require_shared_grid(paths_.front().times(), p.times(), "DecompositionPath");
        }
    }

    static DecompositionPath shared(Decomposition decomposition, const UnitaryPath& path) {
        std::vector<UnitaryPath> ps(static_cast<std::size_t>(decomposition.size()), path);
        return DecompositionPath(std::move(decomposition), std::move(ps));
    }

    int size() const { return d_.size(); }
    int dim() const { return d_.dim(); }
    const Decomposition& decomposition() const { return d_; }
    const UnitaryPath& path(int k) const { return paths_.at(k); }
    const std::vector<UnitaryPath>& paths() const { return paths_; }
    const std::vector<double>& times() const { return paths_.front().times(); }

private:
    Decomposition d_;
    std::vector<UnitaryPath> paths_;
};

}  // namespace decphase
