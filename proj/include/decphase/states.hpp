#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "linalg.hpp"
#include "random.hpp"

namespace decphase {

inline constexpr double kTraceTol = 1e-10;        // |Tr rho - 1|
inline constexpr double kPsdTol = 1e-10;          // eigenvalue >= -kPsdTol
inline constexpr double kWeightFloor = 1e-12;     // smallest admissible mixing weight
inline constexpr double kBlockDiagTol = 1e-12;    // off-diagonal ancilla blocks

// ---------------- DensityOperator ----------------

// Unit-trace positive semidefinite operator. The spectrum is fixed at
// construction (the positivity check needs it anyway), so instances are
// immutable values and safe to share across threads.
class DensityOperator {
public:
    explicit DensityOperator(ComplexMatrix m) : mat_(std::move(m)) {
        require_hermitian(mat_, kHermitianTol, "DensityOperator");
        const double tr = mat_.trace().real();
        if (std::abs(tr - 1.0) > kTraceTol)
            throw ValidationError("DensityOperator: trace " + std::to_string(tr) +
                                  " deviates from 1 beyond tolerance");
        spec_ = eigh_hermitian(mat_, kHermitianTol);
        if (spec_.values(spec_.dim() - 1) < -kPsdTol)
            throw ValidationError("DensityOperator: negative eigenvalue " +
                                  std::to_string(spec_.values(spec_.dim() - 1)));
    }

    const ComplexMatrix& matrix() const { return mat_; }
    int dim() const { return static_cast<int>(mat_.rows()); }
    const EigenSystem& spectrum() const { return spec_; }

    double purity() const { return (mat_ * mat_).trace().real(); }

    // Spectrum with unambiguous eigenvectors wherever the weight matters.
    const EigenSystem& nondegenerate_spectrum() const {
        require_nondegenerate_weights(spec_.values, "DensityOperator");
        return spec_;
    }

private:
    ComplexMatrix mat_;
    EigenSystem spec_;
};

// ---------------- Decomposition ----------------

// Weighted list of density operators on a common system: the ensemble whose
// members evolve independently. The member count is fixed for the lifetime of
// the object; evolutions never create or destroy members.
class Decomposition {
public:
    Decomposition(std::vector<double> weights, std::vector<DensityOperator> components)
        : weights_(std::move(weights)), components_(std::move(components)) {
        if (weights_.empty() || weights_.size() != components_.size())
            throw DimensionMismatch("Decomposition: weights and components must match and be nonempty");
        double total = 0.0;
        for (double w : weights_) {
            if (!(w >= kWeightFloor))
                throw ValidationError("Decomposition: weight " + std::to_string(w) +
                                      " below floor " + std::to_string(kWeightFloor));
            total += w;
        }
        if (std::abs(total - 1.0) > kTraceTol)
            throw ValidationError("Decomposition: weights sum to " + std::to_string(total));
        for (const auto& c : components_)
            if (c.dim() != components_.front().dim())
                throw DimensionMismatch("Decomposition: components live on different dimensions");
    }

    int size() const { return static_cast<int>(weights_.size()); }
    int dim() const { return components_.front().dim(); }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<DensityOperator>& components() const { return components_; }
    double weight(int k) const { return weights_.at(k); }
    const DensityOperator& component(int k) const { return components_.at(k); }

private:
    std::vector<double> weights_;
    std::vector<DensityOperator> components_;
};

// Convex combination sum_k w_k rho_k of the members.
inline DensityOperator mix(const Decomposition& d) {
    ComplexMatrix acc = ComplexMatrix::Zero(d.dim(), d.dim());
    for (int k = 0; k < d.size(); ++k) acc += d.weight(k) * d.component(k).matrix();
    return DensityOperator(0.5 * (acc + acc.adjoint()));
}

// ---------------- EmbeddedState ----------------

// System-plus-ancilla operator that is block diagonal in the ancilla basis:
// block k holds w_k rho_k. This is the separable carrier a Decomposition maps
// onto; the ancilla index labels the member.
class EmbeddedState {
public:
    EmbeddedState(ComplexMatrix m, int system_dim, int ancilla_dim)
        : mat_(std::move(m)), n_(system_dim), m_(ancilla_dim) {
        if (n_ <= 0 || m_ <= 0 || mat_.rows() != static_cast<long>(n_) * m_)
            throw DimensionMismatch("EmbeddedState: dimensions do not multiply to the matrix size");
        require_square(mat_, "EmbeddedState");
        require_finite(mat_, "EmbeddedState");
        if (hermiticity_residual(mat_) > kHermitianTol)
            throw NotHermitian("EmbeddedState: carrier matrix is not Hermitian");
        double off = 0.0;
        for (int ka = 0; ka < m_; ++ka)
            for (int la = 0; la < m_; ++la) {
                if (ka == la) continue;
                off = std::max(off, max_abs(block_raw(ka, la)));
            }
        if (off > kBlockDiagTol)
            throw MalformedEmbedding("EmbeddedState: ancilla off-diagonal block residual " +
                                     std::to_string(off));
    }

    const ComplexMatrix& matrix() const { return mat_; }
    int system_dim() const { return n_; }
    int ancilla_dim() const { return m_; }

    // w_k rho_k, the k-th diagonal system block.
    ComplexMatrix block(int k) const {
        if (k < 0 || k >= m_) throw IndexOutOfRange("EmbeddedState::block");
        return block_raw(k, k);
    }

    double block_weight(int k) const { return block(k).trace().real(); }

    // Reduced system state sum_k w_k rho_k.
    ComplexMatrix system_reduction() const { return partial_trace(mat_, {n_, m_}, {0}); }

    // Reduced ancilla state diag(w_k).
    ComplexMatrix ancilla_reduction() const { return partial_trace(mat_, {n_, m_}, {1}); }

    // Recover the weighted member list. Requires every block weight to clear
    // the decomposition weight floor.
    Decomposition to_decomposition() const {
        std::vector<double> w(m_);
        std::vector<DensityOperator> comps;
        comps.reserve(m_);
        for (int k = 0; k < m_; ++k) {
            w[k] = block_weight(k);
            if (w[k] < kWeightFloor)
                throw MalformedEmbedding("EmbeddedState: block " + std::to_string(k) +
                                         " carries weight below the floor");
            ComplexMatrix rho = block(k) / w[k];
            comps.emplace_back(0.5 * (rho + rho.adjoint()));
        }
        return Decomposition(std::move(w), std::move(comps));
    }

private:
    ComplexMatrix block_raw(int ka, int la) const {
        // index layout: (system, ancilla) with the system factor most significant
        ComplexMatrix b(n_, n_);
        for (int r = 0; r < n_; ++r)
            for (int c = 0; c < n_; ++c)
                b(r, c) = mat_(static_cast<long>(r) * m_ + ka, static_cast<long>(c) * m_ + la);
        return b;
    }

    ComplexMatrix mat_;
    int n_;
    int m_;
};

// Carrier of the decomposition: sum_k w_k rho_k (x) |k><k| on system x ancilla.
inline EmbeddedState embed(const Decomposition& d) {
    const int n = d.dim();
    const int m = d.size();
    ComplexMatrix acc = ComplexMatrix::Zero(static_cast<long>(n) * m, static_cast<long>(n) * m);
    for (int k = 0; k < m; ++k) {
        ComplexMatrix proj = ComplexMatrix::Zero(m, m);
        proj(k, k) = 1.0;
        acc += d.weight(k) * kron(d.component(k).matrix(), proj);
    }
    return EmbeddedState(std::move(acc), n, m);
}

// ---------------- embedding equivalence ----------------

namespace detail {

struct WeightedBlock {
    double weight;
    ComplexMatrix component;  // block / weight
};

inline std::vector<WeightedBlock> extract_blocks(const EmbeddedState& e) {
    std::vector<WeightedBlock> out;
    for (int k = 0; k < e.ancilla_dim(); ++k) {
        const ComplexMatrix b = e.block(k);
        const double w = b.trace().real();
        if (w < kWeightFloor) continue;  // empty block, carries no member
        out.push_back({w, b / w});
    }
    std::sort(out.begin(), out.end(),
              [](const WeightedBlock& a, const WeightedBlock& b) { return a.weight > b.weight; });
    return out;
}

inline bool match_blocks(const std::vector<WeightedBlock>& a, const std::vector<WeightedBlock>& b,
                         std::vector<char>& used, std::size_t i, double tol) {
    if (i == a.size()) return true;
    for (std::size_t j = 0; j < b.size(); ++j) {
        if (used[j]) continue;
        if (std::abs(a[i].weight - b[j].weight) > tol) continue;
        if (max_abs(a[i].component - b[j].component) > tol) continue;
        used[j] = 1;
        if (match_blocks(a, b, used, i + 1, tol)) return true;
        used[j] = 0;
    }
    return false;
}

}  // namespace detail

// True iff the weighted member multisets of the two carriers agree under some
// permutation, weight and component each within tol. This is exactly the orbit
// of ancilla-basis relabelings on block-diagonal carriers.
inline bool equivalent(const EmbeddedState& a, const EmbeddedState& b, double tol) {
    if (a.system_dim() != b.system_dim()) return false;
    auto wa = detail::extract_blocks(a);
    auto wb = detail::extract_blocks(b);
    if (wa.size() != wb.size()) return false;
    std::vector<char> used(wb.size(), 0);
    return detail::match_blocks(wa, wb, used, 0, tol);
}

inline bool equivalent(const Decomposition& a, const Decomposition& b, double tol) {
    if (a.dim() != b.dim()) return false;
    return equivalent(embed(a), embed(b), tol);
}

// ---------------- random instances ----------------

// Reproducible random decomposition: flat simplex weights (optionally floored,
// resampling until satisfied) and Ginibre members with well-separated spectra.
inline Decomposition random_decomposition(int n, int m, std::uint64_t seed,
                                          double min_weight = 0.0, double min_gap = 1e-3) {
    if (n <= 0 || m <= 0) throw DimensionMismatch("random_decomposition: dimensions must be positive");
    Rng rng(seed);
    const double floor = std::max(min_weight, kWeightFloor);
    std::vector<double> w;
    do {
        w = simplex_weights(m, rng);
    } while (*std::min_element(w.begin(), w.end()) < floor);
    std::vector<DensityOperator> comps;
    comps.reserve(m);
    for (int k = 0; k < m; ++k) comps.emplace_back(random_density_matrix(n, rng, min_gap));
    return Decomposition(std::move(w), std::move(comps));
}

}  // namespace decphase
