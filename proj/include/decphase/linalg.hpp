#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "errors.hpp"

namespace decphase {

using cxd = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr cxd kI{0.0, 1.0};

// Shared tolerances. Phase-level tolerances live with the phase functionals.
inline constexpr double kHermitianTol = 1e-10;      // max |A - A^dag| entry
inline constexpr double kDegenerateGap = 1e-8;      // adjacent eigenvalue gap
inline constexpr double kZeroWeightFloor = 1e-9;    // spectral weight treated as an empty block
inline constexpr double kUnitaryTol = 1e-8;         // max |U^dag U - I| entry

// ---------------- basic checks ----------------

inline double max_abs(const ComplexMatrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline void require_square(const ComplexMatrix& m, const std::string& where) {
    if (m.rows() != m.cols() || m.rows() == 0)
        throw DimensionMismatch(where + ": expected a nonempty square matrix, got " +
                                std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
}

inline void require_finite(const ComplexMatrix& m, const std::string& where) {
    if (!m.allFinite()) throw ValidationError(where + ": matrix has NaN/Inf entries");
}

inline double hermiticity_residual(const ComplexMatrix& m) {
    return max_abs(m - m.adjoint());
}

inline void require_hermitian(const ComplexMatrix& m, double tol, const std::string& where) {
    require_square(m, where);
    require_finite(m, where);
    const double res = hermiticity_residual(m);
    if (res > tol)
        throw NotHermitian(where + ": hermiticity residual " + std::to_string(res) +
                           " exceeds tolerance");
}

// Max entry of |U^dag U - I|; zero for exact unitaries.
inline double unitarity_residual(const ComplexMatrix& u) {
    require_square(u, "unitarity_residual");
    require_finite(u, "unitarity_residual");
    return max_abs(u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols()));
}

// Wrap an angle into the principal interval (-pi, pi].
inline double normalize_angle(double phi) {
    double r = std::remainder(phi, 2.0 * kPi);
    if (r <= -kPi) r += 2.0 * kPi;
    return r;
}

// Distance between two angles on the circle, in [0, pi].
inline double angle_distance(double a, double b) {
    return std::abs(normalize_angle(a - b));
}

// ---------------- tensor helpers ----------------

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// Trace out the tensor factors not listed in `keep`. `dims` lists the factor
// dimensions with factor 0 the most significant index (kron order). The kept
// factors stay in their original relative order.
inline ComplexMatrix partial_trace(const ComplexMatrix& m, const std::vector<int>& dims,
                                   const std::vector<int>& keep) {
    require_square(m, "partial_trace");
    require_finite(m, "partial_trace");
    const int f = static_cast<int>(dims.size());
    if (f == 0) throw DimensionMismatch("partial_trace: empty factor list");
    long total = 1;
    for (int d : dims) {
        if (d <= 0) throw DimensionMismatch("partial_trace: nonpositive factor dimension");
        total *= d;
    }
    if (total != m.rows())
        throw DimensionMismatch("partial_trace: factor dimensions multiply to " +
                                std::to_string(total) + ", matrix has " +
                                std::to_string(m.rows()));
    if (keep.empty()) throw IndexOutOfRange("partial_trace: keep set is empty");
    std::vector<char> kept(f, 0);
    for (int k : keep) {
        if (k < 0 || k >= f) throw IndexOutOfRange("partial_trace: keep index out of range");
        if (kept[k]) throw IndexOutOfRange("partial_trace: duplicate keep index");
        kept[k] = 1;
    }

    std::vector<long> stride(f);
    stride[f - 1] = 1;
    for (int i = f - 2; i >= 0; --i) stride[i] = stride[i + 1] * dims[i + 1];

    std::vector<int> kdims, tdims;
    std::vector<long> kstride, tstride;
    for (int i = 0; i < f; ++i) {
        if (kept[i]) { kdims.push_back(dims[i]); kstride.push_back(stride[i]); }
        else { tdims.push_back(dims[i]); tstride.push_back(stride[i]); }
    }
    long dk = 1; for (int d : kdims) dk *= d;
    long dt = 1; for (int d : tdims) dt *= d;

    // Decode a linear index over the given dims into a base offset.
    auto offset = [](long idx, const std::vector<int>& ds, const std::vector<long>& ss) {
        long off = 0;
        for (int i = static_cast<int>(ds.size()) - 1; i >= 0; --i) {
            off += (idx % ds[i]) * ss[i];
            idx /= ds[i];
        }
        return off;
    };

    std::vector<long> koff(dk), toff(dt);
    for (long r = 0; r < dk; ++r) koff[r] = offset(r, kdims, kstride);
    for (long t = 0; t < dt; ++t) toff[t] = offset(t, tdims, tstride);

    ComplexMatrix out = ComplexMatrix::Zero(dk, dk);
    for (long r = 0; r < dk; ++r)
        for (long c = 0; c < dk; ++c) {
            cxd acc = 0.0;
            for (long t = 0; t < dt; ++t) acc += m(koff[r] + toff[t], koff[c] + toff[t]);
            out(r, c) = acc;
        }
    return out;
}

// ---------------- Hermitian eigenproblem ----------------

struct EigenSystem {
    RealVector values;       // descending
    ComplexMatrix vectors;   // orthonormal columns, matching order

    int dim() const { return static_cast<int>(values.size()); }
    double min_adjacent_gap() const {
        double g = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i + 1 < values.size(); ++i)
            g = std::min(g, values(i) - values(i + 1));
        return g;
    }
};

enum class Degeneracy { allow, reject };

// Deterministic Hermitian eigendecomposition: eigenvalues sorted descending,
// each eigenvector rephased so its largest-magnitude component (ties: lowest
// index) is real and nonnegative. The solver's own conventions never leak out.
inline EigenSystem eigh_hermitian(const ComplexMatrix& a, double tol = kHermitianTol,
                                  Degeneracy mode = Degeneracy::allow) {
    require_hermitian(a, tol, "eigh_hermitian");
    const Eigen::Index n = a.rows();
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(0.5 * (a + a.adjoint()));
    if (solver.info() != Eigen::Success)
        throw Error("eigh_hermitian: eigensolver failed to converge");

    EigenSystem sys;
    sys.values = solver.eigenvalues().reverse();
    sys.vectors = solver.eigenvectors().rowwise().reverse();
    for (Eigen::Index c = 0; c < n; ++c) {
        Eigen::Index imax = 0;
        double best = -1.0;
        for (Eigen::Index r = 0; r < n; ++r) {
            const double mag = std::abs(sys.vectors(r, c));
            if (mag > best) { best = mag; imax = r; }
        }
        const cxd pivot = sys.vectors(imax, c);
        if (std::abs(pivot) > 0.0) sys.vectors.col(c) *= std::conj(pivot) / std::abs(pivot);
    }
    if (mode == Degeneracy::reject && sys.min_adjacent_gap() < kDegenerateGap)
        throw DegenerateSpectrum("eigh_hermitian: adjacent eigenvalue gap " +
                                 std::to_string(sys.min_adjacent_gap()) +
                                 " below degeneracy threshold");
    return sys;
}

// Nondegeneracy for spectral weights: repeated (near-)zero eigenvalues span a
// block that never contributes, so gaps are only checked where the larger
// weight of the adjacent pair is above the zero floor.
inline void require_nondegenerate_weights(const RealVector& values, const std::string& where) {
    for (Eigen::Index i = 0; i + 1 < values.size(); ++i) {
        if (values(i) <= kZeroWeightFloor) continue;
        if (values(i) - values(i + 1) < kDegenerateGap)
            throw DegenerateSpectrum(where + ": spectral weights " + std::to_string(values(i)) +
                                     " and " + std::to_string(values(i + 1)) +
                                     " are degenerate at the working threshold");
    }
}

// ---------------- unitary generation ----------------

// exp(-i H dt) through the spectral decomposition of H.
inline ComplexMatrix step_unitary(const ComplexMatrix& h, double dt, double tol = kHermitianTol) {
    if (!std::isfinite(dt)) throw ValidationError("step_unitary: dt is not finite");
    const EigenSystem sys = eigh_hermitian(h, tol);
    const Eigen::Index n = h.rows();
    ComplexVector phases(n);
    for (Eigen::Index i = 0; i < n; ++i) phases(i) = std::exp(-kI * sys.values(i) * dt);
    return sys.vectors * phases.asDiagonal() * sys.vectors.adjoint();
}

// Principal Hermitian generator of a unitary: returns K with W = exp(-i K) and
// the eigenvalues of K in (-pi, pi]. Uses the Schur form, so it stays stable
// when eigenvalues of W cluster (e.g. steps close to the identity).
inline ComplexMatrix unitary_log_hermitian(const ComplexMatrix& w) {
    require_square(w, "unitary_log_hermitian");
    require_finite(w, "unitary_log_hermitian");
    const double ures = unitarity_residual(w);
    if (ures > kUnitaryTol)
        throw ValidationError("unitary_log_hermitian: input is not unitary (residual " +
                              std::to_string(ures) + ")");
    Eigen::ComplexSchur<ComplexMatrix> schur(w);
    if (schur.info() != Eigen::Success)
        throw Error("unitary_log_hermitian: Schur decomposition failed");
    const Eigen::Index n = w.rows();
    RealVector kappa(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const cxd t = schur.matrixT()(i, i);
        kappa(i) = -std::atan2(t.imag(), t.real());
    }
    ComplexMatrix k = schur.matrixU() * kappa.asDiagonal().toDenseMatrix().cast<cxd>() *
                      schur.matrixU().adjoint();
    return 0.5 * (k + k.adjoint());
}

// ---------------- qubit constants ----------------

inline ComplexMatrix pauli_x() {
    ComplexMatrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

inline ComplexMatrix pauli_y() {
    ComplexMatrix m(2, 2);
    m << 0, -kI, kI, 0;
    return m;
}

inline ComplexMatrix pauli_z() {
    ComplexMatrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

// c0*I + cx*sx + cy*sy + cz*sz
inline ComplexMatrix pauli_combination(double c0, double cx, double cy, double cz) {
    ComplexMatrix m(2, 2);
    m << cxd(c0 + cz, 0.0), cxd(cx, -cy), cxd(cx, cy), cxd(c0 - cz, 0.0);
    return m;
}

}  // namespace decphase
