#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "linalg.hpp"

namespace decphase {

// Deterministic random source. Draws raw mt19937_64 words and maps them to
// doubles by hand so the stream does not depend on the standard library's
// distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // uniform in (0, 1]
    double uniform_pos() { return 1.0 - uniform(); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // standard normal via Box-Muller with a cached spare
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
        const double phi = 2.0 * kPi * uniform();
        spare_ = r * std::sin(phi);
        have_spare_ = true;
        return r * std::cos(phi);
    }

    cxd cgaussian() {
        const double re = gaussian();
        const double im = gaussian();
        return {re, im};
    }

    std::uint64_t raw() { return gen_(); }

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Flat (uniform) sample from the probability simplex via normalized exponentials.
inline std::vector<double> simplex_weights(int m, Rng& rng) {
    std::vector<double> w(m);
    double total = 0.0;
    for (int k = 0; k < m; ++k) {
        w[k] = -std::log(rng.uniform_pos());
        total += w[k];
    }
    for (double& x : w) x /= total;
    return w;
}

inline ComplexMatrix ginibre(int n, Rng& rng) {
    ComplexMatrix g(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) g(r, c) = rng.cgaussian();
    return g;
}

// Random Hermitian matrix rescaled to the requested spectral norm.
inline ComplexMatrix random_hermitian(int n, Rng& rng, double spectral_norm = 1.0) {
    const ComplexMatrix g = ginibre(n, rng);
    ComplexMatrix h = 0.5 * (g + g.adjoint());
    const EigenSystem sys = eigh_hermitian(h, 1e-8);
    const double top = std::max(std::abs(sys.values(0)), std::abs(sys.values(n - 1)));
    if (top > 0.0) h *= spectral_norm / top;
    return 0.5 * (h + h.adjoint());
}

// Random full-rank density matrix (Ginibre ensemble), resampled until the
// spectrum clears the requested adjacent gap.
inline ComplexMatrix random_density_matrix(int n, Rng& rng, double min_gap = 1e-3) {
    for (;;) {
        const ComplexMatrix g = ginibre(n, rng);
        ComplexMatrix rho = g * g.adjoint();
        rho /= rho.trace().real();
        rho = 0.5 * (rho + rho.adjoint());
        if (eigh_hermitian(rho, 1e-8).min_adjacent_gap() >= min_gap) return rho;
    }
}

// Haar-distributed unitary via QR of a Ginibre sample with the standard
// phase correction on the R diagonal.
inline ComplexMatrix random_unitary(int n, Rng& rng) {
    const ComplexMatrix g = ginibre(n, rng);
    Eigen::HouseholderQR<ComplexMatrix> qr(g);
    ComplexMatrix q = qr.householderQ();
    const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < n; ++i) {
        const cxd d = r(i, i);
        q.col(i) *= (std::abs(d) > 0.0) ? d / std::abs(d) : cxd(1.0, 0.0);
    }
    return q;
}

}  // namespace decphase
