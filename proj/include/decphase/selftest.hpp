#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "linalg.hpp"
#include "oracle.hpp"
#include "paths.hpp"
#include "phases.hpp"
#include "random.hpp"
#include "scenario.hpp"
#include "states.hpp"
#include "transport.hpp"

namespace decphase::acceptance {

// Tolerances the suite is graded against. Phase comparisons between two
// discretized functionals get 1e-6; algebraically exact identities get 1e-10
// or 1e-12; transport residuals after parallelization get 1e-8.
inline constexpr double kPhaseTol = 1e-6;
inline constexpr double kExactPhaseTol = 1e-10;
inline constexpr double kAlgebraTol = 1e-12;
inline constexpr double kResidualTol = 1e-8;
inline constexpr double kConeTol = 1e-4;
inline constexpr double kOrderFloor = 1.9;

struct CriterionResult {
    int index = 0;
    std::string name;
    bool pass = false;
    std::string detail;
};

namespace detail {

using decphase::detail::fmt12;

inline Decomposition random_members(Rng& rng, int n, int m, double min_weight = 0.05,
                                    double min_gap = 1e-3) {
    std::vector<double> w;
    do {
        w = simplex_weights(m, rng);
    } while (*std::min_element(w.begin(), w.end()) < min_weight);
    std::vector<DensityOperator> comps;
    comps.reserve(m);
    for (int k = 0; k < m; ++k) comps.emplace_back(random_density_matrix(n, rng, min_gap));
    return Decomposition(std::move(w), std::move(comps));
}

// Three-stage piecewise-constant motion, unit total duration, unit spectral
// norm per stage.
inline UnitaryPath random_path(Rng& rng, int n, double spu = 1000.0) {
    const double durations[3] = {0.3, 0.4, 0.3};
    std::vector<HamiltonianSegment> segs;
    std::vector<int> steps;
    for (double d : durations) {
        segs.push_back({random_hermitian(n, rng, 1.0), d});
        steps.push_back(static_cast<int>(std::max<long long>(1, std::llround(d * spu))));
    }
    return path_from_hamiltonians(segs, steps);
}

inline std::vector<UnitaryPath> random_paths(Rng& rng, int n, int m, double spu = 1000.0) {
    std::vector<UnitaryPath> out;
    out.reserve(m);
    for (int k = 0; k < m; ++k) out.push_back(random_path(rng, n, spu));
    return out;
}

inline double geometric_magnitude(const DecompositionPath& dp) {
    try {
        return decomposition_geometric_phase(dp).magnitude;
    } catch (const UndefinedPhase& e) {
        return e.magnitude;
    }
}

inline bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

}  // namespace detail

// 1. A one-member ensemble reduces to the single-state functional exactly,
// and the enlarged-space evaluation of its parallelized motion agrees.
inline CriterionResult reduction_single_member() {
    Rng rng(1001);
    bool bitwise = true;
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const int n = 2 + i % 3;
        while (true) {
            DensityOperator rho(random_density_matrix(n, rng));
            UnitaryPath path = detail::random_path(rng, n);
            Decomposition d({1.0}, {rho});
            DecompositionPath dp(d, {path});
            if (detail::geometric_magnitude(dp) < 0.35) continue;
            const double ensemble = decomposition_geometric_phase(dp).phase;
            const double single = mixed_geometric_phase(rho, path).phase;
            if (ensemble != single) bitwise = false;
            const DecompositionPath par = parallelize(dp);
            const double lifted = enlarged_relative_phase(d, par).phase;
            worst = std::max(worst, angle_distance(ensemble, lifted));
            break;
        }
    }
    const bool pass = bitwise && worst <= kPhaseTol;
    return {1, "single_member_reduction", pass,
            std::string("bitwise=") + (bitwise ? "yes" : "no") +
                ",max_lift_gap=" + detail::fmt12(worst)};
}

// 2. The ensemble relative phase matches both enlarged-space routes to
// rounding accuracy.
inline CriterionResult oracle_agreement() {
    Rng rng(1002);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const int n = 2 + i % 2;
        const int m = 2 + i % 3;
        while (true) {
            Decomposition d = detail::random_members(rng, n, m);
            DecompositionPath dp(d, detail::random_paths(rng, n, m));
            PhaseResult rel;
            try {
                rel = decomposition_relative_phase(dp);
            } catch (const UndefinedPhase&) {
                continue;
            }
            if (rel.magnitude < 0.01) continue;
            const PhaseResult block = enlarged_relative_phase(d, dp);
            const PhaseResult vec = lift_overlap_phase(d, dp, dp.path(0).nodes() - 1);
            worst = std::max({worst, angle_distance(rel.phase, block.phase),
                              angle_distance(rel.phase, vec.phase)});
            break;
        }
    }
    return {2, "relative_phase_oracle", worst <= kExactPhaseTol,
            "max_gap=" + detail::fmt12(worst)};
}

// 3. The geometric functional is invariant under admissible gauges of every
// member.
inline CriterionResult gauge_invariance() {
    Rng rng(1003);
    double worst = 0.0;
    for (int inst = 0; inst < 5; ++inst) {
        const int n = 2 + inst % 2;
        const int m = 2 + inst % 2;
        while (true) {
            Decomposition d = detail::random_members(rng, n, m);
            DecompositionPath dp(d, detail::random_paths(rng, n, m));
            if (detail::geometric_magnitude(dp) < 0.35) continue;
            const double base = decomposition_geometric_phase(dp).phase;
            for (int trial = 0; trial < 50; ++trial) {
                const auto profiles = random_gauge_profiles(d, dp.times(), rng, 0.1);
                const auto gauges = admissible_gauge(d, dp.times(), profiles);
                const double moved =
                    decomposition_geometric_phase(gauge_compose(dp, gauges)).phase;
                worst = std::max(worst, angle_distance(base, moved));
            }
            break;
        }
    }
    return {3, "gauge_invariance", worst <= kPhaseTol, "max_shift=" + detail::fmt12(worst)};
}

// 4. Parallelization drives every connection residual below tolerance and
// turns the geometric phase into a plain relative phase.
inline CriterionResult transport_fixed_point() {
    Rng rng(1004);
    double worst_residual = 0.0;
    double worst_gap = 0.0;
    for (int i = 0; i < 20; ++i) {
        const int n = 2 + i % 3;
        const int m = 2 + i % 2;
        while (true) {
            Decomposition d = detail::random_members(rng, n, m);
            DecompositionPath dp(d, detail::random_paths(rng, n, m));
            if (detail::geometric_magnitude(dp) < 0.35) continue;
            const double geo = decomposition_geometric_phase(dp).phase;
            const DecompositionPath par = parallelize(dp);
            worst_residual = std::max(worst_residual, transport_residuals(par).maxCoeff());
            worst_gap =
                std::max(worst_gap, angle_distance(geo, decomposition_relative_phase(par).phase));
            break;
        }
    }
    const bool pass = worst_residual <= kResidualTol && worst_gap <= kPhaseTol;
    return {4, "parallel_transport", pass,
            "max_residual=" + detail::fmt12(worst_residual) +
                ",max_phase_gap=" + detail::fmt12(worst_gap)};
}

// 5. Members diagonal in one common basis under a shared motion reproduce the
// mixture's phase; a non-commuting ensemble demonstrably does not.
inline CriterionResult common_basis_identity() {
    Rng rng(1005);
    double worst = 0.0;

    auto gapped = [](std::vector<double> p, double floor) {
        std::sort(p.begin(), p.end());
        for (std::size_t i = 0; i + 1 < p.size(); ++i)
            if (p[i + 1] - p[i] < floor) return false;
        return true;
    };

    for (int i = 0; i < 50; ++i) {
        const int n = 2 + i % 2;
        const int m = 2 + i % 2;
        const ComplexMatrix basis = random_unitary(n, rng);
        while (true) {
            std::vector<double> w;
            do {
                w = simplex_weights(m, rng);
            } while (*std::min_element(w.begin(), w.end()) < 0.05);

            std::vector<std::vector<double>> probs;
            for (int k = 0; k < m; ++k) {
                std::vector<double> p;
                do {
                    p = simplex_weights(n, rng);
                } while (!gapped(p, 5e-3));
                probs.push_back(std::move(p));
            }
            std::vector<double> q(n, 0.0);
            for (int k = 0; k < m; ++k)
                for (int l = 0; l < n; ++l) q[l] += w[k] * probs[k][l];
            if (!gapped(q, 1e-3)) continue;

            std::vector<DensityOperator> comps;
            for (int k = 0; k < m; ++k) {
                ComplexVector diag(n);
                for (int l = 0; l < n; ++l) diag(l) = probs[k][l];
                comps.emplace_back(ComplexMatrix(basis * diag.asDiagonal() * basis.adjoint()));
            }
            Decomposition d(w, std::move(comps));
            UnitaryPath path = detail::random_path(rng, n);
            DecompositionPath dp = DecompositionPath::shared(d, path);
            if (detail::geometric_magnitude(dp) < 0.05) continue;
            const double ensemble = decomposition_geometric_phase(dp).phase;
            const double mixture = mixed_geometric_phase(mix(d), path).phase;
            worst = std::max(worst, angle_distance(ensemble, mixture));
            break;
        }
    }

    // Non-commuting members under the same motion: the ensemble phase departs
    // from the mixture phase by a visible margin. A tilted rotation axis keeps
    // the interference sums genuinely complex.
    DensityOperator w1(0.5 * pauli_combination(1.0, 0.0, 0.0, 0.8));
    DensityOperator w2(0.5 * pauli_combination(1.0, 0.8, 0.0, 0.0));
    Decomposition wd({0.5, 0.5}, {w1, w2});
    const double ax = 1.0 / std::sqrt(3.0);
    UnitaryPath wpath =
        path_from_hamiltonians({{pauli_combination(0.0, ax, ax, ax), 1.5}}, 1500);
    DecompositionPath wdp = DecompositionPath::shared(wd, wpath);
    const double witness = angle_distance(decomposition_geometric_phase(wdp).phase,
                                          mixed_geometric_phase(mix(wd), wpath).phase);

    const bool pass = worst <= kPhaseTol && witness > 1e-3;
    return {5, "common_basis_identity", pass,
            "max_gap=" + detail::fmt12(worst) + ",witness_split=" + detail::fmt12(witness)};
}

// 6. For a channel acting on one state, branch visibilities and branch phases
// recombine into the ensemble phase.
inline CriterionResult recombination_identity() {
    Rng rng(1006);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const int n = 2 + i % 2;
        const int m = 2 + i % 3;
        while (true) {
            DensityOperator rho(random_density_matrix(n, rng));
            std::vector<double> w;
            do {
                w = simplex_weights(m, rng);
            } while (*std::min_element(w.begin(), w.end()) < 0.05);
            const std::vector<UnitaryPath> paths = detail::random_paths(rng, n, m);

            std::vector<double> vis(m), ang(m);
            bool usable = true;
            for (int k = 0; k < m; ++k) {
                vis[k] = visibility(rho, paths[k]);
                if (vis[k] < 0.1) {
                    usable = false;
                    break;
                }
                ang[k] = per_kraus_geometric_phase(rho, paths[k]).phase;
            }
            if (!usable) continue;

            PhaseResult total;
            try {
                total = cp_geometric_phase(rho, w, paths);
            } catch (const UndefinedPhase&) {
                continue;
            }
            if (total.magnitude < 0.05) continue;
            worst = std::max(worst, angle_distance(total.phase, recombine(w, vis, ang).phase));
            break;
        }
    }
    return {6, "channel_recombination", worst <= kPhaseTol, "max_gap=" + detail::fmt12(worst)};
}

// 7. Qubit cone benchmark: closed-form value, grid-exactness for a constant
// generator, and second-order convergence for a time-dependent one.
inline CriterionResult cone_benchmark() {
    const double r = 0.5;
    const double c = 2.0 / 3.0;
    const double omega = 2.0 * kPi;
    const double tau = 1.0;
    const double amp = 2.0;
    const double sin_theta = std::sqrt(1.0 - c * c);

    DensityOperator rho(0.5 * pauli_combination(1.0, r * sin_theta, 0.0, r * c));
    const double closed = std::atan2(-r * std::sin(kPi * c), -std::cos(kPi * c));

    UnitaryPath flat = path_from_hamiltonians({{0.5 * omega * pauli_z(), tau}}, 100);
    const double exact_gap = angle_distance(mixed_geometric_phase(rho, flat).phase, closed);

    // Same loop driven by a generator with a time-dependent admissible wobble,
    // sampled at interval midpoints.
    auto wobbled = [&](int steps) {
        const double dt = tau / steps;
        std::vector<HamiltonianSegment> segs;
        segs.reserve(steps);
        for (int j = 0; j < steps; ++j) {
            const double t = (j + 0.5) * dt;
            const double g = amp * std::sin(2.0 * kPi * t / tau);
            ComplexMatrix h =
                0.5 * omega * pauli_z() +
                g * (sin_theta * std::cos(omega * t) * pauli_x() +
                     sin_theta * std::sin(omega * t) * pauli_y() + c * pauli_z());
            segs.push_back({std::move(h), dt});
        }
        return path_from_hamiltonians(segs, std::vector<int>(steps, 1));
    };

    const int ladder[4] = {1250, 2500, 5000, 10000};
    double err[4];
    for (int i = 0; i < 4; ++i)
        err[i] = angle_distance(mixed_geometric_phase(rho, wobbled(ladder[i])).phase, closed);

    double order_sum = 0.0;
    for (int i = 0; i < 3; ++i) order_sum += std::log2(err[i] / err[i + 1]);
    const double order = order_sum / 3.0;

    const bool pass = exact_gap <= kExactPhaseTol && err[3] <= kConeTol && order >= kOrderFloor;
    return {7, "cone_benchmark", pass,
            "value=" + detail::fmt12(closed) + ",flat_gap=" + detail::fmt12(exact_gap) +
                ",finest_err=" + detail::fmt12(err[3]) + ",order=" + detail::fmt12(order)};
}

// 8. The single-term test: the ancilla purity equals the weight square sum,
// which stays clear of 1 whenever at least two weights carry mass.
inline CriterionResult obstruction_bound() {
    Rng rng(1008);
    Decomposition fixed({0.5, 0.3, 0.2},
                        {DensityOperator(random_density_matrix(2, rng)),
                         DensityOperator(random_density_matrix(2, rng)),
                         DensityOperator(random_density_matrix(2, rng))});
    const auto [lhs0, rhs0] = one_term_obstruction(fixed);
    const bool fixed_ok = std::abs(lhs0 - 0.38) <= kAlgebraTol && rhs0 == 1.0;

    double worst_dev = 0.0;
    double max_lhs = 0.0;
    bool rhs_ok = true;
    for (int i = 0; i < 50; ++i) {
        const int n = 2 + i % 2;
        const int m = 2 + i % 3;
        Decomposition d = detail::random_members(rng, n, m);
        const auto [lhs, rhs] = one_term_obstruction(d);
        double square_sum = 0.0;
        for (double w : d.weights()) square_sum += w * w;
        worst_dev = std::max(worst_dev, std::abs(lhs - square_sum));
        max_lhs = std::max(max_lhs, lhs);
        rhs_ok = rhs_ok && rhs == 1.0;
    }
    const bool pass =
        fixed_ok && rhs_ok && worst_dev <= kAlgebraTol && max_lhs <= 0.905 + kAlgebraTol;
    return {8, "one_term_obstruction", pass,
            "fixed_sum=" + detail::fmt12(lhs0) + ",max_dev=" + detail::fmt12(worst_dev) +
                ",max_sum=" + detail::fmt12(max_lhs)};
}

// 9. Weighted branch unitaries stay complete on the whole grid.
inline CriterionResult completeness_residual() {
    Rng rng(1009);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        const int n = 2 + i % 2;
        const int m = 2 + i % 3;
        std::vector<double> w;
        do {
            w = simplex_weights(m, rng);
        } while (*std::min_element(w.begin(), w.end()) < 0.05);
        worst = std::max(worst,
                         kraus_completeness_residual(w, detail::random_paths(rng, n, m)));
    }
    return {9, "branch_completeness", worst <= kResidualTol,
            "max_residual=" + detail::fmt12(worst)};
}

// 10. Scenario intake: malformed JSON is located, schema errors name the
// field, and a well-formed channel scenario runs green end to end.
inline CriterionResult scenario_io() {
    bool parse_ok = false;
    try {
        parse_scenario_text("{ \"system_dim\": 2,, }", "bad");
    } catch (const ParseError& e) {
        parse_ok = detail::contains(e.what(), "line ") && detail::contains(e.what(), "column ");
    } catch (const Error&) {
    }

    bool schema_ok = false;
    try {
        build_scenario(parse_scenario_text(
            R"({"system_dim": 2,
                "components": [{"density": {"bloch": [0, 0, 0.5]}}],
                "paths": [{"segments": [{"hamiltonian": {"pauli": [0, 0, 0, 1]},
                                         "duration": 1}]}]})"));
    } catch (const ValidationError& e) {
        schema_ok = detail::contains(e.what(), "components[0].weight");
    } catch (const Error&) {
    }

    bool run_ok = false;
    std::string failure;
    try {
        const char* text = R"({
            "name": "split_precession",
            "system_dim": 2,
            "components": [
                {"weight": 0.7, "density": {"bloch": [0.6, 0.0, 0.3]}},
                {"weight": 0.3, "density": {"bloch": [0.6, 0.0, 0.3]}}
            ],
            "paths": [
                {"segments": [{"hamiltonian": {"pauli": [0.0, 0.0, 0.0, 0.5]}, "duration": 1.0}]},
                {"segments": [{"hamiltonian": {"pauli": [0.0, 0.0, 0.0, -0.5]}, "duration": 1.0}]}
            ]
        })";
        const ScenarioReport rep = run_scenario(build_scenario(parse_scenario_text(text)));
        run_ok = rep.passed && !rep.lines.empty();
        if (!run_ok) failure = "report_failed";
    } catch (const Error& e) {
        failure = e.what();
    }

    const bool pass = parse_ok && schema_ok && run_ok;
    return {10, "scenario_io", pass,
            std::string("parse=") + (parse_ok ? "ok" : "bad") + ",schema=" +
                (schema_ok ? "ok" : "bad") + ",run=" + (run_ok ? "ok" : failure)};
}

inline std::vector<CriterionResult (*)()> criteria() {
    return {reduction_single_member, oracle_agreement,   gauge_invariance,
            transport_fixed_point,   common_basis_identity, recombination_identity,
            cone_benchmark,          obstruction_bound,  completeness_residual,
            scenario_io};
}

inline std::string render(const CriterionResult& r) {
    std::string line = "[" + std::to_string(r.index) + "/10] ";
    line += r.pass ? "pass" : "FAIL";
    line += "  " + r.name;
    if (!r.detail.empty()) line += "  (" + r.detail + ")";
    return line;
}

// Run every criterion, streaming one line per result. Returns true when all
// pass.
inline bool run_all(std::ostream& os) {
    bool ok = true;
    int passed = 0;
    for (auto* fn : criteria()) {
        const CriterionResult r = fn();
        os << render(r) << '\n';
        os.flush();
        ok = ok && r.pass;
        passed += r.pass ? 1 : 0;
    }
    os << "passed " << passed << "/10\n";
    return ok;
}

}  // namespace decphase::acceptance
