#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <decphase/paths.hpp>
#include <decphase/random.hpp>

using namespace decphase;

namespace {

// diag(e^{-i w t / 2}, e^{+i w t / 2})
ComplexMatrix precession(double omega, double t) {
    ComplexMatrix u = ComplexMatrix::Zero(2, 2);
    u(0, 0) = std::exp(-kI * omega * t / 2.0);
    u(1, 1) = std::exp(kI * omega * t / 2.0);
    return u;
}

}  // namespace

TEST_CASE("piecewise constant paths hit the closed form precession") {
    const double omega = 1.3;
    UnitaryPath path = path_from_hamiltonians({{0.5 * omega * pauli_z(), 0.7}}, 70);
    REQUIRE(path.nodes() == 71);
    CHECK(path.duration() == Catch::Approx(0.7).margin(1e-15));
    CHECK(path.has_generators());

    for (int j : {0, 17, 35, 70})
        CHECK(max_abs(path.unitary(j) - precession(omega, path.times()[j])) < 1e-13);

    // the first node is snapped to the exact identity
    CHECK(max_abs(path.unitary(0) - ComplexMatrix::Identity(2, 2)) == 0.0);
}

TEST_CASE("segment boundaries land on exact times") {
    Rng rng(3);
    std::vector<HamiltonianSegment> segs = {{random_hermitian(2, rng), 0.3},
                                            {random_hermitian(2, rng), 0.4},
                                            {random_hermitian(2, rng), 0.3}};
    UnitaryPath path = path_from_hamiltonians(segs, {3, 4, 3});
    CHECK(path.times()[3] == 0.3);
    CHECK(path.times()[7] == Catch::Approx(0.7).margin(1e-15));
    CHECK(path.times()[10] == 1.0);
    CHECK(path.intervals() == 10);
}

TEST_CASE("path validation rejects malformed input") {
    const ComplexMatrix id = ComplexMatrix::Identity(2, 2);
    CHECK_THROWS_AS(UnitaryPath({0.0}, {}), GridMismatch);
    CHECK_THROWS_AS(UnitaryPath({0.1, 0.2}, {id, id}), ValidationError);   // grid not at 0
    CHECK_THROWS_AS(UnitaryPath({0.0, 0.0}, {id, id}), ValidationError);   // not increasing
    CHECK_THROWS_AS(UnitaryPath({0.0, 1.0}, {1.5 * id, id}), ValidationError);  // node 0 not I

    // generator inconsistent with the node relation
    const ComplexMatrix u1 = step_unitary(pauli_x(), 0.5);
    CHECK_THROWS_AS(UnitaryPath({0.0, 0.5}, {id, u1}, {pauli_z()}), ValidationError);
    CHECK_NOTHROW(UnitaryPath({0.0, 0.5}, {id, u1}, {pauli_x()}));
    CHECK_THROWS_AS(UnitaryPath({0.0, 0.5}, {id, u1}, {pauli_x(), pauli_x()}), GridMismatch);

    CHECK_THROWS_AS(path_from_hamiltonians({{pauli_z(), -1.0}}, 5), ValidationError);
    CHECK_THROWS_AS(path_from_hamiltonians({{pauli_z(), 1.0}}, 0), ValidationError);
}

TEST_CASE("connection on a precession path is the exact imaginary rate") {
    const double omega = 1.3;
    UnitaryPath path = path_from_hamiltonians({{0.5 * omega * pauli_z(), 0.7}}, 70);
    ComplexVector e0 = ComplexVector::Zero(2);
    e0(0) = 1.0;
    for (int j : {0, 31, 69}) {
        const cxd a = connection(path, e0, j);
        CHECK(std::abs(a.real()) < 1e-14);
        CHECK(a.imag() == Catch::Approx(-omega / 2.0).margin(1e-13));
    }
    const cxd factor = accumulated_phase_factor(path, e0);
    CHECK(std::abs(factor - std::exp(kI * omega * 0.7 / 2.0)) < 1e-12);
}

TEST_CASE("generator mode connections are purely imaginary on random paths") {
    Rng rng(5);
    UnitaryPath path = path_from_hamiltonians({{random_hermitian(3, rng), 1.0}}, 50);
    for (int l = 0; l < 3; ++l) {
        ComplexVector v = ComplexVector::Zero(3);
        v(l) = 1.0;
        for (int j = 0; j < path.intervals(); j += 7)
            CHECK(std::abs(connection(path, v, j).real()) < 1e-14);
    }
}

TEST_CASE("bulk factors equal per vector factors") {
    Rng rng(7);
    UnitaryPath path = path_from_hamiltonians({{random_hermitian(3, rng), 0.8}}, 40);
    const ComplexMatrix basis = random_unitary(3, rng);
    const ComplexVector bulk = accumulated_phase_factors(path, basis);
    for (int c = 0; c < 3; ++c) {
        const cxd single = accumulated_phase_factor(path, basis.col(c));
        CHECK(std::abs(bulk(c) - single) < 1e-14);
    }
}

TEST_CASE("the node only fallback is first order accurate") {
    const double omega = 1.1;
    ComplexVector e0 = ComplexVector::Zero(2);
    e0(0) = 1.0;
    const cxd exact = -kI * omega / 2.0;

    auto fallback_error = [&](int steps) {
        UnitaryPath with = path_from_hamiltonians({{0.5 * omega * pauli_z(), 1.0}}, steps);
        std::vector<ComplexMatrix> nodes;
        for (int j = 0; j < with.nodes(); ++j) nodes.push_back(with.unitary(j));
        UnitaryPath without(with.times(), std::move(nodes));
        REQUIRE_FALSE(without.has_generators());
        return std::abs(connection(without, e0, 0) - exact);
    };

    const double e1 = fallback_error(100);
    const double e2 = fallback_error(200);
    CHECK(e1 > 1e-6);  // visibly inexact
    CHECK(e1 / e2 == Catch::Approx(2.0).epsilon(0.05));  // halves with dt
}

TEST_CASE("midpoint sampled smooth generators converge at second order") {
    // H(t) = cos(t) X + sin(2t) Z over [0, 1], sampled at interval midpoints.
    auto build = [](int steps) {
        std::vector<HamiltonianSegment> segs;
        const double dt = 1.0 / steps;
        for (int j = 0; j < steps; ++j) {
            const double t = (j + 0.5) * dt;
            segs.push_back({std::cos(t) * pauli_x() + std::sin(2.0 * t) * pauli_z(), dt});
        }
        return path_from_hamiltonians(segs, std::vector<int>(steps, 1));
    };
    // endpoint error against a fine reference
    const ComplexMatrix ref = build(4096).endpoint();
    const double e1 = max_abs(build(64).endpoint() - ref);
    const double e2 = max_abs(build(128).endpoint() - ref);
    CHECK(std::log2(e1 / e2) > 1.9);
}

TEST_CASE("gauge compose multiplies nodes and rebuilds generators") {
    const double omega = 2.0 * kPi;
    UnitaryPath path = path_from_hamiltonians({{0.5 * omega * pauli_z(), 1.0}}, 100);
    UnitaryPath gauge = path_from_hamiltonians({{0.25 * omega * pauli_z(), 1.0}}, 100);
    UnitaryPath both = gauge_compose(path, gauge);
    REQUIRE(both.has_generators());
    for (int j : {0, 50, 100})
        CHECK(max_abs(both.unitary(j) - path.unitary(j) * gauge.unitary(j)) < 1e-13);
    // commuting case: the rebuilt generator is the sum
    for (int j : {0, 99})
        CHECK(max_abs(both.generator(j) - 0.75 * omega * pauli_z()) < 1e-10);

    UnitaryPath coarse = path_from_hamiltonians({{0.5 * omega * pauli_z(), 1.0}}, 50);
    CHECK_THROWS_AS(gauge_compose(path, coarse), GridMismatch);
}

TEST_CASE("decomposition paths share one grid") {
    Rng rng(9);
    Decomposition d = random_decomposition(2, 2, 11, 0.1);
    UnitaryPath a = path_from_hamiltonians({{random_hermitian(2, rng), 1.0}}, 40);
    UnitaryPath b = path_from_hamiltonians({{random_hermitian(2, rng), 1.0}}, 40);
    UnitaryPath off = path_from_hamiltonians({{random_hermitian(2, rng), 1.0}}, 39);

    CHECK_NOTHROW(DecompositionPath(d, {a, b}));
    CHECK_THROWS_AS(DecompositionPath(d, {a, off}), GridMismatch);
    CHECK_THROWS_AS(DecompositionPath(d, {a}), DimensionMismatch);

    DecompositionPath shared = DecompositionPath::shared(d, a);
    CHECK(shared.size() == 2);
    CHECK(max_abs(shared.path(0).endpoint() - shared.path(1).endpoint()) == 0.0);
}
