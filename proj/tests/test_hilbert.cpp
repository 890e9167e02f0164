#include "tdccm/hilbert.hpp"

#include <doctest.h>

#include <vector>

using namespace tdccm;
using namespace tdccm::hilbert;

TEST_CASE("space layout is boson-major") {
    const auto sp = build_space(3, true);
    CHECK(sp.dim() == 8);
    CHECK(sp.index(2, 1) == 5);
    CHECK(build_space(3, false).dim() == 4);
    CHECK_THROWS_AS(build_space(0, true), InvalidCutoff);
}

TEST_CASE("ladder operators obey the truncated algebra") {
    const auto sp = build_space(5, true);
    const auto o = elementary_ops(sp);
    CHECK(approx_equal(o.b.adjoint(), o.b_dag));
    CHECK(approx_equal(o.b_dag * o.b, o.number));
    // [b, b_dag] = 1 except on the top Fock level, where the wall gives -n_b.
    const Matrix c = commutator(o.b, o.b_dag).mat();
    for (int n = 0; n <= 5; ++n) {
        for (int s = 0; s < 2; ++s) {
            const Index i = sp.index(n, s);
            CHECK(c(i, i).real() == doctest::Approx(n < 5 ? 1.0 : -5.0));
        }
    }
    CHECK(o.sigma_plus(sp.index(0, 1), sp.index(0, 0)) == cplx(2.0));
    CHECK(approx_equal(commutator(o.sigma_plus, o.sigma_minus), 4.0 * o.sigma_z));
}

TEST_CASE("Rabi Hamiltonian entries at n_b = 1") {
    const double g = 0.3;
    const auto sp = build_space(1, true);
    const auto h = rabi_hamiltonian({1.0, 1.0, g}, sp);
    CHECK(is_hermitian(h));
    CHECK(h(0, 0).real() == doctest::Approx(-0.5));
    CHECK(h(1, 1).real() == doctest::Approx(0.5));
    CHECK(h(2, 2).real() == doctest::Approx(0.5));
    CHECK(h(3, 3).real() == doctest::Approx(1.5));
    CHECK(h(3, 0).real() == doctest::Approx(2.0 * g));
    CHECK(h(2, 1).real() == doctest::Approx(2.0 * g));
    CHECK(std::abs(h(1, 0)) == 0.0);
    CHECK_THROWS_AS(rabi_hamiltonian({1.0, 1.0, g}, build_space(1, false)), PreconditionError);
    CHECK_THROWS_AS(rabi_hamiltonian({1.0, -1.0, g}, sp), PreconditionError);
}

TEST_CASE("ground energies match the independent diagonalization") {
    const auto sp = build_space(30, true);
    const std::vector<std::pair<double, double>> ref{
        {0.1, -0.52020199938627576}, {0.2, -0.5833273289684765}, {0.3, -0.69761529065707051}};
    for (const auto& [g, e] : ref) {
        CHECK(ed_ground(rabi_hamiltonian({1.0, 1.0, g}, sp)).energy == doctest::Approx(e).epsilon(1e-12));
    }
    const Spectrum spec(rabi_hamiltonian({1.0, 1.0, 0.2}, sp));
    CHECK(spec.energies()(1) - spec.energies()(0) == doctest::Approx(0.60669481033571049).epsilon(1e-11));
}

TEST_CASE("exact evolution from the reference") {
    const auto sp = build_space(30, true);
    const auto h = rabi_hamiltonian({1.0, 1.0, 0.1}, sp);
    const auto o = elementary_ops(sp);
    const std::vector<double> ts{0.0, 5.0};
    const auto psi = ed_evolve(h, reference_state(sp), ts);
    CHECK(expectation(o.sigma_z, psi[0]).real() == doctest::Approx(-1.0));
    CHECK(expectation(o.sigma_z, psi[1]).real() == doctest::Approx(-0.97308890458664921).epsilon(1e-11));
    CHECK(expectation(o.number, psi[1]).real() == doctest::Approx(0.037079827967800363).epsilon(1e-10));
    CHECK(psi[1].norm() == doctest::Approx(1.0).epsilon(1e-13));
    Vector bad = 2.0 * reference_state(sp);
    CHECK_THROWS_AS(ed_evolve(h, bad, ts), PreconditionError);
}

TEST_CASE("oracle refuses non-Hermitian input") {
    const auto sp = build_space(2, true);
    const auto o = elementary_ops(sp);
    CHECK_THROWS_AS(Spectrum{o.b}, OraclePrecondition);
}

TEST_CASE("expectation normalizes and the boundary population reads the top level") {
    const auto sp = build_space(3, true);
    const auto o = elementary_ops(sp);
    Vector v = 3.0 * basis_state(sp, 3, 1);
    CHECK(expectation(o.number, v).real() == doctest::Approx(3.0));
    CHECK(boundary_population(sp, v) == doctest::Approx(1.0));
    CHECK(boundary_population(sp, reference_state(sp)) == 0.0);
    CHECK_THROWS_AS((void)basis_state(sp, 4, 0), IndexError);
}
