#include "tdccm/nhip.hpp"

#include <doctest.h>

#include <cmath>

using namespace tdccm;
using namespace tdccm::nhip;

namespace {

ShiftFamily family() {
    return {[](double t) { return cplx(0.1 * (1.0 + t)); }, [](double) { return cplx(0.1); },
            [](double t) { return cplx(0.2 * std::cos(t)); }, [](double t) { return cplx(-0.2 * std::sin(t)); }};
}

} // namespace

TEST_CASE("shift-map kets against the closed form") {
    // |psi(t)> = Omega(t)^{-1} e^{-iht} |psi0>, evaluated independently.
    const auto sp = hilbert::build_space(4, true);
    const auto h = hilbert::rabi_hamiltonian({1.0, 1.0, 0.3}, sp);
    const ThreeSpaceBundle bundle{h, shift_map(sp, family())};
    const auto tr = evolve_three_space(bundle, hilbert::reference_state(sp), {0.0, 1.0}, 1e-3);
    const std::vector<cplx> want{{0.73052239252240969, 0.49722720275883153},
                                 {-0.15788117326726731, -0.1074612016763847},
                                 {-0.14610447850448194, -0.099445440551766295},
                                 {-0.14579754981716761, -0.36076200105331496}};
    for (std::size_t k = 0; k < want.size(); ++k) {
        CHECK(std::abs(tr.ket[1](Index(k)) - want[k]) < 1e-10);
    }
    CHECK((bundle.theta(1.0).mat() * tr.ket[1] - tr.ketket[1]).norm() < 1e-10);
}

TEST_CASE("analytic and finite-difference Coriolis operators agree") {
    const auto sp = hilbert::build_space(4, true);
    const auto map = shift_map(sp, family());
    CHECK(map.analytic());
    CHECK(hilbert::max_abs((coriolis(map, 0.7) - coriolis_fd(map, 0.7)).mat()) < 1e-9);
    const auto h = hilbert::rabi_hamiltonian({1.0, 1.0, 0.3}, sp);
    const auto g = generator({h, map}, 0.7);
    CHECK(hilbert::approx_equal(g, dress(h, map.omega(0.7)) - coriolis(map, 0.7), 1e-13));
}

TEST_CASE("metric relations for a dressed Hermitian operator") {
    const auto sp = hilbert::build_space(3, true);
    const auto h = hilbert::rabi_hamiltonian({1.0, 1.0, 0.3}, sp);
    const auto om = shift_map(sp, family()).omega(0.4);
    const auto big_h = dress(h, om);
    CHECK_FALSE(hilbert::is_hermitian(big_h));
    CHECK(hilbert::max_abs(quasi_hermiticity_defect(big_h, metric(om)).mat()) < 1e-12);
}

TEST_CASE("singular maps and non-observable operators are rejected") {
    const auto sp = hilbert::build_space(2, true);
    Matrix m = Matrix::Identity(sp.dim(), sp.dim());
    m(3, 3) = 0.0;
    CHECK_THROWS_AS(require_invertible(hilbert::OperatorMatrix(sp, m)), SingularMap);
    const auto h = hilbert::rabi_hamiltonian({1.0, 1.0, 0.3}, sp);
    const ThreeSpaceBundle bundle{h, constant_map(hilbert::OperatorMatrix::identity(sp))};
    CHECK_THROWS_AS(heisenberg_observable(bundle, hilbert::elementary_ops(sp).b, {0.0, 0.1}, 1e-3),
                    ObservabilityPrecondition);
    CHECK_THROWS_AS(evolve_three_space(bundle, hilbert::reference_state(sp), {0.0, 0.0}, 1e-3),
                    PreconditionError);
}

TEST_CASE("Theta is stationary exactly when Xi is Hermitian") {
    const auto sp = hilbert::build_space(3, true);
    const auto h = hilbert::rabi_hamiltonian({1.0, 1.0, 0.3}, sp);
    const auto m = shift_map(sp, family()).omega(0.0);
    const auto still = theta_stationarity_check(unitary_map(h, m), 0.9);
    CHECK(still.hermiticity_defect < 1e-12);
    CHECK(hilbert::max_abs(still.rhs) < 1e-8);
    const auto moving = theta_stationarity_check(shift_map(sp, family()), 0.9);
    CHECK(moving.hermiticity_defect > 1e-2);
    CHECK(moving.mismatch() < 1e-8);
}

TEST_CASE("NCCM-generated map reproduces exact evolution at full truncation") {
    const auto sp = hilbert::build_space(3, true);
    const auto h = hilbert::rabi_hamiltonian({1.0, 1.0, 0.3}, sp);
    ode::IntegratorConfig cfg;
    cfg.t1 = 1.0;
    cfg.output_every = 1;
    const auto traj = dynamics::integrate(nccm::CCMState::reference(nccm::complete_set(sp)), h, cfg);
    const auto map = nccm_map(traj, h);
    // Omega(t)|psi0> carries the full ket e^k e^S |psi0> up to the phase e^k.
    const Vector psi = hilbert::Spectrum(h).evolve(hilbert::reference_state(sp), 1.0);
    const Vector mapped = map.omega(1.0).mat() * hilbert::reference_state(sp);
    CHECK(std::abs(std::abs(psi.dot(mapped)) / mapped.norm() - 1.0) < 1e-9);
}

TEST_CASE("bra and metric agree as functionals but not as operators") {
    const auto sp = hilbert::build_space(3, true);
    const auto full = nccm::complete_set(sp);
    Vector psi = hilbert::reference_state(sp) + 0.3 * hilbert::basis_state(sp, 1, 1) +
                 cplx(0.0, 0.2) * hilbert::basis_state(sp, 2, 0);
    psi.normalize();
    const auto st = nccm::cluster_log(psi, psi.adjoint(), full);
    const auto rep = bra_metric_report(st, hilbert::elementary_ops(sp).number);
    CHECK(rep.expectation_discrepancy < 1e-13);
    CHECK(rep.matrix_discrepancy > 1e-3);
}
