// nhip.hpp: three-Hilbert-space machinery for a time-dependent Dyson map.
//
//   Theta = Omega^dag Omega           metric
//   H     = Omega^{-1} h Omega        non-Hermitian avatar of h
//   Xi    = i Omega^{-1} dOmega/dt    Coriolis operator
//   G     = H - Xi                    ket generator (G^dag drives ketkets)
//
// Kets: |psi> (i d/dt = G), ketkets |psi>> = Theta |psi> (i d/dt = G^dag),
// initial-space kets |psi}} = Omega |psi> (i d/dt = h).

#pragma once

#include "tdccm/dynamics.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace tdccm::nhip {

using hilbert::OperatorMatrix;
using hilbert::SpaceSpec;

inline constexpr double kFdStep = 1e-5;
inline constexpr double kMaxCondition = 1e12;
inline constexpr double kObservabilityTol = 1e-8;

class DysonMapTrajectory {
public:
    using Fn = std::function<Matrix(double)>;

    // Without `derivative` the time derivative falls back to central differences.
    DysonMapTrajectory(SpaceSpec space, Fn omega, std::optional<Fn> derivative = {},
                       double h_fd = kFdStep);

    [[nodiscard]] const SpaceSpec& space() const noexcept { return space_; }
    [[nodiscard]] bool analytic() const noexcept { return derivative_.has_value(); }
    [[nodiscard]] OperatorMatrix omega(double t) const;
    [[nodiscard]] OperatorMatrix derivative(double t) const;
    [[nodiscard]] OperatorMatrix derivative_fd(double t) const;
    [[nodiscard]] double h_fd() const noexcept { return h_fd_; }

private:
    SpaceSpec space_;
    Fn omega_;
    std::optional<Fn> derivative_;
    double h_fd_;
};

// SingularMap when cond(Omega) exceeds kMaxCondition.
void require_invertible(const OperatorMatrix& omega);
OperatorMatrix metric(const OperatorMatrix& omega);
OperatorMatrix dress(const OperatorMatrix& q, const OperatorMatrix& omega);
// Q^dag Theta - Theta Q
OperatorMatrix quasi_hermiticity_defect(const OperatorMatrix& q, const OperatorMatrix& theta);

OperatorMatrix coriolis(const DysonMapTrajectory& map, double t);
OperatorMatrix coriolis_fd(const DysonMapTrajectory& map, double t);

struct ThreeSpaceBundle {
    OperatorMatrix h;
    DysonMapTrajectory map;

    [[nodiscard]] OperatorMatrix theta(double t) const { return metric(map.omega(t)); }
    [[nodiscard]] OperatorMatrix hamiltonian(double t) const { return dress(h, map.omega(t)); }
    [[nodiscard]] OperatorMatrix coriolis(double t) const { return nhip::coriolis(map, t); }
};

OperatorMatrix generator(const ThreeSpaceBundle& bundle, double t);

struct ThreeSpaceTrajectory {
    std::vector<double> t;
    std::vector<Vector> initial; // |psi}}
    std::vector<Vector> ket;     // |psi>
    std::vector<Vector> ketket;  // |psi>>
};

// Integrates the three laws independently with RK4 (step dt) and records at
// every point of t_grid (which must be increasing and start at the bundle's t0).
ThreeSpaceTrajectory evolve_three_space(const ThreeSpaceBundle& bundle, const Vector& psi0_initial,
                                        const std::vector<double>& t_grid, double dt);

// i dQ/dt = Q Xi - Xi Q from Q(t_grid[0]) = q0; ObservabilityPrecondition when
// q0 is not quasi-Hermitian w.r.t. Theta(t_grid[0]).
std::vector<OperatorMatrix> heisenberg_observable(const ThreeSpaceBundle& bundle, const OperatorMatrix& q0,
                                                  const std::vector<double>& t_grid, double dt);

struct ThetaCheck {
    Matrix lhs;                  // i Omega (Xi^dag - Xi) Omega^dag
    Matrix rhs;                  // d/dt (Omega Omega^dag), central differences
    double hermiticity_defect;   // ||Xi^dag - Xi||
    [[nodiscard]] double mismatch() const { return hilbert::max_abs(lhs - rhs); }
};

ThetaCheck theta_stationarity_check(const DysonMapTrajectory& map, double t);

// Dyson map families.
DysonMapTrajectory constant_map(const OperatorMatrix& m);
// M exp(-i h t) for Hermitian h (M = 1 gives the Heisenberg-picture map).
DysonMapTrajectory unitary_map(const OperatorMatrix& h, const std::optional<OperatorMatrix>& m = {});
// exp(alpha(t) b_dag) exp(beta(t) sigma_plus), closed-form derivative.
struct ShiftFamily {
    std::function<cplx(double)> alpha, alpha_dot, beta, beta_dot;
};
DysonMapTrajectory shift_map(const SpaceSpec& space, const ShiftFamily& family);
// exp(S(t)) from an NCCM trajectory; s(t) is the cubic Hermite interpolant of
// the stored amplitudes and their rates, so dOmega/dt = e^S dS/dt is exact for
// the interpolant.
DysonMapTrajectory nccm_map(const std::vector<nccm::CCMState>& trajectory, const OperatorMatrix& h);

// Matrix-level comparison of the bra operator with the normalized metric and
// the corresponding functional-level comparison for one observable.
struct BraMetricReport {
    double matrix_discrepancy;      // || S~ - Theta / <psi0|Theta|psi0> ||
    double expectation_discrepancy; // |NCCM <q> - <psi0|Theta Q|psi0> / <psi0|Theta|psi0>|
};
BraMetricReport bra_metric_report(const nccm::CCMState& state, const OperatorMatrix& q);

} // namespace tdccm::nhip
