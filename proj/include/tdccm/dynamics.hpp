// dynamics.hpp: NCCM equations of motion, trajectories, observables, the
// stationary SUB-N solver with continuation in g, and linear-response spectra.

#pragma once

#include "tdccm/nccm.hpp"
#include "tdccm/ode.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace tdccm::dynamics {

using hilbert::OperatorMatrix;
using hilbert::RabiParams;
using nccm::CCMState;
using nccm::ConfigSetPtr;
using ode::IntegratorConfig;

inline constexpr double kNewtonTol = 1e-12;
inline constexpr int kNewtonMaxIter = 100;
inline constexpr double kJacobianStep = 1e-6;
inline constexpr double kSingularCondition = 1e12;
inline constexpr double kAmplitudeCap = 1e6;
inline constexpr double kContinuationStep = 0.005;

// State vector layout used by every integrator: [s; s~; k].
Vector pack(const CCMState& state);
CCMState unpack(const Vector& x, const ConfigSetPtr& set, double t);

struct EomRhs {
    Vector ds;
    Vector ds_tilde;
    cplx dk{0.0, 0.0};
};

// ds/dt = -i dH/ds~, ds~/dt = +i dH/ds, dk/dt = -i <psi0|e^{-S} h e^{S}|psi0>
EomRhs eom_rhs(const CCMState& state, const OperatorMatrix& h);

// Odeint-style right-hand side on the packed layout.
ode::Rhs packed_rhs(const ConfigSetPtr& set, const OperatorMatrix& h);

// Streams every output state to `observer`; DivergenceError leaves the
// states already streamed intact.
void integrate(const CCMState& state0, const OperatorMatrix& h, const IntegratorConfig& cfg,
               const std::function<void(const CCMState&)>& observer);
std::vector<CCMState> integrate(const CCMState& state0, const OperatorMatrix& h,
                                const IntegratorConfig& cfg);

struct ObservableRecord {
    double t = 0.0;
    cplx sigma_z{0.0, 0.0};
    cplx n_photon{0.0, 0.0};
    cplx energy{0.0, 0.0};
    double norm_check = 0.0;    // |<1> - 1|
    double herm_residual = 0.0;
    double boundary_leak = 0.0; // top-Fock population of the normalized ket
};

// <sigma_z> = -1 + 2 sum_ch2 s~ s, <n> = sum_ch1 n s~ s + sum_ch2 (n-1) s~ s
cplx sigma_z_closed(const CCMState& state);
cplx photon_number_closed(const CCMState& state);
ObservableRecord observables(const CCMState& state, const OperatorMatrix& h);

struct StationaryResult {
    double g = 0.0;
    int level = 0;
    CCMState state;
    cplx energy{0.0, 0.0};
    bool converged = false;
    int newton_iters = 0;
    double residual_norm = 0.0;
    std::string failure; // empty when converged
};

// Newton on {dH/ds~_I = 0, dH/ds_I = 0}; on failure retries with damping 0.5
// and 0.25 before declaring breakdown.
StationaryResult solve_stationary(const RabiParams& params, const hilbert::SpaceSpec& space,
                                  int level, const std::optional<CCMState>& warm_start = {});

// Continuation in g with warm starts; every point after the first breakdown
// is still attempted from the last converged state.
std::vector<StationaryResult> continuation_sweep(const RabiParams& base, const hilbert::SpaceSpec& space,
                                                 int level, double g_start, double g_stop,
                                                 double g_step = kContinuationStep);
std::optional<double> first_breakdown(const std::vector<StationaryResult>& sweep);

// Jacobian of the packed (s, s~) flow at a state, central differences.
Matrix eom_jacobian(const CCMState& state, const OperatorMatrix& h);
// i * eig(J) at a converged stationary point, sorted by real part.
std::vector<cplx> excitation_spectrum(const StationaryResult& stat, const OperatorMatrix& h);

} // namespace tdccm::dynamics
