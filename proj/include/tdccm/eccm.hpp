// eccm.hpp: extended coupled cluster coordinates.
//
// S~ = e^{Sigma~}, sigma_I = <psi0|C-_I e^{Sigma~} S|psi0>,
// s_I = <psi0|C-_I e^{-Sigma~} Sigma|psi0>. Products of creators close on the
// complete configuration set of the space, so conversions always return
// amplitudes on that set.

#pragma once

#include "tdccm/nccm.hpp"
#include "tdccm/ode.hpp"

#include <functional>
#include <vector>

namespace tdccm::eccm {

using hilbert::OperatorMatrix;
using nccm::CCMState;
using nccm::ClusterAmplitudes;
using nccm::ConfigSetPtr;

inline constexpr double kGradientStep = 1e-6;

struct EccmState {
    double t = 0.0;
    ClusterAmplitudes sigma;
    ClusterAmplitudes sigma_tilde;
    cplx k{0.0, 0.0};

    static EccmState reference(const ConfigSetPtr& set);
    [[nodiscard]] const ConfigSetPtr& set() const noexcept { return sigma.set; }
    [[nodiscard]] const hilbert::SpaceSpec& space() const noexcept { return sigma.set->space(); }
};

// Sigma~ = log S~ (Mercator series); result on the complete set.
ClusterAmplitudes stilde_to_sigma_tilde(const ClusterAmplitudes& s_tilde);
// S~ = exp Sigma~; result on the complete set.
ClusterAmplitudes sigma_tilde_to_stilde(const ClusterAmplitudes& sigma_tilde);

EccmState s_to_sigma(const CCMState& state);
CCMState sigma_to_s(const EccmState& state);

// <psi0| e^{Sigma~} e^{-S} q e^{S} e^{-Sigma~} |psi0>
cplx eccm_expectation(const OperatorMatrix& q, const EccmState& state);

struct EccmGradients {
    cplx value{0.0, 0.0};
    Vector d_sigma;
    Vector d_sigma_tilde;
};

// Holomorphic central differences of eccm_expectation, step kGradientStep.
EccmGradients eccm_gradients(const OperatorMatrix& q, const EccmState& state);

struct EccmRhs {
    Vector dsigma;
    Vector dsigma_tilde;
    cplx dk{0.0, 0.0};
};

// i dsigma/dt = dH/dsigma~, -i dsigma~/dt = dH/dsigma
EccmRhs eccm_eom_rhs(const EccmState& state, const OperatorMatrix& h);
// Cross-check path: NCCM flow pushed through the finite-difference Jacobian of
// the s -> sigma map. Needs a full-truncation state.
EccmRhs eccm_rhs_via_nccm(const EccmState& state, const OperatorMatrix& h);

// {A, B} = (1/i) sum_I (dA/dsigma_I dB/dsigma~_I - dA/dsigma~_I dB/dsigma_I)
cplx eccm_poisson_bracket(const OperatorMatrix& a, const OperatorMatrix& b, const EccmState& state);

Vector pack(const EccmState& state);
EccmState unpack(const Vector& x, const ConfigSetPtr& set, double t);

void integrate(const EccmState& state0, const OperatorMatrix& h, const ode::IntegratorConfig& cfg,
               const std::function<void(const EccmState&)>& observer);
std::vector<EccmState> integrate(const EccmState& state0, const OperatorMatrix& h,
                                 const ode::IntegratorConfig& cfg);

} // namespace tdccm::eccm
