// ode.hpp: fixed-step RK4 and adaptive Dormand-Prince integration of complex
// state vectors with Boost.Odeint. The adaptive path steps the real [Re; Im] split.

#pragma once

#include "tdccm/types.hpp"

#include <functional>

namespace tdccm::ode {

enum class Scheme { rk4, rk45 };

struct IntegratorConfig {
    Scheme scheme = Scheme::rk4;
    double dt = 1e-3;          // RK4 step; for RK45 the output spacing unit
    double abs_tol = 1e-9;     // RK45 only
    double rel_tol = 1e-9;     // RK45 only
    double t0 = 0.0;
    double t1 = 10.0;
    int output_every = 1;      // record every k-th step (k * dt spacing for RK45)
    double divergence_cap = 1e6;

    void validate() const;
    // Number of RK4 steps covering [t0, t1]; the step is shrunk so they fit exactly.
    [[nodiscard]] long steps() const;
};

using Rhs = std::function<void(const Vector& x, Vector& dxdt, double t)>;
// Called at t0 and at every output time with the current state.
using Observer = std::function<void(const Vector& x, double t)>;
// Size of the part of the state that is guarded against blow-up.
using Magnitude = std::function<double(const Vector& x)>;

// Throws DivergenceError (with the last good output time) when the guarded
// magnitude exceeds cfg.divergence_cap or turns non-finite.
void integrate(const Rhs& rhs, Vector x0, const IntegratorConfig& cfg, const Observer& observer,
               const Magnitude& magnitude = {});

// One classic RK4 step; used by integrators that need their own loop.
void rk4_step(const Rhs& rhs, Vector& x, double t, double dt);

} // namespace tdccm::ode
