#include "tdccm/ode.hpp"

#include <boost/numeric/odeint.hpp>
#include <boost/numeric/odeint/algebra/vector_space_algebra.hpp>
#include <boost/numeric/odeint/external/eigen/eigen.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace tdccm::ode {

namespace odeint = boost::numeric::odeint;

void IntegratorConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw PreconditionError("integrator dt must be > 0");
    }
    if (!(t1 > t0)) {
        throw PreconditionError("integrator needs t1 > t0");
    }
    if (output_every < 1) {
        throw PreconditionError("output_every must be >= 1");
    }
    if (scheme == Scheme::rk45 && (!(abs_tol > 0.0) || !(rel_tol >= 0.0))) {
        throw PreconditionError("adaptive tolerances must be positive");
    }
    if (!(divergence_cap > 0.0)) {
        throw PreconditionError("divergence cap must be positive");
    }
}

long IntegratorConfig::steps() const {
    const double raw = (t1 - t0) / dt;
    return std::max(1L, long(std::ceil(raw - 1e-9)));
}

namespace {

double default_magnitude(const Vector& x) { return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff(); }

void guard(const Vector& x, double t, double last_good, const IntegratorConfig& cfg,
           const Magnitude& magnitude) {
    const double m = magnitude ? magnitude(x) : default_magnitude(x);
    if (!std::isfinite(m) || m > cfg.divergence_cap) {
        throw DivergenceError("amplitudes diverged at t=" + std::to_string(t), last_good);
    }
}

} // namespace

void rk4_step(const Rhs& rhs, Vector& x, double t, double dt) {
    odeint::runge_kutta4<Vector, double, Vector, double, odeint::vector_space_algebra> stepper;
    stepper.do_step([&](const Vector& s, Vector& d, double tt) { rhs(s, d, tt); }, x, t, dt);
}

void integrate(const Rhs& rhs, Vector x, const IntegratorConfig& cfg, const Observer& observer,
               const Magnitude& magnitude) {
    cfg.validate();
    auto sys = [&](const Vector& s, Vector& d, double tt) { rhs(s, d, tt); };
    double last_good = cfg.t0;
    guard(x, cfg.t0, last_good, cfg, magnitude);
    observer(x, cfg.t0);

    if (cfg.scheme == Scheme::rk4) {
        odeint::runge_kutta4<Vector, double, Vector, double, odeint::vector_space_algebra> stepper;
        const long n = cfg.steps();
        const double h = (cfg.t1 - cfg.t0) / double(n);
        for (long i = 0; i < n; ++i) {
            const double t = cfg.t0 + double(i) * h;
            stepper.do_step(sys, x, t, h);
            const double tn = cfg.t0 + double(i + 1) * h;
            guard(x, tn, last_good, cfg, magnitude);
            if ((i + 1) % cfg.output_every == 0 || i + 1 == n) {
                observer(x, tn);
                last_good = tn;
            }
        }
        return;
    }

    // The adaptive stepper runs on a real [re; im] split so Odeint's error
    // norms stay real-valued.
    using Real = Eigen::VectorXd;
    const Index n = x.size();
    const auto join = [n](const Real& r) { return Vector(r.head(n).cast<cplx>() + kI * r.tail(n).cast<cplx>()); };
    const auto split = [n](const Vector& c) {
        Real r(2 * n);
        r << c.real(), c.imag();
        return r;
    };
    auto real_sys = [&](const Real& r, Real& d, double tt) {
        Vector dc;
        rhs(join(r), dc, tt);
        d = split(dc);
    };
    using Dopri = odeint::runge_kutta_dopri5<Real, double, Real, double, odeint::vector_space_algebra>;
    auto stepper = odeint::make_dense_output(cfg.abs_tol, cfg.rel_tol, Dopri());
    const double spacing = cfg.dt * double(cfg.output_every);
    const long n_out = std::max(1L, long(std::ceil((cfg.t1 - cfg.t0) / spacing - 1e-9)));
    stepper.initialize(split(x), cfg.t0, cfg.dt);
    Real out = split(x);
    for (long i = 1; i <= n_out; ++i) {
        const double target = i == n_out ? cfg.t1 : cfg.t0 + double(i) * spacing;
        while (stepper.current_time() < target) {
            stepper.do_step(real_sys);
            guard(join(stepper.current_state()), stepper.current_time(), last_good, cfg, magnitude);
        }
        stepper.calc_state(target, out);
        observer(join(out), target);
        last_good = target;
    }
}

} // namespace tdccm::ode
