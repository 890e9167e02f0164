#include "tdccm/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace tdccm::dynamics {

using nccm::ClusterAmplitudes;

Vector pack(const CCMState& state) {
    const Index m = Index(state.set()->size());
    Vector x(2 * m + 1);
    x << state.s.values, state.s_tilde.values, state.k;
    return x;
}

CCMState unpack(const Vector& x, const ConfigSetPtr& set, double t) {
    const Index m = Index(set->size());
    if (x.size() != 2 * m + 1) {
        throw PreconditionError("packed state has the wrong length for the configuration set");
    }
    return {t, ClusterAmplitudes{set, x.head(m)}, ClusterAmplitudes{set, x.segment(m, m)}, x(2 * m)};
}

namespace {

// <psi0| e^{-S} h e^{S} |psi0>
cplx linked_energy(const CCMState& state, const OperatorMatrix& h) {
    const Matrix s_op = nccm::assemble(state.s, nccm::OperatorKind::S).mat();
    const Vector ket = nccm::exp_apply(s_op, hilbert::reference_state(state.space()));
    return nccm::exp_apply(s_op, h.mat() * ket, -1.0)(0);
}

// Stationarity residual F = [dH/ds~; dH/ds] on x = [s; s~].
Vector stationary_residual(const Vector& x, const ConfigSetPtr& set, const OperatorMatrix& h) {
    const Index m = Index(set->size());
    CCMState st{0.0, ClusterAmplitudes{set, x.head(m)}, ClusterAmplitudes{set, x.tail(m)}, 0.0};
    const auto g = nccm::gradients(h, st);
    Vector f(2 * m);
    f << g.d_s_tilde, g.d_s;
    return f;
}

Vector flow(const Vector& x, const ConfigSetPtr& set, const OperatorMatrix& h) {
    const Index m = Index(set->size());
    const Vector f = stationary_residual(x, set, h);
    Vector out(2 * m);
    out << -kI * f.head(m), kI * f.tail(m);
    return out;
}

template <class F>
Matrix central_jacobian(const F& f, const Vector& x, double step) {
    const Index n = x.size();
    Matrix jac(n, n);
    Vector xp = x;
    for (Index j = 0; j < n; ++j) {
        xp(j) = x(j) + step;
        const Vector fp = f(xp);
        xp(j) = x(j) - step;
        const Vector fm = f(xp);
        xp(j) = x(j);
        jac.col(j) = (fp - fm) / (2.0 * step);
    }
    return jac;
}

double sup_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

} // namespace

EomRhs eom_rhs(const CCMState& state, const OperatorMatrix& h) {
    const auto g = nccm::gradients(h, state);
    return {-kI * g.d_s_tilde, kI * g.d_s, -kI * linked_energy(state, h)};
}

ode::Rhs packed_rhs(const ConfigSetPtr& set, const OperatorMatrix& h) {
    return [set, h](const Vector& x, Vector& dxdt, double t) {
        const auto r = eom_rhs(unpack(x, set, t), h);
        dxdt.resize(x.size());
        dxdt << r.ds, r.ds_tilde, r.dk;
    };
}

void integrate(const CCMState& state0, const OperatorMatrix& h, const IntegratorConfig& cfg,
               const std::function<void(const CCMState&)>& observer) {
    const ConfigSetPtr set = state0.set();
    const Index amps = 2 * Index(set->size());
    IntegratorConfig c = cfg;
    c.t0 = state0.t;
    ode::integrate(
        packed_rhs(set, h), pack(state0), c,
        [&](const Vector& x, double t) { observer(unpack(x, set, t)); },
        [amps](const Vector& x) { return amps == 0 ? 0.0 : x.head(amps).cwiseAbs().maxCoeff(); });
}

std::vector<CCMState> integrate(const CCMState& state0, const OperatorMatrix& h,
                                const IntegratorConfig& cfg) {
    std::vector<CCMState> out;
    integrate(state0, h, cfg, [&](const CCMState& s) { out.push_back(s); });
    return out;
}

cplx sigma_z_closed(const CCMState& state) {
    const auto& set = *state.set();
    cplx sum = 0.0;
    for (std::size_t k = 0; k < set.size(); ++k) {
        if (set.index(k).channel == 2) {
            sum += state.s_tilde.values(Index(k)) * state.s.values(Index(k));
        }
    }
    return -1.0 + 2.0 * sum;
}

cplx photon_number_closed(const CCMState& state) {
    const auto& set = *state.set();
    cplx sum = 0.0;
    for (std::size_t k = 0; k < set.size(); ++k) {
        const auto& idx = set.index(k);
        const double bosons = idx.channel == 1 ? idx.n : idx.n - 1;
        sum += bosons * state.s_tilde.values(Index(k)) * state.s.values(Index(k));
    }
    return sum;
}

ObservableRecord observables(const CCMState& state, const OperatorMatrix& h) {
    ObservableRecord r;
    r.t = state.t;
    r.sigma_z = sigma_z_closed(state);
    r.n_photon = photon_number_closed(state);
    r.energy = nccm::expectation(h, state);
    r.norm_check = std::abs(nccm::expectation(OperatorMatrix::identity(state.space()), state) - 1.0);
    r.herm_residual = nccm::hermiticity_residual(state);
    const Matrix s_op = nccm::assemble(state.s, nccm::OperatorKind::S).mat();
    r.boundary_leak = hilbert::boundary_population(
        state.space(), nccm::exp_apply(s_op, hilbert::reference_state(state.space())));
    return r;
}

StationaryResult solve_stationary(const RabiParams& params, const hilbert::SpaceSpec& space, int level,
                                  const std::optional<CCMState>& warm_start) {
    params.validate();
    const auto set = nccm::config_set(space, level);
    const auto h = hilbert::rabi_hamiltonian(params, space);
    const Index m = Index(set->size());

    Vector x0 = Vector::Zero(2 * m);
    if (warm_start) {
        x0 << nccm::restrict_to(warm_start->s, set).values, nccm::restrict_to(warm_start->s_tilde, set).values;
    }
    const auto f = [&](const Vector& x) { return stationary_residual(x, set, h); };

    StationaryResult res;
    res.g = params.g;
    res.level = level;
    int total_iters = 0;
    for (const double damping : {1.0, 0.5, 0.25}) {
        Vector x = x0;
        std::string failure = "no convergence in " + std::to_string(kNewtonMaxIter) + " iterations";
        bool ok = false;
        double resid = 0.0;
        int it = 0;
        for (;; ++it) {
            const Vector fx = f(x);
            resid = sup_norm(fx);
            if (!std::isfinite(resid)) {
                failure = "non-finite residual";
                break;
            }
            if (resid < kNewtonTol) {
                ok = true;
                break;
            }
            if (it == kNewtonMaxIter) {
                break;
            }
            const Matrix jac = central_jacobian(f, x, kJacobianStep);
            Eigen::JacobiSVD<Matrix> svd(jac, Eigen::ComputeThinU | Eigen::ComputeThinV);
            const auto& sv = svd.singularValues();
            const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
            if (!(cond <= kSingularCondition)) {
                failure = "singular Jacobian";
                break;
            }
            x -= damping * svd.solve(fx);
            if (!(sup_norm(x) <= kAmplitudeCap)) {
                failure = "amplitude divergence";
                break;
            }
        }
        total_iters += it;
        res.residual_norm = resid;
        res.newton_iters = total_iters;
        res.state = CCMState{0.0, ClusterAmplitudes{set, x.head(m)}, ClusterAmplitudes{set, x.tail(m)}, 0.0};
        if (ok) {
            res.converged = true;
            res.failure.clear();
            res.energy = nccm::expectation(h, res.state);
            return res;
        }
        res.failure = failure;
    }
    res.converged = false;
    res.energy = cplx(NAN, NAN);
    return res;
}

std::vector<StationaryResult> continuation_sweep(const RabiParams& base, const hilbert::SpaceSpec& space,
                                                 int level, double g_start, double g_stop, double g_step) {
    if (!(g_step > 0.0) || g_stop < g_start) {
        throw PreconditionError("sweep needs g_step > 0 and g_stop >= g_start");
    }
    const long n = long(std::floor((g_stop - g_start) / g_step + 1e-9));
    std::vector<StationaryResult> out;
    std::optional<CCMState> warm;
    for (long i = 0; i <= n; ++i) {
        RabiParams p = base;
        p.g = g_start + double(i) * g_step;
        auto r = solve_stationary(p, space, level, warm);
        if (r.converged) {
            warm = r.state;
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::optional<double> first_breakdown(const std::vector<StationaryResult>& sweep) {
    for (const auto& r : sweep) {
        if (!r.converged) {
            return r.g;
        }
    }
    return std::nullopt;
}

Matrix eom_jacobian(const CCMState& state, const OperatorMatrix& h) {
    const auto set = state.set();
    Vector x(2 * Index(set->size()));
    x << state.s.values, state.s_tilde.values;
    return central_jacobian([&](const Vector& y) { return flow(y, set, h); }, x, kJacobianStep);
}

std::vector<cplx> excitation_spectrum(const StationaryResult& stat, const OperatorMatrix& h) {
    if (!stat.converged) {
        throw PreconditionError("excitation spectrum needs a converged stationary point");
    }
    Eigen::ComplexEigenSolver<Matrix> es(eom_jacobian(stat.state, h), false);
    if (es.info() != Eigen::Success) {
        throw Error("Jacobian eigendecomposition failed");
    }
    std::vector<cplx> freq;
    for (Index i = 0; i < es.eigenvalues().size(); ++i) {
        freq.push_back(kI * es.eigenvalues()(i));
    }
    std::sort(freq.begin(), freq.end(), [](cplx a, cplx b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return freq;
}

} // namespace tdccm::dynamics
