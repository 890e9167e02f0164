#include "tdccm/eccm.hpp"

#include <map>
#include <mutex>

namespace tdccm::eccm {

namespace {

// Creator matrices are costly to rebuild; share one complete set per space.
ConfigSetPtr complete_for(const hilbert::SpaceSpec& space) {
    static std::mutex mu;
    static std::map<std::pair<int, bool>, ConfigSetPtr> cache;
    const std::lock_guard lock(mu);
    auto& slot = cache[{space.n_b, space.has_spin}];
    if (!slot) {
        slot = nccm::complete_set(space);
    }
    return slot;
}

ConfigSetPtr complete_of(const ConfigSetPtr& set) {
    return set->complete() ? set : complete_for(set->space());
}

// sum_I c_I C-_I, without the unit term.
Matrix lowering(const ClusterAmplitudes& amps) {
    const auto& set = *amps.set;
    const Index dim = set.space().dim();
    Matrix m = Matrix::Zero(dim, dim);
    for (std::size_t k = 0; k < set.size(); ++k) {
        const cplx c = amps.values(Index(k));
        if (c != cplx(0.0)) {
            m += c * set.creator(k).mat().adjoint();
        }
    }
    return m;
}

// sum_I c_I C+_I |psi0>
Vector raised_reference(const ClusterAmplitudes& amps) {
    const auto& set = *amps.set;
    Vector v = Vector::Zero(set.space().dim());
    for (std::size_t k = 0; k < set.size(); ++k) {
        v(set.basis_position(k)) += amps.values(Index(k));
    }
    return v;
}

// Amplitudes on `set` read off a ket sum_I c_I C+_I |psi0>.
ClusterAmplitudes project_ket(const Vector& v, const ConfigSetPtr& set) {
    auto out = ClusterAmplitudes::zeros(set);
    for (std::size_t k = 0; k < set->size(); ++k) {
        out.values(Index(k)) = v(set->basis_position(k));
    }
    return out;
}

ClusterAmplitudes project_bra(const RowVector& r, const ConfigSetPtr& set) {
    auto out = ClusterAmplitudes::zeros(set);
    for (std::size_t k = 0; k < set->size(); ++k) {
        out.values(Index(k)) = r(set->basis_position(k));
    }
    return out;
}

RowVector reference_row(Index dim) {
    RowVector r = RowVector::Zero(dim);
    r(0) = 1.0;
    return r;
}

// Ket operator S (dense) for an ECCM state.
Matrix ket_operator(const EccmState& state, const Matrix& sigma_tilde_op) {
    const Vector s_ket = nccm::exp_apply(sigma_tilde_op, raised_reference(state.sigma), -1.0);
    const auto full = complete_of(state.set());
    return nccm::assemble(project_ket(s_ket, full), nccm::OperatorKind::S).mat();
}

} // namespace

EccmState EccmState::reference(const ConfigSetPtr& set) {
    return {0.0, ClusterAmplitudes::zeros(set), ClusterAmplitudes::zeros(set), cplx(0.0)};
}

ClusterAmplitudes stilde_to_sigma_tilde(const ClusterAmplitudes& s_tilde) {
    const Matrix l = lowering(s_tilde);
    if (!nccm::is_strictly_lowering(l)) {
        throw PreconditionError("S~ - 1 must be strictly lowering");
    }
    // <psi0| log(1 + L) = sum_k (-1)^{k+1}/k <psi0| L^k
    const Index dim = l.rows();
    RowVector power = reference_row(dim);
    RowVector sum = RowVector::Zero(dim);
    for (Index k = 1; k <= dim; ++k) {
        power = power * l;
        if (power.isZero(0.0)) {
            break;
        }
        sum += ((k % 2 == 1) ? 1.0 : -1.0) / double(k) * power;
    }
    return project_bra(sum, complete_of(s_tilde.set));
}

ClusterAmplitudes sigma_tilde_to_stilde(const ClusterAmplitudes& sigma_tilde) {
    const Matrix l = lowering(sigma_tilde);
    const RowVector row = nccm::exp_apply_row(reference_row(l.rows()), l, 1.0);
    return project_bra(row, complete_of(sigma_tilde.set));
}

EccmState s_to_sigma(const CCMState& state) {
    const auto full = complete_of(state.set());
    EccmState out;
    out.t = state.t;
    out.k = state.k;
    out.sigma_tilde = stilde_to_sigma_tilde(state.s_tilde);
    const Matrix st_op = lowering(out.sigma_tilde);
    out.sigma = project_ket(nccm::exp_apply(st_op, raised_reference(state.s), 1.0), full);
    return out;
}

CCMState sigma_to_s(const EccmState& state) {
    const auto full = complete_of(state.set());
    const Matrix st_op = lowering(state.sigma_tilde);
    CCMState out;
    out.t = state.t;
    out.k = state.k;
    out.s = project_ket(nccm::exp_apply(st_op, raised_reference(state.sigma), -1.0), full);
    out.s_tilde = sigma_tilde_to_stilde(state.sigma_tilde);
    return out;
}

cplx eccm_expectation(const OperatorMatrix& q, const EccmState& state) {
    const Matrix st_op = lowering(state.sigma_tilde);
    const Matrix s_op = ket_operator(state, st_op);
    Vector v = nccm::exp_apply(st_op, hilbert::reference_state(state.space()), -1.0);
    v = nccm::exp_apply(s_op, v, 1.0);
    v = q.mat() * v;
    v = nccm::exp_apply(s_op, v, -1.0);
    v = nccm::exp_apply(st_op, v, 1.0);
    return v(0);
}

EccmGradients eccm_gradients(const OperatorMatrix& q, const EccmState& state) {
    const Index m = Index(state.set()->size());
    EccmGradients g;
    g.value = eccm_expectation(q, state);
    g.d_sigma.resize(m);
    g.d_sigma_tilde.resize(m);
    EccmState probe = state;
    for (Index j = 0; j < m; ++j) {
        const cplx x = state.sigma.values(j);
        probe.sigma.values(j) = x + kGradientStep;
        const cplx fp = eccm_expectation(q, probe);
        probe.sigma.values(j) = x - kGradientStep;
        const cplx fm = eccm_expectation(q, probe);
        probe.sigma.values(j) = x;
        g.d_sigma(j) = (fp - fm) / (2.0 * kGradientStep);
    }
    for (Index j = 0; j < m; ++j) {
        const cplx x = state.sigma_tilde.values(j);
        probe.sigma_tilde.values(j) = x + kGradientStep;
        const cplx fp = eccm_expectation(q, probe);
        probe.sigma_tilde.values(j) = x - kGradientStep;
        const cplx fm = eccm_expectation(q, probe);
        probe.sigma_tilde.values(j) = x;
        g.d_sigma_tilde(j) = (fp - fm) / (2.0 * kGradientStep);
    }
    return g;
}

namespace {
cplx linked_energy(const EccmState& state, const OperatorMatrix& h) {
    const Matrix s_op = ket_operator(state, lowering(state.sigma_tilde));
    const Vector ket = nccm::exp_apply(s_op, hilbert::reference_state(state.space()));
    return nccm::exp_apply(s_op, h.mat() * ket, -1.0)(0);
}
} // namespace

EccmRhs eccm_eom_rhs(const EccmState& state, const OperatorMatrix& h) {
    const auto g = eccm_gradients(h, state);
    return {-kI * g.d_sigma_tilde, kI * g.d_sigma, -kI * linked_energy(state, h)};
}

EccmRhs eccm_rhs_via_nccm(const EccmState& state, const OperatorMatrix& h) {
    if (!state.set()->complete()) {
        throw PreconditionError("the chain-rule path needs full-truncation amplitudes");
    }
    const auto set = state.set();
    const CCMState x = sigma_to_s(state);
    const auto grad = nccm::gradients(h, x);
    const Vector ds = -kI * grad.d_s_tilde;
    const Vector dst = kI * grad.d_s;
    const double scale = std::max({1.0, ds.cwiseAbs().maxCoeff(), dst.cwiseAbs().maxCoeff()});
    const double eps = kGradientStep / scale;

    CCMState plus = x, minus = x;
    plus.s.values += eps * ds;
    plus.s_tilde.values += eps * dst;
    minus.s.values -= eps * ds;
    minus.s_tilde.values -= eps * dst;
    const EccmState ep = s_to_sigma(plus);
    const EccmState em = s_to_sigma(minus);

    EccmRhs r;
    r.dsigma = (ep.sigma.values - em.sigma.values) / (2.0 * eps);
    r.dsigma_tilde = (ep.sigma_tilde.values - em.sigma_tilde.values) / (2.0 * eps);
    r.dk = -kI * linked_energy(state, h);
    return r;
}

cplx eccm_poisson_bracket(const OperatorMatrix& a, const OperatorMatrix& b, const EccmState& state) {
    const auto ga = eccm_gradients(a, state);
    const auto gb = eccm_gradients(b, state);
    const cplx sum = ga.d_sigma.cwiseProduct(gb.d_sigma_tilde).sum() -
                     ga.d_sigma_tilde.cwiseProduct(gb.d_sigma).sum();
    return sum / kI;
}

Vector pack(const EccmState& state) {
    const Index m = Index(state.set()->size());
    Vector x(2 * m + 1);
    x << state.sigma.values, state.sigma_tilde.values, state.k;
    return x;
}

EccmState unpack(const Vector& x, const ConfigSetPtr& set, double t) {
    const Index m = Index(set->size());
    if (x.size() != 2 * m + 1) {
        throw PreconditionError("packed ECCM state has the wrong length");
    }
    return {t, ClusterAmplitudes{set, x.head(m)}, ClusterAmplitudes{set, x.segment(m, m)}, x(2 * m)};
}

void integrate(const EccmState& state0, const OperatorMatrix& h, const ode::IntegratorConfig& cfg,
               const std::function<void(const EccmState&)>& observer) {
    const ConfigSetPtr set = state0.set();
    const Index amps = 2 * Index(set->size());
    ode::IntegratorConfig c = cfg;
    c.t0 = state0.t;
    ode::integrate(
        [&](const Vector& x, Vector& dxdt, double t) {
            const auto r = eccm_eom_rhs(unpack(x, set, t), h);
            dxdt.resize(x.size());
            dxdt << r.dsigma, r.dsigma_tilde, r.dk;
        },
        pack(state0), c, [&](const Vector& x, double t) { observer(unpack(x, set, t)); },
        [amps](const Vector& x) { return amps == 0 ? 0.0 : x.head(amps).cwiseAbs().maxCoeff(); });
}

std::vector<EccmState> integrate(const EccmState& state0, const OperatorMatrix& h,
                                 const ode::IntegratorConfig& cfg) {
    std::vector<EccmState> out;
    integrate(state0, h, cfg, [&](const EccmState& s) { out.push_back(s); });
    return out;
}

} // namespace tdccm::eccm
