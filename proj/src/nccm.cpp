#include "tdccm/nccm.hpp"

#include <algorithm>
#include <cmath>

namespace tdccm::nccm {

namespace {

constexpr double kSqrtHalf = 0.70710678118654752440;

// sqrt(m!) for m = 0..n
std::vector<double> sqrt_factorials(int n) {
    std::vector<double> out(std::size_t(n) + 1, 1.0);
    for (int m = 1; m <= n; ++m) {
        out[std::size_t(m)] = out[std::size_t(m) - 1] * std::sqrt(double(m));
    }
    return out;
}

RowVector reference_row(Index dim) {
    RowVector r = RowVector::Zero(dim);
    r(0) = 1.0;
    return r;
}

// <psi0| S~ as a row vector: e_0 + sum s~_I e_{pos(I)}.
RowVector stilde_row(const ClusterAmplitudes& s_tilde) {
    const ConfigSet& set = *s_tilde.set;
    RowVector r = reference_row(set.space().dim());
    for (std::size_t k = 0; k < set.size(); ++k) {
        r(set.basis_position(k)) += s_tilde.values(Index(k));
    }
    return r;
}


void require_consistent(const CCMState& state) {
    if (!state.s.set || !state.s_tilde.set) {
        throw PreconditionError("cluster state has no configuration set");
    }
    if (state.s.set != state.s_tilde.set && !(state.s.set->space() == state.s_tilde.set->space() &&
                                              state.s.set->level() == state.s_tilde.set->level())) {
        throw PreconditionError("ket and bra amplitudes live on different configuration sets");
    }
    const auto n = Index(state.s.set->size());
    if (state.s.values.size() != n || state.s_tilde.values.size() != n) {
        throw PreconditionError("amplitude vector length does not match the configuration set");
    }
}

} // namespace

std::string to_string(const ConfigIndex& idx) {
    return "(" + std::to_string(idx.channel) + "," + std::to_string(idx.n) + ")";
}

ConfigSet::ConfigSet(const SpaceSpec& space, int level) : space_(space), level_(level) {
    if (!space.has_spin) {
        throw PreconditionError("the Rabi configuration set needs a space with a spin factor");
    }
    if (level < 1) {
        throw PreconditionError("SUB-N level must be >= 1, got " + std::to_string(level));
    }
    if (level > space.n_b) {
        throw TruncationOverflow("SUB-" + std::to_string(level) +
                                 " needs boson strings beyond the cutoff n_b=" +
                                 std::to_string(space.n_b));
    }
    const int top2 = level == space.n_b ? level + 1 : level;
    for (int n = 1; n <= level; ++n) {
        indices_.push_back({1, n});
    }
    for (int n = 1; n <= top2; ++n) {
        indices_.push_back({2, n});
    }

    const auto ops = hilbert::elementary_ops(space);
    const auto sqf = sqrt_factorials(space.n_b + 1);
    // powers[m] = (b_dag)^m
    std::vector<Matrix> powers{Matrix::Identity(space.dim(), space.dim())};
    for (int m = 1; m <= level; ++m) {
        powers.push_back(ops.b_dag.mat() * powers.back());
    }
    for (const auto& idx : indices_) {
        if (idx.channel == 1) {
            creators_.emplace_back(space, powers[std::size_t(idx.n)] / sqf[std::size_t(idx.n)]);
            basis_pos_.push_back(space.index(idx.n, 0));
        } else {
            const auto m = std::size_t(idx.n - 1);
            creators_.emplace_back(space, powers[m] * ops.sigma_plus.mat() / (2.0 * sqf[m]));
            basis_pos_.push_back(space.index(idx.n - 1, 1));
        }
    }
}

bool ConfigSet::contains(const ConfigIndex& idx) const noexcept {
    return std::find(indices_.begin(), indices_.end(), idx) != indices_.end();
}

std::size_t ConfigSet::position(const ConfigIndex& idx) const {
    const auto it = std::find(indices_.begin(), indices_.end(), idx);
    if (it == indices_.end()) {
        throw IndexError("configuration " + to_string(idx) + " is not in the SUB-" +
                         std::to_string(level_) + " set");
    }
    return std::size_t(it - indices_.begin());
}

ConfigSetPtr config_set(const SpaceSpec& space, int level) {
    return std::make_shared<const ConfigSet>(space, level);
}

ClusterAmplitudes ClusterAmplitudes::zeros(ConfigSetPtr set) {
    const auto n = Index(set->size());
    return {std::move(set), Vector::Zero(n)};
}

ClusterAmplitudes embed(const ClusterAmplitudes& amps, const ConfigSetPtr& target) {
    if (!(amps.set->space() == target->space())) {
        throw PreconditionError("cannot embed amplitudes into a set on another space");
    }
    auto out = ClusterAmplitudes::zeros(target);
    for (std::size_t k = 0; k < amps.set->size(); ++k) {
        const auto& idx = amps.set->index(k);
        const cplx v = amps.values(Index(k));
        if (target->contains(idx)) {
            out.at(idx) = v;
        } else if (v != cplx(0.0)) {
            throw IndexError("nonzero amplitude " + to_string(idx) + " has no slot in the target set");
        }
    }
    return out;
}

ClusterAmplitudes restrict_to(const ClusterAmplitudes& amps, const ConfigSetPtr& target) {
    auto out = ClusterAmplitudes::zeros(target);
    for (std::size_t k = 0; k < amps.set->size(); ++k) {
        const auto& idx = amps.set->index(k);
        if (target->contains(idx)) {
            out.at(idx) = amps.values(Index(k));
        }
    }
    return out;
}

CCMState CCMState::reference(const ConfigSetPtr& set) {
    return {0.0, ClusterAmplitudes::zeros(set), ClusterAmplitudes::zeros(set), cplx(0.0)};
}

OperatorMatrix assemble(const ClusterAmplitudes& amps, OperatorKind kind) {
    const ConfigSet& set = *amps.set;
    Matrix m = Matrix::Zero(set.space().dim(), set.space().dim());
    for (std::size_t k = 0; k < set.size(); ++k) {
        const cplx c = amps.values(Index(k));
        if (c == cplx(0.0)) {
            continue;
        }
        if (kind == OperatorKind::S) {
            m += c * set.creator(k).mat();
        } else {
            m += c * set.creator(k).mat().adjoint();
        }
    }
    if (kind == OperatorKind::S_tilde) {
        m += Matrix::Identity(m.rows(), m.cols());
    }
    return {set.space(), std::move(m)};
}

bool is_strictly_raising(const Matrix& m) {
    for (Index j = 0; j < m.cols(); ++j) {
        for (Index i = 0; i <= j && i < m.rows(); ++i) {
            if (m(i, j) != cplx(0.0)) {
                return false;
            }
        }
    }
    return true;
}

bool is_strictly_lowering(const Matrix& m) { return is_strictly_raising(m.transpose()); }

namespace {
void require_nilpotent(const Matrix& x, const char* what) {
    if (!is_strictly_raising(x) && !is_strictly_lowering(x)) {
        throw PreconditionError(std::string(what) + " must be strictly raising or strictly lowering");
    }
}
} // namespace

OperatorMatrix exp_nilpotent(const OperatorMatrix& x, cplx c) {
    require_nilpotent(x.mat(), "exponent");
    const Index dim = x.dim();
    Matrix sum = Matrix::Identity(dim, dim);
    Matrix term = sum;
    for (Index k = 1; k <= dim; ++k) {
        term = (c / double(k)) * (x.mat() * term);
        if (term.isZero(0.0)) {
            break;
        }
        sum += term;
    }
    return {x.space(), std::move(sum)};
}

Vector exp_apply(const Matrix& x, const Vector& v, cplx c) {
    Vector sum = v;
    Vector term = v;
    for (Index k = 1; k <= x.rows(); ++k) {
        term = (c / double(k)) * (x * term);
        if (term.isZero(0.0)) {
            break;
        }
        sum += term;
    }
    return sum;
}

RowVector exp_apply_row(const RowVector& r, const Matrix& x, cplx c) {
    RowVector sum = r;
    RowVector term = r;
    for (Index k = 1; k <= x.rows(); ++k) {
        term = (c / double(k)) * (term * x);
        if (term.isZero(0.0)) {
            break;
        }
        sum += term;
    }
    return sum;
}

OperatorMatrix log_unipotent(const OperatorMatrix& one_plus_l) {
    const Index dim = one_plus_l.dim();
    const Matrix l = one_plus_l.mat() - Matrix::Identity(dim, dim);
    require_nilpotent(l, "log argument minus identity");
    Matrix sum = Matrix::Zero(dim, dim);
    Matrix power = Matrix::Identity(dim, dim);
    for (Index k = 1; k <= dim; ++k) {
        power = power * l;
        if (power.isZero(0.0)) {
            break;
        }
        sum += ((k % 2 == 1) ? 1.0 : -1.0) / double(k) * power;
    }
    return {one_plus_l.space(), std::move(sum)};
}

OperatorMatrix similarity_transform(const OperatorMatrix& q, const OperatorMatrix& s_op) {
    if (!is_strictly_raising(s_op.mat())) {
        throw PreconditionError("similarity transform needs a strictly raising cluster operator");
    }
    return exp_nilpotent(s_op, -1.0) * q * exp_nilpotent(s_op, 1.0);
}

OperatorMatrix nested_commutator_sum(const OperatorMatrix& q, const OperatorMatrix& s_op) {
    if (!is_strictly_raising(s_op.mat())) {
        throw PreconditionError("nested commutator expansion needs a strictly raising cluster operator");
    }
    OperatorMatrix sum = q;
    OperatorMatrix term = q;
    // ad_S^n q vanishes structurally once n >= 2 dim - 1.
    const Index n_max = 2 * q.dim();
    for (Index n = 1; n <= n_max; ++n) {
        term = cplx(1.0 / double(n)) * commutator(term, s_op);
        if (term.mat().isZero(0.0)) {
            break;
        }
        sum += term;
    }
    return sum;
}

Gradients gradients(const OperatorMatrix& q, const CCMState& state) {
    require_consistent(state);
    const ConfigSet& set = *state.set();
    const Index dim = set.space().dim();
    const Matrix s_op = assemble(state.s, OperatorKind::S).mat();
    const RowVector st_row = stilde_row(state.s_tilde);

    const Vector ket = exp_apply(s_op, hilbert::reference_state(set.space()));
    const Vector q_psi0 = exp_apply(s_op, q.mat() * ket, -1.0);          // Q |psi0>
    const RowVector bra = exp_apply_row(st_row, s_op, -1.0);              // <psi0| S~ e^{-S}
    const RowVector bra_q = exp_apply_row(bra * q.mat(), s_op, 1.0);      // <psi0| S~ Q

    Gradients g;
    g.value = st_row * q_psi0;
    g.d_s.resize(Index(set.size()));
    g.d_s_tilde.resize(Index(set.size()));
    for (std::size_t k = 0; k < set.size(); ++k) {
        const Index pos = set.basis_position(k);
        g.d_s_tilde(Index(k)) = q_psi0(pos);
        const cplx st_c_q = st_row * (set.creator(k).mat() * q_psi0);
        g.d_s(Index(k)) = bra_q(pos) - st_c_q;
    }
    (void)dim;
    return g;
}

cplx expectation(const OperatorMatrix& q, const CCMState& state) {
    require_consistent(state);
    const Matrix s_op = assemble(state.s, OperatorKind::S).mat();
    const Vector ket = exp_apply(s_op, hilbert::reference_state(state.space()));
    const Vector q_psi0 = exp_apply(s_op, q.mat() * ket, -1.0);
    return stilde_row(state.s_tilde) * q_psi0;
}

cplx grad_s(const OperatorMatrix& q, const CCMState& state, const ConfigIndex& idx) {
    const auto k = state.set()->position(idx);
    return gradients(q, state).d_s(Index(k));
}

cplx grad_s_tilde(const OperatorMatrix& q, const CCMState& state, const ConfigIndex& idx) {
    const auto k = state.set()->position(idx);
    return gradients(q, state).d_s_tilde(Index(k));
}

cplx poisson_bracket(const Gradients& a, const Gradients& b) {
    const cplx sum = a.d_s.cwiseProduct(b.d_s_tilde).sum() - a.d_s_tilde.cwiseProduct(b.d_s).sum();
    return sum / kI;
}

cplx poisson_bracket(const OperatorMatrix& a, const OperatorMatrix& b, const CCMState& state) {
    return poisson_bracket(gradients(a, state), gradients(b, state));
}

FieldMomentum to_field_momentum(const CCMState& state) {
    require_consistent(state);
    return {state.set(), kSqrtHalf * (state.s.values + state.s_tilde.values),
            -kI * kSqrtHalf * (state.s.values - state.s_tilde.values)};
}

CCMState from_field_momentum(const FieldMomentum& fm, double t, cplx k) {
    return {t, ClusterAmplitudes{fm.set, kSqrtHalf * (fm.phi + kI * fm.pi)},
            ClusterAmplitudes{fm.set, kSqrtHalf * (fm.phi - kI * fm.pi)}, k};
}

FieldGradients to_field_gradients(const Gradients& g) {
    // chain rule through s = (phi + i pi)/sqrt2, s~ = (phi - i pi)/sqrt2
    return {kSqrtHalf * (g.d_s + g.d_s_tilde), kI * kSqrtHalf * (g.d_s - g.d_s_tilde)};
}

cplx field_bracket(const FieldGradients& a, const FieldGradients& b) {
    return a.d_phi.cwiseProduct(b.d_pi).sum() - a.d_pi.cwiseProduct(b.d_phi).sum();
}

Gradients coordinate_gradient(const ConfigSet& set, std::size_t k, FieldCoordinate which) {
    Gradients g;
    g.d_s = Vector::Zero(Index(set.size()));
    g.d_s_tilde = Vector::Zero(Index(set.size()));
    if (which == FieldCoordinate::phi) {
        g.d_s(Index(k)) = kSqrtHalf;
        g.d_s_tilde(Index(k)) = kSqrtHalf;
    } else {
        g.d_s(Index(k)) = -kI * kSqrtHalf;
        g.d_s_tilde(Index(k)) = kI * kSqrtHalf;
    }
    return g;
}

CCMState cluster_log(const Vector& psi, const RowVector& psi_tilde, const ConfigSetPtr& set) {
    const SpaceSpec& space = set->space();
    if (psi.size() != space.dim() || psi_tilde.size() != space.dim()) {
        throw PreconditionError("state dimension does not match the configuration space");
    }
    const cplx overlap = psi(0);
    if (std::abs(overlap) <= 1e-14 * psi.norm()) {
        throw OrthogonalReference("state is orthogonal to the reference |0,down>");
    }
    const cplx norm = psi_tilde * psi;
    if (std::abs(norm - 1.0) > 1e-10) {
        throw PreconditionError("bra and ket must satisfy <psi~|psi> = 1");
    }

    const int nb = space.n_b;
    const auto sqf = sqrt_factorials(nb + 1);
    const Vector phi = psi / overlap; // e^S |psi0>

    // Spin-down amplitudes are the coefficients of exp(S1(z)); take the log
    // term by term: n l_n = n c_n - sum_{j<n} j l_j c_{n-j}.
    std::vector<cplx> c(std::size_t(nb) + 1), ell(std::size_t(nb) + 1, 0.0);
    for (int m = 0; m <= nb; ++m) {
        c[std::size_t(m)] = phi(space.index(m, 0)) / sqf[std::size_t(m)];
    }
    for (int n = 1; n <= nb; ++n) {
        cplx acc = double(n) * c[std::size_t(n)];
        for (int j = 1; j < n; ++j) {
            acc -= double(j) * ell[std::size_t(j)] * c[std::size_t(n - j)];
        }
        ell[std::size_t(n)] = acc / double(n);
    }
    // Spin-up amplitudes are exp(S1(z)) T(z); divide out the channel-1 series.
    std::vector<cplx> t(std::size_t(nb) + 1);
    for (int m = 0; m <= nb; ++m) {
        cplx acc = phi(space.index(m, 1)) / sqf[std::size_t(m)];
        for (int j = 1; j <= m; ++j) {
            acc -= c[std::size_t(j)] * t[std::size_t(m - j)];
        }
        t[std::size_t(m)] = acc;
    }

    CCMState out = CCMState::reference(set);
    out.k = std::log(overlap);
    for (std::size_t k = 0; k < set->size(); ++k) {
        const auto& idx = set->index(k);
        if (idx.channel == 1) {
            out.s.values(Index(k)) = ell[std::size_t(idx.n)] * sqf[std::size_t(idx.n)];
        } else {
            const auto m = std::size_t(idx.n - 1);
            out.s.values(Index(k)) = t[m] * sqf[m];
        }
    }

    const Matrix s_op = assemble(out.s, OperatorKind::S).mat();
    const RowVector row = std::exp(out.k) * exp_apply_row(psi_tilde, s_op, 1.0);
    for (std::size_t k = 0; k < set->size(); ++k) {
        out.s_tilde.values(Index(k)) = row(set->basis_position(k));
    }
    return out;
}

Vector reconstruct_ket(const CCMState& state) {
    const Matrix s_op = assemble(state.s, OperatorKind::S).mat();
    return std::exp(state.k) * exp_apply(s_op, hilbert::reference_state(state.space()));
}

RowVector reconstruct_bra(const CCMState& state) {
    const Matrix s_op = assemble(state.s, OperatorKind::S).mat();
    return std::exp(-state.k) * exp_apply_row(stilde_row(state.s_tilde), s_op, -1.0);
}

double hermiticity_residual(const CCMState& state) {
    require_consistent(state);
    const Matrix s_op = assemble(state.s, OperatorKind::S).mat();
    const Vector phi = exp_apply(s_op, hilbert::reference_state(state.space()));
    const RowVector physical = exp_apply_row(phi.adjoint(), s_op, 1.0) / phi.squaredNorm();
    return (stilde_row(state.s_tilde) - physical).norm();
}

} // namespace tdccm::nccm
