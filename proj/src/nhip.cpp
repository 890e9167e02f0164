#include "tdccm/nhip.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace tdccm::nhip {

DysonMapTrajectory::DysonMapTrajectory(SpaceSpec space, Fn omega, std::optional<Fn> derivative, double h_fd)
    : space_(space), omega_(std::move(omega)), derivative_(std::move(derivative)), h_fd_(h_fd) {
    if (!(h_fd_ > 0.0)) {
        throw PreconditionError("finite-difference step must be positive");
    }
}

OperatorMatrix DysonMapTrajectory::omega(double t) const { return {space_, omega_(t)}; }

OperatorMatrix DysonMapTrajectory::derivative(double t) const {
    return derivative_ ? OperatorMatrix(space_, (*derivative_)(t)) : derivative_fd(t);
}

OperatorMatrix DysonMapTrajectory::derivative_fd(double t) const {
    return {space_, (omega_(t + h_fd_) - omega_(t - h_fd_)) / (2.0 * h_fd_)};
}

namespace {

Eigen::PartialPivLU<Matrix> checked_lu(const OperatorMatrix& omega) {
    Eigen::PartialPivLU<Matrix> lu(omega.mat());
    // Eigen's rcond estimate misses exactly zero pivots, so test the pivot spread too.
    const Eigen::VectorXd pivots = lu.matrixLU().diagonal().cwiseAbs();
    const bool tiny_pivot = !(pivots.minCoeff() * kMaxCondition >= pivots.maxCoeff());
    if (tiny_pivot || !(lu.rcond() * kMaxCondition >= 1.0)) {
        throw SingularMap("Dyson map is singular (condition estimate above 1e12)");
    }
    return lu;
}

} // namespace

void require_invertible(const OperatorMatrix& omega) { (void)checked_lu(omega); }

OperatorMatrix metric(const OperatorMatrix& omega) {
    require_invertible(omega);
    return omega.adjoint() * omega;
}

OperatorMatrix dress(const OperatorMatrix& q, const OperatorMatrix& omega) {
    const auto lu = checked_lu(omega);
    return {omega.space(), lu.solve(q.mat() * omega.mat())};
}

OperatorMatrix quasi_hermiticity_defect(const OperatorMatrix& q, const OperatorMatrix& theta) {
    return q.adjoint() * theta - theta * q;
}

OperatorMatrix coriolis(const DysonMapTrajectory& map, double t) {
    const auto om = map.omega(t);
    const auto lu = checked_lu(om);
    return {map.space(), kI * lu.solve(map.derivative(t).mat())};
}

OperatorMatrix coriolis_fd(const DysonMapTrajectory& map, double t) {
    const auto om = map.omega(t);
    const auto lu = checked_lu(om);
    return {map.space(), kI * lu.solve(map.derivative_fd(t).mat())};
}

OperatorMatrix generator(const ThreeSpaceBundle& bundle, double t) {
    // Omega^{-1} (h Omega - i dOmega/dt) with one factorization.
    const auto om = bundle.map.omega(t);
    const auto lu = checked_lu(om);
    const Matrix rhs = bundle.h.mat() * om.mat() - kI * bundle.map.derivative(t).mat();
    return {om.space(), lu.solve(rhs)};
}

namespace {

void require_grid(const std::vector<double>& t_grid, double dt) {
    if (t_grid.empty()) {
        throw PreconditionError("time grid is empty");
    }
    if (!(dt > 0.0)) {
        throw PreconditionError("integration step must be positive");
    }
    for (std::size_t i = 1; i < t_grid.size(); ++i) {
        if (!(t_grid[i] > t_grid[i - 1])) {
            throw PreconditionError("time grid must be strictly increasing");
        }
    }
}

// RK4 across the grid, substeps no longer than dt, recording at grid points.
template <class Record>
void march(const ode::Rhs& rhs, Vector x, const std::vector<double>& t_grid, double dt, const Record& record) {
    record(x);
    for (std::size_t i = 1; i < t_grid.size(); ++i) {
        const double span = t_grid[i] - t_grid[i - 1];
        const long n = std::max(1L, long(std::ceil(span / dt - 1e-9)));
        const double h = span / double(n);
        for (long k = 0; k < n; ++k) {
            ode::rk4_step(rhs, x, t_grid[i - 1] + double(k) * h, h);
        }
        if (!x.allFinite()) {
            throw DivergenceError("three-space evolution diverged", t_grid[i - 1]);
        }
        record(x);
    }
}

} // namespace

ThreeSpaceTrajectory evolve_three_space(const ThreeSpaceBundle& bundle, const Vector& psi0_initial,
                                        const std::vector<double>& t_grid, double dt) {
    require_grid(t_grid, dt);
    const Index d = bundle.h.dim();
    if (psi0_initial.size() != d) {
        throw PreconditionError("initial state dimension does not match the bundle");
    }
    const auto om0 = bundle.map.omega(t_grid.front());
    const Vector ket0 = checked_lu(om0).solve(psi0_initial);
    const Vector ketket0 = metric(om0).mat() * ket0;

    Vector x(3 * d);
    x << psi0_initial, ket0, ketket0;
    const Matrix& h = bundle.h.mat();
    const ode::Rhs rhs = [&](const Vector& y, Vector& dy, double t) {
        const Matrix g = generator(bundle, t).mat();
        dy.resize(y.size());
        dy.segment(0, d) = -kI * (h * y.segment(0, d));
        dy.segment(d, d) = -kI * (g * y.segment(d, d));
        dy.segment(2 * d, d) = -kI * (g.adjoint() * y.segment(2 * d, d));
    };

    ThreeSpaceTrajectory out;
    out.t = t_grid;
    march(rhs, x, t_grid, dt, [&](const Vector& y) {
        out.initial.push_back(y.segment(0, d));
        out.ket.push_back(y.segment(d, d));
        out.ketket.push_back(y.segment(2 * d, d));
    });
    return out;
}

std::vector<OperatorMatrix> heisenberg_observable(const ThreeSpaceBundle& bundle, const OperatorMatrix& q0,
                                                  const std::vector<double>& t_grid, double dt) {
    require_grid(t_grid, dt);
    const auto theta0 = bundle.theta(t_grid.front());
    const double defect = hilbert::max_abs(quasi_hermiticity_defect(q0, theta0).mat());
    if (defect > kObservabilityTol * std::max(1.0, hilbert::max_abs(theta0.mat()))) {
        throw ObservabilityPrecondition("initial observable is not quasi-Hermitian w.r.t. Theta(t0)");
    }
    const Index d = q0.dim();
    const ode::Rhs rhs = [&](const Vector& y, Vector& dy, double t) {
        const Matrix xi = bundle.coriolis(t).mat();
        const Eigen::Map<const Matrix> q(y.data(), d, d);
        dy.resize(y.size());
        Eigen::Map<Matrix> dq(dy.data(), d, d);
        dq = -kI * (q * xi - xi * q);
    };
    std::vector<OperatorMatrix> out;
    const Vector y0 = Eigen::Map<const Vector>(q0.mat().data(), d * d);
    march(rhs, y0, t_grid, dt, [&](const Vector& y) {
        out.emplace_back(q0.space(), Eigen::Map<const Matrix>(y.data(), d, d));
    });
    return out;
}

ThetaCheck theta_stationarity_check(const DysonMapTrajectory& map, double t) {
    const auto om = map.omega(t).mat();
    const Matrix xi = coriolis(map, t).mat();
    const double h = map.h_fd();
    const Matrix plus = map.omega(t + h).mat();
    const Matrix minus = map.omega(t - h).mat();
    ThetaCheck c;
    c.lhs = kI * om * (xi.adjoint() - xi) * om.adjoint();
    c.rhs = (plus * plus.adjoint() - minus * minus.adjoint()) / (2.0 * h);
    c.hermiticity_defect = hilbert::max_abs(xi.adjoint() - xi);
    return c;
}

DysonMapTrajectory constant_map(const OperatorMatrix& m) {
    const Matrix mm = m.mat();
    const Matrix zero = Matrix::Zero(mm.rows(), mm.cols());
    return {m.space(), [mm](double) { return mm; }, [zero](double) { return zero; }};
}

DysonMapTrajectory unitary_map(const OperatorMatrix& h, const std::optional<OperatorMatrix>& m) {
    auto spec = std::make_shared<hilbert::Spectrum>(h);
    const Matrix pre = m ? m->mat() : Matrix::Identity(h.dim(), h.dim());
    const Matrix hm = h.mat();
    auto u = [spec](double t) {
        const Eigen::VectorXcd phases =
            (-kI * t * spec->energies().cast<cplx>()).array().exp().matrix();
        return Matrix(spec->vectors() * phases.asDiagonal() * spec->vectors().adjoint());
    };
    return {h.space(), [pre, u](double t) { return Matrix(pre * u(t)); },
            [pre, hm, u](double t) { return Matrix(-kI * pre * hm * u(t)); }};
}

DysonMapTrajectory shift_map(const SpaceSpec& space, const ShiftFamily& f) {
    const auto ops = hilbert::elementary_ops(space);
    const auto bd = ops.b_dag;
    const auto sp = ops.sigma_plus;
    auto omega = [bd, sp, f](double t) {
        return Matrix((nccm::exp_nilpotent(bd, f.alpha(t)) * nccm::exp_nilpotent(sp, f.beta(t))).mat());
    };
    auto deriv = [bd, sp, f, omega](double t) {
        return Matrix((f.alpha_dot(t) * bd.mat() + f.beta_dot(t) * sp.mat()) * omega(t));
    };
    return {space, omega, deriv};
}

DysonMapTrajectory nccm_map(const std::vector<nccm::CCMState>& trajectory, const OperatorMatrix& h) {
    if (trajectory.size() < 2) {
        throw PreconditionError("an NCCM Dyson map needs at least two trajectory points");
    }
    struct Node {
        double t;
        Vector s;
        Vector ds;
    };
    auto nodes = std::make_shared<std::vector<Node>>();
    for (const auto& st : trajectory) {
        if (!nodes->empty() && !(st.t > nodes->back().t)) {
            throw PreconditionError("trajectory times must be strictly increasing");
        }
        nodes->push_back({st.t, st.s.values, dynamics::eom_rhs(st, h).ds});
    }
    const auto set = trajectory.front().set();

    // s(t) and ds/dt from the cubic Hermite interpolant (end intervals extrapolate).
    auto interp = [nodes](double t) {
        const auto& ns = *nodes;
        auto it = std::upper_bound(ns.begin(), ns.end(), t, [](double v, const Node& n) { return v < n.t; });
        std::size_t i = it == ns.begin() ? 0 : std::size_t(it - ns.begin()) - 1;
        i = std::min(i, ns.size() - 2);
        const Node& a = ns[i];
        const Node& b = ns[i + 1];
        const double dt = b.t - a.t;
        const double u = (t - a.t) / dt;
        const double u2 = u * u, u3 = u2 * u;
        const Vector s = (2 * u3 - 3 * u2 + 1) * a.s + (u3 - 2 * u2 + u) * dt * a.ds +
                         (-2 * u3 + 3 * u2) * b.s + (u3 - u2) * dt * b.ds;
        const Vector ds = ((6 * u2 - 6 * u) * a.s + (-6 * u2 + 6 * u) * b.s) / dt +
                          (3 * u2 - 4 * u + 1) * a.ds + (3 * u2 - 2 * u) * b.ds;
        return std::pair{s, ds};
    };
    auto s_op = [set](const Vector& s) { return nccm::assemble({set, s}, nccm::OperatorKind::S); };
    auto omega = [interp, s_op](double t) { return Matrix(nccm::exp_nilpotent(s_op(interp(t).first)).mat()); };
    // Creators commute, so d/dt e^{S} = e^{S} dS/dt.
    auto deriv = [interp, s_op](double t) {
        const auto [s, ds] = interp(t);
        return Matrix(nccm::exp_nilpotent(s_op(s)).mat() * s_op(ds).mat());
    };
    return {set->space(), omega, deriv};
}

BraMetricReport bra_metric_report(const nccm::CCMState& state, const OperatorMatrix& q) {
    const auto s_op = nccm::assemble(state.s, nccm::OperatorKind::S);
    const auto e_s = nccm::exp_nilpotent(s_op);
    const Matrix theta = (e_s.adjoint() * e_s).mat();
    const cplx norm = theta(0, 0);
    const Matrix st = nccm::assemble(state.s_tilde, nccm::OperatorKind::S_tilde).mat();
    const Matrix dressed = nccm::similarity_transform(q, s_op).mat();
    const cplx weighted = (theta * dressed)(0, 0) / norm;
    return {hilbert::max_abs(st - theta / norm), std::abs(nccm::expectation(q, state) - weighted)};
}

} // namespace tdccm::nhip
