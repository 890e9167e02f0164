#include "tdccm/hilbert.hpp"

#include <cmath>
#include <string>

namespace tdccm::hilbert {

SpaceSpec build_space(int n_b, bool has_spin) {
    if (n_b < 1) {
        throw InvalidCutoff("boson cutoff must be >= 1, got " + std::to_string(n_b));
    }
    return SpaceSpec{n_b, has_spin};
}

OperatorMatrix::OperatorMatrix(const SpaceSpec& space)
    : space_(space), m_(Matrix::Zero(space.dim(), space.dim())) {}

OperatorMatrix::OperatorMatrix(const SpaceSpec& space, Matrix entries)
    : space_(space), m_(std::move(entries)) {
    if (m_.rows() != space_.dim() || m_.cols() != space_.dim()) {
        throw PreconditionError("operator entries are " + std::to_string(m_.rows()) + "x" +
                                std::to_string(m_.cols()) + ", space dimension is " +
                                std::to_string(space_.dim()));
    }
}

OperatorMatrix OperatorMatrix::identity(const SpaceSpec& space) {
    return {space, Matrix::Identity(space.dim(), space.dim())};
}

namespace {
void require_same_space(const OperatorMatrix& a, const OperatorMatrix& b) {
    if (!(a.space() == b.space())) {
        throw PreconditionError("operators act on different spaces");
    }
}
} // namespace

OperatorMatrix& OperatorMatrix::operator+=(const OperatorMatrix& o) {
    require_same_space(*this, o);
    m_ += o.m_;
    return *this;
}

OperatorMatrix& OperatorMatrix::operator-=(const OperatorMatrix& o) {
    require_same_space(*this, o);
    m_ -= o.m_;
    return *this;
}

OperatorMatrix& OperatorMatrix::operator*=(cplx c) {
    m_ *= c;
    return *this;
}

OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b) {
    require_same_space(a, b);
    return {a.space_, a.m_ * b.m_};
}

double max_abs(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

bool approx_equal(const OperatorMatrix& a, const OperatorMatrix& b, double tol) {
    return a.space() == b.space() && max_abs(a.mat() - b.mat()) <= tol;
}

OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b) {
    return a * b - b * a;
}

bool is_hermitian(const OperatorMatrix& a, double tol) {
    const double scale = std::max(1.0, max_abs(a.mat()));
    return max_abs(a.mat() - a.mat().adjoint()) <= tol * scale;
}

ElementaryOps elementary_ops(const SpaceSpec& space) {
    const int spins = space.has_spin ? 2 : 1;
    OperatorMatrix b(space), b_dag(space), number(space);
    OperatorMatrix sz(space), sp(space), sm(space);

    Matrix bm = Matrix::Zero(space.dim(), space.dim());
    for (int n = 0; n <= space.n_b; ++n) {
        for (int s = 0; s < spins; ++s) {
            const Index i = space.index(n, s);
            if (n > 0) {
                bm(space.index(n - 1, s), i) = std::sqrt(double(n));
            }
        }
    }
    b = OperatorMatrix(space, bm);
    b_dag = b.adjoint();
    number = b_dag * b;

    if (space.has_spin) {
        Matrix z = Matrix::Zero(space.dim(), space.dim());
        Matrix p = Matrix::Zero(space.dim(), space.dim());
        for (int n = 0; n <= space.n_b; ++n) {
            const Index dn = space.index(n, 0);
            const Index up = space.index(n, 1);
            z(up, up) = 1.0;
            z(dn, dn) = -1.0;
            p(up, dn) = 2.0;
        }
        sz = OperatorMatrix(space, z);
        sp = OperatorMatrix(space, p);
        sm = sp.adjoint();
    }
    return {b, b_dag, number, sz, sp, sm, OperatorMatrix::identity(space)};
}

void RabiParams::validate() const {
    if (!(omega > 0.0) || !std::isfinite(omega)) {
        throw PreconditionError("field frequency omega must be > 0");
    }
    if (!std::isfinite(omega0) || !std::isfinite(g)) {
        throw PreconditionError("omega0 and g must be finite");
    }
}

OperatorMatrix rabi_hamiltonian(const RabiParams& params, const SpaceSpec& space) {
    params.validate();
    if (!space.has_spin) {
        throw PreconditionError("the Rabi Hamiltonian needs a space with a spin factor");
    }
    const auto ops = elementary_ops(space);
    OperatorMatrix h = cplx(0.5 * params.omega0) * ops.sigma_z + cplx(params.omega) * ops.number;
    // (s+ + s-)(b_dag + b) is Hermitian and exactly symmetric entry by entry.
    h += cplx(params.g) * ((ops.sigma_plus + ops.sigma_minus) * (ops.b_dag + ops.b));
    return h;
}

Vector basis_state(const SpaceSpec& space, int n, int spin) {
    if (n < 0 || n > space.n_b || spin < 0 || spin > (space.has_spin ? 1 : 0)) {
        throw IndexError("basis state out of range");
    }
    Vector v = Vector::Zero(space.dim());
    v(space.index(n, spin)) = 1.0;
    return v;
}

Vector reference_state(const SpaceSpec& space) { return basis_state(space, 0, 0); }

cplx expectation(const OperatorMatrix& q, const Vector& psi) {
    return psi.dot(q.mat() * psi) / psi.squaredNorm();
}

double boundary_population(const SpaceSpec& space, const Vector& psi) {
    const double total = psi.squaredNorm();
    double top = 0.0;
    const int spins = space.has_spin ? 2 : 1;
    for (int s = 0; s < spins; ++s) {
        top += std::norm(psi(space.index(space.n_b, s)));
    }
    return total > 0.0 ? top / total : 0.0;
}

Spectrum::Spectrum(const OperatorMatrix& h) {
    if (!is_hermitian(h)) {
        throw OraclePrecondition("exact diagonalization needs a Hermitian operator");
    }
    // Symmetrize so the solver sees an exactly Hermitian input.
    const Matrix hs = 0.5 * (h.mat() + h.mat().adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(hs);
    if (solver.info() != Eigen::Success) {
        throw Error("eigendecomposition failed");
    }
    energies_ = solver.eigenvalues();
    vectors_ = solver.eigenvectors();
    for (Index k = 0; k < vectors_.cols(); ++k) {
        Index imax = 0;
        vectors_.col(k).cwiseAbs().maxCoeff(&imax);
        const cplx c = vectors_(imax, k);
        vectors_.col(k) *= std::conj(c) / std::abs(c);
        vectors_(imax, k) = std::abs(vectors_(imax, k));
    }
}

Vector Spectrum::evolve(const Vector& psi0, double t) const {
    Vector coeff = vectors_.adjoint() * psi0;
    for (Index k = 0; k < coeff.size(); ++k) {
        coeff(k) *= std::exp(-kI * energies_(k) * t);
    }
    return vectors_ * coeff;
}

GroundState ed_ground(const OperatorMatrix& h) {
    const Spectrum spec(h);
    return {spec.energies()(0), spec.eigenvector(0)};
}

std::vector<Vector> ed_evolve(const OperatorMatrix& h, const Vector& psi0,
                              std::span<const double> t_grid) {
    if (psi0.size() != h.dim()) {
        throw PreconditionError("initial state dimension does not match the operator");
    }
    if (std::abs(psi0.norm() - 1.0) > 1e-10) {
        throw PreconditionError("initial state must be normalized");
    }
    const Spectrum spec(h);
    std::vector<Vector> out;
    out.reserve(t_grid.size());
    for (double t : t_grid) {
        out.push_back(spec.evolve(psi0, t));
    }
    return out;
}

} // namespace tdccm::hilbert
