// hilbert.hpp: truncated Fock (x) two-level operator algebra, the Rabi
// Hamiltonian and the exact-diagonalization oracle.
//
// Basis ordering is boson-major: index = 2*n + s with s = 0 (down), 1 (up)
// when the space carries a spin, index = n otherwise. b_dag annihilates the
// top Fock level (hard wall).

#pragma once

#include "tdccm/types.hpp"

#include <span>
#include <vector>

namespace tdccm::hilbert {

inline constexpr double kOperatorTol = 1e-12;
inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kBoundaryLeakWarn = 1e-8;

struct SpaceSpec {
    int n_b = 1;
    bool has_spin = true;

    [[nodiscard]] Index dim() const noexcept { return Index(n_b + 1) * (has_spin ? 2 : 1); }
    // Position of |n, spin> (spin ignored without a spin factor).
    [[nodiscard]] Index index(int n, int spin = 0) const noexcept {
        return has_spin ? Index(2 * n + spin) : Index(n);
    }

    friend bool operator==(const SpaceSpec&, const SpaceSpec&) = default;
};

SpaceSpec build_space(int n_b, bool has_spin);

// Dense complex operator tagged with the space it acts on.
class OperatorMatrix {
public:
    explicit OperatorMatrix(const SpaceSpec& space);
    OperatorMatrix(const SpaceSpec& space, Matrix entries);

    static OperatorMatrix zero(const SpaceSpec& space) { return OperatorMatrix(space); }
    static OperatorMatrix identity(const SpaceSpec& space);

    [[nodiscard]] const SpaceSpec& space() const noexcept { return space_; }
    [[nodiscard]] const Matrix& mat() const noexcept { return m_; }
    [[nodiscard]] Index dim() const noexcept { return m_.rows(); }
    [[nodiscard]] cplx operator()(Index i, Index j) const { return m_(i, j); }

    [[nodiscard]] OperatorMatrix adjoint() const { return {space_, m_.adjoint()}; }

    OperatorMatrix& operator+=(const OperatorMatrix& o);
    OperatorMatrix& operator-=(const OperatorMatrix& o);
    OperatorMatrix& operator*=(cplx c);

    friend OperatorMatrix operator+(OperatorMatrix a, const OperatorMatrix& b) { return a += b; }
    friend OperatorMatrix operator-(OperatorMatrix a, const OperatorMatrix& b) { return a -= b; }
    friend OperatorMatrix operator*(cplx c, OperatorMatrix a) { return a *= c; }
    friend OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b);
    friend Vector operator*(const OperatorMatrix& a, const Vector& v) { return a.m_ * v; }

private:
    SpaceSpec space_;
    Matrix m_;
};

[[nodiscard]] bool approx_equal(const OperatorMatrix& a, const OperatorMatrix& b,
                                double tol = kOperatorTol);
[[nodiscard]] OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b);
// Largest absolute entry.
[[nodiscard]] double max_abs(const Matrix& m);
[[nodiscard]] bool is_hermitian(const OperatorMatrix& a, double tol = kHermitianTol);

struct ElementaryOps {
    OperatorMatrix b;
    OperatorMatrix b_dag;
    OperatorMatrix number;
    // Pseudo-spin convention: sigma_plus |down> = 2 |up>, sigma_minus |up> = 2 |down>.
    // All three are zero on a space without spin.
    OperatorMatrix sigma_z;
    OperatorMatrix sigma_plus;
    OperatorMatrix sigma_minus;
    OperatorMatrix identity;
};

ElementaryOps elementary_ops(const SpaceSpec& space);

struct RabiParams {
    double omega0 = 1.0;
    double omega = 1.0;
    double g = 0.0;

    void validate() const;
};

// h = omega0/2 sigma_z + omega b_dag b + g (sigma_plus + sigma_minus)(b_dag + b)
OperatorMatrix rabi_hamiltonian(const RabiParams& params, const SpaceSpec& space);

[[nodiscard]] Vector basis_state(const SpaceSpec& space, int n, int spin = 0);
// |0, down>, the cluster reference state.
[[nodiscard]] Vector reference_state(const SpaceSpec& space);

// Normalized <psi|q|psi> / <psi|psi>.
[[nodiscard]] cplx expectation(const OperatorMatrix& q, const Vector& psi);

// Population of the top Fock level of the normalized state.
[[nodiscard]] double boundary_population(const SpaceSpec& space, const Vector& psi);

struct GroundState {
    double energy = 0.0;
    Vector state;
};

// Eigendecomposition of a Hermitian operator, eigenvalues ascending, each
// eigenvector phase-fixed so its largest-magnitude component is real positive.
class Spectrum {
public:
    explicit Spectrum(const OperatorMatrix& h);

    [[nodiscard]] const Eigen::VectorXd& energies() const noexcept { return energies_; }
    [[nodiscard]] const Matrix& vectors() const noexcept { return vectors_; }
    [[nodiscard]] Vector eigenvector(Index k) const { return vectors_.col(k); }
    [[nodiscard]] Vector evolve(const Vector& psi0, double t) const;

private:
    Eigen::VectorXd energies_;
    Matrix vectors_;
};

GroundState ed_ground(const OperatorMatrix& h);
std::vector<Vector> ed_evolve(const OperatorMatrix& h, const Vector& psi0,
                              std::span<const double> t_grid);

} // namespace tdccm::hilbert
