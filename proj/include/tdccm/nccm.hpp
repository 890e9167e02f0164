// nccm.hpp: normal coupled cluster parametrization of the Rabi model.
//
// Configuration creators acting on the reference |psi0> = |0, down>:
//   C+(1,n) = (n!)^{-1/2} (b_dag)^n
//   C+(2,n) = [4 (n-1)!]^{-1/2} (b_dag)^{n-1} sigma_plus
// Each maps |psi0> onto one basis vector (|n,down> or |n-1,up>), so
// <psi0|C-_I acts as a coordinate projection.
//
// Ket and bra: |psi> = e^k e^S |psi0>, <psi~| = e^{-k} <psi0| S~ e^{-S} with
// S = sum s_I C+_I and S~ = 1 + sum s~_I C-_I. All derivatives treat s_I and
// s~_I as independent complex variables (holomorphic).

#pragma once

#include "tdccm/hilbert.hpp"

#include <compare>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace tdccm::nccm {

using hilbert::OperatorMatrix;
using hilbert::SpaceSpec;

struct ConfigIndex {
    int channel = 1; // 1: pure boson string, 2: boson string times sigma_plus
    int n = 1;

    auto operator<=>(const ConfigIndex&) const = default;
};

std::string to_string(const ConfigIndex& idx);

// Ordered SUB-N index set: channel 1 with n = 1..N, then channel 2 with
// n = 1..N. At N = n_b channel 2 also carries n = n_b + 1, which makes the set
// complete: {C+_I |psi0>} together with |psi0> spans the truncated space.
class ConfigSet {
public:
    ConfigSet(const SpaceSpec& space, int level);

    [[nodiscard]] const SpaceSpec& space() const noexcept { return space_; }
    [[nodiscard]] int level() const noexcept { return level_; }
    [[nodiscard]] bool complete() const noexcept { return level_ == space_.n_b; }
    [[nodiscard]] std::size_t size() const noexcept { return indices_.size(); }
    [[nodiscard]] std::span<const ConfigIndex> indices() const noexcept { return indices_; }
    [[nodiscard]] const ConfigIndex& index(std::size_t k) const { return indices_.at(k); }

    [[nodiscard]] bool contains(const ConfigIndex& idx) const noexcept;
    // Position of idx inside the set; IndexError when absent.
    [[nodiscard]] std::size_t position(const ConfigIndex& idx) const;
    // Basis index of C+_k |psi0>.
    [[nodiscard]] Index basis_position(std::size_t k) const { return basis_pos_.at(k); }
    [[nodiscard]] const OperatorMatrix& creator(std::size_t k) const { return creators_.at(k); }
    [[nodiscard]] OperatorMatrix destructor(std::size_t k) const { return creators_.at(k).adjoint(); }

private:
    SpaceSpec space_;
    int level_;
    std::vector<ConfigIndex> indices_;
    std::vector<Index> basis_pos_;
    std::vector<OperatorMatrix> creators_;
};

using ConfigSetPtr = std::shared_ptr<const ConfigSet>;

// Throws InvalidCutoff-like PreconditionError for N < 1, TruncationOverflow for N > n_b.
ConfigSetPtr config_set(const SpaceSpec& space, int level);
inline ConfigSetPtr complete_set(const SpaceSpec& space) { return config_set(space, space.n_b); }

// Coefficients of one cluster operator (s, s~, sigma or sigma~) over a set.
struct ClusterAmplitudes {
    ConfigSetPtr set;
    Vector values;

    static ClusterAmplitudes zeros(ConfigSetPtr set);
    [[nodiscard]] cplx at(const ConfigIndex& idx) const { return values(Index(set->position(idx))); }
    cplx& at(const ConfigIndex& idx) { return values(Index(set->position(idx))); }
};

// Re-express amplitudes on another set of the same space. Indices missing
// from `target` must carry zero; otherwise IndexError.
ClusterAmplitudes embed(const ClusterAmplitudes& amps, const ConfigSetPtr& target);
// Drop everything outside `target`.
ClusterAmplitudes restrict_to(const ClusterAmplitudes& amps, const ConfigSetPtr& target);

struct CCMState {
    double t = 0.0;
    ClusterAmplitudes s;
    ClusterAmplitudes s_tilde;
    cplx k{0.0, 0.0};

    static CCMState reference(const ConfigSetPtr& set);
    [[nodiscard]] const ConfigSetPtr& set() const noexcept { return s.set; }
    [[nodiscard]] const SpaceSpec& space() const noexcept { return s.set->space(); }
};

enum class OperatorKind { S, S_tilde };

// S = sum s_I C+_I (strictly raising) or S~ = 1 + sum s~_I C-_I.
OperatorMatrix assemble(const ClusterAmplitudes& amps, OperatorKind kind);

// Index ordering puts every raising operator strictly below the diagonal.
[[nodiscard]] bool is_strictly_raising(const Matrix& m);
[[nodiscard]] bool is_strictly_lowering(const Matrix& m);

// exp(c X) for strictly triangular X, as the terminating power series.
OperatorMatrix exp_nilpotent(const OperatorMatrix& x, cplx c = 1.0);
// exp(c X) v and r exp(c X) without forming the exponential.
Vector exp_apply(const Matrix& x, const Vector& v, cplx c = 1.0);
RowVector exp_apply_row(const RowVector& r, const Matrix& x, cplx c = 1.0);
// log(1 + L) for strictly triangular L (Mercator series).
OperatorMatrix log_unipotent(const OperatorMatrix& one_plus_l);

// Q = e^{-S} q e^{S}; PreconditionError unless S is strictly raising.
OperatorMatrix similarity_transform(const OperatorMatrix& q, const OperatorMatrix& s_op);
// Same operator via sum_n [q, S]_n / n!, stopping at the first vanishing term.
OperatorMatrix nested_commutator_sum(const OperatorMatrix& q, const OperatorMatrix& s_op);

cplx expectation(const OperatorMatrix& q, const CCMState& state);

// Expectation functional with both holomorphic gradients.
struct Gradients {
    cplx value{0.0, 0.0};
    Vector d_s;       // dQ/ds_I      = <psi0| S~ [Q, C+_I] |psi0>
    Vector d_s_tilde; // dQ/ds~_I     = <psi0| C-_I Q |psi0>
};

Gradients gradients(const OperatorMatrix& q, const CCMState& state);
cplx grad_s(const OperatorMatrix& q, const CCMState& state, const ConfigIndex& idx);
cplx grad_s_tilde(const OperatorMatrix& q, const CCMState& state, const ConfigIndex& idx);

// {A, B} = (1/i) sum_I (dA/ds_I dB/ds~_I - dA/ds~_I dB/ds_I)
cplx poisson_bracket(const Gradients& a, const Gradients& b);
cplx poisson_bracket(const OperatorMatrix& a, const OperatorMatrix& b, const CCMState& state);

// phi_I = (s_I + s~_I)/sqrt2, pi_I = -i (s_I - s~_I)/sqrt2
struct FieldMomentum {
    ConfigSetPtr set;
    Vector phi;
    Vector pi;
};

FieldMomentum to_field_momentum(const CCMState& state);
CCMState from_field_momentum(const FieldMomentum& fm, double t = 0.0, cplx k = 0.0);

struct FieldGradients {
    Vector d_phi;
    Vector d_pi;
};

FieldGradients to_field_gradients(const Gradients& g);
// {A, B} = sum_I (dA/dphi_I dB/dpi_I - dA/dpi_I dB/dphi_I)
cplx field_bracket(const FieldGradients& a, const FieldGradients& b);

enum class FieldCoordinate { phi, pi };
// Gradient in (s, s~) of the coordinate function phi_I or pi_I.
Gradients coordinate_gradient(const ConfigSet& set, std::size_t k, FieldCoordinate which);

// Inverse of the parametrization: k = log <psi0|psi>; s from the recursive
// cluster decomposition of the ket amplitudes (channel 1 low-to-high n, then
// channel 2, which is linear once channel 1 is known);
// s~_I = e^k <psi~| e^S C+_I |psi0>. Requires <psi~|psi> = 1.
CCMState cluster_log(const Vector& psi, const RowVector& psi_tilde, const ConfigSetPtr& set);

Vector reconstruct_ket(const CCMState& state);       // e^k e^S |psi0>
RowVector reconstruct_bra(const CCMState& state);    // e^{-k} <psi0| S~ e^{-S}

// || <psi0|S~ - <psi0|e^{S^dag} e^S / <psi0|e^{S^dag} e^S|psi0> ||
double hermiticity_residual(const CCMState& state);

} // namespace tdccm::nccm
