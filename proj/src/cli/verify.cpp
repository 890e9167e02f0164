#include "tdccm/cli/runs.hpp"

#include "tdccm/eccm.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <random>

namespace tdccm::cli {

using nccm::CCMState;

namespace {

class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : rng_(seed) {}

    cplx amplitude(double scale) {
        std::uniform_real_distribution<double> u(-scale, scale);
        const double re = u(rng_);
        return {re, u(rng_)};
    }

    nccm::ClusterAmplitudes amplitudes(const nccm::ConfigSetPtr& set, double scale) {
        auto a = nccm::ClusterAmplitudes::zeros(set);
        for (Index k = 0; k < a.values.size(); ++k) {
            a.values(k) = amplitude(scale);
        }
        return a;
    }

    CCMState state(const nccm::ConfigSetPtr& set, double scale) {
        return {0.0, amplitudes(set, scale), amplitudes(set, scale), cplx(0.0)};
    }

private:
    std::mt19937_64 rng_;
};

const hilbert::RabiParams kModel{1.0, 1.0, 0.3};

double relative(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(a), 1.0); }

std::vector<cplx> sorted_eigenvalues(const Matrix& m) {
    Eigen::ComplexEigenSolver<Matrix> es(m, false);
    std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(ev.begin(), ev.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
    return ev;
}

std::vector<Check> algebra(Sampler& rnd) {
    std::vector<Check> out;
    const auto space = hilbert::build_space(6, true);
    const auto h = hilbert::rabi_hamiltonian(kModel, space);
    const auto ops = hilbert::elementary_ops(space);
    const auto full = nccm::complete_set(space);

    double comm = 0.0, ortho = 0.0;
    const Vector psi0 = hilbert::reference_state(space);
    for (std::size_t i = 0; i < full->size(); ++i) {
        for (std::size_t j = 0; j < full->size(); ++j) {
            comm = std::max(comm, hilbert::max_abs(hilbert::commutator(full->creator(i), full->creator(j)).mat()));
            const cplx overlap = (full->creator(i).mat() * psi0).dot(full->creator(j).mat() * psi0);
            ortho = std::max(ortho, std::abs(overlap - (i == j ? 1.0 : 0.0)));
        }
    }
    out.push_back(Check::less("algebra.creators_commute", comm, 1e-12));
    out.push_back(Check::less("algebra.configurations_orthonormal", ortho, 1e-12));

    const CCMState x = rnd.state(nccm::config_set(space, 4), 0.3);
    const auto s_op = nccm::assemble(x.s, nccm::OperatorKind::S);
    const auto transformed = nccm::similarity_transform(h, s_op);
    const auto ref = sorted_eigenvalues(h.mat());
    const auto got = sorted_eigenvalues(transformed.mat());
    double iso = 0.0;
    for (std::size_t k = 0; k < ref.size(); ++k) {
        iso = std::max(iso, std::abs(ref[k] - got[k]));
    }
    out.push_back(Check::less("algebra.similarity_isospectral", iso, 1e-9));
    out.push_back(Check::less("algebra.nested_commutator_series",
                              hilbert::max_abs((transformed - nccm::nested_commutator_sum(h, s_op)).mat()),
                              1e-10));
    out.push_back(Check::less("algebra.unit_expectation",
                              std::abs(nccm::expectation(ops.identity, x) - 1.0), 1e-13));
    out.push_back(Check::less("algebra.closed_form_sigma_z",
                              std::abs(dynamics::sigma_z_closed(x) - nccm::expectation(ops.sigma_z, x)), 1e-12));
    out.push_back(Check::less("algebra.closed_form_photon_number",
                              std::abs(dynamics::photon_number_closed(x) - nccm::expectation(ops.number, x)),
                              1e-12));
    return out;
}

std::vector<Check> gradient_checks(Sampler& rnd) {
    std::vector<Check> out;
    const auto space = hilbert::build_space(6, true);
    const auto h = hilbert::rabi_hamiltonian(kModel, space);
    const auto set = nccm::config_set(space, 3);
    const CCMState x = rnd.state(set, 0.3);
    const auto g = nccm::gradients(h, x);
    constexpr double eps = 1e-6;

    double worst_s = 0.0, worst_st = 0.0;
    for (Index k = 0; k < Index(set->size()); ++k) {
        for (const cplx dir : {cplx(1.0), kI}) {
            CCMState p = x, m = x;
            p.s.values(k) += eps * dir;
            m.s.values(k) -= eps * dir;
            const cplx fd_s = (nccm::expectation(h, p) - nccm::expectation(h, m)) / (2.0 * eps * dir);
            worst_s = std::max(worst_s, relative(g.d_s(k), fd_s));
            p = x;
            m = x;
            p.s_tilde.values(k) += eps * dir;
            m.s_tilde.values(k) -= eps * dir;
            const cplx fd_st = (nccm::expectation(h, p) - nccm::expectation(h, m)) / (2.0 * eps * dir);
            worst_st = std::max(worst_st, relative(g.d_s_tilde(k), fd_st));
        }
    }
    out.push_back(Check::less("gradients.d_s_vs_finite_difference", worst_s, 1e-5));
    out.push_back(Check::less("gradients.d_s_tilde_vs_finite_difference", worst_st, 1e-5));

    // At the reference only the one-photon spin-up configuration feels the coupling.
    const auto g0 = nccm::gradients(h, CCMState::reference(set));
    const Index pos = Index(set->position({2, 2}));
    out.push_back(Check::less("gradients.reference_coupling_entry", std::abs(g0.d_s_tilde(pos) - 2.0 * kModel.g),
                              1e-14));
    return out;
}

std::vector<Check> bracket_checks(Sampler& rnd) {
    std::vector<Check> out;
    const auto space = hilbert::build_space(4, true);
    const auto ops = hilbert::elementary_ops(space);
    const auto h = hilbert::rabi_hamiltonian(kModel, space);
    const std::vector<const hilbert::OperatorMatrix*> list{&ops.b, &ops.b_dag, &ops.number, &ops.sigma_z, &h};

    const CCMState full = rnd.state(nccm::complete_set(space), 0.2);
    double comm_map = 0.0;
    for (const auto* a : list) {
        for (const auto* b : list) {
            const cplx pb = nccm::poisson_bracket(*a, *b, full);
            const cplx ex = nccm::expectation(hilbert::commutator(*a, *b), full) / kI;
            comm_map = std::max(comm_map, std::abs(pb - ex));
        }
    }
    out.push_back(Check::less("brackets.commutator_map_full_truncation", comm_map, 1e-9));

    const auto set = nccm::config_set(space, 2);
    const CCMState x = rnd.state(set, 0.2);
    double anti = 0.0;
    for (const auto* a : list) {
        for (const auto* b : list) {
            anti = std::max(anti, std::abs(nccm::poisson_bracket(*a, *b, x) + nccm::poisson_bracket(*b, *a, x)));
        }
    }
    out.push_back(Check::less("brackets.antisymmetry", anti, 1e-12));

    double canon = 0.0;
    for (std::size_t k = 0; k < set->size(); ++k) {
        for (std::size_t l = 0; l < set->size(); ++l) {
            using nccm::FieldCoordinate;
            const auto phi_k = nccm::coordinate_gradient(*set, k, FieldCoordinate::phi);
            const auto phi_l = nccm::coordinate_gradient(*set, l, FieldCoordinate::phi);
            const auto pi_l = nccm::coordinate_gradient(*set, l, FieldCoordinate::pi);
            const cplx delta = k == l ? 1.0 : 0.0;
            canon = std::max(canon, std::abs(nccm::poisson_bracket(phi_k, pi_l) - delta));
            canon = std::max(canon, std::abs(nccm::poisson_bracket(phi_k, phi_l)));
            canon = std::max(canon, std::abs(nccm::field_bracket(nccm::to_field_gradients(phi_k),
                                                                  nccm::to_field_gradients(pi_l)) -
                                             delta));
        }
    }
    out.push_back(Check::less("brackets.field_momentum_canonical", canon, 1e-14));
    return out;
}

std::vector<Check> eccm_checks(Sampler& rnd) {
    std::vector<Check> out;
    const auto space = hilbert::build_space(4, true);
    const auto ops = hilbert::elementary_ops(space);
    const auto h = hilbert::rabi_hamiltonian(kModel, space);
    const CCMState x = rnd.state(nccm::complete_set(space), 0.2);

    const auto e = eccm::s_to_sigma(x);
    const CCMState back = eccm::sigma_to_s(e);
    const double trip = std::max(hilbert::max_abs((back.s.values - x.s.values).transpose()),
                                 hilbert::max_abs((back.s_tilde.values - x.s_tilde.values).transpose()));
    out.push_back(Check::less("eccm.round_trip", trip, 1e-12));
    const auto st = eccm::sigma_tilde_to_stilde(eccm::stilde_to_sigma_tilde(x.s_tilde));
    out.push_back(
        Check::less("eccm.log_exp_round_trip", hilbert::max_abs((st.values - x.s_tilde.values).transpose()), 1e-12));

    double eq = 0.0;
    for (const auto* q : {&ops.sigma_z, &ops.number, &h, &ops.b}) {
        eq = std::max(eq, std::abs(eccm::eccm_expectation(*q, e) - nccm::expectation(*q, x)));
    }
    out.push_back(Check::less("eccm.expectation_equality", eq, 1e-12));

    const auto direct = eccm::eccm_eom_rhs(e, h);
    const auto chain = eccm::eccm_rhs_via_nccm(e, h);
    double chain_err = 0.0;
    for (Index k = 0; k < direct.dsigma.size(); ++k) {
        chain_err = std::max(chain_err, relative(direct.dsigma(k), chain.dsigma(k)));
        chain_err = std::max(chain_err, relative(direct.dsigma_tilde(k), chain.dsigma_tilde(k)));
    }
    out.push_back(Check::less("eccm.chain_rule_rhs", chain_err, 1e-6));

    const cplx pb_e = eccm::eccm_poisson_bracket(ops.b, ops.b_dag, e);
    const cplx pb_n = nccm::poisson_bracket(ops.b, ops.b_dag, x);
    out.push_back(Check::less("eccm.bracket_invariance", relative(pb_n, pb_e), 1e-6));
    return out;
}

std::vector<Check> nhip_checks(std::uint64_t seed) {
    RunConfig cfg;
    cfg.nhip_n_b = 4;
    cfg.nhip_sub_n = 2;
    cfg.nhip_t1 = 1.0;
    cfg.nhip_points = 6;
    cfg.seed = seed;
    std::vector<Check> out;
    for (const char* family : {"analytic", "nccm"}) {
        const auto rep = certify_nhip(cfg, family);
        for (auto c : rep.checks) {
            c.name = "nhip." + c.name;
            out.push_back(std::move(c));
        }
    }
    for (auto c : picture_limit_checks(cfg)) {
        c.name = "nhip." + c.name;
        out.push_back(std::move(c));
    }
    return out;
}

const std::vector<std::string> kSuites{"algebra", "gradients", "brackets", "eccm", "nhip", "all"};

} // namespace

bool known_suite(const std::string& suite) {
    return std::find(kSuites.begin(), kSuites.end(), suite) != kSuites.end();
}

std::vector<Check> verify_suite(const std::string& suite, std::uint64_t seed) {
    if (!known_suite(suite)) {
        throw PreconditionError("unknown verify suite '" + suite + "'");
    }
    // Each suite draws from its own stream so that "all" matches the single runs.
    const auto run = [seed](const std::string& name) -> std::vector<Check> {
        const auto slot = std::uint64_t(std::find(kSuites.begin(), kSuites.end(), name) - kSuites.begin());
        Sampler rnd(seed + 1000003ULL * slot);
        if (name == "algebra") {
            return algebra(rnd);
        }
        if (name == "gradients") {
            return gradient_checks(rnd);
        }
        if (name == "brackets") {
            return bracket_checks(rnd);
        }
        if (name == "eccm") {
            return eccm_checks(rnd);
        }
        return nhip_checks(seed);
    };
    if (suite != "all") {
        return run(suite);
    }
    std::vector<Check> out;
    for (const auto& name : kSuites) {
        if (name != "all") {
            auto part = run(name);
            out.insert(out.end(), part.begin(), part.end());
        }
    }
    return out;
}

} // namespace tdccm::cli
