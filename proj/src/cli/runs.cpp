#include "tdccm/cli/runs.hpp"

#include "tdccm/eccm.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace tdccm::cli {

namespace fs = std::filesystem;
using hilbert::OperatorMatrix;
using nccm::CCMState;

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    const std::size_t k = std::min<std::size_t>(n, std::size_t(std::max(1, workers)));
    if (k <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < k; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    const std::lock_guard lock(mu);
                    if (!error) {
                        error = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

namespace {

class Stopwatch {
public:
    [[nodiscard]] double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void apply_options(RunConfig& cfg, const RunOptions& opt) {
    if (opt.out_dir) {
        cfg.out_dir = *opt.out_dir;
    }
    if (opt.seed) {
        cfg.seed = *opt.seed;
    }
    cfg.validate();
}

Vector normalized(const Vector& v) { return v / v.norm(); }

CCMState state_from_file(const std::string& path, const nccm::ConfigSetPtr& set) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open amplitude file '" + path + "'");
    }
    CCMState st = CCMState::reference(set);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream ss(line);
        std::string tag;
        if (!(ss >> tag)) {
            continue;
        }
        const std::string where = path + ":" + std::to_string(lineno);
        if (tag == "k") {
            double re = 0, im = 0;
            if (!(ss >> re >> im)) {
                throw ConfigError(where + ": expected 'k <re> <im>'");
            }
            st.k = {re, im};
            continue;
        }
        int channel = 0, n = 0;
        double re = 0, im = 0;
        if ((tag != "s" && tag != "st") || !(ss >> channel >> n >> re >> im)) {
            throw ConfigError(where + ": expected 's|st <channel> <n> <re> <im>' or 'k <re> <im>'");
        }
        try {
            (tag == "s" ? st.s : st.s_tilde).at({channel, n}) = {re, im};
        } catch (const IndexError& e) {
            throw ConfigError(where + ": " + e.what());
        }
    }
    return st;
}

struct SeriesSummary {
    double max_sz_im = 0.0;
    double max_norm_check = 0.0;
    double max_boundary_leak = 0.0;
    double energy_drift = 0.0;
    double oracle_dev_sz = 0.0;
    double oracle_dev_n = 0.0;
    bool diverged = false;
    double last_good_t = 0.0;
    long rows = 0;
};

dynamics::ObservableRecord eccm_observables(const eccm::EccmState& st, const OperatorMatrix& h,
                                            const hilbert::ElementaryOps& ops) {
    dynamics::ObservableRecord r;
    r.t = st.t;
    r.sigma_z = eccm::eccm_expectation(ops.sigma_z, st);
    r.n_photon = eccm::eccm_expectation(ops.number, st);
    r.energy = eccm::eccm_expectation(h, st);
    r.norm_check = std::abs(eccm::eccm_expectation(ops.identity, st) - 1.0);
    const CCMState x = eccm::sigma_to_s(st);
    r.herm_residual = nccm::hermiticity_residual(x);
    r.boundary_leak = hilbert::boundary_population(st.space(), nccm::reconstruct_ket(x));
    return r;
}

SeriesSummary evolve_one(const RunConfig& cfg, int level, bool oracle, const fs::path& csv_path) {
    const auto space = hilbert::build_space(cfg.n_b, true);
    const auto h = hilbert::rabi_hamiltonian(cfg.model, space);
    const auto ops = hilbert::elementary_ops(space);
    const auto set = nccm::config_set(space, level);
    CCMState state0 = initial_state(cfg, set);
    state0.t = cfg.integrator.t0;

    std::vector<std::string> header{"t",     "sz_re", "sz_im",      "n_re",          "n_im",
                                    "e_re",  "e_im",  "norm_check", "herm_residual", "boundary_leak"};
    std::optional<hilbert::Spectrum> spec;
    Vector psi_ed;
    if (oracle) {
        header.insert(header.end(), {"ed_sz", "ed_n"});
        spec.emplace(h);
        psi_ed = normalized(nccm::reconstruct_ket(state0));
    }
    CsvWriter csv(csv_path, header);

    SeriesSummary sum;
    std::optional<cplx> e0;
    auto record = [&](const dynamics::ObservableRecord& r) {
        std::vector<std::string> row{num(r.t),
                                     num(r.sigma_z.real()),
                                     num(r.sigma_z.imag()),
                                     num(r.n_photon.real()),
                                     num(r.n_photon.imag()),
                                     num(r.energy.real()),
                                     num(r.energy.imag()),
                                     num(r.norm_check),
                                     num(r.herm_residual),
                                     num(r.boundary_leak)};
        if (oracle) {
            const Vector psi = spec->evolve(psi_ed, r.t - cfg.integrator.t0);
            const double sz = hilbert::expectation(ops.sigma_z, psi).real();
            const double n = hilbert::expectation(ops.number, psi).real();
            row.push_back(num(sz));
            row.push_back(num(n));
            sum.oracle_dev_sz = std::max(sum.oracle_dev_sz, std::abs(r.sigma_z - sz));
            sum.oracle_dev_n = std::max(sum.oracle_dev_n, std::abs(r.n_photon - n));
        }
        csv.row(row);
        if (!e0) {
            e0 = r.energy;
        }
        sum.max_sz_im = std::max(sum.max_sz_im, std::abs(r.sigma_z.imag()));
        sum.max_norm_check = std::max(sum.max_norm_check, r.norm_check);
        sum.max_boundary_leak = std::max(sum.max_boundary_leak, r.boundary_leak);
        sum.energy_drift = std::max(sum.energy_drift, std::abs(r.energy - *e0));
        sum.last_good_t = r.t;
        ++sum.rows;
    };

    try {
        if (cfg.method == "nccm") {
            dynamics::integrate(state0, h, cfg.integrator,
                                [&](const CCMState& s) { record(dynamics::observables(s, h)); });
        } else {
            eccm::EccmState e = eccm::s_to_sigma(state0);
            e.sigma = nccm::restrict_to(e.sigma, set);
            e.sigma_tilde = nccm::restrict_to(e.sigma_tilde, set);
            eccm::integrate(e, h, cfg.integrator,
                            [&](const eccm::EccmState& s) { record(eccm_observables(s, h, ops)); });
        }
    } catch (const DivergenceError& e) {
        sum.diverged = true;
        sum.last_good_t = e.last_good_t();
    }
    return sum;
}

std::string sub_tag(int level) { return "sub" + std::to_string(level); }

} // namespace

CCMState initial_state(const RunConfig& cfg, const nccm::ConfigSetPtr& set) {
    const auto& space = set->space();
    if (cfg.initial_kind == "reference") {
        return CCMState::reference(set);
    }
    if (cfg.initial_kind == "amplitude-file") {
        return state_from_file(cfg.initial_file, set);
    }
    Vector psi;
    if (cfg.initial_kind == "coherent") {
        const auto ops = hilbert::elementary_ops(space);
        psi = normalized(nccm::exp_apply(ops.b_dag.mat(), hilbert::reference_state(space),
                                         cplx(cfg.alpha_re, cfg.alpha_im)));
    } else {
        psi = hilbert::ed_ground(hilbert::rabi_hamiltonian(cfg.model, space)).state;
    }
    return nccm::cluster_log(psi, psi.adjoint(), set);
}

int run_evolve(RunConfig cfg, const RunOptions& opt) {
    apply_options(cfg, opt);
    const Stopwatch clock;
    const fs::path dir(cfg.out_dir);
    std::vector<SeriesSummary> sums(cfg.sub_n.size());
    std::vector<std::string> files(cfg.sub_n.size());
    for (std::size_t i = 0; i < cfg.sub_n.size(); ++i) {
        files[i] = "evolve_" + sub_tag(cfg.sub_n[i]) + ".csv";
    }
    parallel_for(cfg.sub_n.size(), opt.sweep_parallel, [&](std::size_t i) {
        sums[i] = evolve_one(cfg, cfg.sub_n[i], opt.oracle_ed, dir / files[i]);
    });

    Manifest m;
    m.command = "evolve";
    m.config = cfg;
    m.files = files;
    for (std::size_t i = 0; i < sums.size(); ++i) {
        const auto& s = sums[i];
        const std::string tag = sub_tag(cfg.sub_n[i]);
        nlohmann::json r{{"sub_n", cfg.sub_n[i]},
                         {"rows", s.rows},
                         {"max_abs_sz_im", s.max_sz_im},
                         {"max_norm_check", s.max_norm_check},
                         {"max_boundary_leak", s.max_boundary_leak},
                         {"energy_drift", s.energy_drift},
                         {"diverged", s.diverged},
                         {"last_good_t", s.last_good_t}};
        m.checks.push_back(Check::less(tag + ".norm_check", s.max_norm_check, 1e-10));
        m.checks.push_back(Check::less(tag + ".boundary_leak", s.max_boundary_leak, hilbert::kBoundaryLeakWarn));
        if (opt.oracle_ed) {
            r["oracle_max_dev_sz"] = s.oracle_dev_sz;
            r["oracle_max_dev_n"] = s.oracle_dev_n;
            if (cfg.sub_n[i] == cfg.n_b) {
                m.checks.push_back(
                    Check::less(tag + ".oracle_max_dev", std::max(s.oracle_dev_sz, s.oracle_dev_n), 1e-7));
            }
        }
        m.results["runs"].push_back(r);
        if (s.diverged) {
            m.diverged = true;
            m.diverged_at = s.last_good_t;
        }
    }
    if (cfg.sub_n.size() > 1) {
        // Sorted by level, the spurious Im<sigma_z> should shrink as N grows.
        std::vector<std::pair<int, double>> by_level;
        for (std::size_t i = 0; i < sums.size(); ++i) {
            by_level.emplace_back(cfg.sub_n[i], sums[i].max_sz_im);
        }
        std::sort(by_level.begin(), by_level.end());
        double worst = -INFINITY;
        for (std::size_t i = 1; i < by_level.size(); ++i) {
            worst = std::max(worst, by_level[i].second - by_level[i - 1].second);
        }
        m.results["im_sz_decreasing_with_n"] = worst < 0.0;
        m.checks.push_back(Check::less("im_sz_decreasing_with_n", worst, 0.0));
    }
    m.wall_time_s = clock.seconds();
    write_manifest(dir, m);
    if (m.diverged) {
        std::cerr << "evolve: integration diverged after t=" << m.diverged_at << "\n";
        return kExitFailure;
    }
    return kExitOk;
}

int run_stationary(RunConfig cfg, const RunOptions& opt) {
    apply_options(cfg, opt);
    const Stopwatch clock;
    const fs::path dir(cfg.out_dir);
    const auto space = hilbert::build_space(cfg.n_b, true);

    std::vector<std::vector<dynamics::StationaryResult>> sweeps(cfg.sub_n.size());
    parallel_for(cfg.sub_n.size(), opt.sweep_parallel, [&](std::size_t i) {
        sweeps[i] = dynamics::continuation_sweep(cfg.model, space, cfg.sub_n[i], cfg.g_start, cfg.g_stop,
                                                 cfg.g_step);
    });

    std::vector<std::string> header{"g", "sub_n", "e_re", "e_im", "converged", "newton_iters"};
    if (opt.oracle_ed) {
        header.push_back("e_ed");
    }
    CsvWriter csv(dir / "stationary.csv", header);
    std::map<double, double> ed_cache;
    for (std::size_t i = 0; i < sweeps.size(); ++i) {
        for (const auto& r : sweeps[i]) {
            std::vector<std::string> row{num(r.g),
                                         std::to_string(r.level),
                                         num(r.energy.real()),
                                         num(r.energy.imag()),
                                         boolean(r.converged),
                                         std::to_string(r.newton_iters)};
            if (opt.oracle_ed) {
                auto it = ed_cache.find(r.g);
                if (it == ed_cache.end()) {
                    hilbert::RabiParams p = cfg.model;
                    p.g = r.g;
                    it = ed_cache.emplace(r.g, hilbert::ed_ground(hilbert::rabi_hamiltonian(p, space)).energy).first;
                }
                row.push_back(num(it->second));
            }
            csv.row(row);
        }
    }
    Manifest m;
    m.command = "stationary";
    m.config = cfg;
    m.files = {"stationary.csv"};
    for (std::size_t i = 0; i < sweeps.size(); ++i) {
        const auto bd = dynamics::first_breakdown(sweeps[i]);
        std::vector<std::string> row{"first_breakdown_g", std::to_string(cfg.sub_n[i]), bd ? num(*bd) : "none",
                                     "", "", ""};
        if (opt.oracle_ed) {
            row.push_back("");
        }
        csv.row(row);
        nlohmann::json r{{"sub_n", cfg.sub_n[i]}, {"points", sweeps[i].size()}};
        r["first_breakdown_g"] = bd ? nlohmann::json(*bd) : nlohmann::json(nullptr);
        if (bd) {
            for (const auto& s : sweeps[i]) {
                if (!s.converged) {
                    r["breakdown_reason"] = s.failure;
                    break;
                }
            }
        }
        m.results["sweeps"].push_back(r);
        const auto& first = sweeps[i].front();
        if (first.g == 0.0) {
            m.checks.push_back(Check::less(sub_tag(cfg.sub_n[i]) + ".g0_energy",
                                           std::abs(first.energy + 0.5 * cfg.model.omega0), 1e-12));
        }
    }
    m.wall_time_s = clock.seconds();
    write_manifest(dir, m);
    return kExitOk;
}

int run_spectrum(RunConfig cfg, const RunOptions& opt) {
    apply_options(cfg, opt);
    const Stopwatch clock;
    const fs::path dir(cfg.out_dir);
    const auto space = hilbert::build_space(cfg.n_b, true);
    const auto h = hilbert::rabi_hamiltonian(cfg.model, space);

    std::vector<dynamics::StationaryResult> stats(cfg.sub_n.size());
    std::vector<std::vector<cplx>> freqs(cfg.sub_n.size());
    parallel_for(cfg.sub_n.size(), opt.sweep_parallel, [&](std::size_t i) {
        auto r = dynamics::solve_stationary(cfg.model, space, cfg.sub_n[i]);
        if (!r.converged && cfg.model.g > 0.0) {
            const auto sweep =
                dynamics::continuation_sweep(cfg.model, space, cfg.sub_n[i], 0.0, cfg.model.g, cfg.g_step);
            r = sweep.back();
        }
        stats[i] = r;
        if (r.converged) {
            freqs[i] = dynamics::excitation_spectrum(r, h);
        }
    });

    CsvWriter csv(dir / "spectrum.csv", {"sub_n", "mode", "w_re", "w_im"});
    Manifest m;
    m.command = "spectrum";
    m.config = cfg;
    m.files = {"spectrum.csv"};
    std::optional<hilbert::Spectrum> ed;
    if (opt.oracle_ed) {
        ed.emplace(h);
        CsvWriter gaps(dir / "ed_gaps.csv", {"k", "gap"});
        for (Index k = 1; k < std::min<Index>(ed->energies().size(), 21); ++k) {
            gaps.row({std::to_string(k), num(ed->energies()(k) - ed->energies()(0))});
        }
        m.files.push_back("ed_gaps.csv");
    }
    bool ok = true;
    for (std::size_t i = 0; i < stats.size(); ++i) {
        const std::string tag = sub_tag(cfg.sub_n[i]);
        nlohmann::json r{{"sub_n", cfg.sub_n[i]}, {"converged", stats[i].converged}};
        if (!stats[i].converged) {
            r["failure"] = stats[i].failure;
            ok = false;
            m.results["spectra"].push_back(r);
            continue;
        }
        const auto& w = freqs[i];
        for (std::size_t k = 0; k < w.size(); ++k) {
            csv.row({std::to_string(cfg.sub_n[i]), std::to_string(k), num(w[k].real()), num(w[k].imag())});
        }
        double sym = 0.0;
        for (const auto& a : w) {
            double best = INFINITY;
            for (const auto& b : w) {
                best = std::min(best, std::abs(a + b));
            }
            sym = std::max(sym, best);
        }
        double lowest = INFINITY;
        for (const auto& a : w) {
            if (a.real() > 1e-9) {
                lowest = std::min(lowest, a.real());
            }
        }
        r["energy_re"] = stats[i].energy.real();
        r["energy_im"] = stats[i].energy.imag();
        r["lowest_positive"] = lowest;
        r["negation_symmetry_defect"] = sym;
        m.checks.push_back(Check::less(tag + ".negation_symmetry", sym, 1e-8));
        if (ed) {
            const double gap = ed->energies()(1) - ed->energies()(0);
            r["ed_gap"] = gap;
            r["gap_deviation"] = std::abs(lowest - gap);
        }
        m.results["spectra"].push_back(r);
    }
    m.wall_time_s = clock.seconds();
    write_manifest(dir, m);
    return ok ? kExitOk : kExitFailure;
}

namespace {

std::vector<double> nhip_grid(const RunConfig& cfg) {
    std::vector<double> t;
    for (int k = 0; k < cfg.nhip_points; ++k) {
        t.push_back(cfg.nhip_t1 * double(k) / double(cfg.nhip_points - 1));
    }
    return t;
}

nhip::ShiftFamily analytic_family(const RunConfig& cfg) {
    const double a = cfg.nhip_alpha_rate, b = cfg.nhip_beta_amp, w = cfg.nhip_beta_freq;
    return {[a](double t) { return cplx(a * (1.0 + t)); }, [a](double) { return cplx(a); },
            [b, w](double t) { return cplx(b * std::cos(w * t)); },
            [b, w](double t) { return cplx(-b * w * std::sin(w * t)); }};
}

double max_abs_eig_mismatch(const OperatorMatrix& big_h, const hilbert::Spectrum& ref) {
    Eigen::ComplexEigenSolver<Matrix> es(big_h.mat(), false);
    std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(ev.begin(), ev.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
    double worst = 0.0;
    for (std::size_t k = 0; k < ev.size(); ++k) {
        worst = std::max(worst, std::abs(ev[k] - ref.energies()(Index(k))));
    }
    return worst;
}

} // namespace

NhipReport certify_nhip(const RunConfig& cfg, const std::string& family) {
    const auto space = hilbert::build_space(cfg.nhip_n_b, true);
    const auto h = hilbert::rabi_hamiltonian(cfg.model, space);
    const auto ops = hilbert::elementary_ops(space);
    const auto grid = nhip_grid(cfg);

    std::optional<nhip::DysonMapTrajectory> map;
    if (family == "analytic") {
        map = nhip::shift_map(space, analytic_family(cfg));
    } else if (family == "nccm") {
        ode::IntegratorConfig ic;
        ic.dt = cfg.nhip_dt;
        ic.t1 = cfg.nhip_t1;
        ic.output_every = 1;
        const auto traj =
            dynamics::integrate(CCMState::reference(nccm::config_set(space, cfg.nhip_sub_n)), h, ic);
        map = nhip::nccm_map(traj, h);
    } else {
        throw PreconditionError("unknown Dyson map family '" + family + "'");
    }
    const nhip::ThreeSpaceBundle bundle{h, *map};
    const Vector psi0 = hilbert::reference_state(space);
    const auto tr = nhip::evolve_three_space(bundle, psi0, grid, cfg.nhip_dt);
    const auto q0 = nhip::dress(ops.sigma_z, map->omega(grid.front()));
    const auto qs = nhip::heisenberg_observable(bundle, q0, grid, cfg.nhip_dt);
    const hilbert::Spectrum ref(h);

    NhipReport rep;
    const cplx norm0 = tr.ketket.front().dot(tr.ket.front());
    double iso = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double t = grid[k];
        const auto om = map->omega(t);
        const auto theta = nhip::metric(om);
        const auto big_h = nhip::dress(h, om);
        const auto g = nhip::generator(bundle, t);
        const Vector& ket = tr.ket[k];
        const Vector& kk = tr.ketket[k];
        const Vector& init = tr.initial[k];
        NhipRow row;
        row.family = family;
        row.t = t;
        row.zeta = hilbert::max_abs(nhip::quasi_hermiticity_defect(qs[k], theta).mat());
        const cplx norm = kk.dot(ket);
        row.ketket_norm_dev = std::abs(norm - norm0);
        row.initial_norm_dev = std::abs(init.squaredNorm() - norm);
        const auto expect_dev = [&](const OperatorMatrix& q) {
            const cplx lhs = init.dot(q.mat() * init);
            const cplx rhs = kk.dot(nhip::dress(q, om).mat() * ket);
            return std::abs(lhs - rhs);
        };
        row.expect_dev_sz = expect_dev(ops.sigma_z);
        row.expect_dev_n = expect_dev(ops.number);
        row.dressed_dev = hilbert::max_abs(qs[k].mat() - nhip::dress(ops.sigma_z, om).mat());
        const auto tc = nhip::theta_stationarity_check(*map, t);
        row.theta_mismatch = tc.mismatch();
        row.xi_defect = tc.hermiticity_defect;
        row.quasi_herm_h = hilbert::max_abs(nhip::quasi_hermiticity_defect(big_h, theta).mat());
        row.consistency = std::max((om.mat() * ket - init).norm(), (theta.mat() * ket - kk).norm());
        row.g_defect = hilbert::max_abs(nhip::quasi_hermiticity_defect(g, theta).mat());
        if (k == 0 || k + 1 == grid.size() || k == grid.size() / 2) {
            iso = std::max(iso, max_abs_eig_mismatch(big_h, ref));
        }
        rep.rows.push_back(row);
    }

    auto worst = [&](double NhipRow::*f) {
        double w = 0.0;
        for (const auto& r : rep.rows) {
            w = std::max(w, r.*f);
        }
        return w;
    };
    const std::string p = family + ".";
    rep.checks.push_back(Check::less(p + "zeta", worst(&NhipRow::zeta), 1e-8));
    rep.checks.push_back(Check::less(p + "hidden_unitarity", worst(&NhipRow::ketket_norm_dev), 1e-9));
    rep.checks.push_back(Check::less(p + "norm_across_spaces", worst(&NhipRow::initial_norm_dev), 1e-8));
    rep.checks.push_back(Check::less(
        p + "expectation_equality", std::max(worst(&NhipRow::expect_dev_sz), worst(&NhipRow::expect_dev_n)), 1e-8));
    rep.checks.push_back(Check::less(p + "dressed_vs_integrated", worst(&NhipRow::dressed_dev), 1e-7));
    rep.checks.push_back(Check::less(p + "theta_stationarity", worst(&NhipRow::theta_mismatch), 1e-7));
    rep.checks.push_back(Check::less(p + "quasi_hermiticity_h", worst(&NhipRow::quasi_herm_h), 1e-10));
    rep.checks.push_back(Check::less(p + "ket_consistency", worst(&NhipRow::consistency), 1e-8));
    rep.checks.push_back(Check::less(p + "isospectrality", iso, 1e-9));
    // For t > 0 both families are non-unitary, so Xi is not Hermitian.
    double xi_min = INFINITY;
    for (std::size_t k = 1; k < rep.rows.size(); ++k) {
        xi_min = std::min(xi_min, rep.rows[k].xi_defect);
    }
    rep.checks.push_back(Check::greater(p + "xi_non_hermitian", xi_min, 1e-6));
    return rep;
}

std::vector<Check> picture_limit_checks(const RunConfig& cfg) {
    const auto space = hilbert::build_space(cfg.nhip_n_b, true);
    const auto h = hilbert::rabi_hamiltonian(cfg.model, space);
    const auto shift = nhip::shift_map(space, analytic_family(cfg));
    const auto m = shift.omega(0.7);
    std::vector<Check> out;

    const nhip::ThreeSpaceBundle stationary{h, nhip::constant_map(m)};
    double g_minus_h = 0.0, theta_drift = 0.0;
    for (double t : {0.0, 0.3, 1.7}) {
        g_minus_h = std::max(g_minus_h, hilbert::max_abs((nhip::generator(stationary, t) - stationary.hamiltonian(t)).mat()));
        theta_drift = std::max(theta_drift, hilbert::max_abs((stationary.theta(t) - stationary.theta(0.0)).mat()));
    }
    out.push_back(Check::less("limit.constant_map_G_equals_H", g_minus_h, 1e-10));
    out.push_back(Check::less("limit.constant_map_theta_constant", theta_drift, 1e-10));

    const nhip::ThreeSpaceBundle heis{h, nhip::unitary_map(h)};
    double g_norm = 0.0, xi_minus_h = 0.0;
    for (double t : {0.0, 0.3, 1.7}) {
        g_norm = std::max(g_norm, hilbert::max_abs(nhip::generator(heis, t).mat()));
        xi_minus_h = std::max(xi_minus_h, hilbert::max_abs((heis.coriolis(t) - h).mat()));
    }
    out.push_back(Check::less("limit.heisenberg_G_zero", g_norm, 1e-10));
    out.push_back(Check::less("limit.heisenberg_xi_equals_h", xi_minus_h, 1e-10));
    const Vector psi0 = hilbert::reference_state(space);
    const auto tr = nhip::evolve_three_space(heis, psi0, {0.0, 0.5, 1.0}, cfg.nhip_dt);
    double ket_move = 0.0;
    for (const auto& k : tr.ket) {
        ket_move = std::max(ket_move, (k - tr.ket.front()).norm());
    }
    out.push_back(Check::less("limit.heisenberg_kets_constant", ket_move, 1e-10));

    // Xi Hermitian <=> Omega Omega^dag stationary, checked both ways.
    const auto dressed_unitary = nhip::unitary_map(h, m);
    double herm_defect = 0.0, stationary_rhs = 0.0;
    for (double t : {0.3, 1.7}) {
        const auto c = nhip::theta_stationarity_check(dressed_unitary, t);
        herm_defect = std::max(herm_defect, c.hermiticity_defect);
        stationary_rhs = std::max(stationary_rhs, hilbert::max_abs(c.rhs));
    }
    out.push_back(Check::less("relation.unitary_times_constant_xi_hermitian", herm_defect, 1e-10));
    out.push_back(Check::less("relation.unitary_times_constant_theta_static", stationary_rhs, 1e-7));
    const auto c = nhip::theta_stationarity_check(shift, 1.3);
    out.push_back(Check::greater("relation.shift_family_xi_non_hermitian", c.hermiticity_defect, 1e-6));
    out.push_back(Check::greater("relation.shift_family_theta_moving", hilbert::max_abs(c.rhs), 1e-6));
    return out;
}

int run_nhip(RunConfig cfg, const RunOptions& opt) {
    apply_options(cfg, opt);
    const Stopwatch clock;
    const fs::path dir(cfg.out_dir);
    std::vector<std::string> families;
    if (cfg.nhip_family == "both") {
        families = {"analytic", "nccm"};
    } else {
        families = {cfg.nhip_family};
    }
    std::vector<NhipReport> reports(families.size());
    parallel_for(families.size(), opt.sweep_parallel,
                 [&](std::size_t i) { reports[i] = certify_nhip(cfg, families[i]); });

    CsvWriter csv(dir / "nhip.csv",
                  {"family", "t", "zeta", "ketket_norm_dev", "initial_norm_dev", "expect_dev_sz", "expect_dev_n",
                   "dressed_dev", "theta_mismatch", "xi_defect", "quasi_herm_h", "ket_consistency", "g_defect"});
    Manifest m;
    m.command = "nhip";
    m.config = cfg;
    m.files = {"nhip.csv"};
    for (const auto& rep : reports) {
        for (const auto& r : rep.rows) {
            csv.row({r.family, num(r.t), num(r.zeta), num(r.ketket_norm_dev), num(r.initial_norm_dev),
                     num(r.expect_dev_sz), num(r.expect_dev_n), num(r.dressed_dev), num(r.theta_mismatch),
                     num(r.xi_defect), num(r.quasi_herm_h), num(r.consistency), num(r.g_defect)});
        }
        m.checks.insert(m.checks.end(), rep.checks.begin(), rep.checks.end());
    }
    const auto limits = picture_limit_checks(cfg);
    m.checks.insert(m.checks.end(), limits.begin(), limits.end());
    m.wall_time_s = clock.seconds();
    write_manifest(dir, m);
    for (const auto& c : m.checks) {
        if (!c.pass) {
            std::cerr << "nhip: check failed: " << c.name << " = " << c.value << "\n";
        }
    }
    return all_pass(m.checks) ? kExitOk : kExitFailure;
}

int run_verify(const std::string& suite, RunConfig cfg, const RunOptions& opt) {
    if (!known_suite(suite)) {
        std::cerr << "verify: unknown suite '" << suite
                  << "'\nusage: tdccm verify --suite {algebra|gradients|brackets|eccm|nhip|all} [--seed INT]\n";
        return kExitUsage;
    }
    apply_options(cfg, opt);
    const Stopwatch clock;
    const auto checks = verify_suite(suite, cfg.seed);
    for (const auto& c : checks) {
        std::printf("%s %s value=%.3e %s %.1e\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value,
                    c.below ? "<" : ">", c.tolerance);
    }
    Manifest m;
    m.command = "verify --suite " + suite;
    m.config = cfg;
    m.checks = checks;
    m.files = {"verify.json"};
    m.wall_time_s = clock.seconds();
    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "verify.json", std::ios::binary | std::ios::trunc);
        out << nlohmann::json{{"suite", suite}, {"seed", cfg.seed}, {"checks", to_json(checks)},
                              {"pass", all_pass(checks)}}
                   .dump(2)
            << '\n';
    }
    write_manifest(dir, m);
    if (!all_pass(checks)) {
        for (const auto& c : checks) {
            if (!c.pass) {
                std::cerr << "verify: failed check " << c.name << "\n";
            }
        }
        return kExitFailure;
    }
    return kExitOk;
}

} // namespace tdccm::cli
