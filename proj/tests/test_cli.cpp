#include "tdccm/cli/runs.hpp"

#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace tdccm;
using namespace tdccm::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("tdccm_test_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("config parsing") {
    const auto cfg = parse_config("# comment\nmodel.g = 0.25\nccm.sub_n = 2, 4 ,6\nspace.n_b=8\n"
                                  "integrator.scheme = rk45   # trailing\n");
    CHECK(cfg.model.g == 0.25);
    CHECK(cfg.sub_n == std::vector<int>{2, 4, 6});
    CHECK(cfg.n_b == 8);
    CHECK(cfg.integrator.scheme == ode::Scheme::rk45);
    CHECK_NOTHROW(cfg.validate());

    CHECK_THROWS_WITH_AS(parse_config("model.q = 1\n"), "unknown configuration key 'model.q'", ConfigError);
    CHECK_THROWS_AS(parse_config("model.g = 1\nmodel.g = 2\n"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("model.g = abc\n"), "model.g: expected a finite number, got 'abc'",
                         ConfigError);
    CHECK_THROWS_AS(parse_config("just words\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("integrator.scheme = euler\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("ccm.sub_n = 13\n").validate(), ConfigError);
    CHECK_THROWS_AS(parse_config("initial.kind = amplitude-file\n").validate(), ConfigError);
}

TEST_CASE("canonical text round-trips") {
    auto cfg = parse_config("model.g = 0.1\nsweep.g_step = 0.01\nccm.sub_n = 2,4\nnhip.family = nccm\n");
    const std::string text = to_text(cfg);
    CHECK(to_text(parse_config(text)) == text);
    CHECK(text.find("model.g = 0.10000000000000001\n") != std::string::npos);
}

TEST_CASE("a manifest is accepted as configuration") {
    const auto dir = scratch("manifest");
    Manifest m;
    m.command = "evolve";
    m.config = parse_config("model.g = 0.15\nspace.n_b = 5\n");
    write_manifest(dir, m);
    const auto back = load_config((dir / "manifest.json").string());
    CHECK(back.model.g == 0.15);
    CHECK(back.n_b == 5);
    const auto j = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(j["tool"] == "tdccm");
    CHECK(j["all_checks_pass"] == true);
    CHECK_THROWS_AS(load_config((dir / "missing.cfg").string()), ConfigError);
}

TEST_CASE("CSV writer enforces the header width") {
    const auto dir = scratch("csv");
    {
        CsvWriter w(dir / "a.csv", {"x", "y"});
        w.row({num(0.1), num(2.0)});
        CHECK_THROWS_AS(w.row({"1"}), Error);
    }
    CHECK(slurp(dir / "a.csv") == "x,y\n0.10000000000000001,2\n");
}

TEST_CASE("parallel_for visits every index once and forwards errors") {
    std::vector<std::atomic<int>> hits(17);
    parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
    for (const auto& h : hits) {
        CHECK(h.load() == 1);
    }
    CHECK_THROWS_AS(parallel_for(5, 3, [](std::size_t i) {
                        if (i == 2) {
                            throw PreconditionError("boom");
                        }
                    }),
                    PreconditionError);
}

TEST_CASE("initial states") {
    const auto sp = hilbert::build_space(6, true);
    const auto set = nccm::config_set(sp, 3);
    RunConfig cfg;
    cfg.n_b = 6;
    cfg.initial_kind = "coherent";
    cfg.alpha_re = 0.3;
    const auto coh = initial_state(cfg, set);
    // e^{alpha b_dag} with the hard wall: s_(1,1) = alpha, higher boson strings vanish.
    CHECK(std::abs(coh.s.at({1, 1}) - cplx(0.3)) < 1e-14);
    CHECK(std::abs(coh.s.at({1, 2})) < 1e-14);

    const auto dir = scratch("amps");
    std::ofstream(dir / "amps.txt") << "# ket\ns 1 1 0.1 0\ns 2 2 0 -0.05\nst 1 1 0.2 0\nk 0.01 0\n";
    cfg.initial_kind = "amplitude-file";
    cfg.initial_file = (dir / "amps.txt").string();
    const auto st = initial_state(cfg, set);
    CHECK(st.s.at({2, 2}) == cplx(0.0, -0.05));
    CHECK(st.s_tilde.at({1, 1}) == cplx(0.2));
    CHECK(st.k == cplx(0.01));
    std::ofstream(dir / "bad.txt") << "s 1 5 0.1 0\n";
    cfg.initial_file = (dir / "bad.txt").string();
    CHECK_THROWS_AS(initial_state(cfg, set), ConfigError);
}

TEST_CASE("evolve writes CSV and manifest, and reports divergence with exit 1") {
    const auto dir = scratch("evolve");
    auto cfg = parse_config("model.g = 0.2\nspace.n_b = 6\nccm.sub_n = 2\nintegrator.t1 = 0.5\n"
                            "integrator.output_every = 100\n");
    RunOptions opt;
    opt.out_dir = (dir / "ok").string();
    opt.oracle_ed = true;
    CHECK(run_evolve(cfg, opt) == kExitOk);
    const std::string csv = slurp(dir / "ok" / "evolve_sub2.csv");
    CHECK(csv.rfind("t,sz_re,sz_im,n_re,n_im,e_re,e_im,norm_check,herm_residual,boundary_leak,ed_sz,ed_n\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);

    cfg.integrator.divergence_cap = 1e-3;
    opt.out_dir = (dir / "bad").string();
    CHECK(run_evolve(cfg, opt) == kExitFailure);
    const auto j = nlohmann::json::parse(slurp(dir / "bad" / "manifest.json"));
    CHECK(j["diverged"] == true);
    CHECK(j["diverged_at"].get<double>() < 0.5);
}

TEST_CASE("verify rejects unknown suites") {
    CHECK_FALSE(known_suite("everything"));
    CHECK_THROWS_AS(verify_suite("everything", 1), PreconditionError);
    RunOptions opt;
    opt.out_dir = scratch("verify").string();
    CHECK(run_verify("everything", RunConfig{}, opt) == kExitUsage);
    CHECK(run_verify("algebra", RunConfig{}, opt) == kExitOk);
}
