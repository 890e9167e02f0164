// runs.hpp: experiment runners behind the CLI subcommands, plus the NHIP
// certification and verification suites they share with the tests.

#pragma once

#include "tdccm/cli/config.hpp"
#include "tdccm/cli/output.hpp"
#include "tdccm/dynamics.hpp"
#include "tdccm/nhip.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace tdccm::cli {

// Command-line overrides applied on top of the configuration.
struct RunOptions {
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    bool oracle_ed = false;
    int sweep_parallel = 1;
};

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

int run_stationary(RunConfig cfg, const RunOptions& opt);
int run_evolve(RunConfig cfg, const RunOptions& opt);
int run_spectrum(RunConfig cfg, const RunOptions& opt);
int run_nhip(RunConfig cfg, const RunOptions& opt);
int run_verify(const std::string& suite, RunConfig cfg, const RunOptions& opt);

// Runs fn(0..n-1) on up to `workers` threads. Each index writes only its own
// result slot, so the merged output does not depend on scheduling.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

// Initial CCM state for an evolve run on `set`.
nccm::CCMState initial_state(const RunConfig& cfg, const nccm::ConfigSetPtr& set);

struct NhipRow {
    std::string family;
    double t = 0.0;
    double zeta = 0.0;             // ||Q^dag Theta - Theta Q|| for the integrated Q
    double ketket_norm_dev = 0.0;  // |<<psi|psi> - <<psi|psi>(t0)|
    double initial_norm_dev = 0.0; // |{{psi|psi}} - <<psi|psi>|
    double expect_dev_sz = 0.0;
    double expect_dev_n = 0.0;
    double dressed_dev = 0.0;      // integrated vs directly dressed observable
    double theta_mismatch = 0.0;
    double xi_defect = 0.0;        // ||Xi^dag - Xi||
    double quasi_herm_h = 0.0;     // ||H^dag Theta - Theta H||
    double consistency = 0.0;      // max of ||Omega psi - psi}}||, ||Theta psi - psi>>||
    double g_defect = 0.0;         // ||G^dag Theta - Theta G||, reported only
};

struct NhipReport {
    std::vector<NhipRow> rows;
    std::vector<Check> checks;
};

// family: "analytic" or "nccm".
NhipReport certify_nhip(const RunConfig& cfg, const std::string& family);
// Degenerate picture limits and the two-way Xi-Hermiticity relation.
std::vector<Check> picture_limit_checks(const RunConfig& cfg);

[[nodiscard]] bool known_suite(const std::string& suite);
// Throws PreconditionError for an unknown suite.
std::vector<Check> verify_suite(const std::string& suite, std::uint64_t seed);

} // namespace tdccm::cli
