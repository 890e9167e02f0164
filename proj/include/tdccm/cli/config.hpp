// config.hpp: run configuration.
//
// Flat UTF-8 text, one `section.key = value` per line, `#` starts a comment.
// Unknown keys, duplicate keys and malformed values are hard errors. A run
// manifest (JSON) is also accepted; its "config" object is read back with the
// same key rules, so any run can be repeated from its manifest.

#pragma once

#include "tdccm/hilbert.hpp"
#include "tdccm/ode.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace tdccm::cli {

struct RunConfig {
    hilbert::RabiParams model{1.0, 1.0, 0.3};

    double g_start = 0.0;
    double g_stop = 0.8;
    double g_step = 0.005;

    int n_b = 12;
    std::string method = "nccm"; // nccm | eccm
    std::vector<int> sub_n{4};

    ode::IntegratorConfig integrator{ode::Scheme::rk4, 1e-3, 1e-9, 1e-9, 0.0, 10.0, 10, 1e6};

    std::string initial_kind = "reference"; // reference | coherent | ed-ground | amplitude-file
    double alpha_re = 0.0;
    double alpha_im = 0.0;
    std::string initial_file;

    std::string out_dir = "out";
    std::uint64_t seed = 42;

    std::string nhip_family = "both"; // analytic | nccm | both
    int nhip_n_b = 6;
    int nhip_sub_n = 3;                // SUB-N level of the NCCM-generated map
    double nhip_t1 = 5.0;
    double nhip_dt = 1e-3;
    int nhip_points = 21;
    double nhip_alpha_rate = 0.1;
    double nhip_beta_amp = 0.2;
    double nhip_beta_freq = 1.0;

    // Throws ConfigError naming the offending key.
    void validate() const;
};

// Applies `key = value` lines on top of the defaults.
RunConfig parse_config(const std::string& text);
// Reads a key-value file or a JSON manifest.
RunConfig load_config(const std::string& path);
// Canonical key/value listing (round-trips through parse_config).
std::vector<std::pair<std::string, std::string>> to_key_values(const RunConfig& cfg);
std::string to_text(const RunConfig& cfg);

} // namespace tdccm::cli
