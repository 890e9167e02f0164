#include "tdccm/cli/config.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace tdccm::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return "";
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double to_double(const std::string& v) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(x)) {
        throw ConfigError("expected a finite number, got '" + v + "'");
    }
    return x;
}

long long to_integer(const std::string& v) {
    char* end = nullptr;
    const long long x = std::strtoll(v.c_str(), &end, 10);
    if (v.empty() || end != v.c_str() + v.size()) {
        throw ConfigError("expected an integer, got '" + v + "'");
    }
    return x;
}

struct Field {
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

Field real(double RunConfig::*m) {
    return {[m](const RunConfig& c) { return fmt_double(c.*m); },
            [m](RunConfig& c, const std::string& v) { c.*m = to_double(v); }};
}

template <class Get, class Set>
Field custom(Get g, Set s) {
    return {g, s};
}

const std::map<std::string, Field>& fields() {
    static const std::map<std::string, Field> table = [] {
        std::map<std::string, Field> t;
        t["model.omega"] = custom([](const RunConfig& c) { return fmt_double(c.model.omega); },
                                  [](RunConfig& c, const std::string& v) { c.model.omega = to_double(v); });
        t["model.omega0"] = custom([](const RunConfig& c) { return fmt_double(c.model.omega0); },
                                   [](RunConfig& c, const std::string& v) { c.model.omega0 = to_double(v); });
        t["model.g"] = custom([](const RunConfig& c) { return fmt_double(c.model.g); },
                              [](RunConfig& c, const std::string& v) { c.model.g = to_double(v); });
        t["sweep.g_start"] = real(&RunConfig::g_start);
        t["sweep.g_stop"] = real(&RunConfig::g_stop);
        t["sweep.g_step"] = real(&RunConfig::g_step);
        t["space.n_b"] = custom([](const RunConfig& c) { return std::to_string(c.n_b); },
                                [](RunConfig& c, const std::string& v) { c.n_b = int(to_integer(v)); });
        t["ccm.method"] = custom([](const RunConfig& c) { return c.method; },
                                 [](RunConfig& c, const std::string& v) { c.method = v; });
        t["ccm.sub_n"] = custom(
            [](const RunConfig& c) {
                std::string s;
                for (std::size_t i = 0; i < c.sub_n.size(); ++i) {
                    s += (i ? "," : "") + std::to_string(c.sub_n[i]);
                }
                return s;
            },
            [](RunConfig& c, const std::string& v) {
                c.sub_n.clear();
                std::stringstream ss(v);
                std::string item;
                while (std::getline(ss, item, ',')) {
                    c.sub_n.push_back(int(to_integer(trim(item))));
                }
            });
        t["integrator.scheme"] = custom(
            [](const RunConfig& c) { return std::string(c.integrator.scheme == ode::Scheme::rk4 ? "rk4" : "rk45"); },
            [](RunConfig& c, const std::string& v) {
                if (v == "rk4") {
                    c.integrator.scheme = ode::Scheme::rk4;
                } else if (v == "rk45") {
                    c.integrator.scheme = ode::Scheme::rk45;
                } else {
                    throw ConfigError("expected rk4 or rk45, got '" + v + "'");
                }
            });
        auto integ = [&t](const std::string& key, double ode::IntegratorConfig::*m) {
            t[key] = custom([m](const RunConfig& c) { return fmt_double(c.integrator.*m); },
                            [m](RunConfig& c, const std::string& v) { c.integrator.*m = to_double(v); });
        };
        integ("integrator.dt", &ode::IntegratorConfig::dt);
        integ("integrator.abs_tol", &ode::IntegratorConfig::abs_tol);
        integ("integrator.rel_tol", &ode::IntegratorConfig::rel_tol);
        integ("integrator.t0", &ode::IntegratorConfig::t0);
        integ("integrator.t1", &ode::IntegratorConfig::t1);
        integ("integrator.divergence_cap", &ode::IntegratorConfig::divergence_cap);
        t["integrator.output_every"] = custom(
            [](const RunConfig& c) { return std::to_string(c.integrator.output_every); },
            [](RunConfig& c, const std::string& v) {
                c.integrator.output_every = int(to_integer(v));
            });
        t["initial.kind"] = custom([](const RunConfig& c) { return c.initial_kind; },
                                   [](RunConfig& c, const std::string& v) { c.initial_kind = v; });
        t["initial.alpha_re"] = real(&RunConfig::alpha_re);
        t["initial.alpha_im"] = real(&RunConfig::alpha_im);
        t["initial.file"] = custom([](const RunConfig& c) { return c.initial_file; },
                                   [](RunConfig& c, const std::string& v) { c.initial_file = v; });
        t["output.dir"] = custom([](const RunConfig& c) { return c.out_dir; },
                                 [](RunConfig& c, const std::string& v) { c.out_dir = v; });
        t["run.seed"] = custom([](const RunConfig& c) { return std::to_string(c.seed); },
                               [](RunConfig& c, const std::string& v) {
                                   const long long s = to_integer(v);
                                   if (s < 0) {
                                       throw ConfigError("must be non-negative");
                                   }
                                   c.seed = std::uint64_t(s);
                               });
        t["nhip.family"] = custom([](const RunConfig& c) { return c.nhip_family; },
                                  [](RunConfig& c, const std::string& v) { c.nhip_family = v; });
        t["nhip.n_b"] = custom([](const RunConfig& c) { return std::to_string(c.nhip_n_b); },
                               [](RunConfig& c, const std::string& v) { c.nhip_n_b = int(to_integer(v)); });
        t["nhip.sub_n"] = custom([](const RunConfig& c) { return std::to_string(c.nhip_sub_n); },
                                 [](RunConfig& c, const std::string& v) { c.nhip_sub_n = int(to_integer(v)); });
        t["nhip.t1"] = real(&RunConfig::nhip_t1);
        t["nhip.dt"] = real(&RunConfig::nhip_dt);
        t["nhip.points"] = custom([](const RunConfig& c) { return std::to_string(c.nhip_points); },
                                  [](RunConfig& c, const std::string& v) { c.nhip_points = int(to_integer(v)); });
        t["nhip.alpha_rate"] = real(&RunConfig::nhip_alpha_rate);
        t["nhip.beta_amp"] = real(&RunConfig::nhip_beta_amp);
        t["nhip.beta_freq"] = real(&RunConfig::nhip_beta_freq);
        return t;
    }();
    return table;
}

void apply(RunConfig& cfg, const std::string& key, const std::string& value, std::set<std::string>& seen) {
    const auto& table = fields();
    const auto it = table.find(key);
    if (it == table.end()) {
        throw ConfigError("unknown configuration key '" + key + "'");
    }
    if (!seen.insert(key).second) {
        throw ConfigError("duplicate configuration key '" + key + "'");
    }
    try {
        it->second.set(cfg, value);
    } catch (const ConfigError& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

} // namespace

void RunConfig::validate() const {
    auto fail = [](const std::string& m) { throw ConfigError(m); };
    if (!(model.omega > 0.0)) {
        fail("model.omega must be > 0");
    }
    if (model.g < 0.0) {
        fail("model.g must be >= 0");
    }
    if (!(g_step > 0.0)) {
        fail("sweep.g_step must be > 0");
    }
    if (g_start < 0.0 || g_stop < g_start) {
        fail("sweep needs 0 <= g_start <= g_stop");
    }
    if (n_b < 1) {
        fail("space.n_b must be >= 1");
    }
    if (method != "nccm" && method != "eccm") {
        fail("ccm.method must be nccm or eccm");
    }
    if (sub_n.empty()) {
        fail("ccm.sub_n must list at least one level");
    }
    for (int n : sub_n) {
        if (n < 1 || n > n_b) {
            fail("ccm.sub_n entry " + std::to_string(n) + " outside [1, space.n_b]");
        }
    }
    try {
        integrator.validate();
    } catch (const PreconditionError& e) {
        fail(std::string("integrator: ") + e.what());
    }
    if (initial_kind != "reference" && initial_kind != "coherent" && initial_kind != "ed-ground" &&
        initial_kind != "amplitude-file") {
        fail("initial.kind must be reference, coherent, ed-ground or amplitude-file");
    }
    if (initial_kind == "amplitude-file" && initial_file.empty()) {
        fail("initial.file is required for initial.kind = amplitude-file");
    }
    if (out_dir.empty()) {
        fail("output.dir must not be empty");
    }
    if (nhip_family != "analytic" && nhip_family != "nccm" && nhip_family != "both") {
        fail("nhip.family must be analytic, nccm or both");
    }
    if (nhip_n_b < 1 || nhip_sub_n < 1 || nhip_sub_n > nhip_n_b) {
        fail("nhip needs n_b >= 1 and 1 <= sub_n <= n_b");
    }
    if (!(nhip_t1 > 0.0) || !(nhip_dt > 0.0) || nhip_points < 2) {
        fail("nhip needs t1 > 0, dt > 0 and points >= 2");
    }
}

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        apply(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), seen);
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    std::stringstream buf;
    buf << f.rdbuf();
    const std::string text = buf.str();
    if (trim(text).rfind('{', 0) != 0) {
        return parse_config(text);
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("manifest '" + path + "' is not valid JSON: " + e.what());
    }
    if (!j.contains("config") || !j["config"].is_object()) {
        throw ConfigError("manifest '" + path + "' has no config object");
    }
    RunConfig cfg;
    std::set<std::string> seen;
    for (const auto& [key, value] : j["config"].items()) {
        if (!value.is_string()) {
            throw ConfigError("manifest config value for '" + key + "' must be a string");
        }
        apply(cfg, key, value.get<std::string>(), seen);
    }
    return cfg;
}

std::vector<std::pair<std::string, std::string>> to_key_values(const RunConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [key, field] : fields()) {
        out.emplace_back(key, field.get(cfg));
    }
    return out;
}

std::string to_text(const RunConfig& cfg) {
    std::string s;
    for (const auto& [k, v] : to_key_values(cfg)) {
        s += k + " = " + v + "\n";
    }
    return s;
}

} // namespace tdccm::cli
