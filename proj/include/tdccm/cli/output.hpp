// output.hpp: CSV and JSON manifest writers.
//
// Numbers are written with 17 significant digits; complex values are split
// into paired _re/_im columns by the callers.

#pragma once

#include "tdccm/cli/config.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace tdccm::cli {

inline constexpr const char* kVersion = "0.1.0";

std::string num(double v);
inline std::string boolean(bool b) { return b ? "true" : "false"; }

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
    void row(const std::vector<std::string>& cells);
    [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
    std::size_t width_;
};

// One named numeric check: "below" passes when value < tolerance, "above"
// when value > tolerance.
struct Check {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool below = true;
    bool pass = false;

    static Check less(std::string name, double value, double tol) {
        return {std::move(name), value, tol, true, value < tol};
    }
    static Check greater(std::string name, double value, double tol) {
        return {std::move(name), value, tol, false, value > tol};
    }
};

bool all_pass(const std::vector<Check>& checks);
nlohmann::json to_json(const std::vector<Check>& checks);

struct Manifest {
    std::string command;
    RunConfig config;
    double wall_time_s = 0.0;
    std::vector<std::string> files;
    std::vector<Check> checks;
    bool diverged = false;
    double diverged_at = 0.0;
    nlohmann::json results = nlohmann::json::object();
};

// Writes <dir>/manifest.json.
void write_manifest(const std::filesystem::path& dir, const Manifest& m);

} // namespace tdccm::cli
