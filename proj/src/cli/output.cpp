#include "tdccm/cli/output.hpp"

#include <cstdio>

namespace tdccm::cli {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : path_(path), width_(header.size()) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) {
        throw Error("cannot write '" + path.string() + "'");
    }
    row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) {
        throw Error("CSV row has " + std::to_string(cells.size()) + " cells, header has " +
                    std::to_string(width_));
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
        out_ << (i ? "," : "") << cells[i];
    }
    out_ << '\n';
    out_.flush();
}

bool all_pass(const std::vector<Check>& checks) {
    for (const auto& c : checks) {
        if (!c.pass) {
            return false;
        }
    }
    return true;
}

nlohmann::json to_json(const std::vector<Check>& checks) {
    auto arr = nlohmann::json::array();
    for (const auto& c : checks) {
        arr.push_back({{"name", c.name},
                       {"value", c.value},
                       {"tolerance", c.tolerance},
                       {"relation", c.below ? "<" : ">"},
                       {"pass", c.pass}});
    }
    return arr;
}

void write_manifest(const std::filesystem::path& dir, const Manifest& m) {
    std::filesystem::create_directories(dir);
    nlohmann::json j;
    j["tool"] = "tdccm";
    j["version"] = kVersion;
    j["command"] = m.command;
    auto cfg = nlohmann::json::object();
    for (const auto& [k, v] : to_key_values(m.config)) {
        cfg[k] = v;
    }
    j["config"] = cfg;
    j["wall_time_s"] = m.wall_time_s;
    j["files"] = m.files;
    j["checks"] = to_json(m.checks);
    j["all_checks_pass"] = all_pass(m.checks);
    j["diverged"] = m.diverged;
    if (m.diverged) {
        j["diverged_at"] = m.diverged_at;
    }
    j["results"] = m.results;
    std::ofstream out(dir / "manifest.json", std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write manifest in '" + dir.string() + "'");
    }
    out << j.dump(2) << '\n';
}

} // namespace tdccm::cli
