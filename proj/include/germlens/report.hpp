#pragma once

#include "germlens/jsonio.hpp"

#include <charconv>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace germlens {

enum class Verdict { Pass, Fail, Abstain };

inline const char* to_string(Verdict v)
{
    switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Abstain: return "abstain";
    }
    return "?";
}

/// 0 pass, 2 fail, 3 abstain (1 is reserved for usage and schema errors).
inline int exit_code(Verdict v)
{
    switch (v) {
    case Verdict::Pass: return 0;
    case Verdict::Fail: return 2;
    case Verdict::Abstain: return 3;
    }
    return 1;
}

struct CsvTable {
    std::string name;  // file stem suffix; empty for the main table
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    template <class... Cells>
    void add(const Cells&... cells)
    {
        rows.push_back({cell(cells)...});
    }
    void add_row(std::vector<std::string> r) { rows.push_back(std::move(r)); }

    static std::string cell(const std::string& s) { return s; }
    static std::string cell(const char* s) { return s; }
    static std::string cell(bool b) { return b ? "true" : "false"; }
    template <class T>
        requires std::is_arithmetic_v<T>
    static std::string cell(T v)
    {
        if constexpr (std::is_floating_point_v<T>) {
            if (std::isnan(v)) return "nan";
            if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
        }
        char buf[64];
        const auto r = std::to_chars(buf, buf + sizeof buf, v);
        return std::string(buf, r.ptr);
    }
};

/// RFC 4180 field quoting.
inline std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

inline std::string to_csv(const CsvTable& t)
{
    std::string out;
    auto line = [&](const std::vector<std::string>& r) {
        for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + csv_field(r[i]);
        out += "\r\n";
    };
    line(t.header);
    for (const auto& r : t.rows) line(r);
    return out;
}

struct Report {
    std::string command;
    json config;                         // the exact config that produced the report
    std::vector<std::string> operations; // operations run, in order
    json result = json::object();
    Verdict verdict = Verdict::Pass;
    std::vector<std::string> explanation;
    std::vector<CsvTable> tables;
};

inline std::string utc_timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Everything except the timestamp, which lives in its own top-level field.
inline json report_json(const Report& r)
{
    return {{"command", r.command},     {"verdict", to_string(r.verdict)},     {"exit_code", exit_code(r.verdict)},
            {"operations", r.operations}, {"explanation", r.explanation}, {"config", r.config},
            {"result", r.result}};
}

inline std::filesystem::path csv_path(const std::filesystem::path& dir, const Report& r, const CsvTable& t)
{
    return dir / (r.command + (t.name.empty() ? "" : "_" + t.name) + ".csv");
}

/// Writes <dir>/<command>.json and one CSV per table; returns the JSON path.
inline std::filesystem::path write_report(const Report& r, const std::filesystem::path& dir, bool timestamp = true)
{
    std::filesystem::create_directories(dir);
    json j = report_json(r);
    j["timestamp"] = timestamp ? json(utc_timestamp()) : json(nullptr);
    const auto path = dir / (r.command + ".json");
    std::ofstream(path, std::ios::binary) << j.dump(2) << "\n";
    for (const auto& t : r.tables) std::ofstream(csv_path(dir, r, t), std::ios::binary) << to_csv(t);
    return path;
}

}  // namespace germlens
