#include "germlens/runner.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace germlens;

namespace {

void list_catalog()
{
    std::cout << "subcommands:";
    for (const auto& s : subcommands()) std::cout << ' ' << s;
    std::cout << "\nfixtures:";
    for (const auto& s : fixture_names()) std::cout << ' ' << s;
    std::cout << "\ngerms:";
    for (const auto& s : germ_names()) std::cout << ' ' << s;
    std::cout << "\nmaps:";
    for (const auto& s : map_names()) std::cout << ' ' << s;
    std::cout << '\n';
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"germ-lens experiment runner"};
    std::string config_path, out_dir, fixture_name, command;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    bool list = false, no_timestamp = false;
    app.add_option("subcommand", command, "overrides the config's subcommand");
    app.add_option("--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
    auto* seed_opt = app.add_option("--seed", seed, "RNG seed (overrides the config)");
    app.add_option("--out", out_dir, "output directory (default: config 'out' or ./out)");
    app.add_option("--threads", threads, "worker cap, 0 = hardware concurrency");
    auto* fixture_opt = app.add_option("--fixture", fixture_name, "catalog fixture supplying germs and map");
    app.add_flag("--list", list, "list subcommands, fixtures, germs and maps");
    app.add_flag("--no-timestamp", no_timestamp, "write null into the report's timestamp field");
    CLI11_PARSE(app, argc, argv);

    if (list) {
        list_catalog();
        return 0;
    }
    thread_cap() = threads;

    json cfg = json::object();
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        try {
            cfg = json::parse(in);
        } catch (const json::parse_error& e) {
            std::cerr << config_path << ": " << e.what() << '\n';
            return 1;
        }
    }
    if (!command.empty() && cfg.is_object()) cfg["subcommand"] = command;
    RunOptions opts;
    if (*seed_opt) opts.seed = seed;
    if (*fixture_opt) opts.fixture = fixture_name;

    try {
        const Report rep = run(cfg, opts);
        std::string dir = out_dir;
        if (dir.empty()) dir = cfg.is_object() && cfg.value("out", json()).is_string() ? cfg["out"].get<std::string>() : "out";
        const auto path = write_report(rep, dir, !no_timestamp);
        std::cout << rep.command << ": " << to_string(rep.verdict) << "  (" << path.string() << ")\n";
        for (const auto& e : rep.explanation) std::cout << "  " << e << '\n';
        return exit_code(rep.verdict);
    } catch (const ConfigError& e) {
        std::cerr << "config error at " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return 1;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "cannot write output: " << e.what() << '\n';
        return 1;
    }
}
