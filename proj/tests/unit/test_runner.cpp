#include <catch_amalgamated.hpp>

#include "germlens/runner.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace germlens;

namespace {

std::string error_path(const json& cfg)
{
    try {
        run(resolve_config(cfg));
    } catch (const ConfigError& e) {
        return e.path();
    }
    return "<no error>";
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("schema errors carry a JSON pointer")
{
    CHECK(error_path({{"subcommand", "dirset"}, {"germ", "V"}, {"bogus", 1}}) == "/bogus");
    CHECK(error_path({{"subcommand", "dirset"}}) == "/germ");
    CHECK(error_path({{"subcommand", "nope"}, {"germ", "V"}}) == "/subcommand");
    CHECK(error_path({{"subcommand", "dirset"}, {"fixture", "nope"}}) == "/fixture");
    CHECK(error_path({{"subcommand", "dirset"}, {"germ", "V"}, {"params", {{"per_shell", 2}}}}) == "/params/per_shell");
    CHECK(error_path({{"subcommand", "dirset"}, {"germ", "V"}, {"params", {{"colour", 2}}}}) == "/params/colour");
    CHECK(error_path({{"subcommand", "vol"}, {"germ", "z_axis"}, {"params", {{"eps", {0.01, 0.1}}}}}) == "/params/eps/1");
    CHECK(error_path({{"subcommand", "sandwich"}, {"germ", "V"}, {"map", "cube_z"}}) == "/map");
    CHECK(error_path({{"subcommand", "dirset"}, {"germ", {{"type", "ray"}, {"direction", {0, 0}}}}}).rfind("/germ", 0) == 0);
    CHECK(error_path({{"subcommand", "vol"}, {"germ", "z_axis"}, {"gauge", {{"C", -1}, {"alpha", 1}}}}).rfind("/gauge", 0) == 0);
    CHECK(error_path({{"subcommand", "puiseux"}, {"params", {{"cells", {{{"a1", "0"}, {"psi", "x"}, {"b1", "1"}, {"phi", "sin(x)"}}}}}}})
              .rfind("/params/cells/0", 0) == 0);
    CHECK_THROWS_AS(resolve_config(json::array()), ConfigError);
}

TEST_CASE("exit codes")
{
    CHECK(exit_code(Verdict::Pass) == 0);
    CHECK(exit_code(Verdict::Fail) == 2);
    CHECK(exit_code(Verdict::Abstain) == 3);
}

TEST_CASE("csv quoting")
{
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_field("two\nlines") == "\"two\nlines\"");
    CsvTable t{"", {"name", "value"}, {}};
    t.add("x,y", 0.5);
    t.add("z", std::numeric_limits<double>::infinity());
    CHECK(to_csv(t) == "name,value\r\n\"x,y\",0.5\r\nz,inf\r\n");
}

TEST_CASE("reports keep the timestamp apart")
{
    const auto dir = std::filesystem::temp_directory_path() / "germlens_test_runner";
    std::filesystem::remove_all(dir);
    const json cfg = resolve_config({{"subcommand", "dirset"}, {"germ", "cusp"}, {"seed", 5}});
    const Report r = run(cfg);
    CHECK_FALSE(report_json(r).contains("timestamp"));
    CHECK(report_json(r)["config"] == cfg);
    const auto path = write_report(r, dir, false);
    const json a = json::parse(slurp(path));
    CHECK(a["timestamp"].is_null());
    CHECK(a["exit_code"] == 0);
    write_report(r, dir, true);
    const json b = json::parse(slurp(path));
    CHECK(b["timestamp"].is_string());
    json bb = b;
    bb.erase("timestamp");
    json aa = a;
    aa.erase("timestamp");
    CHECK(aa == bb);
    CHECK(std::filesystem::exists(dir / "dirset.csv"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("inline germs match the catalog")
{
    const json inline_cusp = {{"type", "semialgebraic"}, {"name", "c"}, {"n", 2}, {"equations", {{{1, 0, 2}, {-1, 3, 0}}}}};
    const Report a = run(resolve_config({{"subcommand", "dirset"}, {"germ", inline_cusp}, {"params", {{"expect_dim", 0}}}}));
    CHECK(a.verdict == Verdict::Pass);
    const json curve = {{"type", "parametric"}, {"n", 2}, {"branches", json::array({json::array({"s", "s^3"})})}};
    const Report b = run(resolve_config({{"subcommand", "dirset"}, {"germ", curve}, {"params", {{"expect_dim", 0}}}}));
    CHECK(b.verdict == Verdict::Pass);
}

TEST_CASE("invariant verdicts on the example fixtures")
{
    const Report id = run(resolve_config({{"subcommand", "invariant"}, {"fixture", "example11"}, {"map", "identity"}}));
    CHECK(id.verdict == Verdict::Pass);
    const Report osc = run(resolve_config({{"subcommand", "invariant"}, {"fixture", "example12"}}));
    CHECK(exit_code(osc.verdict) == 2);
    CHECK(osc.result["hypothesis_flags"]["image_definable"] == false);
    const Report seq = run(resolve_config({{"subcommand", "invariant"}, {"fixture", "example21"}}));
    CHECK(seq.verdict == Verdict::Abstain);
}

TEST_CASE("seed override changes sampled reports only through the seed")
{
    const json base = {{"subcommand", "dirset"}, {"germ", "V"}};
    RunOptions o;
    o.seed = 9;
    const json cfg = resolve_config(base, o);
    CHECK(cfg["seed"] == 9);
    CHECK(report_json(run(cfg)) == report_json(run(resolve_config(base, o))));
}
