#include "doctest.h"

#include "calab/commands.hpp"
#include "calab/config.hpp"

#include <cmath>
#include <fstream>

using namespace calab;

namespace {

const std::string& file(const CommandOutput& out, const std::string& name)
{
    for (const auto& f : out.files)
        if (f.first == name) return f.second;
    throw std::runtime_error("missing output " + name);
}

Json sweep_config(Json vary)
{
    return {{"grid", {{"n", 2}, {"L", 24}}}, {"family", {{"body", {{"type", "random"}}}, {"vary", vary}}}};
}

} // namespace

TEST_CASE("checks and CSV cells")
{
    CHECK(within("a", 1.0, 1.0 + 1e-9, 1e-8).pass);
    CHECK(!within("a", 1.0, 2.0, 0.5).pass);
    CHECK(!within("a", NAN, 0.0, 1.0).pass);
    CHECK(at_most("b", 1.0, 0.5, 0.5).pass);
    CHECK(!at_least("c", 0.0, 1.0).pass);
    CHECK(all_pass({}));
    CHECK(to_json(within("x", INFINITY, 0.0, 1.0))["value"].is_null());
    CHECK(csv_cell("a,b") == "\"a,b\"");
    CHECK(csv_cell("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_number(NAN).empty());
    CHECK(std::stod(csv_number(0.1)) == 0.1);
}

TEST_CASE("body descriptors")
{
    auto b = parse_body({{"type", "ball"}, {"radius", 2.0}}, 3, 0);
    CHECK(b->value(Vec::Unit(3, 0)) == 2.0);
    auto e = parse_body({{"type", "ellipsoid"}, {"axes", {2, 1}}, {"transform", {{1, 0.5}, {0, 1}}}}, 2, 0);
    const auto g = parse_gauge({{"type", "ellipsoid"}, {"axes", {2, 1}}, {"transform", {{1, 0.5}, {0, 1}}}}, 2);
    // The gauge of a body is 1 on its boundary: the boundary point in direction u is grad h(u).
    for (double t : {0.1, 0.9, 2.0}) {
        Vec u(2);
        u << std::cos(t), std::sin(t);
        CHECK(g(e->jet(u).grad) == doctest::Approx(1.0).epsilon(1e-6));
    }
    CHECK(parse_body({{"type", "random"}, {"seed", 3}}, 2, 0)->value(Vec::Unit(2, 0)) ==
          parse_body({{"type", "random"}}, 2, 3)->value(Vec::Unit(2, 0)));
    CHECK(parse_body({{"type", "perturbed_ball"}, {"eps", 0.1}, {"terms", Json::array({Json::array({6, 1.0})})}}, 3, 0)->even());
    CHECK_THROWS_AS(parse_body({{"type", "blob"}}, 3, 0), ConfigError);
    CHECK_THROWS_AS(parse_body({{"type", "ellipsoid"}, {"axes", {2, 1}}}, 3, 0), ConfigError);
    CHECK_THROWS_AS(parse_body({{"type", "ball"}, {"radius", -1}}, 3, 0), ConfigError);
    CHECK_THROWS_AS(parse_body({{"type", "perturbed_ball"}, {"eps", 0.1}, {"terms", Json::array({Json::array({1, 1.0})})}}, 3, 0), ConfigError);
    CHECK_THROWS_AS(parse_body({{"type", "random"}, {"seed", -1}}, 3, 0), ConfigError);
    CHECK_THROWS_AS(parse_body({{"type", "ball"}, {"transform", {{1, 1}, {1, 1}}}}, 2, 0), ConfigError);
    CHECK_THROWS_AS(parse_grid({{"n", 4}}), ConfigError);
    CHECK_THROWS_AS(parse_grid({{"n", 3}, {"circle_nodes", 64}}), ConfigError);
    CHECK(parse_grid(Json(), {2, 10, 0}).L == 10);
}

TEST_CASE("spectrum report")
{
    const Json cfg = {{"body", {{"type", "ball"}}}, {"grid", {{"n", 3}, {"L", 20}}}};
    auto out = run_command("spectrum", cfg, {});
    CHECK(out.pass);
    REQUIRE(out.files.front().first == "report.json");
    const Json r = Json::parse(file(out, "report.json"));
    CHECK(r["schema"] == report_schema);
    CHECK(r["config"]["seed"] == 0);
    CHECK(std::abs(r["results"]["lambda1"].get<double>() - 2.0) <= 1e-3);
    CHECK(r["results"]["lambda1_multiplicity"] == 3);
    bool all = true;
    for (const auto& c : r["checks"]) all = all && c["pass"].get<bool>();
    CHECK(r["pass"].get<bool>() == all);
    CHECK(file(out, "eigenvalues.csv").rfind("index,eigenvalue,residual\n", 0) == 0);
    // Thread count never changes the report.
    RunOptions t3;
    t3.threads = 3;
    CHECK(file(run_command("spectrum", cfg, t3), "report.json") == file(out, "report.json"));
}

TEST_CASE("configuration errors throw before any output")
{
    CHECK_THROWS_AS(run_command("spectrum", Json::array(), {}), ConfigError);
    CHECK_THROWS_AS(run_command("nonsense", Json::object(), {}), ConfigError);
    CHECK_THROWS_AS(run_command("spectrum", {{"command", "pinch"}, {"body", {{"type", "ball"}}}}, {}), ConfigError);
    CHECK_THROWS_AS(run_command("spectrum", Json::object(), {}), ConfigError);
    CHECK_THROWS_AS(run_command("spectrum", {{"body", {{"type", "ball"}}}, {"k", "many"}}, {}), ConfigError);
    CHECK_THROWS_AS(run_command("isomorphic", {{"body", {{"type", "ball"}}}, {"alpha", 1.0}}, {}), ConfigError);
    CHECK_THROWS_AS(run_command("solve", {{"target", {{"density_file", "does_not_exist.csv"}}}}, {}), ConfigError);
    CHECK_THROWS_AS(run_command("solve", {{"p", 1.5}, {"target", {{"body", {{"type", "ball"}}}}}}, {}), ConfigError);
    CHECK_THROWS_AS(run_command("verify-all", {{"criteria", {99}}}, {}), ConfigError);
    CHECK_THROWS_AS(run_command("sweep", sweep_config({{"pointer", "/seed"}}), {}), ConfigError);
}

TEST_CASE("numerical failure keeps the report")
{
    const Json cfg = {{"body", {{"type", "perturbed_ball"}, {"eps", 0.5}, {"terms", Json::array({Json::array({3, 2.0})})}}}, {"grid", {{"n", 2}, {"L", 16}}}};
    auto out = run_command("spectrum", cfg, {});
    CHECK(!out.pass);
    REQUIRE(out.files.size() == 1);
    const Json r = Json::parse(out.files.front().second);
    CHECK(r["error"].is_string());
    CHECK(!r["pass"].get<bool>());
}

TEST_CASE("sweep rows")
{
    auto empty = run_command("sweep", sweep_config({{"pointer", "/seed"}, {"values", Json::array()}}), {});
    CHECK(empty.pass);
    CHECK(file(empty, "sweep.csv") == std::string(sweep_csv_header) + "\n");

    RunOptions two;
    two.threads = 2;
    auto dup = run_command("sweep", sweep_config({{"pointer", "/seed"}, {"values", {5, 5, 6, 5}}}), two);
    CHECK(dup.pass);
    const std::string csv = file(dup, "sweep.csv");
    std::vector<std::string> lines;
    for (std::size_t a = 0, b; (b = csv.find('\n', a)) != std::string::npos; a = b + 1) lines.push_back(csv.substr(a, b - a));
    REQUIRE(lines.size() == 5);
    CHECK(lines[1] == lines[2]);
    CHECK(lines[1] == lines[4]);
    CHECK(lines[1] != lines[3]);
    CHECK(file(run_command("sweep", sweep_config({{"pointer", "/seed"}, {"values", {5, 5, 6, 5}}}), {}), "sweep.csv") == csv);

    // A row that fails is recorded and the sweep continues.
    Json cfg = {{"grid", {{"n", 2}, {"L", 24}}},
                {"family", {{"body", {{"type", "perturbed_ball"}, {"terms", Json::array({Json::array({3, 2.0})})}, {"eps", 0.0}}},
                            {"vary", {{"pointer", "/eps"}, {"values", {0.01, 0.9}}}}}}};
    auto mixed = run_command("sweep", cfg, {});
    CHECK(!mixed.pass);
    const Json r = Json::parse(file(mixed, "report.json"));
    CHECK(r["results"]["errors"] == 1);
    CHECK(r["results"]["rows"][0]["error"] == "");
    CHECK(r["results"]["rows"][1]["error"] != "");
}

TEST_CASE("solve from a density file")
{
    const std::string path = "calab_test_density.csv";
    {
        auto grid = build_grid(2, 32);
        std::ofstream f(path);
        f << "node,value\n";
        for (std::size_t k = 0; k < grid->size(); ++k) f << k << ",2.5\n";
    }
    const Json cfg = {{"grid", {{"n", 2}, {"L", 32}}}, {"degree", 16}, {"p", 0}, {"target", {{"density_file", path}}}};
    auto out = run_command("solve", cfg, {});
    CHECK(out.pass);
    const Json r = Json::parse(file(out, "report.json"));
    CHECK(r["results"]["converged"].get<bool>());
    CHECK(r["results"]["el_residual"].get<double>() <= 1e-4);
    CHECK(file(out, "h.csv").rfind("node,x,y,h\n", 0) == 0);
    {
        std::ofstream f(path);
        f << "node,value\n0,1\n";
    }
    CHECK_THROWS_AS(run_command("solve", cfg, {}), ConfigError);
    std::remove(path.c_str());
}
