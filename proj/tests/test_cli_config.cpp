#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sgp/config.hpp"
#include "sgp/csv.hpp"

using namespace sgp;
using Catch::Approx;

TEST_CASE("config parses sections, comments and whitespace") {
    const std::string text =
        "# experiment\n"
        "[measure]\n"
        "kind = aifs   ; inline comment\n"
        "rho = 0.25\n"
        "\n"
        "[grid]\n"
        "points = 41\n";
    const auto c = Config::parse(text);
    REQUIRE(c.get_string("measure.kind", "") == "aifs");
    REQUIRE(c.get_double("measure.rho", 0.0) == 0.25);
    REQUIRE(c.get_int("grid.points", 0) == 41);
    REQUIRE(c.get_double("missing.key", 7.5) == 7.5);
}

TEST_CASE("config rejects malformed input") {
    REQUIRE_THROWS_AS(Config::parse("[measure\nkind = aifs\n"), std::invalid_argument);
    REQUIRE_THROWS_AS(Config::parse("[m]\nnovalue\n"), std::invalid_argument);
    REQUIRE_THROWS_AS(Config::parse("[m]\n= 3\n"), std::invalid_argument);
    REQUIRE_THROWS_AS(Config::parse("[m]\nx = abc\n").get_double("m.x", 0.0),
                      std::invalid_argument);
}

TEST_CASE("experiment config round-trips losslessly") {
    ExperimentConfig e;
    e.measure_kind = "aifs";
    e.rho = 1.0 / 3.0; // not exactly representable in decimal
    e.m = 3;
    e.count = 96;
    e.budget.abs_tol = 2.5e-11;
    e.t_min = -0.125;
    e.t_max = 2.7182818284590452;
    e.grid_points = 333;
    e.paths = 123;
    e.seed = 0xDEADBEEFCAFEF00DULL;
    e.deficit_threshold = 3e-3;
    e.out_dir = "results";

    const std::string text = e.to_config().save();
    const auto parsed = ExperimentConfig::from_config(Config::parse(text));

    REQUIRE(parsed.measure_kind == e.measure_kind);
    REQUIRE(parsed.rho == e.rho); // bitwise, via shortest-exact formatting
    REQUIRE(parsed.m == e.m);
    REQUIRE(parsed.count == e.count);
    REQUIRE(parsed.budget.abs_tol == e.budget.abs_tol);
    REQUIRE(parsed.t_min == e.t_min);
    REQUIRE(parsed.t_max == e.t_max);
    REQUIRE(parsed.grid_points == e.grid_points);
    REQUIRE(parsed.paths == e.paths);
    REQUIRE(parsed.seed == e.seed);
    REQUIRE(parsed.deficit_threshold == e.deficit_threshold);
    REQUIRE(parsed.out_dir == e.out_dir);

    // a second round-trip is textually stable
    REQUIRE(parsed.to_config().save() == text);
}

TEST_CASE("atomic measure serializes its point list") {
    ExperimentConfig e;
    e.measure_kind = "atomic";
    e.atom_points = {-2.0, -0.5, 0.5, 2.0};
    e.atom_weights = {0.25, 0.25, 0.25, 0.25};
    const auto parsed =
        ExperimentConfig::from_config(Config::parse(e.to_config().save()));
    REQUIRE(parsed.atom_points == e.atom_points);
    REQUIRE(parsed.atom_weights == e.atom_weights);
    const auto m = parsed.make_measure();
    REQUIRE(m.kind() == MeasureKind::Atomic);
    REQUIRE(m.is_even());
}

TEST_CASE("config validation catches bad values") {
    Config c;
    c.set("measure.kind", "fractal");
    REQUIRE_THROWS_AS(ExperimentConfig::from_config(c), std::invalid_argument);
    Config c2;
    c2.set("grid.t_min", 2.0);
    c2.set("grid.t_max", 1.0);
    REQUIRE_THROWS_AS(ExperimentConfig::from_config(c2), std::invalid_argument);
    Config c3;
    c3.set("budget.abs_tol", -1.0);
    REQUIRE_THROWS_AS(ExperimentConfig::from_config(c3), std::invalid_argument);
}

TEST_CASE("grid construction hits the endpoints exactly") {
    ExperimentConfig e;
    e.t_min = 0.0;
    e.t_max = 1.0;
    e.grid_points = 11;
    const auto g = e.make_grid();
    REQUIRE(g.size() == 11);
    REQUIRE(g.front() == 0.0);
    REQUIRE(g.back() == 1.0);
    REQUIRE(g[5] == Approx(0.5).margin(1e-15));
}

TEST_CASE("csv output uses dot decimals and exact round-trip doubles") {
    const std::string path = "test_csv_out.csv";
    {
        CsvWriter w(path);
        w.header({"t", "sigma_hat", "err"});
        w.row({0.1, 0.9668947198055227, 1e-12});
        w.row({2.0, -0.25, 0.0});
    }
    std::ifstream in(path);
    std::string header, r1, r2;
    std::getline(in, header);
    std::getline(in, r1);
    std::getline(in, r2);
    REQUIRE(header == "t,sigma_hat,err");
    REQUIRE(r1 == "0.1,0.9668947198055227,1e-12");
    REQUIRE(r2 == "2,-0.25,0");
    std::remove(path.c_str());

    // shortest representations parse back to the same bits
    for (double v : {0.1, 1.0 / 3.0, 6.02e23, -1.7e-300, 3.141592653589793}) {
        REQUIRE(std::stod(format_double(v)) == v);
    }
}

TEST_CASE("coefficient vector dump") {
    const std::string path = "test_coeff_out.csv";
    dump_coefficients_csv(path, {0.5, -0.25, 0.0});
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    REQUIRE(ss.str() == "n,coeff\n0,0.5\n1,-0.25\n2,0\n");
    std::remove(path.c_str());
}

TEST_CASE("designed-failure spectrum family") {
    ExperimentConfig e;
    e.spectrum_family = "linear";
    e.count = 8;
    const auto s = e.make_spectrum();
    REQUIRE(s.kind == SpectrumKind::Listed);
    REQUIRE(s.freqs[3] == Approx(3.0 * kTwoPi));
}
