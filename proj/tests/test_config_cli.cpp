#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "qot/cli.hpp"
#include "support/test_util.hpp"

using qot::ExperimentConfig;
using qot::parse_eps_list;
using qot::run_cli;
using qot::validate_config;
using testsupport::CaptureStream;
using testsupport::ScratchDir;
using testsupport::slurp;

TEST_CASE("eps parser accepts a single value, a comma list, and a log range") {
    auto single = parse_eps_list("1e-3");
    REQUIRE(single.size() == 1);
    CHECK(single[0] == 1e-3);

    auto listed = parse_eps_list("1e-2,1e-3,2e-4");
    REQUIRE(listed.size() == 3);
    CHECK(listed[1] == 1e-3);

    auto ranged = parse_eps_list("1e-2:1e-4:5log");
    REQUIRE(ranged.size() == 5);
    CHECK(ranged.front() == 1e-2);
    CHECK(ranged.back() == 1e-4);
    for (std::size_t k = 1; k < ranged.size(); ++k) {
        CHECK(ranged[k] < ranged[k - 1]);
        CHECK(ranged[k] / ranged[k - 1] ==
              Catch::Approx(std::pow(10.0, -0.5)).epsilon(1e-12));
    }
}

TEST_CASE("eps parser rejects malformed input naming the option") {
    using Catch::Matchers::ContainsSubstring;
    CHECK_THROWS_AS(parse_eps_list(""), qot::ConfigError);
    CHECK_THROWS_AS(parse_eps_list("abc"), qot::ConfigError);
    CHECK_THROWS_AS(parse_eps_list("0"), qot::ConfigError);
    CHECK_THROWS_AS(parse_eps_list("-1e-3"), qot::ConfigError);
    CHECK_THROWS_AS(parse_eps_list("1e-3,1e-2"), qot::ConfigError);
    CHECK_THROWS_AS(parse_eps_list("1e-2:1e-4"), qot::ConfigError);
    CHECK_THROWS_AS(parse_eps_list("1e-2:1e-4:5"), qot::ConfigError);
    CHECK_THROWS_AS(parse_eps_list("1e-2:1e-4:xlog"), qot::ConfigError);
    CHECK_THROWS_AS(parse_eps_list("1e-2:1e-4:1log"), qot::ConfigError);
    CHECK_THROWS_AS(parse_eps_list("1e-4:1e-2:3log"), qot::ConfigError);
    CHECK_THROWS_WITH(parse_eps_list("abc"), ContainsSubstring("eps"));
    CHECK_THROWS_WITH(parse_eps_list("1e-2:1e-4"), ContainsSubstring("eps"));
}

TEST_CASE("config validation rejects out-of-range fields") {
    ExperimentConfig cfg;
    cfg.command = "solve";
    CHECK_NOTHROW(validate_config(cfg));

    auto bad = [&](auto&& mutate) {
        ExperimentConfig c = cfg;
        mutate(c);
        CHECK_THROWS_AS(validate_config(c), qot::ConfigError);
    };
    bad([](ExperimentConfig& c) { c.d = 0; });
    bad([](ExperimentConfig& c) { c.d = 4; });
    bad([](ExperimentConfig& c) { c.n = 1; });
    bad([](ExperimentConfig& c) { c.tol = 0.0; });
    bad([](ExperimentConfig& c) { c.max_iter = 0; });
    bad([](ExperimentConfig& c) { c.delta = 0.0; });
    bad([](ExperimentConfig& c) { c.pme_m = 1.0; });
    bad([](ExperimentConfig& c) { c.family = "cubic"; });
    bad([](ExperimentConfig& c) {
        c.family = "affine";
        c.family_a = -2.0;
    });
}

TEST_CASE("config echo prints the active fields compactly") {
    ExperimentConfig cfg;
    cfg.command = "sweep";
    cfg.eps_list = {0.01, 0.001};
    std::string echo = qot::config_echo(cfg);
    CHECK(echo.find("command=sweep") != std::string::npos);
    CHECK(echo.find("family=identity") != std::string::npos);
    CHECK(echo.find("eps=0.01,0.001") != std::string::npos);
    CHECK(echo.find(" a=") == std::string::npos);

    cfg.family = "affine";
    cfg.family_a = 2.0;
    std::string affine_echo = qot::config_echo(cfg);
    CHECK(affine_echo.find(" a=2 b=0") != std::string::npos);
}

TEST_CASE("dimension dispatch covers one through three") {
    auto dim_of = [](int d) {
        return qot::dispatch_dim(d, [](auto dim) { return int(decltype(dim)::value); });
    };
    CHECK(dim_of(1) == 1);
    CHECK(dim_of(2) == 2);
    CHECK(dim_of(3) == 3);
    CHECK_THROWS_AS(dim_of(0), qot::UnsupportedDimension);
    CHECK_THROWS_AS(dim_of(4), qot::UnsupportedDimension);
}

TEST_CASE("constants command writes the table and reruns byte-identically") {
    ScratchDir a, b;
    {
        CaptureStream cap(std::cout);
        REQUIRE(run_cli({"constants", "--d", "1", "--out", a.str()}) == 0);
        CHECK(cap.text().find("theorem_constant") != std::string::npos);
    }
    {
        CaptureStream cap(std::cout);
        REQUIRE(run_cli({"constants", "--d", "1", "--out", b.str()}) == 0);
    }
    REQUIRE(a.has("constants_d1.csv"));
    const std::string table = slurp(a.file("constants_d1.csv"));
    CHECK(table == slurp(b.file("constants_d1.csv")));
    const auto dc = qot::constants(1);
    CHECK(table.find("c_d1," + qot::fmt_full(dc.c_d1)) != std::string::npos);
    CHECK(table.find("theorem_constant," + qot::fmt_full(dc.theorem_constant)) !=
          std::string::npos);
}

TEST_CASE("solve command emits plan artifacts deterministically") {
    ScratchDir a, b;
    std::string out_line;
    {
        CaptureStream cap(std::cout);
        REQUIRE(run_cli({"solve", "--d", "1", "--n", "200", "--eps", "1e-3", "--out",
                         a.str()}) == 0);
        out_line = cap.text();
    }
    CHECK(out_line.find("T_eps=") != std::string::npos);
    REQUIRE(a.has("plan.csv"));
    REQUIRE(a.has("solve_stats.json"));
    REQUIRE(a.has("plan_support.svg"));
    {
        CaptureStream cap(std::cout);
        REQUIRE(run_cli({"solve", "--d", "1", "--n", "200", "--eps", "1e-3", "--out",
                         b.str()}) == 0);
    }
    CHECK(slurp(a.file("plan.csv")) == slurp(b.file("plan.csv")));
    CHECK(slurp(a.file("solve_stats.json")) == slurp(b.file("solve_stats.json")));
}

TEST_CASE("sweep command reports a small-eps exponent near two thirds") {
    ScratchDir dir;
    std::string out_line;
    {
        CaptureStream cap(std::cout);
        REQUIRE(run_cli({"sweep", "--d", "1", "--n", "300", "--eps", "1e-2:1e-3:3log",
                         "--out", dir.str()}) == 0);
        out_line = cap.text();
    }
    REQUIRE(dir.has("rate.csv"));
    REQUIRE(dir.has("rate_summary.json"));
    REQUIRE(dir.has("rate.svg"));
    double fitted = 0.0;
    REQUIRE(std::sscanf(out_line.c_str(), "fitted_exponent=%lf", &fitted) == 1);
    CHECK(fitted > 0.5);
    CHECK(fitted < 0.85);
}

TEST_CASE("couple command reports marginal quality") {
    ScratchDir dir;
    CaptureStream cap(std::cout);
    REQUIRE(run_cli({"couple", "--d", "1", "--n", "150", "--eps", "3e-3", "--delta", "0.15",
                     "--out", dir.str()}) == 0);
    CHECK(dir.has("couple_plan.csv"));
    CHECK(dir.has("couple_stats.json"));
    CHECK(dir.has("couple_support.svg"));
    CHECK(cap.text().find("entries=") != std::string::npos);
    CHECK(slurp(dir.file("couple_stats.json")).find("\"q_min\"") != std::string::npos);
}

TEST_CASE("porous-medium check passes its reference diagnostics") {
    ScratchDir dir;
    std::string out_line;
    {
        CaptureStream cap(std::cout);
        REQUIRE(run_cli({"pme-check", "--d", "1", "--m", "2", "--n", "400", "--out",
                         dir.str()}) == 0);
        out_line = cap.text();
    }
    REQUIRE(dir.has("pme.csv"));
    REQUIRE(dir.has("pme_summary.json"));
    REQUIRE(dir.has("pme_overlay.svg"));
    CHECK(out_line.find("energy_decreasing=true") != std::string::npos);
    const std::size_t at = out_line.find("residual_ratio=");
    REQUIRE(at != std::string::npos);
    double ratio = 0.0;
    REQUIRE(std::sscanf(out_line.c_str() + at, "residual_ratio=%lf", &ratio) == 1);
    CHECK(ratio > 3.3);
    CHECK(ratio < 4.7);
}

TEST_CASE("configuration problems exit with code two") {
    ScratchDir dir;
    CaptureStream out(std::cout);
    CaptureStream err(std::cerr);
    CHECK(run_cli({"sweep", "--d", "1", "--n", "300", "--eps", "nope", "--out", dir.str()}) ==
          2);
    CHECK(run_cli({"solve", "--bogus"}) == 2);
    CHECK(run_cli({"solve", "--d", "9", "--eps", "1e-3", "--out", dir.str()}) == 2);
    CHECK(run_cli({"frobnicate"}) == 2);
    CHECK(run_cli({}) == 2);
    CHECK(run_cli({"solve", "--d", "1", "--eps", "1e-3,1e-4", "--out", dir.str()}) == 2);
}

TEST_CASE("numeric failures exit with code three") {
    ScratchDir dir;
    CaptureStream out(std::cout);
    CaptureStream err(std::cerr);
    CHECK(run_cli({"sweep", "--d", "1", "--n", "50", "--eps", "1e-2:1e-3:3log", "--out",
                   dir.str()}) == 3);
    CHECK(run_cli({"solve", "--d", "1", "--n", "200", "--eps", "1e-3", "--max-iter", "1",
                   "--out", dir.str()}) == 3);
}

TEST_CASE("config file runs match flag runs byte for byte") {
    ScratchDir flags_dir, cfg_dir;
    const std::string cfg_path = cfg_dir.file("sweep.ini");
    {
        std::ofstream cfg(cfg_path);
        cfg << "n=300\n";
        cfg << "family=identity\n";
        cfg << "eps=1e-2:1e-3:3log\n";
    }
    {
        CaptureStream cap(std::cout);
        REQUIRE(run_cli({"sweep", "--d", "1", "--n", "300", "--family", "identity", "--eps",
                         "1e-2:1e-3:3log", "--out", flags_dir.str()}) == 0);
    }
    {
        CaptureStream cap(std::cout);
        REQUIRE(run_cli({"sweep", "--d", "1", "--config", cfg_path, "--out", cfg_dir.str()}) ==
                0);
    }
    CHECK(slurp(flags_dir.file("rate.csv")) == slurp(cfg_dir.file("rate.csv")));
    CHECK(slurp(flags_dir.file("rate_summary.json")) == slurp(cfg_dir.file("rate_summary.json")));
}
