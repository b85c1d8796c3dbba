#include <doctest.h>

#include "snrisk/config.hpp"
#include "snrisk/report.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

using namespace snrisk;

namespace {

const char* kMinimalConfig = R"(
# minimal experiment
[marginal]
kind = pareto
alpha = 2.0

[counting]
kind = poisson
rate = 1.0

[shock]
kind = constant
c = 1.0

[run]
seed = 42
)";

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("config parses sections, comments, and typed values") {
    auto cfg = Config::parse_string(kMinimalConfig);
    CHECK(cfg.get_string("marginal", "kind") == "pareto");
    CHECK(cfg.get_double("marginal", "alpha") == 2.0);
    CHECK(cfg.get_u64("run", "seed") == 42);
    CHECK(cfg.get_double_or("run", "horizon", 1.0) == 1.0);
    CHECK(!cfg.has("run", "horizon"));
    cfg.validate_schema();
}

TEST_CASE("config errors carry the offending line") {
    try {
        Config::parse_string("[marginal]\nkind pareto\n", "bad.ini");
        FAIL("expected throw");
    } catch (const ConfigError& e) {
        CHECK(e.line() == 2);
        CHECK(std::string(e.what()).find("bad.ini:2") != std::string::npos);
    }

    auto dup = "[run]\nseed = 1\nseed = 2\n";
    CHECK_THROWS_AS(Config::parse_string(dup), ConfigError);

    auto unknown = Config::parse_string("[shock]\nkind = constant\nwobble = 1\n[run]\nseed = 1\n");
    CHECK_THROWS_AS(unknown.validate_schema(), ConfigError);
    auto badsec = Config::parse_string("[shocks]\nkind = constant\n");
    CHECK_THROWS_AS(badsec.validate_schema(), ConfigError);
}

TEST_CASE("typed getters reject malformed numbers and lists") {
    auto cfg = Config::parse_string("[run]\nseed = abc\nquantiles = 0.9,zz\n");
    CHECK_THROWS_AS(cfg.get_u64("run", "seed"), ConfigError);
    CHECK_THROWS_AS(cfg.get_list("run", "quantiles"), ConfigError);
}

TEST_CASE("environment variables override file values") {
    setenv("SNRISK_RUN__SEED", "777", 1);
    auto cfg = Config::parse_string(kMinimalConfig, "<env-test>", true);
    CHECK(cfg.get_u64("run", "seed") == 777);
    unsetenv("SNRISK_RUN__SEED");
}

TEST_CASE("seed is mandatory") {
    auto cfg = Config::parse_string("[marginal]\nkind = pareto\nalpha = 2\n");
    CHECK_THROWS_AS(build_run_settings(cfg, std::nullopt, std::nullopt, std::nullopt),
                    ConfigError);
    CHECK(build_run_settings(cfg, 9, std::nullopt, std::nullopt).seed == 9);
}

TEST_CASE("builders construct the configured objects") {
    auto cfg = Config::parse_string(kMinimalConfig);
    auto marginal = build_marginal_dist(cfg);
    CHECK(marginal.alpha() == 2.0);
    auto counting = build_counting(cfg, 1.0);
    CHECK(counting.is_poisson());
    auto shock = build_shock(cfg);
    CHECK(shock.kind() == ShockFunctionSpec::Kind::Constant);
    CHECK(build_norm(cfg).kind() == Norm::Kind::L1);  // default

    auto cfg2 = Config::parse_string(R"(
[marginal]
kind = dependent
alpha = 2.0
phi = 0.7
noise_sd = 0.5
[counting]
kind = poisson-piecewise
times = 0,1,2
rates = 1,2,0.5
[shock]
kind = exponential
omega_values = 1,-1
omega_probs = 0.5,0.5
[norm]
kind = lp
p = 2.5
[run]
seed = 1
)");
    cfg2.validate_schema();
    CHECK(std::holds_alternative<DependentSequenceGen>(build_marginal(cfg2)));
    CHECK_THROWS_AS(build_marginal_dist(cfg2), ConfigError);
    auto pw = build_counting(cfg2, 5.0);
    CHECK(pw.cumulative_intensity(2.5) == doctest::Approx(1.0 + 2.0 + 0.25));
    auto sh = build_shock(cfg2);
    CHECK(sh.monotonicity() == ShockFunctionSpec::Monotonicity::Mixed);
    CHECK(build_norm(cfg2).p() == 2.5);

    auto bad = Config::parse_string("[shock]\nkind = sawtooth\n");
    CHECK_THROWS_AS(build_shock(bad), ConfigError);
}

TEST_CASE("canonical dump is sorted and stable") {
    auto a = Config::parse_string("[run]\nseed = 1\nhorizon = 2\n[marginal]\nkind = pareto\n");
    auto b = Config::parse_string("[marginal]\nkind = pareto\n[run]\nhorizon = 2\nseed = 1\n");
    CHECK(a.canonical() == b.canonical());
    CHECK(sha1_hex(a.canonical()) == sha1_hex(b.canonical()));
    // Known digest keeps the hash implementation honest.
    CHECK(sha1_hex("abc") == "a9993e364706816aba3e25717850c26c9cd0d89d");
}

#ifdef SNRISK_CLI_PATH

namespace {

int run_cli(const std::string& args) {
    std::string cmd = std::string(SNRISK_CLI_PATH) + " " + args + " 2>/dev/null";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

} // namespace

TEST_CASE("cli: minimal run writes a report with the closed-form tail constant") {
    std::string dir = "cli_test_out";
    write_file("cli_test_min.ini", kMinimalConfig);
    int rc = run_cli("run --config cli_test_min.ini --out " + dir);
    REQUIRE(rc == 0);
    auto json = slurp(dir + "/report.json");
    // Constant(1) shock, lambda = T = 1: tail constant is exactly 1.
    CHECK(json.find("\"closed_form_constant\": 1.0") != std::string::npos);
    CHECK(json.find("\"content_hash\"") != std::string::npos);
}

TEST_CASE("cli: identical seed gives byte-identical reports, unknown kind exits 2") {
    write_file("cli_test_min.ini", kMinimalConfig);
    REQUIRE(run_cli("run --config cli_test_min.ini --out cli_rep_a") == 0);
    REQUIRE(run_cli("run --config cli_test_min.ini --out cli_rep_b") == 0);
    CHECK(slurp("cli_rep_a/report.json") == slurp("cli_rep_b/report.json"));

    write_file("cli_test_bad.ini",
               "[marginal]\nkind = pareto\nalpha = 2\n[counting]\nkind = poisson\nrate = 1\n"
               "[shock]\nkind = sawtooth\n[run]\nseed = 1\n");
    CHECK(run_cli("run --config cli_test_bad.ini --out cli_rep_c") == 2);
    CHECK(run_cli("run --config does_not_exist.ini") == 2);
}

TEST_CASE("cli: worker override keeps numeric output identical") {
    write_file("cli_test_min.ini", kMinimalConfig);
    REQUIRE(run_cli("run --config cli_test_min.ini --workers 1 --out cli_w1") == 0);
    REQUIRE(run_cli("run --config cli_test_min.ini --workers 4 --out cli_w4") == 0);
    auto a = slurp("cli_w1/report.json"), b = slurp("cli_w4/report.json");
    // Only the echoed worker count may differ between the two reports.
    auto strip = [](std::string s) {
        auto p = s.find("\"workers\"");
        if (p != std::string::npos) {
            auto e = s.find('\n', p);
            s.erase(p, e - p);
        }
        // The resolved-config echo also records the worker override.
        auto q = s.find("workers = ");
        if (q != std::string::npos) s.erase(q, s.find("\\n", q) - q);
        return s;
    };
    CHECK(strip(a) == strip(b));
}

#endif
