#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mtt/config.hpp"

using namespace mtt;

TEST_CASE("empty config falls back to the preset") {
    const auto params = load_runner_params(ConfigFile::parse_string(""));
    CHECK(params.scenario.dt == doctest::Approx(5.0));
    CHECK(params.scenario.lambda_f == doctest::Approx(50.0));
    CHECK(params.scenario.sigma_z == doctest::Approx(400.0));
    CHECK(params.scenario.p_d == doctest::Approx(0.9));
    CHECK(params.scenario.segments.size() == 5);
    CHECK(params.scenario.initial_states.size() == 3);
    CHECK(params.window == 2);
    CHECK(params.ospa.p == doctest::Approx(2.0));
    CHECK(params.ospa.c == doctest::Approx(1000.0));
}

TEST_CASE("values are parsed from sections") {
    const std::string text = R"(
# comment line
[scenario]
dt = 2.5
P_d = 0.75          # trailing comment
lambda_f = 12
sigma_z = 250
seed = 42
region = -1000 -2000 3000 4000
segments = CV 4 | CT 6 -2.5 | CV 3
initial_states = 0 -10 0 0 | 100 -10 200 0

[tracker]
window = 3
lambda_v = 0.01
model_q = 0.5 2 8
enable_birth = false

[ospa]
p = 1
c = 500
)";
    const auto params = load_runner_params(ConfigFile::parse_string(text));
    CHECK(params.scenario.dt == doctest::Approx(2.5));
    CHECK(params.scenario.p_d == doctest::Approx(0.75));
    CHECK(params.scenario.lambda_f == doctest::Approx(12.0));
    CHECK(params.scenario.seed == 42);
    REQUIRE(params.scenario.region.has_value());
    CHECK(params.scenario.region->x_min == doctest::Approx(-1000.0));
    CHECK(params.scenario.region->area() == doctest::Approx(4000.0 * 6000.0));
    REQUIRE(params.scenario.segments.size() == 3);
    CHECK(params.scenario.segments[1].kind == Segment::Kind::ct);
    CHECK(params.scenario.segments[1].duration == 6);
    CHECK(params.scenario.segments[1].omega == doctest::Approx(-2.5 * M_PI / 180.0));
    REQUIRE(params.scenario.initial_states.size() == 2);
    CHECK(params.scenario.initial_states[1](2) == doctest::Approx(200.0));
    CHECK(params.window == 3);
    CHECK(params.lambda_v == doctest::Approx(0.01));
    CHECK(params.model_q == std::vector<double>{0.5, 2.0, 8.0});
    CHECK_FALSE(params.enable_birth);
    CHECK(params.ospa.p == doctest::Approx(1.0));
    CHECK(params.ospa.c == doctest::Approx(500.0));
}

TEST_CASE("malformed input is rejected") {
    CHECK_THROWS_AS(ConfigFile::parse_string("[scenario\ndt = 5"), std::invalid_argument);
    CHECK_THROWS_AS(ConfigFile::parse_string("just some words"), std::invalid_argument);
    CHECK_THROWS_AS(ConfigFile::parse_string("= 5"), std::invalid_argument);
    CHECK_THROWS_AS(
        load_runner_params(ConfigFile::parse_string("[scenario]\ndt = fast")),
        std::invalid_argument);
    CHECK_THROWS_AS(
        load_runner_params(ConfigFile::parse_string("[scenario]\nregion = 1 2 3")),
        std::invalid_argument);
    CHECK_THROWS_AS(
        load_runner_params(ConfigFile::parse_string("[scenario]\nsegments = ZZ 5")),
        std::invalid_argument);
    CHECK_THROWS_AS(
        load_runner_params(ConfigFile::parse_string("[tracker]\nwindow = 2.5")),
        std::invalid_argument);
    CHECK_THROWS_AS(
        load_runner_params(ConfigFile::parse_string("[tracker]\nenable_birth = maybe")),
        std::invalid_argument);
}

TEST_CASE("describe_params lists every resolved knob") {
    RunnerParams params;
    params.scenario = default_scenario();
    const auto lines = describe_params(params, 1.23e9);
    auto has = [&](const std::string& needle) {
        for (const auto& l : lines)
            if (l.find(needle) != std::string::npos) return true;
        return false;
    };
    CHECK(has("dt = 5"));
    CHECK(has("P_d = 0.9"));
    CHECK(has("lambda_f = 50"));
    CHECK(has("volume = 1230000000"));
    CHECK(has("segments = CV 20 | CT 18 1 | CV 12 | CT 6 -3 | CV 14"));
    CHECK(has("window = 2"));
    CHECK(has("model_q = 0.01 4"));
    CHECK(has("ospa_c = 1000"));
    CHECK(has("seed = 1"));
}
