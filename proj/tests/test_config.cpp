#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fairshare/config.hpp"
#include "oracles.hpp"

using namespace fairshare;

namespace {

nlohmann::json two_user_json() {
    return nlohmann::json::parse(R"({
        "users": [
            {"label": "hi", "support": [1, -1],
             "transitions": [[0.95, 0.05], [0.95, 0.05]]},
            {"label": "lo", "support": [1, -1],
             "transitions": [[0.51, 0.49], [0.51, 0.49]]}
        ],
        "b_max": 4,
        "delta": 0.1,
        "seed": 7,
        "T": 1000
    })");
}

}  // namespace

TEST_CASE("grid parsing") {
    CHECK(parse_grid("0:0.2:0.1") == std::vector<double>{0.0, 0.1, 0.2});
    CHECK(parse_int_grid("2:12:2") == std::vector<int>{2, 4, 6, 8, 10, 12});
    // Endpoint within half-step tolerance is included.
    CHECK(parse_grid("0:0.5:0.05").size() == 11);
    CHECK(parse_grid("1:1:1") == std::vector<double>{1.0});
    CHECK_THROWS_AS(parse_grid("nonsense"), WrongShape);
    CHECK_THROWS_AS(parse_grid("1:0:1"), WrongShape);
    CHECK_THROWS_AS(parse_grid("0:1:0"), WrongShape);
    CHECK_THROWS_AS(parse_int_grid("0:1:0.3"), WrongShape);
}

TEST_CASE("config round-trips through JSON") {
    RunConfig cfg = RunConfig::from_json(two_user_json());
    CHECK(cfg.users.size() == 2);
    CHECK(cfg.b_max == 4);
    CHECK(cfg.delta == doctest::Approx(0.1));
    CHECK(cfg.seed == 7);
    CHECK(cfg.steps == 1000);

    nlohmann::json emitted = cfg.to_json();
    RunConfig reparsed = RunConfig::from_json(emitted);
    CHECK(reparsed.to_json() == emitted);  // emit -> parse -> identical
}

TEST_CASE("config builds the expected chain") {
    RunConfig cfg = RunConfig::from_json(two_user_json());
    JointChain chain = cfg.build_chain();
    CHECK(chain.state_count() == 4);
    CHECK(chain.system_drift == doctest::Approx(0.92).epsilon(1e-12));
}

TEST_CASE("explicit joint kernels are supported") {
    nlohmann::json j = {
        {"joint",
         {{"states", {{1, 1}, {-1, -1}}},
          {"kernel", {{0.7, 0.3}, {0.4, 0.6}}}}},
        {"b_max", 2},
    };
    RunConfig cfg = RunConfig::from_json(j);
    JointChain chain = cfg.build_chain();
    CHECK(chain.state_count() == 2);
    CHECK(chain.user_count() == 2);
    CHECK(chain.stationary(0) == doctest::Approx(4.0 / 7.0).epsilon(1e-10));

    nlohmann::json emitted = cfg.to_json();
    CHECK(RunConfig::from_json(emitted).to_json() == emitted);
}

TEST_CASE("delta accepts the unconstrained sentinel") {
    nlohmann::json j = two_user_json();
    j["delta"] = "unconstrained";
    RunConfig cfg = RunConfig::from_json(j);
    CHECK(cfg.delta_unconstrained);
    CHECK(cfg.to_json()["delta"] == "unconstrained");
    j["delta"] = "sometimes";
    CHECK_THROWS_AS(RunConfig::from_json(j), WrongShape);
}

TEST_CASE("grids may be given as strings or arrays and must increase") {
    nlohmann::json j = two_user_json();
    j["b_grid"] = "2:8:2";
    CHECK(RunConfig::from_json(j).b_grid == std::vector<int>{2, 4, 6, 8});
    j["b_grid"] = {2, 4, 8};
    CHECK(RunConfig::from_json(j).b_grid == std::vector<int>{2, 4, 8});
    j["b_grid"] = {4, 2};
    CHECK_THROWS_AS(RunConfig::from_json(j), WrongShape);
    j = two_user_json();
    j["delta_grid"] = {0.2, 0.1};
    CHECK_THROWS_AS(RunConfig::from_json(j), WrongShape);
}

TEST_CASE("malformed configs are rejected with context") {
    CHECK_THROWS_AS(RunConfig::from_json(nlohmann::json::object()), WrongShape);
    CHECK_THROWS_AS(RunConfig::load("/nonexistent/path.json"), WrongShape);

    nlohmann::json j = two_user_json();
    j["users"][0]["transitions"] = {{0.95}, {0.95, 0.05}};  // ragged
    CHECK_THROWS_AS(RunConfig::from_json(j), WrongShape);
}

TEST_CASE("tolerance overrides flow through") {
    nlohmann::json j = two_user_json();
    j["tolerances"] = {{"feasibility", 1e-8}};
    RunConfig cfg = RunConfig::from_json(j);
    CHECK(cfg.lp_tolerances().feasibility == doctest::Approx(1e-8));
    CHECK(cfg.lp_tolerances().pivot == doctest::Approx(1e-11));  // default kept
    CHECK(RunConfig::from_json(cfg.to_json()).to_json() == cfg.to_json());
}
