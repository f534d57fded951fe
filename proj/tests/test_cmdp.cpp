#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "fairshare/cmdp.hpp"
#include "oracles.hpp"

using namespace fairshare;

namespace {

std::set<Action> as_set(const std::vector<Action>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST_CASE("allowed actions enumerate the feasible box") {
    CHECK(as_set(allowed_actions({1, -1}, 0, 2)) ==
          std::set<Action>{{0, 0}, {1, 0}, {1, -1}});
    CHECK(as_set(allowed_actions({-1, -1}, 0, 5)) == std::set<Action>{{0, 0}});
    CHECK(as_set(allowed_actions({1, 1}, 2, 2)) == std::set<Action>{{0, 0}});
}

TEST_CASE("allowed actions always contain zero and stay sorted") {
    for (int b = 0; b <= 3; ++b)
        for (int x1 = -2; x1 <= 2; ++x1)
            for (int x2 = -2; x2 <= 2; ++x2) {
                auto acts = allowed_actions({x1, x2}, b, 3);
                CHECK(std::count(acts.begin(), acts.end(), Action{0, 0}) == 1);
                CHECK(std::is_sorted(acts.begin(), acts.end()));
                for (const auto& a : acts) {
                    CHECK(b + a[0] + a[1] >= 0);
                    CHECK(b + a[0] + a[1] <= 3);
                }
            }
}

TEST_CASE("efficient actions implement store-all / fill / drain") {
    CHECK(as_set(efficient_actions({1, -1}, 1, 2)) == std::set<Action>{{1, -1}});
    CHECK(as_set(efficient_actions({1, 1}, 1, 2)) == std::set<Action>{{1, 0}, {0, 1}});
    CHECK(as_set(efficient_actions({-1, -1}, 1, 2)) == std::set<Action>{{-1, 0}, {0, -1}});
}

TEST_CASE("efficient actions are allowed and share one battery successor") {
    JointChain chain = build_joint_chain({oracle::u_hi(), oracle::u_lo()});
    for (int b_max : {2, 5}) {
        CmdpInstance eff = build_instance(chain, b_max, ActionMode::efficient);
        CmdpInstance full = build_instance(chain, b_max, ActionMode::full);
        for (int s = 0; s < eff.state_count(); ++s) {
            REQUIRE(!eff.action_sets[s].empty());
            int x_sum = 0;
            for (int xi : eff.generation_of(s)) x_sum += xi;
            const int expected = std::clamp(eff.battery_of(s) + x_sum, 0, b_max);
            for (const auto& a : eff.action_sets[s]) {
                CHECK(full.action_index(s, a) >= 0);
                CHECK(eff.battery_after(s, a) == expected);
            }
        }
    }
}

TEST_CASE("instance dimensions") {
    CmdpInstance one = build_instance(build_joint_chain({oracle::u_gen()}), 2, ActionMode::full);
    CHECK(one.state_count() == 6);
    CHECK(one.action_sets[one.state_index(1, 0)].size() == 1);  // x=-1, b=0

    JointChain two = build_joint_chain({oracle::u_hi(), oracle::u_lo()});
    CmdpInstance eff = build_instance(two, 12, ActionMode::efficient);
    CHECK(eff.state_count() == 52);
    CHECK(eff.action_sets[eff.state_index(0, 11)].size() == 2);  // x=(1,1), b=11: fill split
}

TEST_CASE("b_max = 0 builds a degenerate but usable instance") {
    CmdpInstance inst = build_instance(build_joint_chain({oracle::u_gen()}), 0, ActionMode::full);
    CHECK(inst.state_count() == 2);
    for (int s = 0; s < inst.state_count(); ++s)
        CHECK(as_set(inst.action_sets[s]) == std::set<Action>{{0}});
}

TEST_CASE("transition step copies the background kernel row") {
    CmdpInstance inst = build_instance(build_joint_chain({oracle::u_gen()}), 2, ActionMode::full);
    const int s = inst.state_index(0, 0);  // x=+1, b=0
    auto next = transition_step(inst, s, {1});
    REQUIRE(next.size() == 2);
    CHECK(next[0].first == inst.state_index(0, 1));
    CHECK(next[0].second == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(next[1].first == inst.state_index(1, 1));
    CHECK(next[1].second == doctest::Approx(0.4).epsilon(1e-12));

    // Zero action leaves the battery level unchanged.
    auto stay = transition_step(inst, s, {0});
    CHECK(stay[0].first == inst.state_index(0, 0));

    CHECK_THROWS_AS(transition_step(inst, s, {2}), ActionNotAllowed);
    CHECK_THROWS_AS(transition_step(inst, inst.state_index(1, 0), {-1}), ActionNotAllowed);
}

TEST_CASE("cost counts only unserved demand") {
    CmdpInstance inst =
        build_instance(build_joint_chain({oracle::u_hi(), oracle::u_lo()}), 2, ActionMode::full);
    const int s = inst.state_index(3, 0);  // x=(-1,-1), b=0
    CHECK(inst.cost(s, {0, 0}) == doctest::Approx(2.0));
    const int s2 = inst.state_index(3, 2);  // x=(-1,-1), b=2
    CHECK(inst.cost(s2, {-1, -1}) == doctest::Approx(0.0));
    CHECK(inst.cost(s2, {-1, 0}) == doctest::Approx(1.0));
}

TEST_CASE("oversized instances are rejected") {
    JointChain chain = build_joint_chain({oracle::u_hi(), oracle::u_lo()});
    CHECK_THROWS_AS(build_instance(chain, 4, ActionMode::full, /*size_cap=*/10),
                    InstanceTooLarge);
}
