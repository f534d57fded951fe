#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fairshare/programs.hpp"
#include "oracles.hpp"

using namespace fairshare;

namespace {

int variable_count(const CmdpInstance& inst) {
    int n = 0;
    for (const auto& acts : inst.action_sets) n += static_cast<int>(acts.size());
    return n;
}

}  // namespace

TEST_CASE("LP shape for the single-user minimum-loss problem") {
    CmdpInstance inst = build_instance(build_joint_chain({oracle::u_gen()}), 2, ActionMode::full);
    LinearProgram lp = build_lp_p(inst, FairnessBound::exact());
    CHECK(inst.state_count() == 6);
    CHECK(lp.num_vars == variable_count(inst));
    CHECK(lp.equalities.size() == 1 + 6);             // mass + stationarity
    CHECK(lp.inequalities.size() == 1);               // one fairness row
    CHECK(build_lp_p(inst, FairnessBound::unconstrained()).inequalities.empty());

    CmdpInstance two =
        build_instance(build_joint_chain({oracle::u_hi(), oracle::u_lo()}), 4, ActionMode::full);
    CHECK(two.state_count() == 20);
    CHECK(build_lp_p(two, FairnessBound::exact()).num_vars == variable_count(two));
}

TEST_CASE("mode contracts") {
    JointChain chain = build_joint_chain({oracle::u_gen()});
    CmdpInstance eff = build_instance(chain, 2, ActionMode::efficient);
    CmdpInstance full = build_instance(chain, 2, ActionMode::full);
    CHECK_THROWS_AS(build_lp_p(eff, FairnessBound::exact()), ModeMismatch);
    CHECK_THROWS_AS(build_lp_f(full), ModeMismatch);
    CHECK_THROWS_AS(build_lp_p(full, FairnessBound::relaxed(-0.1)), WrongShape);
}

TEST_CASE("single generating user: minimum fair loss equals the random-walk value") {
    CmdpInstance inst = build_instance(build_joint_chain({oracle::u_gen()}), 2, ActionMode::full);
    SolveReport rep = solve_p(inst, FairnessBound::exact());
    CHECK(rep.objective == doctest::Approx(oracle::birth_death_llr(0.6, 2)).epsilon(1e-9));
    CHECK(rep.objective == doctest::Approx(0.084211).epsilon(1e-5));
    CHECK(rep.llr_sys() == doctest::Approx(rep.objective).epsilon(1e-9));
    // Generating single user: the fairness row is slack at the optimum.
    CHECK(rep.contributions[0] >= -1e-9);
}

TEST_CASE("dropping fairness can only lower the objective") {
    std::mt19937_64 rng(4242);
    for (int trial = 0; trial < 5; ++trial) {
        JointChain chain =
            build_joint_chain({oracle::random_user(rng), oracle::random_user(rng)});
        CmdpInstance inst = build_instance(chain, 3, ActionMode::full);
        double with = solve_p(inst, FairnessBound::exact()).objective;
        double without = solve_p(inst, FairnessBound::unconstrained()).objective;
        double relaxed = solve_p(inst, FairnessBound::relaxed(0.05)).objective;
        CHECK(without <= with + 1e-9);
        CHECK(without <= relaxed + 1e-9);
        CHECK(relaxed <= with + 1e-9);
    }
}

TEST_CASE("net-demanding partner forces persistent loss") {
    JointChain chain = build_joint_chain({oracle::u_hi(), oracle::u_dem()});
    for (int b_max : {2, 5}) {
        CmdpInstance inst = build_instance(chain, b_max, ActionMode::full);
        CHECK(solve_p(inst, FairnessBound::exact()).objective >= 0.2 - 1e-8);
    }
}

TEST_CASE("maxmin contribution: single user is fair for free") {
    CmdpInstance inst =
        build_instance(build_joint_chain({oracle::u_gen()}), 4, ActionMode::efficient);
    CHECK(solve_f(inst).objective == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("maxmin contribution of the mismatched pair") {
    JointChain chain = build_joint_chain({oracle::u_hi(), oracle::u_lo()});
    for (int b_max : {2, 6}) {
        CmdpInstance inst = build_instance(chain, b_max, ActionMode::efficient);
        SolveReport rep = solve_f(inst);
        CHECK(rep.objective == doctest::Approx(-0.44).epsilon(1e-6));
        // Odd battery levels carry no stationary mass.
        double odd_mass = 0.0;
        for (int b = 1; b <= b_max; b += 2) odd_mass += rep.battery_marginal[b];
        CHECK(odd_mass <= 1e-9);
    }
}

TEST_CASE("measure invariants hold for both programs") {
    std::mt19937_64 rng(777);
    for (int trial = 0; trial < 5; ++trial) {
        JointChain chain =
            build_joint_chain({oracle::random_user(rng), oracle::random_user(rng)});
        CmdpInstance full = build_instance(chain, 3, ActionMode::full);
        CmdpInstance eff = build_instance(chain, 3, ActionMode::efficient);
        for (const SolveReport& rep :
             {solve_p(full, FairnessBound::exact()), solve_f(eff)}) {
            CHECK(rep.measure.total_mass() == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(rep.measure.stationarity_residual() <= 1e-8);
            double c_sum = 0.0;
            for (double c : rep.contributions) c_sum += c;
            CHECK(c_sum == doctest::Approx(0.0).epsilon(1e-8));  // work conservation
            for (double l : rep.llr_per_user) CHECK(l >= -1e-12);
        }
        // theta* can never be positive: contributions sum to zero.
        CHECK(solve_f(eff).objective <= 1e-9);
    }
}

TEST_CASE("zero-action measure recovers the demand rates") {
    // Under the all-zero policy nothing is ever exchanged: C_i = 0 and every
    // demand step is lost.
    JointChain chain = build_joint_chain({oracle::u_hi(), oracle::u_lo()});
    CmdpInstance inst = build_instance(chain, 2, ActionMode::full);
    OccupationMeasure rho;
    rho.instance = &inst;
    rho.mass.resize(inst.state_count());
    for (int s = 0; s < inst.state_count(); ++s) {
        rho.mass[s].assign(inst.action_sets[s].size(), 0.0);
        if (inst.battery_of(s) == 0) {
            int zero = inst.action_index(s, {0, 0});
            REQUIRE(zero >= 0);
            rho.mass[s][zero] = chain.stationary(inst.chain_state_of(s));
        }
    }
    Marginals marg = occupation_marginals(rho);
    CHECK(marg.contributions[0] == doctest::Approx(0.0));
    CHECK(marg.contributions[1] == doctest::Approx(0.0));
    CHECK(marg.llr[0] == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(marg.llr[1] == doctest::Approx(0.49).epsilon(1e-12));
}

TEST_CASE("reports serialize with the documented fields") {
    CmdpInstance inst = build_instance(build_joint_chain({oracle::u_gen()}), 2, ActionMode::full);
    nlohmann::json j = solve_p(inst, FairnessBound::relaxed(0.1)).to_json();
    for (const char* key : {"problem", "objective", "delta", "llr_per_user", "contributions",
                            "battery_marginal", "diagnostics"})
        CHECK(j.contains(key));
    CHECK(j["problem"] == "P_delta");
    CHECK(j["delta"] == doctest::Approx(0.1));
}
