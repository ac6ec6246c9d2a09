#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "semlink/power_allocation.hpp"
#include "semlink/rng.hpp"

using namespace semlink;

namespace {

AllocationProblem random_problem(uint64_t seed, size_t m) {
    Philox rng(seed);
    AllocationProblem prob;
    prob.n0 = 0.25 + rng.uniform();
    prob.total_power = static_cast<double>(m) * (0.5 + rng.uniform());
    double wsum = 0.0;
    for (size_t i = 0; i < m; ++i) {
        prob.gains.push_back(0.2 + 3.0 * rng.uniform());
        prob.weights.push_back(0.05 + rng.uniform());
        wsum += prob.weights.back();
    }
    for (double& w : prob.weights) w /= wsum;
    return prob;
}

double power_sum(const std::vector<double>& p) {
    double s = 0.0;
    for (double v : p) s += v;
    return s;
}

}  // namespace

TEST_CASE("equal allocation", "[power_allocation]") {
    AllocationProblem prob{std::vector<double>(24, 1.0), 1.0, 24.0, {}};
    auto res = allocate_equal(prob);
    for (double p : res.powers) REQUIRE(p == Catch::Approx(1.0));

    AllocationProblem single{{2.0}, 1.0, 7.5, {}};
    REQUIRE(allocate_equal(single).powers[0] == Catch::Approx(7.5));

    for (uint64_t seed = 0; seed < 5; ++seed) {
        auto prob2 = random_problem(seed, 6);
        auto r = allocate_equal(prob2);
        REQUIRE(power_sum(r.powers) == Catch::Approx(prob2.total_power).epsilon(1e-12));
    }
}

TEST_CASE("water-filling matches structure and the grid oracle", "[power_allocation]") {
    SECTION("equal gains give equal powers") {
        AllocationProblem prob{std::vector<double>(5, 2.0), 1.0, 10.0, {}};
        auto res = allocate_waterfilling(prob);
        for (double p : res.powers) REQUIRE(p == Catch::Approx(2.0).margin(1e-9));
    }
    SECTION("a hopeless channel is shut off") {
        AllocationProblem prob{{1.0, 1e-6}, 1.0, 0.5, {}};
        auto res = allocate_waterfilling(prob);
        REQUIRE(res.powers[1] == 0.0);
        REQUIRE(res.powers[0] == Catch::Approx(0.5).margin(1e-9));
    }
    SECTION("three channels vs simplex grid search") {
        AllocationProblem prob{{1.0, 0.5, 0.25}, 1.0, 3.0, {}};
        auto res = allocate_waterfilling(prob);
        auto grid = oracles::waterfill_grid3(prob.gains, prob.n0, prob.total_power, 1e-3);
        for (int i = 0; i < 3; ++i)
            REQUIRE(res.powers[i] == Catch::Approx(grid[i]).margin(2e-3));
    }
    SECTION("capacity never drops below equal allocation") {
        for (uint64_t seed = 0; seed < 30; ++seed) {
            auto prob = random_problem(seed + 100, 8);
            auto wf = allocate_waterfilling(prob);
            auto eq = allocate_equal(prob);
            REQUIRE(wf.objective_value >= eq.objective_value - 1e-9);
            REQUIRE(power_sum(wf.powers) ==
                    Catch::Approx(prob.total_power).epsilon(1e-9));
        }
    }
    SECTION("active channels share the water level") {
        auto prob = random_problem(7, 6);
        auto res = allocate_waterfilling(prob);
        double mu = -1.0;
        for (size_t i = 0; i < res.powers.size(); ++i) {
            if (res.powers[i] <= 0.0) continue;
            double level = res.powers[i] + prob.n0 / prob.gains[i];
            if (mu < 0.0) mu = level;
            REQUIRE(level == Catch::Approx(mu).margin(1e-8));
        }
    }
}

TEST_CASE("importance allocation minimizes the weighted BER", "[power_allocation]") {
    SECTION("full symmetry gives equal powers") {
        AllocationProblem prob{std::vector<double>(4, 1.5), 1.0, 8.0,
                               std::vector<double>(4, 0.25)};
        auto res = allocate_importance(prob);
        for (double p : res.powers) REQUIRE(p == Catch::Approx(2.0).margin(1e-6));
    }
    SECTION("zero-weight streams get zero power") {
        AllocationProblem prob{{1.0, 1.0}, 1.0, 2.0, {1.0, 0.0}};
        auto res = allocate_importance(prob);
        REQUIRE(res.powers[0] == Catch::Approx(2.0).margin(1e-9));
        REQUIRE(res.powers[1] == 0.0);
    }
    SECTION("all-zero weights are rejected") {
        AllocationProblem prob{{1.0, 1.0}, 1.0, 2.0, {0.0, 0.0}};
        REQUIRE_THROWS_AS(allocate_importance(prob), std::invalid_argument);
    }
    SECTION("objective beats both baselines on random instances") {
        int strict = 0;
        for (uint64_t seed = 0; seed < 40; ++seed) {
            auto prob = random_problem(seed + 500, 8);
            auto imp = allocate_importance(prob);
            auto eq = allocate_equal(prob);
            auto wf = allocate_waterfilling(prob);
            double f_imp = weighted_ber_objective(prob, imp.powers);
            double f_eq = weighted_ber_objective(prob, eq.powers);
            double f_wf = weighted_ber_objective(prob, wf.powers);
            REQUIRE(f_imp <= f_eq + 1e-12);
            REQUIRE(f_imp <= f_wf + 1e-12);
            if (f_imp < f_eq - 1e-12 && f_imp < f_wf - 1e-12) ++strict;
            REQUIRE(power_sum(imp.powers) ==
                    Catch::Approx(prob.total_power).epsilon(1e-9));
        }
        REQUIRE(strict >= 38);
    }
    SECTION("KKT stationarity on interior solutions") {
        auto prob = random_problem(321, 10);
        auto res = allocate_importance(prob);
        std::vector<double> marginals;
        for (size_t i = 0; i < res.powers.size(); ++i) {
            if (res.powers[i] <= 1e-9 * prob.total_power) continue;
            marginals.push_back(
                detail::importance_marginal(prob, i, res.powers[i]));
        }
        REQUIRE(marginals.size() >= 2);
        for (double m : marginals)
            REQUIRE(std::abs(m - marginals[0]) <= 1e-6 * marginals[0]);
    }
    SECTION("Fig.-6-style instance vs projected-gradient reference") {
        ImportanceProfile profile;
        profile.sli = {0.4975, 0.4975, 0.005};
        auto weights = stream_weights(profile, 3);
        ChannelRealization chan = fixed_channel(24, 24.0, 1.0, 10.0);
        AllocationProblem prob{chan.gains, chan.n0, chan.total_power, weights};

        auto res = allocate_importance(prob);
        auto ref = oracles::allocate_importance_pg_ref(prob.weights, prob.gains, prob.n0,
                                                       prob.total_power);
        double f_res = weighted_ber_objective(prob, res.powers);
        double f_ref = oracles::weighted_ber_ref(prob.weights, prob.gains, prob.n0, ref);
        INFO("solver " << f_res << " reference " << f_ref);
        REQUIRE(f_res <= f_ref + 1e-9);

        auto eq = allocate_equal(prob);
        auto wf = allocate_waterfilling(prob);
        REQUIRE(f_res < weighted_ber_objective(prob, eq.powers));
        REQUIRE(f_res < weighted_ber_objective(prob, wf.powers));
    }
}

TEST_CASE("stream weights combine SLI and plane significance", "[power_allocation]") {
    SECTION("single segment: geometric plane weights") {
        ImportanceProfile profile;
        profile.sli = {1.0};
        auto w = stream_weights(profile, 1);
        REQUIRE(w.size() == 8);
        double z = 0.0;
        for (int b = 0; b < 8; ++b) z += std::pow(4.0, b);
        for (int b = 0; b < 8; ++b)
            REQUIRE(w[b] == Catch::Approx(std::pow(4.0, b) / z));
    }
    SECTION("background MSB is below base plane 4") {
        ImportanceProfile profile;
        profile.sli = {0.4975, 0.4975, 0.005};
        auto w = stream_weights(profile, 3);
        REQUIRE(w.size() == 24);
        REQUIRE(w[2 * 8 + 7] < w[0 * 8 + 4]);
        double sum = 0.0;
        for (double v : w) sum += v;
        REQUIRE(sum == Catch::Approx(1.0).margin(1e-12));
    }
    SECTION("all SLI on one segment silences the others") {
        ImportanceProfile profile;
        profile.sli = {1.0, 0.0};
        auto w = stream_weights(profile, 2);
        for (int b = 0; b < 8; ++b) REQUIRE(w[8 + b] == 0.0);
    }
    SECTION("invalid profiles are rejected") {
        ImportanceProfile profile;
        profile.sli = {0.6, 0.6};
        REQUIRE_THROWS_AS(stream_weights(profile, 2), std::invalid_argument);
    }
}
