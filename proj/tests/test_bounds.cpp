#include <doctest.h>

#include <cmath>

#include "cirl/bounds.hpp"
#include "cirl/scenarios.hpp"

using namespace cirl;

namespace {

JointMatrix random_joint(Rng& rng, std::size_t nx, std::size_t ny, bool allow_zero_row) {
    JointMatrix m(nx, std::vector<double>(ny));
    double total = 0.0;
    for (auto& row : m) {
        for (double& v : row) {
            v = 0.05 + rng.next_double();
            total += v;
        }
    }
    if (allow_zero_row && rng.next_double() < 0.3) {
        const std::size_t x = rng.next_below(nx);
        for (double& v : m[x]) {
            total -= v;
            v = 0.0;
        }
    }
    for (auto& row : m) {
        for (double& v : row) v /= total;
    }
    return m;
}

} // namespace

TEST_CASE("joint decomposition: identity, shared conditional, and random pairs") {
    SUBCASE("p == q collapses both sides to zero") {
        Rng rng(1);
        const JointMatrix p = random_joint(rng, 4, 4, false);
        const BoundReport report = check_joint_decomposition(p, p);
        CHECK(report.lhs == 0.0);
        CHECK(report.rhs == 0.0);
        CHECK(report.holds);
    }

    SUBCASE("shared conditional collapses the second term") {
        // p = p_x (x) c, q = q_x (x) c with the same conditional row c.
        const std::vector<double> px{0.7, 0.3};
        const std::vector<double> qx{0.4, 0.6};
        const std::vector<double> c{0.25, 0.5, 0.25};
        JointMatrix p(2, std::vector<double>(3));
        JointMatrix q(2, std::vector<double>(3));
        for (std::size_t x = 0; x < 2; ++x) {
            for (std::size_t y = 0; y < 3; ++y) {
                p[x][y] = px[x] * c[y];
                q[x][y] = qx[x] * c[y];
            }
        }
        const BoundReport report = check_joint_decomposition(p, q);
        const double marginal_gap = std::abs(px[0] - qx[0]) + std::abs(px[1] - qx[1]);
        CHECK(report.lhs == doctest::Approx(marginal_gap).epsilon(1e-12));
        CHECK(report.rhs == doctest::Approx(marginal_gap).epsilon(1e-12));
        CHECK(report.holds);
        CHECK(std::abs(report.slack) <= 1e-12);
    }

    SUBCASE("1000 random joint pairs all hold") {
        Rng rng(2025);
        for (int trial = 0; trial < 1000; ++trial) {
            const std::size_t nx = 2 + rng.next_below(3);
            const std::size_t ny = 2 + rng.next_below(3);
            const JointMatrix p = random_joint(rng, nx, ny, true);
            const JointMatrix q = random_joint(rng, nx, ny, true);
            const BoundReport report = check_joint_decomposition(p, q);
            CHECK(report.holds);
        }
    }

    SUBCASE("dimension mismatch is rejected") {
        Rng rng(3);
        const JointMatrix p = random_joint(rng, 2, 3, false);
        const JointMatrix q = random_joint(rng, 3, 3, false);
        CHECK_THROWS_AS(check_joint_decomposition(p, q), EnumerationMismatch);
    }
}

TEST_CASE("error propagation: identity, random instances, chain monotonicity") {
    SUBCASE("identical policies give an all-zero report") {
        const Scenario scenario = random_mdp(12, 4, 3, 4, 1);
        const BoundReport report = check_error_propagation(
            scenario.behavior, scenario.behavior, scenario.env, scenario.kernel_real);
        CHECK(report.lhs == 0.0);
        CHECK(report.rhs == 0.0);
        CHECK(report.all_hold());
    }

    SUBCASE("300 random instances, both policy orderings, zero violations") {
        for (std::uint64_t seed = 0; seed < 300; ++seed) {
            const Scenario scenario = random_mdp(40000 + seed, 4, 3, 4, 1);
            CHECK(check_error_propagation(scenario.behavior, *scenario.reference, scenario.env,
                                          scenario.kernel_real)
                      .all_hold());
            CHECK(check_error_propagation(*scenario.reference, scenario.behavior, scenario.env,
                                          scenario.kernel_real)
                      .all_hold());
        }
    }

    SUBCASE("chain mismatch grows strictly while the recurrence holds") {
        const Scenario chain = tutoring_chain(4, 0.1);
        const BoundReport report = check_error_propagation(chain.behavior, *chain.reference,
                                                           chain.env, chain.kernel_real);
        CHECK(report.all_hold());
        for (std::size_t t = 0; t + 1 < report.per_term.size(); ++t) {
            CHECK(report.per_term[t + 1].drift > report.per_term[t].drift);
        }
    }
}

TEST_CASE("policy-shift certificate: identity, chain anchor, random instances") {
    SUBCASE("identical policies give lhs = rhs = 0") {
        const Scenario scenario = random_mdp(21, 4, 3, 4, 1);
        const BoundReport report = check_theorem1(scenario.env, scenario.kernel_real,
                                                  scenario.behavior, scenario.behavior);
        CHECK(report.lhs == 0.0);
        CHECK(report.rhs == 0.0);
        CHECK(report.all_hold());
    }

    SUBCASE("chain anchor: rhs final form 2.0, lhs 0.561") {
        const Scenario chain = tutoring_chain(4, 0.1);
        const BoundReport report = check_theorem1(chain.env, chain.kernel_real, chain.behavior,
                                                  *chain.reference);
        CHECK(std::abs(report.lhs - 0.561) <= 1e-9);
        CHECK(std::abs(report.rhs - 2.0) <= 1e-9);
        CHECK(report.all_hold());
        // Weights are exactly H - i.
        for (std::size_t i = 0; i < report.per_term.size(); ++i) {
            CHECK(report.per_term[i].weight == 4 - static_cast<int>(i));
        }
    }

    SUBCASE("300 random instances, both orderings, both forms, zero violations") {
        for (std::uint64_t seed = 0; seed < 300; ++seed) {
            const Scenario scenario = random_mdp(50000 + seed, 4, 3, 4, 2);
            const BoundReport fwd = check_theorem1(scenario.env, scenario.kernel_real,
                                                   scenario.behavior, *scenario.reference);
            const BoundReport swp = check_theorem1(scenario.env, scenario.kernel_real,
                                                   *scenario.reference, scenario.behavior);
            CHECK(fwd.all_hold());
            CHECK(swp.all_hold());
            // The intermediate form is the tighter one.
            CHECK(fwd.rhs_intermediate <= fwd.rhs + 1e-9);
        }
    }
}

TEST_CASE("sim-gap certificate: identity, sycophancy, random perturbations") {
    SUBCASE("identical kernels give lhs = rhs = 0") {
        const Scenario scenario = random_mdp(33, 4, 3, 4, 1);
        const BoundReport report = check_theorem2(scenario.env, scenario.kernel_real,
                                                  scenario.kernel_real, scenario.behavior);
        CHECK(report.lhs == 0.0);
        CHECK(report.rhs == 0.0);
        CHECK(report.all_hold());
    }

    SUBCASE("sycophancy at kappa = 0.5 holds with strictly positive lhs") {
        const Scenario qa = sycophantic_sim(qa_dialogue(4), 0.5);
        const BoundReport report =
            check_theorem2(qa.env, qa.kernel_real, qa.kernel_sim, qa.behavior);
        CHECK(report.lhs > 0.0);
        CHECK(report.all_hold());
    }

    SUBCASE("300 random kernel pairs, zero violations, recurrence at every t") {
        for (std::uint64_t seed = 0; seed < 300; ++seed) {
            const Scenario scenario = random_mdp(60000 + seed, 4, 3, 4, 1);
            const BoundReport report = check_theorem2(scenario.env, scenario.kernel_real,
                                                      scenario.kernel_sim, scenario.behavior);
            CHECK(report.all_hold());
        }
    }
}

TEST_CASE("quadratic sweep: closed form, ratio bound, and superlinear growth") {
    const auto family = [](int h) { return worst_case_compounding(h, 0.1).bound_instance(); };
    const std::vector<int> horizons{2, 4, 8, 16};
    const std::vector<SweepRow> rows = quadratic_sweep(family, horizons, 2.0 * 0.1);
    REQUIRE(rows.size() == 4);

    SUBCASE("closed form is a bit-level arithmetic identity") {
        for (const SweepRow& row : rows) {
            const double expected =
                (2.0 * 0.1) * 1.0 * static_cast<double>(row.horizon * (row.horizon + 1) / 2);
            CHECK(row.rhs == expected);
        }
        CHECK(rows[0].rhs == doctest::Approx(0.6));  // 0.2 * 3
        CHECK(rows[1].rhs == doctest::Approx(2.0));  // 0.2 * 10
        CHECK(rows[2].rhs == doctest::Approx(7.2));  // 0.2 * 36
    }

    SUBCASE("lhs/rhs stays at or below 1") {
        for (const SweepRow& row : rows) CHECK(row.ratio <= 1.0 + 1e-9);
    }

    SUBCASE("doubling the horizon more than doubles the lhs") {
        for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
            CHECK(rows[i + 1].lhs > 2.0 * rows[i].lhs);
        }
    }

    SUBCASE("single-step sum: H = 1 has rhs = eps * R_max") {
        // H = 1 is below the chain constructor's minimum; check the closed
        // form directly at the smallest constructible horizon instead.
        CHECK(rows[0].rhs == doctest::Approx((2.0 * 0.1) * (2 * 3 / 2)));
    }

    SUBCASE("a family with non-constant deviation is rejected") {
        const auto broken = [](int h) {
            BoundInstance inst = worst_case_compounding(h, 0.1).bound_instance();
            // Perturb one good-state row so eps_t is no longer constant.
            inst.pi.mutable_logits()[1] = {1.0, 0.0};
            return inst;
        };
        CHECK_THROWS_AS(quadratic_sweep(broken, {4}, 2.0 * 0.1), std::invalid_argument);
    }
}
