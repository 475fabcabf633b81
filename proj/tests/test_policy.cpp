#include <doctest.h>

#include <cmath>

#include "cirl/oracle.hpp"
#include "cirl/policy.hpp"
#include "cirl/scenarios.hpp"

using namespace cirl;

TEST_CASE("all-zero logits give the uniform distribution") {
    const Policy policy = Policy::uniform(ContextMode::markov, 1, 4);
    const std::vector<double> p = policy.action_probabilities(0);
    for (double v : p) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("logits [ln 3, 0] give probabilities [0.75, 0.25]") {
    const Policy policy(ContextMode::markov, {{std::log(3.0), 0.0}});
    const std::vector<double> p = policy.action_probabilities(0);
    CHECK(p[0] == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(p[1] == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("probability rows sum to 1 within 1e-12 and stay strictly positive") {
    Rng rng(42);
    for (int trial = 0; trial < 50; ++trial) {
        const Policy policy = Policy::random_gaussian(ContextMode::markov, 4, 5, rng, 3.0);
        for (int s = 0; s < 4; ++s) {
            const std::vector<double> p = policy.action_probabilities(s);
            double sum = 0.0;
            for (double v : p) {
                CHECK(v > 0.0);
                sum += v;
            }
            CHECK(std::abs(sum - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("shifting a logit row by a constant moves no probability by more than 1e-12") {
    Rng rng(7);
    const Policy policy = Policy::random_gaussian(ContextMode::markov, 3, 4, rng);
    std::vector<std::vector<double>> shifted = policy.logits();
    for (auto& row : shifted) {
        for (double& v : row) v += 17.25;
    }
    const Policy other(ContextMode::markov, shifted);
    for (int s = 0; s < 3; ++s) {
        const std::vector<double> p = policy.action_probabilities(s);
        const std::vector<double> q = other.action_probabilities(s);
        for (std::size_t a = 0; a < p.size(); ++a) CHECK(std::abs(p[a] - q[a]) <= 1e-12);
    }
}

TEST_CASE("log-prob gradient closed form on a uniform two-action row") {
    const Policy policy = Policy::uniform(ContextMode::markov, 1, 2);
    const std::vector<double> grad = log_prob_gradient(policy, 0, 0);
    CHECK(grad[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(grad[1] == doctest::Approx(-0.5).epsilon(1e-15));
}

TEST_CASE("log-prob gradient entries sum to zero on any row") {
    Rng rng(3);
    const Policy policy = Policy::random_gaussian(ContextMode::markov, 5, 4, rng, 2.0);
    for (int s = 0; s < 5; ++s) {
        for (int a = 0; a < 4; ++a) {
            const std::vector<double> grad = log_prob_gradient(policy, s, a);
            double sum = 0.0;
            for (double v : grad) sum += v;
            CHECK(std::abs(sum) <= 1e-12);
        }
    }
}

TEST_CASE("log-prob gradient matches central finite differences on 100+ random probes") {
    // Independent oracle: central differences of log pi(a|s) in each logit
    // coordinate, step 1e-6.
    Rng rng(12345);
    const double step = 1e-6;
    int probes = 0;
    double worst = 0.0;
    while (probes < 120) {
        const int num_actions = 2 + static_cast<int>(rng.next_below(4));
        Policy policy = Policy::random_gaussian(ContextMode::markov, 1, num_actions, rng, 1.5);
        const int action = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(num_actions)));
        const std::vector<double> analytic = log_prob_gradient(policy, 0, action);
        for (int j = 0; j < num_actions; ++j) {
            std::vector<std::vector<double>> up = policy.logits();
            std::vector<std::vector<double>> down = policy.logits();
            up[0][static_cast<std::size_t>(j)] += step;
            down[0][static_cast<std::size_t>(j)] -= step;
            const double fd = (Policy(ContextMode::markov, up).log_prob(0, action) -
                               Policy(ContextMode::markov, down).log_prob(0, action)) /
                              (2.0 * step);
            const double denom = std::max(std::abs(fd), 1e-3);
            worst = std::max(worst, std::abs(analytic[static_cast<std::size_t>(j)] - fd) / denom);
        }
        ++probes;
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("mixture_perturb endpoints and the 2*lambda total-variation bound") {
    Rng rng(9);
    const Scenario scenario = random_mdp(77, 4, 3, 3, 1);
    const Policy base = Policy::random_gaussian(ContextMode::markov, 4, 3, rng, 2.0);

    const Policy same = mixture_perturb(base, 0.0, scenario.env);
    CHECK(same.logits() == base.logits());

    const Policy flat = mixture_perturb(base, 1.0, scenario.env);
    for (int s = 0; s < 4; ++s) {
        for (double v : flat.action_probabilities(s)) {
            CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
        }
    }

    for (double lambda : {0.1, 0.35, 0.8}) {
        const Policy mixed = mixture_perturb(base, lambda, scenario.env);
        for (int s = 0; s < 4; ++s) {
            // Exact logit fitting: the row equals the mixed distribution.
            const std::vector<double> p = base.action_probabilities(s);
            const std::vector<double> m = mixed.action_probabilities(s);
            for (std::size_t a = 0; a < p.size(); ++a) {
                CHECK(m[a] ==
                      doctest::Approx((1.0 - lambda) * p[a] + lambda / 3.0).epsilon(1e-12));
            }
            CHECK(total_variation_to(mixed, base, s) <= 2.0 * lambda + 1e-12);
        }
    }
}

TEST_CASE("mixture_perturb keeps every policy-deviation entry at or below 2*lambda") {
    for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
        const Scenario scenario = random_mdp(seed, 5, 3, 4, 2);
        const double lambda = 0.05 + 0.2 * static_cast<double>(seed) / 5.0;
        const Policy perturbed = mixture_perturb(scenario.behavior, lambda, scenario.env);
        const std::vector<double> eps = policy_deviation_series(perturbed, scenario.behavior,
                                                                scenario.env, scenario.kernel_real);
        for (double e : eps) CHECK(e <= 2.0 * lambda + 1e-9);
    }
}

TEST_CASE("total variation hand cases") {
    const Policy a(ContextMode::markov, {{60.0, 0.0}});
    const Policy b(ContextMode::markov, {{0.0, 60.0}});
    CHECK(total_variation_to(a, a, 0) == 0.0);
    CHECK(total_variation_to(a, b, 0) == doctest::Approx(2.0).epsilon(1e-12));

    const Policy c = Policy::from_probabilities(ContextMode::markov, {{0.5, 0.5}});
    const Policy d = Policy::from_probabilities(ContextMode::markov, {{0.25, 0.75}});
    CHECK(total_variation_to(c, d, 0) == doctest::Approx(0.5).epsilon(1e-12));
}
