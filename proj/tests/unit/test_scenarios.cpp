#include <gtest/gtest.h>

#include <random>

#include "gonosomal/dynamics.hpp"
#include "gonosomal/scenarios.hpp"
#include "oracles.hpp"

using namespace gonosomal;

namespace {

State iterate_v(State z, const AlgebraSpec& spec, int steps) {
    for (int t = 0; t < steps; ++t) z = apply_V(z, spec);
    return z;
}

}  // namespace

TEST(Build, Examples) {
    auto h = build_algebra(Scenario::hemophilia(0, 0));
    EXPECT_DOUBLE_EQ(h.gamma(0, 0, 0), 0.5);
    EXPECT_DOUBLE_EQ(h.gamma(0, 0, 1), 0.0);
    EXPECT_DOUBLE_EQ(h.gamma_tilde(0, 0, 0), 0.5);
    EXPECT_DOUBLE_EQ(h.gamma_tilde(0, 0, 1), 0.0);
    auto l = build_algebra(Scenario::lr_lethal(0.5));
    EXPECT_EQ(l.n(), 1);
    EXPECT_DOUBLE_EQ(l.gamma(0, 0, 0), 0.5);
    auto m = build_algebra(Scenario::lr_mutation(0.1, 0.4));
    EXPECT_DOUBLE_EQ(m.gamma(0, 0, 0), 0.6 / 1.6);
    auto x = build_algebra(Scenario::xic(0.2, 0.3, 0.1, 0.5));
    EXPECT_TRUE(x == opposite(type21_spec(0.2, 0.3, 0.1, 0.5)));
}

TEST(Build, AllStochasticOnGrid) {
    for (double a : {0.0, 0.25, 0.5, 0.75, 1.0})
        for (double b : {0.0, 0.3, 1.0}) {
            EXPECT_TRUE(validate(hemophilia_spec(a, b)).is_stochastic) << a << " " << b;
            EXPECT_TRUE(validate(build_algebra(Scenario::lr_mutation(a, b))).is_stochastic);
            if (a + b <= 1) {
                EXPECT_TRUE(validate(type21_spec(a, b, b, a)).is_stochastic);
                EXPECT_TRUE(validate(build_algebra(Scenario::xic(a, b, b, a))).is_stochastic);
            }
        }
}

TEST(Build, InvalidParameters) {
    EXPECT_THROW(type21_spec(0.7, 0.5, 0.1, 0.1), InvalidParameter);
    EXPECT_THROW(hemophilia_spec(1.2, 0), InvalidParameter);
    EXPECT_THROW(lr_spec(-0.1), InvalidParameter);
    EXPECT_THROW(Scenario::from_tag("nope", {}), InvalidParameter);
    EXPECT_THROW(Scenario::from_tag("lr_lethal", {{"gamma", 0.3}, {"mu", 0.1}}), InvalidParameter);
    EXPECT_THROW(Scenario::from_tag("rl_lethal", {{"gamma1", 0.3}}), InvalidParameter);
}

TEST(ScenarioIo, JsonRoundTrip) {
    Scenario s = Scenario::rl_lethal(0.2, 0.3, 0.1, 0.5);
    Scenario back = scenario_from_json(to_json(s));
    EXPECT_EQ(back.kind, s.kind);
    EXPECT_EQ(back.params, s.params);
    EXPECT_THROW(scenario_from_json(json{{"params", json::object()}}), ParseError);
    auto f = scenario_from_json(read_json_file(std::string(TEST_DATA_DIR) + "/rl_lethal.scenario.json"));
    EXPECT_DOUBLE_EQ(f.param("delta2"), 0.5);
    EXPECT_EQ(scenario_catalog().size(), 5u);
}

TEST(Eset, FiniteTimeCriteria) {
    Scenario s = Scenario::rl_lethal(0, 0.3, 0.1, 0);
    EXPECT_EQ(classify_eset(State({0, 1}, {1}), s).kind, EsetKind::Infinite_Odd);
    EXPECT_EQ(classify_eset(State({1, 0}, {1}), s).kind, EsetKind::Infinite_Even);
    auto f = classify_eset(State({0.3, 0.3}, {0.4}), Scenario::rl_lethal(0.2, 0.3, 0.1, 0.5));
    EXPECT_EQ(f.kind, EsetKind::Finite);
    EXPECT_EQ(f.t0, 0);
    auto g = classify_eset(State({0.5, 0}, {0.5}), Scenario::rl_lethal(0.5, 0, 0.2, 0.3));
    EXPECT_EQ(g.kind, EsetKind::Infinite_AllPositiveSteps);
    auto h = classify_eset(State({0.5, 0}, {0.5}), Scenario::rl_lethal(0.2, 0.3, 0.1, 0.5));
    EXPECT_EQ(h.kind, EsetKind::Finite);
    EXPECT_EQ(h.t0, 1);
}

TEST(Eset, MaleExtinction) {
    // γ = 0 with x2 = 0 kills the males after one step
    EXPECT_THROW(classify_eset(State({0.5, 0}, {0.5}), Scenario::rl_lethal(0.5, 0.5, 0.1, 0.2)), MaleExtinction);
}

TEST(Eset, AgreesWithBruteForce) {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0, 1);
    std::bernoulli_distribution zero(0.35);
    int compared = 0;
    for (int draw = 0; draw < 300; ++draw) {
        double p[4];
        for (double& v : p) v = zero(rng) ? 0.0 : u(rng);
        if (p[0] + p[1] > 1) p[1] = 1 - p[0];
        if (p[2] + p[3] > 1) p[3] = 1 - p[2];
        State z({zero(rng) ? 0.0 : u(rng), zero(rng) ? 0.0 : u(rng)}, {u(rng)});
        auto brute = oracle::brute_eset(z, p[0], p[1], p[2], p[3]);
        Scenario s = Scenario::rl_lethal(p[0], p[1], p[2], p[3]);
        if (brute.male_extinct) {
            EXPECT_THROW(classify_eset(z, s), MaleExtinction);
            continue;
        }
        auto c = classify_eset(z, s);
        EXPECT_EQ(to_string(c.kind), brute.kind) << draw;
        if (brute.kind == "Finite") EXPECT_EQ(c.t0, brute.t0);
        ++compared;
    }
    EXPECT_GT(compared, 150);
}

TEST(PredictType21, Gamma2ZeroBranch) {
    Scenario s = Scenario::rl_lethal(0.5, 0, 0.2, 0.3);
    State z0({0.5, 0}, {0.5});
    auto cls = classify_eset(z0, s);
    auto p = predict_limit_type21(z0, s, cls);
    EXPECT_EQ(p.w_limit, WLimit::Zero);
    ASSERT_TRUE(p.v_limit);
    EXPECT_LT(l1_distance(*p.v_limit, State({0.5, 0}, {0.5})), 1e-15);
    EXPECT_LT(l1_distance(iterate_v(z0, build_algebra(s), 2), *p.v_limit), 1e-12);
}

TEST(PredictType21, InfiniteOddAlternates) {
    Scenario s = Scenario::rl_lethal(0, 0.3, 0.1, 0);
    State z0({0, 0.5}, {0.5});
    auto p = predict_limit_type21(z0, s, classify_eset(z0, s));
    ASSERT_EQ(p.v_cycle.size(), 2u);
    auto spec = build_algebra(s);
    EXPECT_LT(l1_distance(iterate_v(z0, spec, 1), State({0.1, 0}, {0.9})), 1e-15);
    EXPECT_LT(l1_distance(iterate_v(z0, spec, 2), State({0, 0.3}, {0.7})), 1e-15);
    EXPECT_LT(l1_distance(p.v_cycle[0], State({0.1, 0}, {0.9})), 1e-15);
    // threshold 1/∛(γ2 δ1² γ δ²)
    EXPECT_NEAR(*p.threshold, 1.0 / std::cbrt(0.3 * 0.01 * 0.7 * 0.81), 1e-12);
}

TEST(PredictType21, InfiniteTrichotomyAndBoundaryOrbit) {
    Scenario s = Scenario::rl_lethal(0, 0.3, 0.1, 0);
    auto spec = build_algebra(s);
    const double thr = 1.0 / std::cbrt(0.3 * 0.01 * 0.7 * 0.81);
    for (double f : {0.5, 2.0}) {
        State z0({0, thr * f}, {1});
        auto p = predict_limit_type21(z0, s, classify_eset(z0, s));
        auto tr = iterate(z0, spec, Operator::W);
        if (f < 1)
            EXPECT_TRUE(tr.outcome.kind == OutcomeKind::ConvergedTo || tr.outcome.kind == OutcomeKind::NumericallyExtinct);
        else
            EXPECT_EQ(tr.outcome.kind, OutcomeKind::Divergent);
        EXPECT_EQ(p.w_limit, f < 1 ? WLimit::Zero : WLimit::Infinity);
    }
    State z0({0, thr}, {1});
    auto p = predict_limit_type21(z0, s, classify_eset(z0, s));
    EXPECT_TRUE(p.boundary);
    State w = oracle::w21(z0, 0, 0.3, 0.1, 0);
    EXPECT_LT(l1_distance(w, p.w_boundary_orbit[0]) / l1_norm(w), 1e-12);
    w = oracle::w21(w, 0, 0.3, 0.1, 0);
    EXPECT_LT(l1_distance(w, p.w_boundary_orbit[1]) / l1_norm(w), 1e-12);
}

TEST(PredictType21, FiniteAllPointTwo) {
    Scenario s = Scenario::rl_lethal(0.2, 0.2, 0.2, 0.2);
    std::mt19937_64 rng(5);
    State z0 = oracle::random_simplex(2, 1, rng);
    auto p = predict_limit_type21(z0, s, classify_eset(z0, s));
    EXPECT_NEAR(p.lambda1, 0.0, 1e-15);
    EXPECT_NEAR(p.lambda2, 0.4, 1e-15);
    EXPECT_EQ(p.selected, 1);
    EXPECT_LT(l1_distance(iterate_v(z0, build_algebra(s), 100), *p.v_limit), 1e-6);
}

TEST(PredictType21, DeltaZeroBranchLimits) {
    // γ1 = δ2, γ2 = 0, δ1 ≠ 0
    {
        Scenario s = Scenario::rl_lethal(0.3, 0, 0.2, 0.3);
        State z0({0.2, 0.3}, {0.5});
        auto p = predict_limit_type21(z0, s, classify_eset(z0, s));
        EXPECT_LT(l1_distance(*p.v_limit, State({0.3, 0}, {0.7})), 1e-15);
        // double eigenvalue: x2/x1 decays like 1/t
        double e400 = l1_distance(iterate_v(z0, build_algebra(s), 400), *p.v_limit);
        double e4000 = l1_distance(iterate_v(z0, build_algebra(s), 4000), *p.v_limit);
        EXPECT_LT(e400, 5e-3);
        EXPECT_NEAR(e400 / e4000, 10.0, 0.2);
    }
    // γ2 = δ1 = 0: limit depends on the start
    {
        Scenario s = Scenario::rl_lethal(0.3, 0, 0, 0.3);
        State z0({0.2, 0.3}, {0.5});
        auto p = predict_limit_type21(z0, s, classify_eset(z0, s));
        EXPECT_LT(l1_distance(iterate_v(z0, build_algebra(s), 5), *p.v_limit), 1e-12);
    }
}

TEST(PredictType21, EqualModulus) {
    // γ1 = δ2 = 0 and γ2δ1 > 0 give λ = ±√(γ2δ1)
    Scenario s = Scenario::rl_lethal(0, 0.3, 0.1, 0);
    State z0({0.3, 0.3}, {0.4});
    EXPECT_THROW(predict_limit_type21(z0, s, classify_eset(z0, s)), EqualModulusEigenvalues);
}

TEST(PredictType21, LambdaModuliBelowOne) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0, 1);
    for (int k = 0; k < 200; ++k) {
        double g1 = u(rng), g2 = u(rng) * (1 - g1), d1 = u(rng), d2 = u(rng) * (1 - d1);
        Scenario s = Scenario::rl_lethal(g1, g2, d1, d2);
        State z0 = oracle::random_simplex(2, 1, rng);
        auto p = predict_limit_type21(z0, s, classify_eset(z0, s));
        EXPECT_LT(std::abs(p.lambda1), 1.0);
        EXPECT_LT(std::abs(p.lambda2), 1.0);
        EXPECT_LE(p.lambda1, p.lambda2);
    }
}

TEST(PredictType21, MismatchedClassificationRejected) {
    Scenario s = Scenario::rl_lethal(0.2, 0.3, 0.1, 0.5);
    EsetClassification wrong;
    wrong.kind = EsetKind::Infinite_Odd;
    EXPECT_THROW(predict_limit_type21(State({0.3, 0.3}, {0.4}), s, wrong), InvalidParameter);
}

TEST(Type11, ClosedFormTrajectory) {
    EXPECT_EQ(closed_form_trajectory_type11(State({2}, {2}), 0.5, 5), State({2}, {2}));
    State t3 = closed_form_trajectory_type11(State({1}, {1}), 0.5, 3);
    // (1,1) -> (0.5,0.5) -> (0.125,0.125) -> (0.0078125,0.0078125)
    EXPECT_DOUBLE_EQ(t3.x[0], 0.0078125);
    EXPECT_DOUBLE_EQ(t3.y[0], 0.0078125);
    State direct = oracle::iterate_W(State({1}, {1}), lr_spec(0.5), 3);
    EXPECT_LE(oracle::rel_err(t3.x[0], direct.x[0]), 1e-12);
    EXPECT_TRUE(is_exact_zero(closed_form_trajectory_type11(State({0}, {1}), 0.5, 2)));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, 3);
    for (int k = 0; k < 50; ++k) {
        double g = 0.05 + 0.9 * u(rng) / 3;
        State z({u(rng)}, {u(rng)});
        for (int t = 1; t <= 6; ++t) {
            State cf = closed_form_trajectory_type11(z, g, t);
            State it = oracle::iterate_W(z, lr_spec(g), t);
            if (it.x[0] < 1e-290 || it.x[0] > 1e290) continue;
            EXPECT_LE(oracle::rel_err(cf.x[0], it.x[0]), 1e-10);
            EXPECT_LE(oracle::rel_err(cf.y[0], it.y[0]), 1e-10);
        }
    }
}

TEST(Type11, Trichotomy) {
    auto below = predict_limit_type11(State({1}, {1}), 0.5);
    EXPECT_EQ(below.w_limit, WLimit::Zero);
    auto at = predict_limit_type11(State({2}, {2}), 0.5);
    EXPECT_TRUE(at.boundary);
    EXPECT_EQ(at.w_limit, WLimit::FixedPoint);
    EXPECT_EQ(predict_limit_type11(State({3}, {3}), 0.5).w_limit, WLimit::Infinity);
    EXPECT_NEAR(*below.threshold, 4.0, 1e-15);
}

TEST(Hemophilia, Lyapunov) {
    EXPECT_EQ(hemophilia_lyapunov(State::zero(2, 2)), 0.0);
    std::mt19937_64 rng(4);
    for (int k = 0; k < 50; ++k) {
        auto spec = hemophilia_spec(0.3, 0.6);
        State z = oracle::random_simplex(2, 2, rng);
        double prev = hemophilia_lyapunov(z);
        for (int n = 1; n <= 8; ++n) {
            z = apply_W(z, spec);
            double f = hemophilia_lyapunov(z);
            EXPECT_LE(f, prev);
            EXPECT_LE(f, std::pow(0.25, std::ldexp(1.0, n)) * (1 + 1e-12));
            prev = f;
        }
    }
}

TEST(Hemophilia, DegenerateExtinction) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0, 5);
    for (int k = 0; k < 20; ++k) {
        State z({u(rng), u(rng)}, {u(rng), u(rng)});
        EXPECT_TRUE(is_exact_zero(oracle::iterate_W(z, hemophilia_spec(1, 1), 2)));
        EXPECT_TRUE(is_exact_zero(oracle::iterate_W(z, hemophilia_spec(1, 0.5), 3)));
    }
    EXPECT_EQ(hemophilia_degenerate_limits(State({1, 1}, {1, 1}), 1, 1).zero_from, 2);
    EXPECT_EQ(hemophilia_degenerate_limits(State({1, 1}, {1, 1}), 1, 0.5).zero_from, 3);
    EXPECT_THROW(hemophilia_degenerate_limits(State({1, 1}, {1, 1}), 0.5, 0.5), UncoveredCase);
}

TEST(Hemophilia, MuOneConstancy) {
    std::mt19937_64 rng(7);
    auto spec = hemophilia_spec(0.5, 1);
    for (int k = 0; k < 20; ++k) {
        State z = oracle::random_simplex(2, 2, rng);
        auto p = hemophilia_degenerate_limits(z, 0.5, 1);
        EXPECT_LT(l1_distance(p.v_state, State({0, 0.2}, {0.2, 0.6})), 1e-15);
        State v = z;
        for (int n = 1; n <= 6; ++n) {
            v = apply_V(v, spec);
            if (n >= 2) EXPECT_LT(l1_distance(v, p.v_state), 1e-12);
        }
    }
}

TEST(Hemophilia, MuOneGrowthIndexAndBoundary) {
    const double mu = 0.25;
    auto spec = hemophilia_spec(mu, 1);
    auto fp = hemophilia_degenerate_limits(State({0.1, 0.2}, {0.3, 0.4}), mu, 1).fixed_point;
    EXPECT_LT(l1_distance(apply_W(fp, spec), fp), 1e-12);
    // scaling a start scales Q1 quadratically; pick the start on the boundary
    State z({0.1, 0.2}, {0.3, 0.4});
    double g = hemophilia_degenerate_limits(z, mu, 1).growth_index;
    State zb = z * std::pow(1.0 / g, 0.25);
    auto p = hemophilia_degenerate_limits(zb, mu, 1);
    EXPECT_TRUE(p.boundary);
    State w3 = oracle::iterate_W(zb, spec, 3);
    EXPECT_LT(l1_distance(w3, fp) / l1_norm(fp), 1e-9);
    for (double f : {0.5, 1.5}) {
        State zs = z * std::pow(f / g, 0.25);
        auto q = hemophilia_degenerate_limits(zs, mu, 1);
        auto tr = iterate(zs, spec, Operator::W);
        if (f < 1) {
            EXPECT_EQ(q.w_limit, WLimit::Zero);
            EXPECT_NE(tr.outcome.kind, OutcomeKind::Divergent);
        } else {
            EXPECT_EQ(q.w_limit, WLimit::Infinity);
            EXPECT_EQ(tr.outcome.kind, OutcomeKind::Divergent);
        }
    }
}
