#include <gtest/gtest.h>

#include <random>

#include "gonosomal/fixed_points.hpp"
#include "gonosomal/scenarios.hpp"
#include "oracles.hpp"

using namespace gonosomal;

namespace {

AlgebraSpec lr(double g) { return AlgebraSpec(1, 1, {g}, {1 - g}); }

FixedPointRecord w_point(const State& z, const AlgebraSpec& spec) {
    FixedPointRecord r;
    r.point = z;
    populate(r, spec);
    return r;
}

bool contains(const std::vector<FixedPointRecord>& recs, const State& z, double tol = 1e-9) {
    for (const auto& r : recs)
        if (r.family ? r.family->distance(z) < tol : l1_distance(r.point, z) < tol) return true;
    return false;
}

double w_residual(const State& z, const AlgebraSpec& spec) { return l1_distance(oracle::W(z, spec), z); }

}  // namespace

TEST(JacobianW, ZeroAtOriginAndLrExample) {
    auto spec = random_stochastic(2, 2, 1);
    EXPECT_EQ(jacobian_W(State::zero(2, 2), spec).norm(), 0.0);
    Eigen::MatrixXd J = jacobian_W(State({2}, {2}), lr(0.5));
    EXPECT_TRUE(J.isApprox(Eigen::MatrixXd::Ones(2, 2)));
    auto ev = eigenvalues(J);
    EXPECT_NEAR(std::abs(ev[0]), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(ev[1]), 2.0, 1e-14);
    EXPECT_EQ(classify_spectrum(ev), Stability::Unstable);
}

TEST(JacobianW, MatchesFiniteDifferences) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0, 3);
    for (int s = 0; s < 100; ++s) {
        auto spec = random_stochastic(1 + s % 3, 1 + (s / 3) % 3, s);
        Eigen::VectorXd z(spec.dim());
        for (int i = 0; i < spec.dim(); ++i) z[i] = u(rng);
        auto f = [&](const Eigen::VectorXd& v) { return oracle::W(State::from_flat(v, spec.n()), spec).flat(); };
        Eigen::MatrixXd fd = oracle::fd_jacobian(f, z);
        Eigen::MatrixXd J = jacobian_W(State::from_flat(z, spec.n()), spec);
        EXPECT_LE((J - fd).norm(), 1e-5 * std::max(1.0, fd.norm()));
    }
}

TEST(JacobianV, AnalyticAgreesWithDifferences) {
    std::mt19937_64 rng(3);
    auto spec = random_stochastic(2, 2, 4);
    State z = oracle::random_simplex(2, 2, rng);
    auto f = [&](const Eigen::VectorXd& v) { return apply_V(State::from_flat(v, 2), spec).flat(); };
    Eigen::MatrixXd fd = oracle::fd_jacobian(f, z.flat());
    EXPECT_LE((jacobian_V_analytic(z, spec) - fd).norm(), 1e-6);
}

TEST(Classify, Bands) {
    using C = std::complex<double>;
    EXPECT_EQ(classify_spectrum({C(0.5, 0), C(0, 0.9)}), Stability::ExponentiallyStable);
    EXPECT_EQ(classify_spectrum({C(1.0 + 1e-10, 0)}), Stability::Marginal);
    EXPECT_EQ(classify_spectrum({C(0.2, 0), C(-1.1, 0)}), Stability::Unstable);
    EXPECT_DOUBLE_EQ(spectral_radius({C(3, 4), C(1, 0)}), 5.0);
}

TEST(Numeric, LrWAndV) {
    auto w = solve_fixed_points_numeric(lr(0.5), Operator::W, 3, 1);
    ASSERT_EQ(w.size(), 2u);
    EXPECT_TRUE(contains(w, State({0}, {0})));
    EXPECT_TRUE(contains(w, State({2}, {2})));
    for (const auto& r : w) EXPECT_LT(r.residual, 1e-10);
    auto v = solve_fixed_points_numeric(lr(0.5), Operator::V, 3, 1);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_LT(l1_distance(v[0].point, State({0.5}, {0.5})), 1e-10);
}

TEST(Numeric, HemophiliaMuZeroEtaOne) {
    SolverDiagnostics diag;
    auto w = solve_fixed_points_numeric(hemophilia_spec(0, 1), Operator::W, 2, 5, &diag);
    auto closed = closed_form_fixed_points_hemophilia(0, 1);
    auto m = match_fixed_point_sets(closed, w);
    EXPECT_TRUE(m.matched) << m.max_mismatch;
    EXPECT_TRUE(contains(w, State({0, 1.5}, {1.5, 1.5})));
    EXPECT_EQ(diag.omega_violations, 0);
    EXPECT_EQ(diag.starts, diag.converged + diag.dropped);
}

TEST(Numeric, DetectsFamily) {
    auto w = solve_fixed_points_numeric(type21_spec(0.3, 0, 0, 0.3), Operator::W, 3, 2);
    int families = 0;
    for (const auto& r : w)
        if (r.family) {
            ++families;
            for (double s : {-0.1, 0.05, 0.1}) EXPECT_LT(w_residual(r.family->at(s), type21_spec(0.3, 0, 0, 0.3)), 1e-10);
        }
    EXPECT_EQ(families, 1);
    EXPECT_TRUE(contains(w, State({1 / 0.7 - 0.4, 0.4}, {1 / 0.3}), 1e-8));
}

TEST(Numeric, NonNegativeRootsHaveOmegaAtLeastFour) {
    for (std::uint64_t s = 0; s < 20; ++s) {
        SolverDiagnostics diag;
        auto spec = random_stochastic(1 + s % 2, 1 + (s / 2) % 2, 300 + s);
        auto w = solve_fixed_points_numeric(spec, Operator::W, 2, s, &diag);
        EXPECT_EQ(diag.omega_violations, 0);
        for (const auto& r : w) EXPECT_LT(residual(Operator::W, r.point, spec), 1e-10);
    }
}

TEST(Type11, Points) {
    auto r = closed_form_fixed_points_type11(0.5);
    ASSERT_EQ(r.size(), 2u);
    EXPECT_EQ(r[1].point, State({2}, {2}));
    auto q = closed_form_fixed_points_type11(0.25);
    EXPECT_NEAR(q[1].point.x[0], 4.0 / 3.0, 1e-15);
    EXPECT_NEAR(q[1].point.y[0], 4.0, 1e-15);
    EXPECT_LT(w_residual(q[1].point, lr(0.25)), 1e-12);
    EXPECT_THROW(closed_form_fixed_points_type11(1.0), DegenerateParameter);
    EXPECT_THROW(closed_form_fixed_points_type11(0.0), DegenerateParameter);
}

struct CaseInstance {
    const char* label;
    double g1, g2, d1, d2;
    std::vector<State> expect;  // isolated nonzero points
};

class Type21Cases : public ::testing::TestWithParam<CaseInstance> {};

TEST_P(Type21Cases, PointsLabelsResiduals) {
    const auto& c = GetParam();
    auto spec = type21_spec(c.g1, c.g2, c.d1, c.d2);
    auto recs = closed_form_fixed_points_type21(c.g1, c.g2, c.d1, c.d2);
    EXPECT_TRUE(contains(recs, State({0, 0}, {0})));
    for (const auto& r : recs) {
        EXPECT_LT(w_residual(r.point, spec), 1e-10);
        if (r.label != "origin") EXPECT_EQ(r.label, c.label);
    }
    for (const auto& z : c.expect) EXPECT_TRUE(contains(recs, z, 1e-9)) << to_string(z);
    auto numeric = solve_fixed_points_numeric(spec, Operator::W, 3, 9);
    auto m = match_fixed_point_sets(recs, numeric);
    EXPECT_TRUE(m.matched) << c.label << " mismatch " << m.max_mismatch;
}

INSTANTIATE_TEST_SUITE_P(
    Table, Type21Cases,
    ::testing::Values(CaseInstance{"1.1", 0.4, 0, 0.3, 0, {State({1 / 0.6, 0}, {2.5})}},
                      CaseInstance{"1.2", 0, 0.3, 0, 0.4, {State({0, 1 / 0.6}, {2.5})}},
                      CaseInstance{"1.3", 0.2, 0.1, 0.4, 0.2, {State({2.0 / 1.8, 1.0 / 1.8}, {2.5})}},
                      CaseInstance{"1.4", 0, 0, 0.2, 0.3, {State({0.2 / 0.35, 0.3 / 0.35}, {1 / 0.3})}},
                      CaseInstance{"2.1", 0.3, 0, 0, 0.3, {State({1 / 0.7, 0}, {1 / 0.3})}},
                      CaseInstance{"2.2", 0.2, 0, 0, 0.4, {State({1 / 0.8, 0}, {5}), State({0, 1 / 0.6}, {2.5})}},
                      CaseInstance{"2.3", 0.3, 0.2, 0, 0.3, {State({0, 1 / 0.7}, {1 / 0.3})}},
                      CaseInstance{"2.4", 0.5, 0.2, 0, 0.3, {State({1, 1}, {2}), State({0, 1 / 0.7}, {1 / 0.3})}},
                      CaseInstance{"2.5", 0.3, 0, 0.2, 0.3, {State({1 / 0.7, 0}, {1 / 0.3})}},
                      CaseInstance{"2.6", 0.3, 0, 0.2, 0.5, {State({1 / 0.7, 0}, {1 / 0.3}), State({1, 1}, {2})}},
                      CaseInstance{"2.7", 0.2, 0.3, 0.1, 0.5, {}}),
    [](const auto& info) {
        std::string s = info.param.label;
        s[1] = '_';
        return "case_" + s;
    });

TEST(Type21, QuadraticRootsOfCase27) {
    const double g1 = 0.2, g2 = 0.3, d1 = 0.1, d2 = 0.5, D = g1 * d2 - g2 * d1;
    auto recs = closed_form_fixed_points_type21(g1, g2, d1, d2);
    ASSERT_EQ(recs.size(), 3u);
    // y solves D y² − (g1+d2) y + 1 = 0
    double disc = (g1 + d2) * (g1 + d2) - 4 * D;
    std::vector<double> roots{((g1 + d2) + std::sqrt(disc)) / (2 * D), ((g1 + d2) - std::sqrt(disc)) / (2 * D)};
    for (const auto& r : recs) {
        if (r.label != "2.7") continue;
        double y = r.point.y[0];
        EXPECT_NEAR(std::min(std::abs(y - roots[0]), std::abs(y - roots[1])), 0.0, 1e-10);
    }
}

TEST(Type21, AllPointTwoHasVanishingDeterminant) {
    // every coefficient 0.2 gives g1·d2 − g2·d1 = 0, so it is a Case-1 instance
    auto recs = closed_form_fixed_points_type21(0.2, 0.2, 0.2, 0.2);
    ASSERT_EQ(recs.size(), 2u);
    EXPECT_EQ(recs[1].label, "1.3");
    EXPECT_LT(w_residual(recs[1].point, type21_spec(0.2, 0.2, 0.2, 0.2)), 1e-12);
}

TEST(Type21, MissingRootIsNoted) {
    // γ = δ makes one root of the case-2.7 quadratic leave the finite plane
    std::vector<std::string> notes;
    auto recs = closed_form_fixed_points_type21(0.2, 0.3, 0.1, 0.4, &notes);
    EXPECT_EQ(recs.size(), 2u);
    ASSERT_EQ(notes.size(), 1u);
    EXPECT_NE(notes[0].find("no finite point"), std::string::npos);
}

TEST(Hemophilia, ClosedForms) {
    EXPECT_EQ(closed_form_fixed_points_hemophilia(1, 1).size(), 1u);
    EXPECT_EQ(closed_form_fixed_points_hemophilia(1, 0.5).size(), 1u);
    auto r = closed_form_fixed_points_hemophilia(0, 1);
    ASSERT_EQ(r.size(), 2u);
    EXPECT_EQ(r[1].point, State({0, 1.5}, {1.5, 1.5}));
    for (double mu : {0.0, 0.25, 0.5, 0.75}) {
        auto p = closed_form_fixed_points_hemophilia(mu, 1);
        EXPECT_LT(w_residual(p[1].point, hemophilia_spec(mu, 1)), 1e-12);
    }
    EXPECT_THROW(closed_form_fixed_points_hemophilia(0.5, 0.5), UncoveredCase);
}

TEST(Idempotent, Correspondence) {
    auto e = idempotent_correspondence(w_point(State({2}, {2}), lr(0.5)), lr(0.5));
    EXPECT_EQ(e, State({1}, {1}));
    EXPECT_EQ(oracle::multiply(e, e, lr(0.5)), e);
    EXPECT_TRUE(is_exact_zero(idempotent_correspondence(w_point(State({0}, {0}), lr(0.5)), lr(0.5))));
    auto h = hemophilia_spec(0, 1);
    auto he = idempotent_correspondence(closed_form_fixed_points_hemophilia(0, 1)[1], h);
    EXPECT_LT(l1_distance(oracle::multiply(he, he, h), he), 1e-12);
    EXPECT_THROW(idempotent_correspondence(w_point(State({1}, {1}), lr(0.5)), lr(0.5)), NotIdempotent);
}

TEST(Normalize, Examples) {
    State v = normalize_fixed_point(w_point(State({2}, {2}), lr(0.5)));
    EXPECT_EQ(v, State({0.5}, {0.5}));
    EXPECT_LT(l1_distance(apply_V(v, lr(0.5)), v), 1e-12);
    EXPECT_THROW(normalize_fixed_point(w_point(State({0}, {0}), lr(0.5))), NotNormalizable);
    auto h = closed_form_fixed_points_hemophilia(0, 1)[1];
    State hv = normalize_fixed_point(h);
    EXPECT_LT(l1_distance(hv, State({0, 1.0 / 3}, {1.0 / 3, 1.0 / 3})), 1e-15);
    State back = denormalize_fixed_point(hv, hemophilia_spec(0, 1));
    EXPECT_LT(l1_distance(back, h.point), 1e-12);
}

TEST(Transfer, LrConverseFailure) {
    auto rep = stability_transfer_check(w_point(State({2}, {2}), lr(0.5)), lr(0.5));
    EXPECT_NEAR(rep.w_spectral_radius, 2.0, 1e-12);
    EXPECT_NEAR(rep.v_spectral_radius, 0.0, 1e-6);
    EXPECT_EQ(rep.stability_w, Stability::Unstable);
    EXPECT_EQ(rep.stability_v, Stability::ExponentiallyStable);
    EXPECT_TRUE(rep.consistent);
    EXPECT_TRUE(rep.converse_failure);
}

TEST(Transfer, SweepNeverContradicts) {
    for (std::uint64_t s = 0; s < 20; ++s) {
        auto spec = random_stochastic(1 + s % 2, 1 + (s / 2) % 2, 700 + s);
        for (const auto& r : solve_fixed_points_numeric(spec, Operator::W, 2, s)) {
            try {
                EXPECT_TRUE(stability_transfer_check(r, spec).consistent);
            } catch (const NotNormalizable&) {
            }
        }
    }
}

TEST(Json, RecordFields) {
    auto j = to_json(closed_form_fixed_points_type21(0.3, 0, 0, 0.3));
    ASSERT_EQ(j.size(), 2u);
    EXPECT_TRUE(j[1].contains("family"));
    EXPECT_TRUE(j[1].contains("w_eigenvalues"));
    EXPECT_EQ(j[1]["case"], "2.1");
}
