#include "gonosomal/scenarios.hpp"

#include <algorithm>
#include <cmath>

#include "gonosomal/dynamics.hpp"

namespace gonosomal {

namespace {

constexpr double kEq = 1e-12;
bool zero(double v) { return std::abs(v) <= kEq; }

void in_unit(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidParameter(std::string(name) + " = " + std::to_string(v) + " is outside [0,1]");
}

}  // namespace

const std::vector<ScenarioInfo>& scenario_catalog() {
    static const std::vector<ScenarioInfo> cat = {
        {ScenarioKind::DominantLethal_LethalMale, "lr_lethal", {"gamma"},
         "dominant lethal allele, carrier males die; type (1,1), e e~ = gamma e + (1-gamma) e~"},
        {ScenarioKind::DominantLethal_Mutation, "lr_mutation", {"mu", "eta"},
         "dominant lethal with mutation rates; type (1,1) with gamma = (1-eta)/(2-eta)"},
        {ScenarioKind::RecessiveLethal_LethalMale, "rl_lethal", {"gamma1", "gamma2", "delta1", "delta2"},
         "recessive lethal allele, affected males die; type (2,1)"},
        {ScenarioKind::RecessiveLethal_NonlethalMale, "hemophilia", {"mu", "eta"},
         "recessive allele lethal in homozygous females only (hemophilia); type (2,2)"},
        {ScenarioKind::XicInactivation, "xic_inactivation", {"gamma1", "gamma2", "delta1", "delta2"},
         "opposite algebra of rl_lethal; type (1,2)"},
    };
    return cat;
}

const ScenarioInfo& scenario_info(ScenarioKind kind) {
    for (const auto& s : scenario_catalog())
        if (s.kind == kind) return s;
    throw InvalidParameter("unknown scenario kind");
}

Scenario Scenario::from_tag(const std::string& tag, const std::map<std::string, double>& params) {
    for (const auto& info : scenario_catalog()) {
        if (info.tag != tag) continue;
        for (const auto& [k, v] : params)
            if (std::find(info.params.begin(), info.params.end(), k) == info.params.end())
                throw InvalidParameter("scenario " + tag + " has no parameter '" + k + "'");
        for (const auto& k : info.params)
            if (!params.count(k)) throw InvalidParameter("scenario " + tag + " needs parameter '" + k + "'");
        Scenario s{info.kind, params};
        build_algebra(s);  // range checks
        return s;
    }
    throw InvalidParameter("unknown scenario '" + tag + "'");
}

Scenario Scenario::lr_lethal(double gamma) { return from_tag("lr_lethal", {{"gamma", gamma}}); }
Scenario Scenario::lr_mutation(double mu, double eta) { return from_tag("lr_mutation", {{"mu", mu}, {"eta", eta}}); }
Scenario Scenario::rl_lethal(double g1, double g2, double d1, double d2) {
    return from_tag("rl_lethal", {{"gamma1", g1}, {"gamma2", g2}, {"delta1", d1}, {"delta2", d2}});
}
Scenario Scenario::hemophilia(double mu, double eta) { return from_tag("hemophilia", {{"mu", mu}, {"eta", eta}}); }
Scenario Scenario::xic(double g1, double g2, double d1, double d2) {
    return from_tag("xic_inactivation", {{"gamma1", g1}, {"gamma2", g2}, {"delta1", d1}, {"delta2", d2}});
}

double Scenario::param(const std::string& name) const {
    auto it = params.find(name);
    if (it == params.end()) throw InvalidParameter("scenario " + tag() + " has no parameter '" + name + "'");
    return it->second;
}

Scenario scenario_from_json(const json& doc) {
    if (!doc.is_object() || !doc.contains("scenario") || !doc.at("scenario").is_string())
        throw ParseError("scenario document needs a string field 'scenario'");
    std::map<std::string, double> params;
    if (doc.contains("params")) {
        if (!doc.at("params").is_object()) throw ParseError("'params' must be an object");
        for (const auto& [k, v] : doc.at("params").items()) {
            if (!v.is_number()) throw ParseError("parameter '" + k + "' must be a number");
            params[k] = v.get<double>();
        }
    }
    return Scenario::from_tag(doc.at("scenario").get<std::string>(), params);
}

json to_json(const Scenario& s) { return json{{"scenario", s.tag()}, {"params", s.params}}; }

AlgebraSpec lr_spec(double gamma) {
    in_unit(gamma, "gamma");
    return AlgebraSpec(1, 1, {gamma}, {1.0 - gamma});
}

AlgebraSpec type21_spec(double g1, double g2, double d1, double d2) {
    in_unit(g1, "gamma1");
    in_unit(g2, "gamma2");
    in_unit(d1, "delta1");
    in_unit(d2, "delta2");
    double ga = 1.0 - g1 - g2, de = 1.0 - d1 - d2;
    if (ga < -kEq) throw InvalidParameter("gamma = 1 - gamma1 - gamma2 is negative");
    if (de < -kEq) throw InvalidParameter("delta = 1 - delta1 - delta2 is negative");
    // e1 e~ = g1 e1 + g2 e2 + gamma e~ ; e2 e~ = d1 e1 + d2 e2 + delta e~
    return AlgebraSpec(2, 1, {g1, g2, d1, d2}, {std::max(ga, 0.0), std::max(de, 0.0)});
}

AlgebraSpec hemophilia_spec(double mu, double eta) {
    in_unit(mu, "mu");
    in_unit(eta, "eta");
    const double m = mu, e = eta;
    // rows e1e~1, e1e~2, e2e~1, e2e~2 as (x1, x2, y1, y2)
    const double r11[4] = {(1 - m) * (1 - e), m + e - 2 * m * e, 1 - m, m};
    const double r12[4] = {0, 1 - m, 1 - m, m};
    const double r21[4] = {(1 - m) * (1 - e), 1 + m - 2 * m * e, 1 - m, 1 + m};
    const double r22[4] = {0, 1 - m, 1 - m, 1 + m};
    const double den[4] = {2 - m * e, 2 - m, 4 - (1 + m) * e, 3 - m};
    const double* rows[4] = {r11, r12, r21, r22};
    std::vector<double> g, gt;
    for (int row = 0; row < 4; ++row) {
        g.push_back(rows[row][0] / den[row]);
        g.push_back(rows[row][1] / den[row]);
        gt.push_back(rows[row][2] / den[row]);
        gt.push_back(rows[row][3] / den[row]);
    }
    return AlgebraSpec(2, 2, g, gt);
}

AlgebraSpec build_algebra(const Scenario& s) {
    switch (s.kind) {
        case ScenarioKind::DominantLethal_LethalMale: return lr_spec(s.param("gamma"));
        case ScenarioKind::DominantLethal_Mutation: {
            double mu = s.param("mu"), eta = s.param("eta");
            in_unit(mu, "mu");
            in_unit(eta, "eta");
            return lr_spec((1.0 - eta) / (2.0 - eta));
        }
        case ScenarioKind::RecessiveLethal_LethalMale:
            return type21_spec(s.param("gamma1"), s.param("gamma2"), s.param("delta1"), s.param("delta2"));
        case ScenarioKind::RecessiveLethal_NonlethalMale: return hemophilia_spec(s.param("mu"), s.param("eta"));
        case ScenarioKind::XicInactivation:
            return opposite(type21_spec(s.param("gamma1"), s.param("gamma2"), s.param("delta1"), s.param("delta2")));
    }
    throw InvalidParameter("unknown scenario kind");
}

Type21 Type21::of(const Scenario& s) {
    if (s.kind != ScenarioKind::RecessiveLethal_LethalMale)
        throw InvalidParameter("scenario " + s.tag() + " is not the type (2,1) system");
    return {s.param("gamma1"), s.param("gamma2"), s.param("delta1"), s.param("delta2")};
}

// ---- E-set

std::string to_string(EsetKind k) {
    switch (k) {
        case EsetKind::Infinite_AllPositiveSteps: return "Infinite_AllPositiveSteps";
        case EsetKind::Infinite_Even: return "Infinite_Even";
        case EsetKind::Infinite_Odd: return "Infinite_Odd";
        case EsetKind::Finite: return "Finite";
    }
    return "?";
}

std::vector<State> scaled_orbit(const State& z0, const AlgebraSpec& spec, int steps) {
    std::vector<State> out{z0};
    State z = z0;
    for (int t = 1; t <= steps; ++t) {
        z = apply_W(z, spec);
        double mx = 0.0;
        for (double v : z.x) mx = std::max(mx, std::abs(v));
        for (double v : z.y) mx = std::max(mx, std::abs(v));
        if (mx > 0.0 && std::isfinite(mx)) {
            int e;
            std::frexp(mx, &e);
            for (double& v : z.x) v = std::ldexp(v, -e);
            for (double& v : z.y) v = std::ldexp(v, -e);
        }
        out.push_back(z);
    }
    return out;
}

EsetClassification classify_eset(const State& z0, const Scenario& s) {
    Type21 p = Type21::of(s);
    AlgebraSpec spec = build_algebra(s);
    require_shape(z0, spec);
    auto orb = scaled_orbit(z0, spec, kEsetScan);
    for (int t = 0; t <= kEsetScan; ++t)
        if (orb[t].y[0] == 0.0) throw MaleExtinction("y^(" + std::to_string(t) + ") = 0");

    EsetClassification c;
    c.scan = kEsetScan;
    for (int t = 0; t <= kEsetScan; ++t)
        if (orb[t].x[1] == 0.0) c.zeros.push_back(t);
    auto x1 = [&](int t) { return orb[t].x[0]; };
    auto x2 = [&](int t) { return orb[t].x[1]; };

    if (zero(p.g2)) {
        if (x2(1) == 0.0) {
            c.kind = EsetKind::Infinite_AllPositiveSteps;
            return c;
        }
    } else if (x1(0) == 0.0 && x2(1) == 0.0 && x2(3) == 0.0) {
        c.kind = EsetKind::Infinite_Odd;
        return c;
    } else if (x1(1) == 0.0 && x2(0) == 0.0 && x2(2) == 0.0) {
        c.kind = EsetKind::Infinite_Even;
        return c;
    }
    c.kind = EsetKind::Finite;
    c.t0 = c.zeros.empty() ? 0 : c.zeros.back() + 1;
    return c;
}

// ---- limits

std::string to_string(WLimit w) {
    switch (w) {
        case WLimit::Zero: return "zero";
        case WLimit::FixedPoint: return "fixed_point";
        case WLimit::Infinity: return "infinity";
        case WLimit::PeriodicBoundary: return "period_2_boundary";
        case WLimit::NotPredicted: return "not_predicted";
    }
    return "?";
}

std::string to_string(ClosedFormLimit::Branch b) {
    using B = ClosedFormLimit::Branch;
    switch (b) {
        case B::Type11: return "type11_trichotomy";
        case B::InfiniteGamma2Zero: return "e_infinite_gamma2_zero";
        case B::InfiniteOdd: return "e_infinite_odd";
        case B::InfiniteEven: return "e_infinite_even";
        case B::FiniteDeltaZero: return "e_finite_discriminant_zero";
        case B::FiniteDeltaPositive: return "e_finite_discriminant_positive";
    }
    return "?";
}

namespace {

void trichotomy(ClosedFormLimit& out, double product, double threshold, WLimit on_boundary) {
    out.product = product;
    out.threshold = threshold;
    const double a = std::abs(product);
    if (std::abs(a - threshold) <= kEq * threshold) {
        out.boundary = true;
        out.w_limit = on_boundary;
    } else {
        out.w_limit = a < threshold ? WLimit::Zero : WLimit::Infinity;
    }
}

State s21(double x1, double x2, double y) { return State({x1, x2}, {y}); }

}  // namespace

ClosedFormLimit predict_limit_type11(const State& z0, double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidParameter("gamma must lie in (0,1)");
    if (z0.n() != 1 || z0.nu() != 1) throw ShapeMismatch("type (1,1) state expected");
    ClosedFormLimit out;
    out.branch = ClosedFormLimit::Branch::Type11;
    trichotomy(out, z0.x[0] * z0.y[0], 1.0 / (gamma * (1.0 - gamma)), WLimit::FixedPoint);
    out.w_boundary_orbit = {State({1.0 / (1.0 - gamma)}, {1.0 / gamma})};
    out.v_limit = State({gamma}, {1.0 - gamma});
    out.v_exact_from = 1;
    return out;
}

ClosedFormLimit predict_limit_type21(const State& z0, const Scenario& s, const EsetClassification& cls) {
    Type21 p = Type21::of(s);
    AlgebraSpec spec = build_algebra(s);
    EsetClassification own = classify_eset(z0, s);
    if (own.kind != cls.kind || own.t0 != cls.t0)
        throw InvalidParameter("classification " + to_string(cls.kind) + " does not match the start (" +
                               to_string(own.kind) + ")");
    const double g1 = p.g1, g2 = p.g2, d1 = p.d1, d2 = p.d2, ga = p.gamma(), de = p.delta();
    ClosedFormLimit out;
    using B = ClosedFormLimit::Branch;

    switch (cls.kind) {
        case EsetKind::Infinite_AllPositiveSteps: {
            out.branch = B::InfiniteGamma2Zero;
            State z1 = apply_W(z0, spec);
            trichotomy(out, z1.x[0] * z1.y[0], 1.0 / (g1 * (1.0 - g1)), WLimit::FixedPoint);
            out.w_boundary_orbit = {s21(1.0 / (1.0 - g1), 0, 1.0 / g1)};
            out.v_limit = s21(g1, 0, 1.0 - g1);
            out.v_exact_from = 2;
            return out;
        }
        case EsetKind::Infinite_Odd: {
            out.branch = B::InfiniteOdd;
            const double K = g2 * d1 * d1 * ga * de * de;
            const double c = std::cbrt(K);
            trichotomy(out, z0.x[1] * z0.y[0], 1.0 / c, WLimit::PeriodicBoundary);
            out.w_boundary_orbit = {s21(d1 / c, 0, de / c), s21(0, g2 * d1 * de / (c * c), ga * d1 * de / (c * c))};
            out.v_cycle = {s21(d1, 0, 1.0 - d1), s21(0, g2, 1.0 - g2)};
            out.v_exact_from = 1;
            return out;
        }
        case EsetKind::Infinite_Even: {
            out.branch = B::InfiniteEven;
            const double K = g2 * g2 * d1 * ga * ga * de;
            const double c = std::cbrt(K);
            trichotomy(out, z0.x[0] * z0.y[0], 1.0 / c, WLimit::PeriodicBoundary);
            out.w_boundary_orbit = {s21(0, g2 / c, ga / c), s21(d1 * g2 * ga / (c * c), 0, de * g2 * ga / (c * c))};
            out.v_cycle = {s21(0, g2, 1.0 - g2), s21(d1, 0, 1.0 - d1)};
            out.v_exact_from = 1;
            return out;
        }
        case EsetKind::Finite: break;
    }

    out.t0 = cls.t0;
    bool small_start = omega(z0) < 4.0 && std::all_of(z0.x.begin(), z0.x.end(), [](double v) { return v >= 0; }) &&
                       z0.y[0] >= 0;
    out.w_limit = small_start ? WLimit::Zero : WLimit::NotPredicted;
    const State xt = scaled_orbit(z0, spec, cls.t0).back();
    const double x1 = xt.x[0], x2 = xt.x[1];

    if (zero(g1 - d2) && zero(g2 * d1)) {
        out.branch = B::FiniteDeltaZero;
        out.lambda1 = out.lambda2 = g1;
        if (zero(g2) && !zero(d1))
            out.v_limit = s21(g1, 0, ga);
        else if (!zero(g2) && zero(d1))
            out.v_limit = s21(0, d2, de);
        else {
            const double sum = x1 + x2;
            out.v_limit = s21(g1 * x1 / sum, d2 * x2 / sum, (ga * x1 + de * x2) / sum);
        }
        return out;
    }

    out.branch = B::FiniteDeltaPositive;
    const double sq = std::sqrt((g1 - d2) * (g1 - d2) + 4.0 * g2 * d1);
    out.lambda1 = (g1 + d2 - sq) / 2.0;
    out.lambda2 = (g1 + d2 + sq) / 2.0;
    if (std::abs(std::abs(out.lambda1) - std::abs(out.lambda2)) < kEq)
        throw EqualModulusEigenvalues("|lambda1| = |lambda2| = " + std::to_string(std::abs(out.lambda1)));
    out.selected = std::abs(out.lambda1) < std::abs(out.lambda2) ? 1 : 2;
    const double li = out.selected == 1 ? out.lambda1 : out.lambda2;
    const double num = g2 * x1 + (d2 - li) * x2;
    const double den = (g1 - li) * x1 + d1 * x2;
    if (std::abs(den) <= kEq * (std::abs(x1) + std::abs(x2)))
        throw DegenerateDenominator("u(lambda) denominator vanishes at x^(t0) = (" + std::to_string(x1) + ", " +
                                    std::to_string(x2) + ")");
    const double u = num / den;
    const double U = d1 * u * u + (de + d1 + g1) * u + ga + g1;
    out.u = u;
    out.U = U;
    out.v_limit = s21((g1 + d1 * u) / U, u * (g1 + d1 * u) / U, (ga + de * u) / U);
    return out;
}

State closed_form_trajectory_type11(const State& z0, double gamma, int t) {
    if (t <= 0) return z0;
    const double a = gamma * (1.0 - gamma) * z0.x[0] * z0.y[0];
    const double P = std::pow(a, std::ldexp(1.0, t - 1));
    return State({P / (1.0 - gamma)}, {P / gamma});
}

json to_json(const EsetClassification& c) {
    json j{{"kind", to_string(c.kind)}, {"zero_indices", c.zeros}, {"scan", c.scan}};
    if (c.kind == EsetKind::Finite) j["t0"] = c.t0;
    return j;
}

json to_json(const ClosedFormLimit& c) {
    json j{{"branch", to_string(c.branch)}, {"w_limit", to_string(c.w_limit)}, {"boundary", c.boundary}};
    if (c.product) j["product"] = *c.product;
    if (c.threshold) j["threshold"] = *c.threshold;
    if (!c.w_boundary_orbit.empty()) {
        json o = json::array();
        for (const auto& s : c.w_boundary_orbit) o.push_back(to_json(s));
        j["w_boundary_orbit"] = o;
    }
    if (c.v_limit) j["v_limit"] = to_json(*c.v_limit);
    if (!c.v_cycle.empty()) j["v_cycle"] = {{"odd_steps", to_json(c.v_cycle[0])}, {"even_steps", to_json(c.v_cycle[1])}};
    if (c.v_exact_from >= 0) j["v_exact_from"] = c.v_exact_from;
    if (c.branch == ClosedFormLimit::Branch::FiniteDeltaPositive || c.branch == ClosedFormLimit::Branch::FiniteDeltaZero) {
        j["lambda1"] = c.lambda1;
        j["lambda2"] = c.lambda2;
        j["t0"] = c.t0;
    }
    if (c.branch == ClosedFormLimit::Branch::FiniteDeltaPositive) {
        j["selected"] = c.selected;
        j["u"] = c.u;
        j["U"] = c.U;
    }
    return j;
}

// ---- hemophilia

double hemophilia_lyapunov(const State& z) {
    if (z.n() != 2 || z.nu() != 2) throw ShapeMismatch("type (2,2) state expected");
    return (z.x[0] + z.x[1]) * (z.y[0] + z.y[1]);
}

HemophiliaPrediction hemophilia_degenerate_limits(const State& z0, double mu, double eta) {
    AlgebraSpec spec = hemophilia_spec(mu, eta);
    require_shape(z0, spec);
    const bool m1 = zero(mu - 1.0), e1 = zero(eta - 1.0);
    HemophiliaPrediction p;
    using C = HemophiliaPrediction::Case;
    if (m1 && e1) {
        p.which = C::W11;
        p.zero_from = 2;
        p.w_limit = WLimit::Zero;
        return p;
    }
    if (m1) {
        p.which = C::W1eta;
        p.zero_from = 3;
        p.w_limit = WLimit::Zero;
        return p;
    }
    if (!e1) throw UncoveredCase("no closed-form limits for mu < 1 and eta < 1");
    p.which = C::Wmu1;
    const State z1 = apply_W(z0, spec);
    const double q1 = z1.x[1] * (z1.y[0] + z1.y[1]) / (3.0 - mu);
    const double c = 2.0 * (1.0 - mu) / (3.0 - mu);
    p.growth_index = std::abs(c * q1);
    p.threshold = 1.0;
    if (std::abs(p.growth_index - 1.0) <= kEq) {
        p.boundary = true;
        p.w_limit = WLimit::FixedPoint;
    } else {
        p.w_limit = p.growth_index < 1.0 ? WLimit::Zero : WLimit::Infinity;
    }
    const double a = (3.0 - mu) / 2.0;
    p.fixed_point = State({0, a}, {a, (1.0 + mu) * (3.0 - mu) / (2.0 * (1.0 - mu))});
    const double f = (1.0 - mu) / (3.0 - mu);
    p.v_state = State({0, f}, {f, (1.0 + mu) / (3.0 - mu)});
    p.v_constant_from = z0.x[0] == 0.0 ? 1 : 2;
    return p;
}

json to_json(const HemophiliaPrediction& p) {
    using C = HemophiliaPrediction::Case;
    json j{{"case", p.which == C::W11 ? "W_1_1" : p.which == C::W1eta ? "W_1_eta" : "W_mu_1"},
           {"w_limit", to_string(p.w_limit)}};
    if (p.zero_from >= 0) j["zero_from"] = p.zero_from;
    if (p.which == C::Wmu1) {
        j["growth_index"] = p.growth_index;
        j["threshold"] = p.threshold;
        j["boundary"] = p.boundary;
        j["fixed_point"] = to_json(p.fixed_point);
        j["v_state"] = to_json(p.v_state);
        j["v_constant_from"] = p.v_constant_from;
    }
    return j;
}

}  // namespace gonosomal
