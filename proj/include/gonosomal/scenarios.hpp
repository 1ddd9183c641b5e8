#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gonosomal/algebra.hpp"
#include "gonosomal/io.hpp"

namespace gonosomal {

enum class ScenarioKind {
    DominantLethal_LethalMale,
    DominantLethal_Mutation,
    RecessiveLethal_LethalMale,
    RecessiveLethal_NonlethalMale,
    XicInactivation,
};

struct ScenarioInfo {
    ScenarioKind kind;
    std::string tag;
    std::vector<std::string> params;
    std::string description;
};

const std::vector<ScenarioInfo>& scenario_catalog();
const ScenarioInfo& scenario_info(ScenarioKind kind);

struct Scenario {
    ScenarioKind kind;
    std::map<std::string, double> params;

    // InvalidParameter on unknown tag, unknown or missing parameter names
    static Scenario from_tag(const std::string& tag, const std::map<std::string, double>& params);
    static Scenario lr_lethal(double gamma);
    static Scenario lr_mutation(double mu, double eta);
    static Scenario rl_lethal(double g1, double g2, double d1, double d2);
    static Scenario hemophilia(double mu, double eta);
    static Scenario xic(double g1, double g2, double d1, double d2);

    double param(const std::string& name) const;
    const std::string& tag() const { return scenario_info(kind).tag; }
};

Scenario scenario_from_json(const json& doc);
json to_json(const Scenario& s);

AlgebraSpec lr_spec(double gamma);
AlgebraSpec type21_spec(double g1, double g2, double d1, double d2);
AlgebraSpec hemophilia_spec(double mu, double eta);
AlgebraSpec build_algebra(const Scenario& s);

struct Type21 {
    double g1, g2, d1, d2;
    double gamma() const { return 1.0 - g1 - g2; }
    double delta() const { return 1.0 - d1 - d2; }
    static Type21 of(const Scenario& s);
};

// ---- E-set of the type (2,1) system

enum class EsetKind { Infinite_AllPositiveSteps, Infinite_Even, Infinite_Odd, Finite };
std::string to_string(EsetKind k);

struct EsetClassification {
    EsetKind kind = EsetKind::Finite;
    int t0 = 0;
    std::vector<int> zeros;  // indices t <= scan with x2^(t) = 0
    int scan = 64;
};

inline constexpr int kEsetScan = 64;

// zero pattern of W^t(z0) for t = 0..steps, iterated with exact power-of-two rescaling
std::vector<State> scaled_orbit(const State& z0, const AlgebraSpec& spec, int steps);

EsetClassification classify_eset(const State& z0, const Scenario& s);

// ---- limit predictions

enum class WLimit { Zero, FixedPoint, Infinity, PeriodicBoundary, NotPredicted };
std::string to_string(WLimit w);

struct ClosedFormLimit {
    enum class Branch { Type11, InfiniteGamma2Zero, InfiniteOdd, InfiniteEven, FiniteDeltaZero, FiniteDeltaPositive };
    Branch branch = Branch::Type11;

    // trichotomy data
    std::optional<double> product;
    std::optional<double> threshold;
    WLimit w_limit = WLimit::NotPredicted;
    bool boundary = false;
    std::vector<State> w_boundary_orbit;  // fixed point or period-2 pair on the boundary

    // V data
    std::optional<State> v_limit;
    std::vector<State> v_cycle;  // period-2 pair: state at odd steps, then at even steps
    int v_exact_from = -1;       // step from which the V state is exactly the prediction

    // E-finite data
    double lambda1 = 0.0, lambda2 = 0.0;
    int selected = 0;
    double u = 0.0, U = 0.0;
    int t0 = 0;
};
std::string to_string(ClosedFormLimit::Branch b);

ClosedFormLimit predict_limit_type11(const State& z0, double gamma);
ClosedFormLimit predict_limit_type21(const State& z0, const Scenario& s, const EsetClassification& cls);
State closed_form_trajectory_type11(const State& z0, double gamma, int t);

json to_json(const EsetClassification& c);
json to_json(const ClosedFormLimit& c);

// ---- hemophilia

double hemophilia_lyapunov(const State& z);

struct HemophiliaPrediction {
    enum class Case { W11, W1eta, Wmu1 };
    Case which = Case::W11;
    int zero_from = -1;  // W^n(z) = 0 for n >= zero_from
    // W_{μ,1}: |c·Q1| against 1, where Q1 = x2'(y1'+y2')/(3-μ) and c = 2(1-μ)/(3-μ)
    double growth_index = 0.0;
    double threshold = 1.0;
    WLimit w_limit = WLimit::NotPredicted;
    bool boundary = false;
    State fixed_point;
    State v_state;
    int v_constant_from = -1;
};

HemophiliaPrediction hemophilia_degenerate_limits(const State& z0, double mu, double eta);
json to_json(const HemophiliaPrediction& p);

}  // namespace gonosomal
