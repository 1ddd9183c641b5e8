#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "gonosomal/algebra.hpp"
#include "gonosomal/io.hpp"

namespace gonosomal {

enum class Operator { W, V };
std::string to_string(Operator op);
Operator parse_operator(const std::string& s);

State apply_W(const State& z, const AlgebraSpec& spec);
State apply_V(const State& z, const AlgebraSpec& spec);
State apply(Operator op, const State& z, const AlgebraSpec& spec);

struct IterationOptions {
    double conv_tol = 1e-9;
    int patience = 3;
    double div_threshold = 1e12;
    int max_steps = 500;
    int max_period = 8;
};

enum class OutcomeKind { ConvergedTo, ExtinctAt, NumericallyExtinct, AbsorbedToO, Divergent, Cycle, MaxIterationsReached };
std::string to_string(OutcomeKind k);

struct Outcome {
    OutcomeKind kind = OutcomeKind::MaxIterationsReached;
    int step = -1;   // index of the state that triggered the outcome
    int period = 0;  // Cycle only
    State limit;     // ConvergedTo only
    std::vector<State> cycle;  // Cycle only, oldest first
    std::string summary() const;
};

struct Trajectory {
    Operator op = Operator::W;
    std::vector<State> states;
    std::vector<double> omegas;
    Outcome outcome;
};

inline constexpr double kNumericallyExtinct = 1e-300;

Trajectory iterate(const State& z0, const AlgebraSpec& spec, Operator op, const IterationOptions& opts = {});

void write_csv(std::ostream& os, const Trajectory& tr);
json to_json(const Trajectory& tr);
std::vector<std::string> csv_columns(int n, int nu);

struct BoundCheck {
    std::string name;
    bool applicable = true;
    bool holds = true;
    int first_violation = -1;
    int checked = 0;
};

struct BoundReport {
    std::vector<BoundCheck> checks;
    bool all_hold() const;
    const BoundCheck& at(const std::string& name) const;
};

// Bounds on ϖ along W orbits. Besides the closed-form bounds
// (monotone, lower, upper, refined) it checks the one-step inequalities
// ϖ_t ≤ ϖ_{t-1}²/4, m²ϖ_{t-1}² ≤ ϖ_t ≤ Mϖ_{t-1}² and ϖ_t ≤ (M/16)ϖ_{t-2}⁴ for t ≥ 2.
BoundReport verify_omega_bounds(const State& z0, const AlgebraSpec& spec, int t_max);
BoundReport verify_coordinate_bounds(const State& z0, const AlgebraSpec& spec, int t_max);
bool verify_conjugacy(const AlgebraSpec& spec1, const AlgebraSpec& spec2, const Eigen::MatrixXd& phi, int samples,
                      std::uint64_t seed);

// swap matrix between an algebra and its opposite: (x, y) -> (y, x)
Eigen::MatrixXd opposite_swap(int n, int nu);

json to_json(const BoundReport& rep);

}  // namespace gonosomal
