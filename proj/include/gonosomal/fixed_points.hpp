#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gonosomal/algebra.hpp"
#include "gonosomal/dynamics.hpp"
#include "gonosomal/io.hpp"

namespace gonosomal {

enum class Stability { ExponentiallyStable, Unstable, Marginal };
std::string to_string(Stability s);

inline constexpr double kMarginalBand = 1e-9;

Stability classify_spectrum(const std::vector<std::complex<double>>& eigs);
double spectral_radius(const std::vector<std::complex<double>>& eigs);
std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& m);

struct Family {
    State base;
    Eigen::VectorXd direction;  // unit L2
    double range_lo = -0.1;
    double range_hi = 0.1;
    State at(double s) const;
    double distance(const State& z) const;  // L1 distance to the line
};

struct FixedPointRecord {
    Operator op = Operator::W;
    State point;
    double residual = 0.0;
    std::optional<Family> family;
    std::vector<std::complex<double>> w_eigenvalues;
    Stability stability_w = Stability::Marginal;
    std::optional<std::vector<std::complex<double>>> v_eigenvalues;
    std::optional<Stability> stability_v;
    std::string label;  // case label from a closed form, empty for numeric records
};

Eigen::MatrixXd jacobian_W(const State& z, const AlgebraSpec& spec);
// derivative of V inside the simplex affine hull by central differences; (d-1)x(d-1)
Eigen::MatrixXd jacobian_V_restricted(const State& z, const AlgebraSpec& spec, double h = 1e-6);
// quotient rule, used for Newton steps on V
Eigen::MatrixXd jacobian_V_analytic(const State& z, const AlgebraSpec& spec);

double residual(Operator op, const State& z, const AlgebraSpec& spec);

// fills residual, spectra and stability labels for a record whose point/op are set
void populate(FixedPointRecord& rec, const AlgebraSpec& spec);

struct SolverDiagnostics {
    int starts = 0;
    int converged = 0;
    int dropped = 0;
    int omega_violations = 0;  // non-negative nonzero W roots with omega < 4 - 1e-9
};

struct SolverOptions {
    int random_starts = 16;
    double random_lo = -5.0;
    double random_hi = 10.0;
};

std::vector<FixedPointRecord> solve_fixed_points_numeric(const AlgebraSpec& spec, Operator op, int grid,
                                                         std::uint64_t seed, SolverDiagnostics* diag = nullptr,
                                                         const SolverOptions& opts = {});

std::vector<FixedPointRecord> closed_form_fixed_points_type11(double gamma);
std::vector<FixedPointRecord> closed_form_fixed_points_type21(double g1, double g2, double d1, double d2,
                                                              std::vector<std::string>* notes = nullptr);
std::vector<FixedPointRecord> closed_form_fixed_points_hemophilia(double mu, double eta);

Element idempotent_correspondence(const FixedPointRecord& fp, const AlgebraSpec& spec);
State normalize_fixed_point(const FixedPointRecord& fp);
// W-fixed point z* with ϖ(z*) > 0 for a V-fixed point v: z* = v / ϖ(W(v))
State denormalize_fixed_point(const State& v, const AlgebraSpec& spec);

struct TransferReport {
    double w_spectral_radius = 0.0;
    double v_spectral_radius = 0.0;
    Stability stability_w = Stability::Marginal;
    Stability stability_v = Stability::Marginal;
    bool consistent = true;         // W exponentially stable implies V exponentially stable
    bool converse_failure = false;  // V exponentially stable while W is not
};

TransferReport stability_transfer_check(const FixedPointRecord& fp, const AlgebraSpec& spec);

struct MatchReport {
    bool matched = true;
    double max_mismatch = 0.0;
    std::vector<std::string> unmatched;
};
// every isolated point in a is within tol of something in b and vice versa; families by membership
MatchReport match_fixed_point_sets(const std::vector<FixedPointRecord>& a, const std::vector<FixedPointRecord>& b,
                                   double tol = 1e-6);

json to_json(const FixedPointRecord& rec);
json to_json(const std::vector<FixedPointRecord>& recs);

}  // namespace gonosomal
