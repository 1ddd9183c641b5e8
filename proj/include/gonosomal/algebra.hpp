#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gonosomal/errors.hpp"

namespace gonosomal {

// Coefficients on e_1..e_n (x) and on the male basis (y).
struct Element {
    std::vector<double> x;
    std::vector<double> y;

    Element() = default;
    Element(std::vector<double> x_, std::vector<double> y_) : x(std::move(x_)), y(std::move(y_)) {}

    static Element zero(int n, int nu) { return {std::vector<double>(n, 0.0), std::vector<double>(nu, 0.0)}; }
    static Element female(int n, int nu, int i);
    static Element male(int n, int nu, int p);
    static Element from_flat(const Eigen::VectorXd& v, int n);

    int n() const { return static_cast<int>(x.size()); }
    int nu() const { return static_cast<int>(y.size()); }
    int dim() const { return n() + nu(); }

    Eigen::VectorXd flat() const;

    Element operator+(const Element& o) const;
    Element operator-(const Element& o) const;
    Element operator*(double s) const;
    bool operator==(const Element& o) const { return x == o.x && y == o.y; }
};

using State = Element;

double omega(const Element& a);
double l1_norm(const Element& a);
double l1_distance(const Element& a, const Element& b);
bool is_exact_zero(const Element& a);
// all x zero or all y zero
bool in_O(const Element& a);
std::string to_string(const Element& a);

class AlgebraSpec {
public:
    // flat storage: gamma[(i*nu + j)*n + k], gamma_tilde[(i*nu + j)*nu + r]
    AlgebraSpec(int n, int nu, std::vector<double> gamma, std::vector<double> gamma_tilde);

    using Tensor3 = std::vector<std::vector<std::vector<double>>>;
    static AlgebraSpec from_nested(int n, int nu, const Tensor3& gamma, const Tensor3& gamma_tilde);

    int n() const { return n_; }
    int nu() const { return nu_; }
    int dim() const { return n_ + nu_; }

    double gamma(int i, int j, int k) const { return gamma_[(i * nu_ + j) * n_ + k]; }
    double gamma_tilde(int i, int j, int r) const { return gamma_tilde_[(i * nu_ + j) * nu_ + r]; }

    // Σ_k γ_ijk and Σ_r γ̃_ijr
    double female_sum(int i, int j) const;
    double male_sum(int i, int j) const;

    const std::vector<double>& gamma_flat() const { return gamma_; }
    const std::vector<double>& gamma_tilde_flat() const { return gamma_tilde_; }

    Tensor3 gamma_nested() const;
    Tensor3 gamma_tilde_nested() const;

    bool operator==(const AlgebraSpec& o) const {
        return n_ == o.n_ && nu_ == o.nu_ && gamma_ == o.gamma_ && gamma_tilde_ == o.gamma_tilde_;
    }

private:
    int n_;
    int nu_;
    std::vector<double> gamma_;
    std::vector<double> gamma_tilde_;
};

struct Violation {
    enum class Kind { RowSum, Negative };
    Kind kind;
    int i;
    int j;
    int k;         // -1 for row-sum violations
    bool male;     // negative entry lives in gamma_tilde
    double value;  // offending sum or entry
    std::string describe() const;
};

struct ValidationReport {
    bool is_gonosomal = true;
    bool is_stochastic = true;
    std::vector<Violation> violations;
};

inline constexpr double kRowSumTol = 1e-12;
inline constexpr double kSignNoise = 1e-15;

ValidationReport validate(const AlgebraSpec& spec);
bool is_stochastic(const AlgebraSpec& spec);
void require_stochastic(const AlgebraSpec& spec);
void require_shape(const Element& a, const AlgebraSpec& spec);

Element multiply(const Element& a, const Element& b, const AlgebraSpec& spec);

struct BasisChange {
    Eigen::MatrixXd alpha;
    Eigen::MatrixXd alpha_tilde;

    BasisChange(Eigen::MatrixXd a, Eigen::MatrixXd at);
    static BasisChange identity(int n, int nu);
    // apply first, then second
    static BasisChange compose(const BasisChange& first, const BasisChange& second);
};

AlgebraSpec change_basis(const AlgebraSpec& spec, const BasisChange& bc);
AlgebraSpec opposite(const AlgebraSpec& spec);
AlgebraSpec random_stochastic(int n, int nu, std::uint64_t seed);

}  // namespace gonosomal
