#include "gonosomal/algebra.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace gonosomal {

Element Element::female(int n, int nu, int i) {
    Element e = zero(n, nu);
    e.x.at(i) = 1.0;
    return e;
}

Element Element::male(int n, int nu, int p) {
    Element e = zero(n, nu);
    e.y.at(p) = 1.0;
    return e;
}

Element Element::from_flat(const Eigen::VectorXd& v, int n) {
    Element e;
    e.x.assign(v.data(), v.data() + n);
    e.y.assign(v.data() + n, v.data() + v.size());
    return e;
}

Eigen::VectorXd Element::flat() const {
    Eigen::VectorXd v(dim());
    for (int i = 0; i < n(); ++i) v[i] = x[i];
    for (int p = 0; p < nu(); ++p) v[n() + p] = y[p];
    return v;
}

static void same_shape(const Element& a, const Element& b) {
    if (a.x.size() != b.x.size() || a.y.size() != b.y.size())
        throw ShapeMismatch("elements of different types");
}

Element Element::operator+(const Element& o) const {
    same_shape(*this, o);
    Element r = *this;
    for (size_t i = 0; i < x.size(); ++i) r.x[i] += o.x[i];
    for (size_t p = 0; p < y.size(); ++p) r.y[p] += o.y[p];
    return r;
}

Element Element::operator-(const Element& o) const {
    same_shape(*this, o);
    Element r = *this;
    for (size_t i = 0; i < x.size(); ++i) r.x[i] -= o.x[i];
    for (size_t p = 0; p < y.size(); ++p) r.y[p] -= o.y[p];
    return r;
}

Element Element::operator*(double s) const {
    Element r = *this;
    for (double& v : r.x) v *= s;
    for (double& v : r.y) v *= s;
    return r;
}

double omega(const Element& a) {
    double s = 0.0;
    for (double v : a.x) s += v;
    for (double v : a.y) s += v;
    return s;
}

double l1_norm(const Element& a) {
    double s = 0.0;
    for (double v : a.x) s += std::abs(v);
    for (double v : a.y) s += std::abs(v);
    return s;
}

double l1_distance(const Element& a, const Element& b) { return l1_norm(a - b); }

bool is_exact_zero(const Element& a) {
    for (double v : a.x)
        if (v != 0.0) return false;
    for (double v : a.y)
        if (v != 0.0) return false;
    return true;
}

bool in_O(const Element& a) {
    bool fem = false, mal = false;
    for (double v : a.x) fem = fem || v != 0.0;
    for (double v : a.y) mal = mal || v != 0.0;
    return !fem || !mal;
}

std::string to_string(const Element& a) {
    std::ostringstream os;
    os.precision(17);
    os << "(";
    bool first = true;
    for (double v : a.x) {
        os << (first ? "" : ", ") << v;
        first = false;
    }
    os << " | ";
    first = true;
    for (double v : a.y) {
        os << (first ? "" : ", ") << v;
        first = false;
    }
    os << ")";
    return os.str();
}

AlgebraSpec::AlgebraSpec(int n, int nu, std::vector<double> gamma, std::vector<double> gamma_tilde)
    : n_(n), nu_(nu), gamma_(std::move(gamma)), gamma_tilde_(std::move(gamma_tilde)) {
    if (n_ < 1 || nu_ < 1) throw ShapeMismatch("n and nu must be positive");
    if (gamma_.size() != static_cast<size_t>(n_ * nu_ * n_))
        throw ShapeMismatch("gamma has " + std::to_string(gamma_.size()) + " entries, expected n*nu*n");
    if (gamma_tilde_.size() != static_cast<size_t>(n_ * nu_ * nu_))
        throw ShapeMismatch("gamma_tilde has " + std::to_string(gamma_tilde_.size()) +
                            " entries, expected n*nu*nu");
}

AlgebraSpec AlgebraSpec::from_nested(int n, int nu, const Tensor3& g, const Tensor3& gt) {
    auto flatten = [&](const Tensor3& t, int last, const char* name) {
        if (t.size() != static_cast<size_t>(n))
            throw ShapeMismatch(std::string(name) + ": outer dimension " + std::to_string(t.size()) +
                                " != n=" + std::to_string(n));
        std::vector<double> out;
        for (size_t i = 0; i < t.size(); ++i) {
            if (t[i].size() != static_cast<size_t>(nu))
                throw ShapeMismatch(std::string(name) + "[" + std::to_string(i + 1) + "] has " +
                                    std::to_string(t[i].size()) + " rows, expected nu=" + std::to_string(nu));
            for (size_t j = 0; j < t[i].size(); ++j) {
                if (t[i][j].size() != static_cast<size_t>(last))
                    throw ShapeMismatch(std::string(name) + "[" + std::to_string(i + 1) + "][" +
                                        std::to_string(j + 1) + "] has length " +
                                        std::to_string(t[i][j].size()) + ", expected " + std::to_string(last));
                out.insert(out.end(), t[i][j].begin(), t[i][j].end());
            }
        }
        return out;
    };
    return AlgebraSpec(n, nu, flatten(g, n, "gamma"), flatten(gt, nu, "gamma_tilde"));
}

double AlgebraSpec::female_sum(int i, int j) const {
    double s = 0.0;
    for (int k = 0; k < n_; ++k) s += gamma(i, j, k);
    return s;
}

double AlgebraSpec::male_sum(int i, int j) const {
    double s = 0.0;
    for (int r = 0; r < nu_; ++r) s += gamma_tilde(i, j, r);
    return s;
}

AlgebraSpec::Tensor3 AlgebraSpec::gamma_nested() const {
    Tensor3 t(n_, std::vector<std::vector<double>>(nu_, std::vector<double>(n_)));
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < nu_; ++j)
            for (int k = 0; k < n_; ++k) t[i][j][k] = gamma(i, j, k);
    return t;
}

AlgebraSpec::Tensor3 AlgebraSpec::gamma_tilde_nested() const {
    Tensor3 t(n_, std::vector<std::vector<double>>(nu_, std::vector<double>(nu_)));
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < nu_; ++j)
            for (int r = 0; r < nu_; ++r) t[i][j][r] = gamma_tilde(i, j, r);
    return t;
}

std::string Violation::describe() const {
    std::ostringstream os;
    os.precision(17);
    if (kind == Kind::RowSum) {
        os << "row (" << i + 1 << "," << j + 1 << ") sums to " << value;
    } else {
        os << (male ? "gamma_tilde" : "gamma") << "[" << i + 1 << "][" << j + 1 << "][" << k + 1
           << "] = " << value << " is negative";
    }
    return os.str();
}

ValidationReport validate(const AlgebraSpec& spec) {
    ValidationReport rep;
    for (int i = 0; i < spec.n(); ++i) {
        for (int j = 0; j < spec.nu(); ++j) {
            double s = spec.female_sum(i, j) + spec.male_sum(i, j);
            if (!(std::abs(s - 1.0) <= kRowSumTol)) {
                rep.is_gonosomal = false;
                rep.violations.push_back({Violation::Kind::RowSum, i, j, -1, false, s});
            }
        }
    }
    for (int i = 0; i < spec.n(); ++i)
        for (int j = 0; j < spec.nu(); ++j) {
            for (int k = 0; k < spec.n(); ++k)
                if (spec.gamma(i, j, k) < -kSignNoise) {
                    rep.is_stochastic = false;
                    rep.violations.push_back({Violation::Kind::Negative, i, j, k, false, spec.gamma(i, j, k)});
                }
            for (int r = 0; r < spec.nu(); ++r)
                if (spec.gamma_tilde(i, j, r) < -kSignNoise) {
                    rep.is_stochastic = false;
                    rep.violations.push_back(
                        {Violation::Kind::Negative, i, j, r, true, spec.gamma_tilde(i, j, r)});
                }
        }
    rep.is_stochastic = rep.is_stochastic && rep.is_gonosomal;
    return rep;
}

bool is_stochastic(const AlgebraSpec& spec) { return validate(spec).is_stochastic; }

void require_stochastic(const AlgebraSpec& spec) {
    auto rep = validate(spec);
    if (!rep.is_stochastic) {
        std::string msg = "algebra is not stochastic";
        if (!rep.violations.empty()) msg += ": " + rep.violations.front().describe();
        throw NotStochastic(msg);
    }
}

void require_shape(const Element& a, const AlgebraSpec& spec) {
    if (a.n() != spec.n() || a.nu() != spec.nu())
        throw ShapeMismatch("element of type (" + std::to_string(a.n()) + "," + std::to_string(a.nu()) +
                            ") used with algebra of type (" + std::to_string(spec.n()) + "," +
                            std::to_string(spec.nu()) + ")");
}

Element multiply(const Element& a, const Element& b, const AlgebraSpec& spec) {
    require_shape(a, spec);
    require_shape(b, spec);
    const int n = spec.n(), nu = spec.nu();
    Element out = Element::zero(n, nu);
    for (int i = 0; i < n; ++i) {
        for (int p = 0; p < nu; ++p) {
            double c = a.x[i] * b.y[p] + a.y[p] * b.x[i];
            if (c == 0.0) continue;
            for (int k = 0; k < n; ++k) out.x[k] += c * spec.gamma(i, p, k);
            for (int r = 0; r < nu; ++r) out.y[r] += c * spec.gamma_tilde(i, p, r);
        }
    }
    return out;
}

BasisChange::BasisChange(Eigen::MatrixXd a, Eigen::MatrixXd at) : alpha(std::move(a)), alpha_tilde(std::move(at)) {
    if (alpha.rows() != alpha.cols() || alpha_tilde.rows() != alpha_tilde.cols())
        throw ShapeMismatch("basis change matrices must be square");
    auto check = [](const Eigen::MatrixXd& m, const char* name) {
        for (int c = 0; c < m.cols(); ++c) {
            double s = m.col(c).sum();
            if (std::abs(s - 1.0) > kRowSumTol)
                throw InvalidParameter(std::string(name) + " column " + std::to_string(c + 1) + " sums to " +
                                       std::to_string(s));
        }
    };
    check(alpha, "alpha");
    check(alpha_tilde, "alpha_tilde");
}

BasisChange BasisChange::identity(int n, int nu) {
    return BasisChange(Eigen::MatrixXd::Identity(n, n), Eigen::MatrixXd::Identity(nu, nu));
}

BasisChange BasisChange::compose(const BasisChange& first, const BasisChange& second) {
    return BasisChange(first.alpha * second.alpha, first.alpha_tilde * second.alpha_tilde);
}

AlgebraSpec change_basis(const AlgebraSpec& spec, const BasisChange& bc) {
    const int n = spec.n(), nu = spec.nu();
    if (bc.alpha.rows() != n || bc.alpha_tilde.rows() != nu)
        throw ShapeMismatch("basis change does not match algebra type");
    double da = bc.alpha.determinant(), dt = bc.alpha_tilde.determinant();
    if (std::abs(da) < 1e-12) throw SingularBasisChange("alpha has determinant " + std::to_string(da));
    if (std::abs(dt) < 1e-12) throw SingularBasisChange("alpha_tilde has determinant " + std::to_string(dt));
    Eigen::MatrixXd ainv = bc.alpha.inverse();
    Eigen::MatrixXd atinv = bc.alpha_tilde.inverse();

    std::vector<double> g(n * nu * n), gt(n * nu * nu);
    for (int i = 0; i < n; ++i) {
        for (int p = 0; p < nu; ++p) {
            // a_i ã_p expanded in the old basis
            Eigen::VectorXd c = Eigen::VectorXd::Zero(n), d = Eigen::VectorXd::Zero(nu);
            for (int j = 0; j < n; ++j) {
                for (int q = 0; q < nu; ++q) {
                    double w = bc.alpha(j, i) * bc.alpha_tilde(q, p);
                    if (w == 0.0) continue;
                    for (int k = 0; k < n; ++k) c[k] += w * spec.gamma(j, q, k);
                    for (int r = 0; r < nu; ++r) d[r] += w * spec.gamma_tilde(j, q, r);
                }
            }
            Eigen::VectorXd cn = ainv * c, dn = atinv * d;
            for (int k = 0; k < n; ++k) g[(i * nu + p) * n + k] = cn[k];
            for (int r = 0; r < nu; ++r) gt[(i * nu + p) * nu + r] = dn[r];
        }
    }
    return AlgebraSpec(n, nu, std::move(g), std::move(gt));
}

AlgebraSpec opposite(const AlgebraSpec& spec) {
    const int n = spec.n(), nu = spec.nu();
    // new type (nu, n): female index i < nu, male index p < n
    std::vector<double> g(nu * n * nu), gt(nu * n * n);
    for (int i = 0; i < nu; ++i)
        for (int p = 0; p < n; ++p) {
            for (int k = 0; k < nu; ++k) g[(i * n + p) * nu + k] = spec.gamma_tilde(p, i, k);
            for (int r = 0; r < n; ++r) gt[(i * n + p) * n + r] = spec.gamma(p, i, r);
        }
    return AlgebraSpec(nu, n, std::move(g), std::move(gt));
}

AlgebraSpec random_stochastic(int n, int nu, std::uint64_t seed) {
    if (n < 1 || nu < 1) throw InvalidParameter("n and nu must be at least 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> g(n * nu * n), gt(n * nu * nu);
    std::vector<double> row(n + nu);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < nu; ++j) {
            double s = 0.0;
            for (double& v : row) {
                v = u(rng);
                s += v;
            }
            for (int k = 0; k < n; ++k) g[(i * nu + j) * n + k] = row[k] / s;
            for (int r = 0; r < nu; ++r) gt[(i * nu + j) * nu + r] = row[n + r] / s;
        }
    return AlgebraSpec(n, nu, std::move(g), std::move(gt));
}

}  // namespace gonosomal
