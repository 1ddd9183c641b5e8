#include "gonosomal/fixed_points.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "gonosomal/scenarios.hpp"

namespace gonosomal {

std::string to_string(Stability s) {
    switch (s) {
        case Stability::ExponentiallyStable: return "exponentially_stable";
        case Stability::Unstable: return "unstable";
        case Stability::Marginal: return "marginal";
    }
    return "?";
}

double spectral_radius(const std::vector<std::complex<double>>& eigs) {
    double r = 0.0;
    for (const auto& l : eigs) r = std::max(r, std::abs(l));
    return r;
}

Stability classify_spectrum(const std::vector<std::complex<double>>& eigs) {
    double r = spectral_radius(eigs);
    if (std::abs(r - 1.0) <= kMarginalBand) return Stability::Marginal;
    return r < 1.0 ? Stability::ExponentiallyStable : Stability::Unstable;
}

std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return {};
    Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
    std::vector<std::complex<double>> out;
    for (int i = 0; i < es.eigenvalues().size(); ++i) out.push_back(es.eigenvalues()[i]);
    std::sort(out.begin(), out.end(), [](auto a, auto b) {
        if (std::abs(a) != std::abs(b)) return std::abs(a) < std::abs(b);
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return out;
}

State Family::at(double s) const { return Element::from_flat(base.flat() + s * direction, base.n()); }

double Family::distance(const State& z) const {
    Eigen::VectorXd d = z.flat() - base.flat();
    Eigen::VectorXd perp = d - d.dot(direction) * direction;
    return perp.lpNorm<1>();
}

Eigen::MatrixXd jacobian_W(const State& z, const AlgebraSpec& spec) {
    require_shape(z, spec);
    const int n = spec.n(), nu = spec.nu();
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n + nu, n + nu);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < nu; ++j) {
            for (int k = 0; k < n; ++k) {
                J(k, i) += spec.gamma(i, j, k) * z.y[j];
                J(k, n + j) += spec.gamma(i, j, k) * z.x[i];
            }
            for (int r = 0; r < nu; ++r) {
                J(n + r, i) += spec.gamma_tilde(i, j, r) * z.y[j];
                J(n + r, n + j) += spec.gamma_tilde(i, j, r) * z.x[i];
            }
        }
    return J;
}

Eigen::MatrixXd jacobian_V_restricted(const State& z, const AlgebraSpec& spec, double h) {
    const int d = spec.dim();
    Eigen::MatrixXd R(d - 1, d - 1);
    const Eigen::VectorXd base = z.flat();
    for (int m = 0; m < d - 1; ++m) {
        Eigen::VectorXd dir = Eigen::VectorXd::Zero(d);
        dir[m] = 1.0;
        dir[d - 1] = -1.0;
        Eigen::VectorXd vp = apply_V(Element::from_flat(base + h * dir, spec.n()), spec).flat();
        Eigen::VectorXd vm = apply_V(Element::from_flat(base - h * dir, spec.n()), spec).flat();
        Eigen::VectorXd dv = (vp - vm) / (2 * h);
        // tangent vector sum(dv)=0 has coordinates dv[0..d-2] in the basis e_m - e_last
        R.col(m) = dv.head(d - 1);
    }
    return R;
}

Eigen::MatrixXd jacobian_V_analytic(const State& z, const AlgebraSpec& spec) {
    State w = apply_W(z, spec);
    double s = omega(w);
    if (s == 0.0) throw AbsorbedToO("V undefined at " + to_string(z));
    Eigen::MatrixXd J = jacobian_W(z, spec);
    Eigen::VectorXd v = w.flat() / s;
    Eigen::RowVectorXd colsum = J.colwise().sum();
    return (J - v * colsum) / s;
}

double residual(Operator op, const State& z, const AlgebraSpec& spec) {
    return l1_distance(apply(op, z, spec), z);
}

namespace {

bool nonnegative(const State& z, double tol = 1e-12) {
    for (double v : z.x)
        if (v < -tol) return false;
    for (double v : z.y)
        if (v < -tol) return false;
    return true;
}

bool normalizable(const State& z) { return nonnegative(z) && omega(z) > 1e-12 && !in_O(z); }

}  // namespace

State denormalize_fixed_point(const State& v, const AlgebraSpec& spec) {
    double s = omega(apply_W(v, spec));
    if (s == 0.0) throw AbsorbedToO("omega(W(v)) = 0");
    return v * (1.0 / s);
}

void populate(FixedPointRecord& rec, const AlgebraSpec& spec) {
    rec.residual = residual(rec.op, rec.point, spec);
    State wpoint = rec.op == Operator::W ? rec.point : denormalize_fixed_point(rec.point, spec);
    rec.w_eigenvalues = eigenvalues(jacobian_W(wpoint, spec));
    rec.stability_w = classify_spectrum(rec.w_eigenvalues);
    rec.v_eigenvalues.reset();
    rec.stability_v.reset();
    if (is_stochastic(spec) && normalizable(wpoint)) {
        State v = rec.op == Operator::V ? rec.point : wpoint * (1.0 / omega(wpoint));
        rec.v_eigenvalues = eigenvalues(jacobian_V_restricted(v, spec));
        rec.stability_v = classify_spectrum(*rec.v_eigenvalues);
    }
}

namespace {

struct NewtonResult {
    bool ok = false;
    State root;
};

Eigen::VectorXd newton_step(const Eigen::MatrixXd& A, const Eigen::VectorXd& F) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    if (lu.rcond() > 1e-12) return lu.solve(F);
    // Tikhonov on near-singular steps
    const double lambda = 1e-10;
    Eigen::MatrixXd N = A.transpose() * A;
    N.diagonal().array() += lambda;
    return N.ldlt().solve(A.transpose() * F);
}

NewtonResult newton(const AlgebraSpec& spec, Operator op, Eigen::VectorXd z) {
    const int n = spec.n(), d = spec.dim();
    NewtonResult out;
    for (int it = 0; it < 100; ++it) {
        State s = Element::from_flat(z, n);
        if (op == Operator::V && in_O(s)) return out;
        Eigen::VectorXd F = apply(op, s, spec).flat() - z;
        if (!F.allFinite()) return out;
        Eigen::MatrixXd A = (op == Operator::W ? jacobian_W(s, spec) : jacobian_V_analytic(s, spec)) -
                            Eigen::MatrixXd::Identity(d, d);
        Eigen::VectorXd step = newton_step(A, F);
        if (!step.allFinite()) return out;
        z -= step;
        if (z.lpNorm<1>() > 1e8) return out;
        if (step.lpNorm<1>() < 1e-13) break;
    }
    State root = Element::from_flat(z, n);
    if (op == Operator::V && (in_O(root) || !nonnegative(root))) return out;
    if (residual(op, root, spec) >= 1e-10) return out;
    out.ok = true;
    out.root = root;
    return out;
}

std::optional<Family> detect_family(const State& root, const AlgebraSpec& spec, Operator op) {
    const int d = spec.dim();
    Eigen::MatrixXd J = op == Operator::W ? jacobian_W(root, spec) : jacobian_V_analytic(root, spec);
    Eigen::MatrixXd A = J - Eigen::MatrixXd::Identity(d, d);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
    if (svd.singularValues()[d - 1] >= 1e-8) return std::nullopt;
    Family f;
    f.base = root;
    f.direction = svd.matrixV().col(d - 1).normalized();
    // canonical sign: first significant component positive
    for (int i = 0; i < d; ++i)
        if (std::abs(f.direction[i]) > 1e-9) {
            if (f.direction[i] < 0) f.direction = -f.direction;
            break;
        }
    for (double s : {f.range_lo, f.range_hi}) {
        State p = f.at(s);
        if (op == Operator::V && in_O(p)) return std::nullopt;
        double r;
        try {
            r = residual(op, p, spec);
        } catch (const AbsorbedToO&) {
            return std::nullopt;
        }
        if (!(r < 1e-10)) return std::nullopt;
    }
    return f;
}

std::vector<Eigen::VectorXd> lattice(int d, int grid, double lo, double hi) {
    std::vector<Eigen::VectorXd> pts;
    if (grid < 1) return pts;
    std::vector<int> idx(d, 0);
    while (true) {
        Eigen::VectorXd p(d);
        for (int i = 0; i < d; ++i) p[i] = grid == 1 ? (lo + hi) / 2 : lo + (hi - lo) * idx[i] / (grid - 1);
        pts.push_back(p);
        int a = d - 1;
        while (a >= 0 && ++idx[a] == grid) idx[a--] = 0;
        if (a < 0) break;
    }
    return pts;
}

}  // namespace

std::vector<FixedPointRecord> solve_fixed_points_numeric(const AlgebraSpec& spec, Operator op, int grid,
                                                         std::uint64_t seed, SolverDiagnostics* diag,
                                                         const SolverOptions& opts) {
    const int n = spec.n(), nu = spec.nu(), d = spec.dim();
    if (op == Operator::V) require_stochastic(spec);
    SolverDiagnostics dg;

    std::vector<Eigen::VectorXd> starts;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (op == Operator::W) {
        starts = lattice(d, grid, 0.0, 5.0);
        for (int s = 0; s < opts.random_starts; ++s) {
            Eigen::VectorXd p(d);
            for (int i = 0; i < d; ++i) p[i] = opts.random_lo + (opts.random_hi - opts.random_lo) * u(rng);
            starts.push_back(p);
        }
    } else {
        for (auto& p : lattice(d, grid, 0.0, 1.0)) {
            if (p.sum() <= 0) continue;
            p /= p.sum();
            if (in_O(Element::from_flat(p, n))) continue;
            bool dup = std::any_of(starts.begin(), starts.end(),
                                   [&](const Eigen::VectorXd& q) { return (q - p).lpNorm<1>() < 1e-12; });
            if (!dup) starts.push_back(p);
        }
        for (int s = 0; s < opts.random_starts; ++s) {
            Eigen::VectorXd p(d);
            for (int i = 0; i < d; ++i) p[i] = u(rng);
            starts.push_back(p / p.sum());
        }
    }

    std::vector<FixedPointRecord> recs;
    auto covered = [&](const State& z) {
        for (const auto& r : recs) {
            if (r.family ? r.family->distance(z) < 1e-6 : l1_distance(r.point, z) < 1e-6) return true;
        }
        return false;
    };
    auto add_root = [&](const State& root) {
        if (covered(root)) return;
        FixedPointRecord rec;
        rec.op = op;
        rec.point = root;
        rec.family = detect_family(root, spec, op);
        if (rec.family) {
            recs.erase(std::remove_if(recs.begin(), recs.end(),
                                      [&](const FixedPointRecord& r) {
                                          return !r.family && rec.family->distance(r.point) < 1e-6;
                                      }),
                       recs.end());
        }
        recs.push_back(std::move(rec));
    };

    if (op == Operator::W) add_root(State::zero(n, nu));
    for (const auto& s : starts) {
        ++dg.starts;
        NewtonResult res = newton(spec, op, s);
        if (!res.ok) {
            ++dg.dropped;
            continue;
        }
        ++dg.converged;
        add_root(res.root);
    }

    for (auto& r : recs) {
        populate(r, spec);
        if (op == Operator::W && nonnegative(r.point) && l1_norm(r.point) > 1e-9 && omega(r.point) < 4.0 - 1e-9)
            ++dg.omega_violations;
    }
    if (diag) *diag = dg;
    return recs;
}

// ---- closed forms

namespace {

constexpr double kEq = 1e-12;
bool zero(double v) { return std::abs(v) <= kEq; }

FixedPointRecord make_point(const State& z, const AlgebraSpec& spec, std::string label) {
    FixedPointRecord rec;
    rec.op = Operator::W;
    rec.point = z;
    rec.label = std::move(label);
    populate(rec, spec);
    return rec;
}

State s21(double x1, double x2, double y) { return State({x1, x2}, {y}); }

}  // namespace

std::vector<FixedPointRecord> closed_form_fixed_points_type11(double gamma) {
    if (zero(gamma) || zero(gamma - 1.0))
        throw DegenerateParameter("gamma = " + std::to_string(gamma) + ": only the origin is fixed");
    if (gamma < 0.0 || gamma > 1.0) throw InvalidParameter("gamma must lie in (0,1)");
    AlgebraSpec spec = lr_spec(gamma);
    return {make_point(State({0.0}, {0.0}), spec, "origin"),
            make_point(State({1.0 / (1.0 - gamma)}, {1.0 / gamma}), spec, "positive")};
}

std::vector<FixedPointRecord> closed_form_fixed_points_type21(double g1, double g2, double d1, double d2,
                                                              std::vector<std::string>* notes) {
    for (double v : {g1, g2, d1, d2})
        if (v < 0.0) throw InvalidParameter("coefficients must be non-negative");
    const double ga = 1.0 - g1 - g2, de = 1.0 - d1 - d2;
    if (ga < -kEq || de < -kEq) throw InvalidParameter("gamma or delta is negative");
    AlgebraSpec spec = type21_spec(g1, g2, d1, d2);

    std::vector<FixedPointRecord> out;
    out.push_back(make_point(s21(0, 0, 0), spec, "origin"));
    auto note = [&](const std::string& s) {
        if (notes) notes->push_back(s);
    };
    auto need = [&](double den, const std::string& what) {
        if (zero(den)) throw DegenerateParameter(what + " has a vanishing denominator");
    };
    auto add = [&](const State& z, const std::string& label) { out.push_back(make_point(z, spec, label)); };

    const double D = g1 * d2 - g2 * d1;
    if (zero(D)) {
        const double s = g1 + d2;
        if (zero(s) || zero(s - 1.0)) {
            note("g1 + d2 is 0 or 1: origin only");
            return out;
        }
        std::string label;
        if (!zero(g1) && zero(d2) && zero(g2))
            label = "1.1";
        else if (zero(g1) && !zero(d2) && zero(d1))
            label = "1.2";
        else if (!zero(g1) && !zero(d2) && !zero(g2) && !zero(d1))
            label = "1.3";
        else
            label = "1.4";  // g1 = g2 = 0 or d1 = d2 = 0
        const double y = 1.0 / s;
        if (!zero(g1 + g2)) {
            const double den = (g1 + g2) * (1.0 - s);
            add(s21(g1 / den, g2 / den, y), label);
        } else {
            const double den = (d1 + d2) * (1.0 - s);
            add(s21(d1 / den, d2 / den, y), label);
        }
        return out;
    }

    const bool d1z = zero(d1), g2z = zero(g2), eq = zero(g1 - d2);
    // (1/(1-g1), 0, 1/g1) and (0, 1/(1-d2), 1/d2)
    auto female_axis = [&](const std::string& label) {
        if (zero(1.0 - g1)) {
            note("case " + label + ": g1 = 1, point (1/(1-g1), 0, 1/g1) does not exist");
            return;
        }
        add(s21(1.0 / (1.0 - g1), 0, 1.0 / g1), label);
    };
    auto second_axis = [&](const std::string& label) {
        if (zero(1.0 - d2)) {
            note("case " + label + ": d2 = 1, point (0, 1/(1-d2), 1/d2) does not exist");
            return;
        }
        add(s21(0, 1.0 / (1.0 - d2), 1.0 / d2), label);
    };

    if (d1z && g2z) {
        if (eq) {
            need(1.0 - g1, "case 2.1 family");
            FixedPointRecord rec = make_point(s21(1.0 / (1.0 - g1), 0, 1.0 / g1), spec, "2.1");
            Family f;
            f.base = rec.point;
            f.direction = Eigen::Vector3d(1.0, -1.0, 0.0).normalized();
            rec.family = f;
            out.push_back(rec);
        } else {
            female_axis("2.2");
            second_axis("2.2");
        }
    } else if (d1z) {
        if (eq) {
            need(1.0 - g1, "case 2.3");
            add(s21(0, 1.0 / (1.0 - g1), 1.0 / g1), "2.3");
        } else {
            const double den = (1.0 - g1) * (g1 + g2 - d2);
            if (zero(den))
                note("case 2.4: (1-g1)(g1+g2-d2) = 0, first point does not exist");
            else
                add(s21((g1 - d2) / den, g2 / den, 1.0 / g1), "2.4");
            second_axis("2.4");
        }
    } else if (g2z) {
        if (eq) {
            need(1.0 - g1, "case 2.5");
            add(s21(1.0 / (1.0 - g1), 0, 1.0 / g1), "2.5");
        } else {
            female_axis("2.6");
            const double den = (1.0 - d2) * (d1 + d2 - g1);
            if (zero(den))
                note("case 2.6: (1-d2)(d1+d2-g1) = 0, second point does not exist");
            else
                add(s21(d1 / den, (d2 - g1) / den, 1.0 / d2), "2.6");
        }
    } else {
        const double disc = (g1 + d2) * (g1 + d2) - 4.0 * D;
        if (disc < -kEq) {
            note("case 2.7: no real root of the y-quadratic");
            return out;
        }
        const double sq = std::sqrt(std::max(0.0, disc));
        std::vector<double> ys;
        // stable quadratic roots
        const double q = 0.5 * ((g1 + d2) + sq);
        ys.push_back(q / D);
        if (sq > kEq) ys.push_back(1.0 / q);
        for (double y : ys) {
            const double den = (ga * d1 - de * g1) * y + de;
            if (zero(den)) {
                note("case 2.7: root y = " + std::to_string(y) + " gives no finite point");
                continue;
            }
            add(s21(d1 * y / den, (1.0 - g1 * y) / den, y), "2.7");
        }
    }
    return out;
}

std::vector<FixedPointRecord> closed_form_fixed_points_hemophilia(double mu, double eta) {
    if (mu < 0 || mu > 1 || eta < 0 || eta > 1) throw InvalidParameter("mu and eta must lie in [0,1]");
    const bool m1 = zero(mu - 1.0), e1 = zero(eta - 1.0);
    if (!m1 && !e1) throw UncoveredCase("no closed form for mu < 1 and eta < 1; use the numeric solver");
    AlgebraSpec spec = hemophilia_spec(mu, eta);
    std::vector<FixedPointRecord> out{make_point(State({0, 0}, {0, 0}), spec, "origin")};
    if (m1) return out;
    const double a = (3.0 - mu) / 2.0;
    out.push_back(make_point(State({0, a}, {a, (1.0 + mu) * (3.0 - mu) / (2.0 * (1.0 - mu))}), spec, "positive"));
    return out;
}

Element idempotent_correspondence(const FixedPointRecord& fp, const AlgebraSpec& spec) {
    Element half = fp.point * 0.5;
    double err = l1_distance(multiply(half, half, spec), half);
    if (!(err <= 1e-10)) throw NotIdempotent("half of the point squares to itself only within " + std::to_string(err));
    return half;
}

State normalize_fixed_point(const FixedPointRecord& fp) {
    if (!nonnegative(fp.point)) throw NotNormalizable("point has a negative component: " + to_string(fp.point));
    double s = omega(fp.point);
    if (!(s > 0.0)) throw NotNormalizable("omega of the point is zero");
    return fp.point * (1.0 / s);
}

TransferReport stability_transfer_check(const FixedPointRecord& fp, const AlgebraSpec& spec) {
    State wpoint = fp.op == Operator::W ? fp.point : denormalize_fixed_point(fp.point, spec);
    FixedPointRecord w;
    w.point = wpoint;
    State v = normalize_fixed_point(w);
    if (in_O(v)) throw NotNormalizable("normalized point lies in O");
    TransferReport rep;
    auto we = eigenvalues(jacobian_W(wpoint, spec));
    auto ve = eigenvalues(jacobian_V_restricted(v, spec));
    rep.w_spectral_radius = spectral_radius(we);
    rep.v_spectral_radius = spectral_radius(ve);
    rep.stability_w = classify_spectrum(we);
    rep.stability_v = classify_spectrum(ve);
    rep.consistent = !(rep.stability_w == Stability::ExponentiallyStable &&
                       rep.stability_v != Stability::ExponentiallyStable);
    rep.converse_failure = rep.stability_v == Stability::ExponentiallyStable &&
                           rep.stability_w != Stability::ExponentiallyStable;
    return rep;
}

MatchReport match_fixed_point_sets(const std::vector<FixedPointRecord>& a, const std::vector<FixedPointRecord>& b,
                                   double tol) {
    MatchReport rep;
    auto nearest = [](const FixedPointRecord& r, const std::vector<FixedPointRecord>& pool) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& q : pool) {
            double dist;
            if (r.family && q.family) {
                double cosang = std::abs(r.family->direction.dot(q.family->direction));
                dist = q.family->distance(r.family->base) + (1.0 - cosang);
            } else if (r.family) {
                continue;
            } else if (q.family) {
                dist = q.family->distance(r.point);
            } else {
                dist = l1_distance(r.point, q.point);
            }
            best = std::min(best, dist);
        }
        return best;
    };
    auto sweep = [&](const std::vector<FixedPointRecord>& from, const std::vector<FixedPointRecord>& to,
                     const char* side) {
        for (const auto& r : from) {
            double dist = nearest(r, to);
            rep.max_mismatch = std::max(rep.max_mismatch, dist);
            if (!(dist < tol)) {
                rep.matched = false;
                rep.unmatched.push_back(std::string(side) + " " + (r.family ? "family through " : "point ") +
                                        to_string(r.family ? r.family->base : r.point));
            }
        }
    };
    sweep(a, b, "first");
    sweep(b, a, "second");
    return rep;
}

static json eig_json(const std::vector<std::complex<double>>& e) {
    json out = json::array();
    for (const auto& l : e) out.push_back({l.real(), l.imag()});
    return out;
}

json to_json(const FixedPointRecord& rec) {
    json j{{"operator", to_string(rec.op)},
           {"residual", rec.residual},
           {"w_eigenvalues", eig_json(rec.w_eigenvalues)},
           {"stability_w", to_string(rec.stability_w)}};
    std::vector<double> p(rec.point.x);
    p.insert(p.end(), rec.point.y.begin(), rec.point.y.end());
    j["point"] = p;
    if (!rec.label.empty()) j["case"] = rec.label;
    if (rec.v_eigenvalues) {
        j["v_eigenvalues"] = eig_json(*rec.v_eigenvalues);
        j["stability_v"] = to_string(*rec.stability_v);
    }
    if (rec.family) {
        std::vector<double> b(rec.family->base.x), dir(rec.family->direction.data(),
                                                          rec.family->direction.data() + rec.family->direction.size());
        b.insert(b.end(), rec.family->base.y.begin(), rec.family->base.y.end());
        j["family"] = {{"base_point", b},
                       {"direction", dir},
                       {"parameter_range_tested", {rec.family->range_lo, rec.family->range_hi}}};
    }
    return j;
}

json to_json(const std::vector<FixedPointRecord>& recs) {
    json out = json::array();
    for (const auto& r : recs) out.push_back(to_json(r));
    return out;
}

}  // namespace gonosomal
