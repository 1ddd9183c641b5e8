#include "gonosomal/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

namespace gonosomal {

std::string to_string(Operator op) { return op == Operator::W ? "W" : "V"; }

Operator parse_operator(const std::string& s) {
    if (s == "W" || s == "w") return Operator::W;
    if (s == "V" || s == "v") return Operator::V;
    throw ParseError("operator must be W or V, got '" + s + "'");
}

State apply_W(const State& z, const AlgebraSpec& spec) {
    require_shape(z, spec);
    const int n = spec.n(), nu = spec.nu();
    State out = State::zero(n, nu);
    for (int i = 0; i < n; ++i) {
        if (z.x[i] == 0.0) continue;
        for (int j = 0; j < nu; ++j) {
            double c = z.x[i] * z.y[j];
            if (c == 0.0) continue;
            for (int k = 0; k < n; ++k) out.x[k] += spec.gamma(i, j, k) * c;
            for (int r = 0; r < nu; ++r) out.y[r] += spec.gamma_tilde(i, j, r) * c;
        }
    }
    return out;
}

namespace {

State normalized(const State& w) {
    double s = omega(w);
    State v = w;
    for (double& c : v.x) c /= s;
    for (double& c : v.y) c /= s;
    return v;
}

State v_step(const State& z, const AlgebraSpec& spec) {
    if (in_O(z)) throw AbsorbedToO("state " + to_string(z) + " has no females or no males (lies in O)");
    State w = apply_W(z, spec);
    if (omega(w) == 0.0) throw AbsorbedToO("omega(W(z)) = 0 at " + to_string(z));
    return normalized(w);
}

}  // namespace

State apply_V(const State& z, const AlgebraSpec& spec) {
    require_stochastic(spec);
    require_shape(z, spec);
    return v_step(z, spec);
}

State apply(Operator op, const State& z, const AlgebraSpec& spec) {
    return op == Operator::W ? apply_W(z, spec) : apply_V(z, spec);
}

std::string to_string(OutcomeKind k) {
    switch (k) {
        case OutcomeKind::ConvergedTo: return "ConvergedTo";
        case OutcomeKind::ExtinctAt: return "ExtinctAt";
        case OutcomeKind::NumericallyExtinct: return "NumericallyExtinct";
        case OutcomeKind::AbsorbedToO: return "AbsorbedToO";
        case OutcomeKind::Divergent: return "Divergent";
        case OutcomeKind::Cycle: return "Cycle";
        case OutcomeKind::MaxIterationsReached: return "MaxIterationsReached";
    }
    return "?";
}

std::string Outcome::summary() const {
    std::ostringstream os;
    os << to_string(kind);
    if (kind == OutcomeKind::ConvergedTo) os << to_string(limit);
    if (kind == OutcomeKind::Cycle) {
        os << "(period " << period << ":";
        for (const auto& s : cycle) os << " " << to_string(s);
        os << ")";
    }
    if (step >= 0) os << " at step " << step;
    return os.str();
}

static bool in_simplex(const State& z, double tol) {
    for (double v : z.x)
        if (v < -tol) return false;
    for (double v : z.y)
        if (v < -tol) return false;
    return std::abs(omega(z) - 1.0) <= tol;
}

Trajectory iterate(const State& z0, const AlgebraSpec& spec, Operator op, const IterationOptions& opts) {
    require_shape(z0, spec);
    if (op == Operator::V) {
        require_stochastic(spec);
        if (!in_simplex(z0, 1e-10)) throw InvalidParameter("V-iteration needs a start on the simplex");
    }
    Trajectory tr;
    tr.op = op;
    tr.states.push_back(z0);
    tr.omegas.push_back(omega(z0));

    auto finish = [&](OutcomeKind k, int t) {
        tr.outcome.kind = k;
        tr.outcome.step = t;
        return tr;
    };
    if (is_exact_zero(z0)) return finish(OutcomeKind::ExtinctAt, 0);
    if (op == Operator::V && in_O(z0)) return finish(OutcomeKind::AbsorbedToO, 0);

    int calm = 0, cycle_run = 0, cycle_p = 0;
    for (int t = 1; t <= opts.max_steps; ++t) {
        const State& prev = tr.states.back();
        State z = op == Operator::W ? apply_W(prev, spec) : v_step(prev, spec);
        tr.states.push_back(z);
        tr.omegas.push_back(omega(z));
        const State& cur = tr.states.back();

        if (is_exact_zero(cur)) return finish(OutcomeKind::ExtinctAt, t);
        double norm = l1_norm(cur);
        if (norm < kNumericallyExtinct) return finish(OutcomeKind::NumericallyExtinct, t);
        if (op == Operator::V && in_O(cur)) return finish(OutcomeKind::AbsorbedToO, t);

        bool finite = std::isfinite(norm);
        if (finite) {
            calm = l1_distance(cur, tr.states[t - 1]) < opts.conv_tol ? calm + 1 : 0;
            if (calm >= opts.patience) {
                tr.outcome.limit = cur;
                return finish(OutcomeKind::ConvergedTo, t);
            }

            int found = 0;
            for (int p = 2; p <= opts.max_period && p <= t && !found; ++p) {
                if (l1_distance(cur, tr.states[t - p]) >= opts.conv_tol) continue;
                // a slowly converging orbit is not a cycle
                bool spread = false;
                for (int a = t - p + 1; a < t && !spread; ++a)
                    spread = l1_distance(tr.states[a], cur) >= opts.conv_tol;
                if (spread) found = p;
            }
            if (found && found == cycle_p) {
                ++cycle_run;
            } else {
                cycle_p = found;
                cycle_run = found ? 1 : 0;
            }
            if (cycle_p && cycle_run >= opts.patience) {
                tr.outcome.period = cycle_p;
                tr.outcome.cycle.assign(tr.states.end() - cycle_p, tr.states.end());
                return finish(OutcomeKind::Cycle, t);
            }
        }
        if (!finite || norm > opts.div_threshold) return finish(OutcomeKind::Divergent, t);
    }
    return finish(OutcomeKind::MaxIterationsReached, opts.max_steps);
}

std::vector<std::string> csv_columns(int n, int nu) {
    std::vector<std::string> cols{"t"};
    for (int i = 1; i <= n; ++i) cols.push_back("x" + std::to_string(i));
    for (int j = 1; j <= nu; ++j) cols.push_back("y" + std::to_string(j));
    cols.push_back("omega");
    return cols;
}

void write_csv(std::ostream& os, const Trajectory& tr) {
    if (tr.states.empty()) return;
    auto cols = csv_columns(tr.states[0].n(), tr.states[0].nu());
    for (size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << cols[c];
    os << "\n" << std::setprecision(17);
    for (size_t t = 0; t < tr.states.size(); ++t) {
        os << t;
        for (double v : tr.states[t].x) os << "," << v;
        for (double v : tr.states[t].y) os << "," << v;
        os << "," << tr.omegas[t] << "\n";
    }
    const Outcome& o = tr.outcome;
    os << "# outcome=" << to_string(o.kind);
    if (o.step >= 0) os << ",step=" << o.step;
    if (o.kind == OutcomeKind::Cycle) os << ",period=" << o.period;
    os << "\n";
}

json to_json(const Trajectory& tr) {
    json rows = json::array();
    for (size_t t = 0; t < tr.states.size(); ++t) {
        json r = json::array({t});
        for (double v : tr.states[t].x) r.push_back(v);
        for (double v : tr.states[t].y) r.push_back(v);
        r.push_back(tr.omegas[t]);
        rows.push_back(r);
    }
    const Outcome& o = tr.outcome;
    json out{{"name", to_string(o.kind)}};
    if (o.step >= 0) out["step"] = o.step;
    if (o.kind == OutcomeKind::Cycle) {
        out["period"] = o.period;
        json c = json::array();
        for (const auto& s : o.cycle) c.push_back(to_json(s));
        out["cycle"] = c;
    }
    if (o.kind == OutcomeKind::ConvergedTo) out["limit"] = to_json(o.limit);
    int n = tr.states.empty() ? 0 : tr.states[0].n(), nu = tr.states.empty() ? 0 : tr.states[0].nu();
    return json{{"operator", to_string(tr.op)}, {"columns", csv_columns(n, nu)}, {"rows", rows}, {"outcome", out}};
}

bool BoundReport::all_hold() const {
    return std::all_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return c.holds; });
}

const BoundCheck& BoundReport::at(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return c;
    throw InvalidParameter("no bound named " + name);
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double lg(double v) { return v > 0.0 ? std::log(v) : kNegInf; }

// k * log v with 0 * (-inf) read as 0
double scaled(double k, double logv) { return k == 0.0 ? 0.0 : k * logv; }

void record(BoundCheck& c, int t, bool ok) {
    ++c.checked;
    if (!ok && c.holds) {
        c.holds = false;
        c.first_violation = t;
    }
}

// log-domain a <= b with relative slack
bool log_le(double a, double b) { return a == kNegInf || a <= b + 1e-10; }

}  // namespace

BoundReport verify_omega_bounds(const State& z0, const AlgebraSpec& spec, int t_max) {
    require_stochastic(spec);
    require_shape(z0, spec);
    for (double v : z0.x)
        if (v < 0) throw InvalidParameter("omega bounds need a non-negative start");
    for (double v : z0.y)
        if (v < 0) throw InvalidParameter("omega bounds need a non-negative start");

    double m = std::numeric_limits<double>::infinity(), gmax = 0.0, gtmax = 0.0;
    for (int i = 0; i < spec.n(); ++i)
        for (int j = 0; j < spec.nu(); ++j) {
            double g = spec.female_sum(i, j), gt = spec.male_sum(i, j);
            m = std::min(m, std::sqrt(std::max(0.0, g * gt)));
            gmax = std::max(gmax, g);
            gtmax = std::max(gtmax, gt);
        }
    const double M = gmax * gtmax;

    std::vector<double> w{omega(z0)};
    State z = z0;
    for (int t = 1; t <= t_max; ++t) {
        const bool structural_zero = in_O(z);
        z = apply_W(z, spec);
        double o = omega(z);
        // below this the doubly exponential bounds cannot be resolved in double precision
        if (o != 0.0 && (o < 1e-280 || o > 1e280)) break;
        if (o == 0.0 && !structural_zero) break;  // underflow
        w.push_back(o);
        if (o == 0.0) break;
    }

    BoundReport rep;
    BoundCheck mono{"monotone_decrease"}, lower{"lower_bound"}, upper{"upper_bound"}, refined{"refined_upper_bound"};
    BoundCheck half{"half_square_step"}, lstep{"lower_step"}, ustep{"upper_step"}, rstep{"refined_step"};
    mono.applicable = w[0] <= 4.0;
    const double l0 = lg(w[0]);
    for (size_t ti = 1; ti < w.size(); ++ti) {
        const int t = static_cast<int>(ti);
        const double lt = lg(w[t]);
        const double p2 = std::ldexp(1.0, t);
        if (mono.applicable) record(mono, t, w[t] <= w[t - 1] * (1 + 1e-12));
        record(lower, t, log_le(scaled(2 * (p2 - 1), lg(m)) + scaled(p2, l0), lt) || w[0] == 0.0);
        record(upper, t, log_le(lt, scaled(p2 - 1, lg(M)) + scaled(p2, l0)));
        const int k = t / 2;
        const double p4 = std::ldexp(1.0, 2 * k);
        const double base = t % 2 == 0 ? l0 : lg(w[0] / 4.0);
        record(refined, t, log_le(lt, scaled((p4 - 1) / 3, lg(M / 16)) + scaled(p4, base)));

        record(half, t, log_le(lt, 2 * lg(w[t - 1]) - std::log(4.0)));
        if (t >= 2) {
            record(lstep, t, w[t - 1] == 0.0 || log_le(2 * lg(m) + 2 * lg(w[t - 1]), lt));
            record(ustep, t, log_le(lt, lg(M) + 2 * lg(w[t - 1])));
            record(rstep, t, log_le(lt, lg(M / 16) + 4 * lg(w[t - 2])));
        }
    }
    rep.checks = {mono, lower, upper, refined, half, lstep, ustep, rstep};
    return rep;
}

BoundReport verify_coordinate_bounds(const State& z0, const AlgebraSpec& spec, int t_max) {
    require_stochastic(spec);
    require_shape(z0, spec);
    const int n = spec.n(), nu = spec.nu();
    std::vector<double> xlo(n, 1e300), xhi(n, -1e300), ylo(nu, 1e300), yhi(nu, -1e300);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < nu; ++j) {
            for (int k = 0; k < n; ++k) {
                xlo[k] = std::min(xlo[k], spec.gamma(i, j, k));
                xhi[k] = std::max(xhi[k], spec.gamma(i, j, k));
            }
            for (int r = 0; r < nu; ++r) {
                ylo[r] = std::min(ylo[r], spec.gamma_tilde(i, j, r));
                yhi[r] = std::max(yhi[r], spec.gamma_tilde(i, j, r));
            }
        }
    BoundCheck fem{"female_coordinates"}, mal{"male_coordinates"};
    const double tol = 1e-12;
    State z = z0;
    for (int t = 1; t <= t_max; ++t) {
        z = v_step(z, spec);
        bool okx = true, oky = true;
        for (int k = 0; k < n; ++k) okx = okx && z.x[k] >= xlo[k] - tol && z.x[k] <= xhi[k] + tol;
        for (int r = 0; r < nu; ++r) oky = oky && z.y[r] >= ylo[r] - tol && z.y[r] <= yhi[r] + tol;
        record(fem, t, okx);
        record(mal, t, oky);
    }
    BoundReport rep;
    rep.checks = {fem, mal};
    return rep;
}

Eigen::MatrixXd opposite_swap(int n, int nu) {
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(n + nu, n + nu);
    for (int r = 0; r < nu; ++r) phi(r, n + r) = 1.0;
    for (int i = 0; i < n; ++i) phi(nu + i, i) = 1.0;
    return phi;
}

bool verify_conjugacy(const AlgebraSpec& s1, const AlgebraSpec& s2, const Eigen::MatrixXd& phi, int samples,
                      std::uint64_t seed) {
    const int d = s1.dim();
    if (s2.dim() != d || phi.rows() != d || phi.cols() != d)
        throw ShapeMismatch("conjugacy map dimensions do not match the algebras");
    double det = phi.determinant();
    if (std::abs(det) < 1e-12) throw SingularMap("determinant " + std::to_string(det));

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto draw = [&] {
        Eigen::VectorXd v(d);
        for (int i = 0; i < d; ++i) v[i] = u(rng);
        return v;
    };
    auto map = [&](const Eigen::VectorXd& v) { return Element::from_flat(phi * v, s2.n()); };
    for (int s = 0; s < samples; ++s) {
        Eigen::VectorXd z = draw();
        Element z1 = Element::from_flat(z, s1.n());
        if (l1_distance(map(apply_W(z1, s1).flat()), apply_W(map(z), s2)) > 1e-9) return false;
        Eigen::VectorXd a = draw(), b = draw();
        Element ab = multiply(Element::from_flat(a, s1.n()), Element::from_flat(b, s1.n()), s1);
        if (l1_distance(map(ab.flat()), multiply(map(a), map(b), s2)) > 1e-9) return false;
    }
    return true;
}

json to_json(const BoundReport& rep) {
    json out = json::array();
    for (const auto& c : rep.checks) {
        json j{{"name", c.name}, {"applicable", c.applicable}, {"holds", c.holds}, {"steps_checked", c.checked}};
        if (c.first_violation >= 0) j["first_violation"] = c.first_violation;
        out.push_back(j);
    }
    return out;
}

}  // namespace gonosomal
