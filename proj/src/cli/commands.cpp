#include "cli/commands.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <random>
#include <sstream>

#include "CLI11.hpp"

#include "gonosomal/algebra.hpp"
#include "gonosomal/dynamics.hpp"
#include "gonosomal/fixed_points.hpp"
#include "gonosomal/identities.hpp"
#include "gonosomal/io.hpp"
#include "gonosomal/scenarios.hpp"

namespace gonosomal::cli {

namespace {

// domain failure carrying a message for stderr
struct DomainFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

const std::vector<std::string> kParamNames = {"gamma", "gamma1", "gamma2", "delta1", "delta2", "mu", "eta"};

struct Config {
    std::string out;
    std::string format;
    std::uint64_t seed = 1;
    int steps = 500;
    double tol = 1e-9;
    int max_period = 8;
    int patience = 3;
    double div_threshold = 1e12;

    std::string algebra_path;
    std::string scenario_tag;
    std::string scenario_path;
    std::vector<int> random_type;
    std::map<std::string, double> params;

    std::string op = "W";
    std::vector<double> init;
    bool init_simplex = false;
    int grid = 0;
    int samples = 100;
    std::string path;

    IterationOptions iteration() const {
        IterationOptions o;
        o.max_steps = steps;
        o.conv_tol = tol;
        o.max_period = max_period;
        o.patience = patience;
        o.div_threshold = div_threshold;
        return o;
    }
};

struct Input {
    AlgebraSpec spec;
    std::optional<Scenario> scenario;
    json source;
};

Input load_input(const Config& c) {
    int given = !c.algebra_path.empty() + !c.scenario_tag.empty() + !c.scenario_path.empty() + !c.random_type.empty();
    if (given != 1)
        throw ParseError("give exactly one input: --algebra, --scenario, --scenario-file or --random");
    if (!c.params.empty() && c.scenario_tag.empty())
        throw ParseError("scenario parameters need --scenario");
    if (!c.algebra_path.empty())
        return {load_algebra(c.algebra_path), std::nullopt, json{{"algebra_file", c.algebra_path}}};
    if (!c.random_type.empty()) {
        if (c.random_type.size() != 2 || c.random_type[0] < 1 || c.random_type[1] < 1)
            throw ParseError("--random takes n,nu with both positive");
        return {random_stochastic(c.random_type[0], c.random_type[1], c.seed), std::nullopt,
                json{{"random", {{"n", c.random_type[0]}, {"nu", c.random_type[1]}, {"seed", c.seed}}}}};
    }
    Scenario s = c.scenario_path.empty() ? Scenario::from_tag(c.scenario_tag, c.params)
                                         : scenario_from_json(read_json_file(c.scenario_path));
    return {build_algebra(s), s, to_json(s)};
}

State initial_state(const Config& c, const AlgebraSpec& spec) {
    if (c.init_simplex == !c.init.empty()) throw ParseError("give exactly one of --init or --init-simplex");
    if (c.init_simplex) {
        std::mt19937_64 rng(c.seed);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        Eigen::VectorXd v(spec.dim());
        for (int i = 0; i < spec.dim(); ++i) v[i] = u(rng);
        return Element::from_flat(v / v.sum(), spec.n());
    }
    if (static_cast<int>(c.init.size()) != spec.dim())
        throw ParseError("--init has " + std::to_string(c.init.size()) + " values, the algebra needs " +
                         std::to_string(spec.dim()));
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(c.init.data(), spec.dim());
    return Element::from_flat(v, spec.n());
}

void emit(const Config& c, const std::string& text, std::ostream& out) {
    if (c.out.empty()) {
        out << text;
        return;
    }
    std::ofstream f(c.out);
    if (!f) throw ParseError("cannot write " + c.out);
    f << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void json_only(const Config& c, const char* cmd) {
    if (!c.format.empty() && c.format != "json")
        throw ParseError(std::string(cmd) + " writes JSON only");
}

// ---- validate

int cmd_validate(const Config& c, std::ostream& out) {
    AlgebraSpec spec = load_algebra(c.path);
    ValidationReport rep = validate(spec);
    if (c.format == "json") {
        out << dump(to_json(rep));
    } else {
        out << "type: (" << spec.n() << "," << spec.nu() << ")\n";
        out << "gonosomal: " << (rep.is_gonosomal ? "yes" : "no") << "\n";
        out << "stochastic: " << (rep.is_stochastic ? "yes" : "no") << "\n";
        for (const auto& v : rep.violations) out << "violation: " << v.describe() << "\n";
    }
    return rep.is_gonosomal ? kOk : kDomainFailure;
}

// ---- simulate

int cmd_simulate(const Config& c, std::ostream& out, std::ostream& err) {
    if (!c.format.empty() && c.format != "csv" && c.format != "json") throw ParseError("--format must be csv or json");
    Input in = load_input(c);
    State z0 = initial_state(c, in.spec);
    Operator op = parse_operator(c.op);
    Trajectory tr = iterate(z0, in.spec, op, c.iteration());
    if (tr.outcome.kind == OutcomeKind::AbsorbedToO && tr.outcome.step == 0)
        throw DomainFailure("AbsorbedToO: initial state " + to_string(z0) +
                            " lies in O (all female or all male coordinates are zero), V is undefined there");
    std::ostringstream body;
    if (c.format == "json") {
        json j = to_json(tr);
        j["source"] = in.source;
        body << dump(j);
    } else {
        write_csv(body, tr);
    }
    emit(c, body.str(), out);
    (c.out.empty() ? err : out) << "outcome: " << tr.outcome.summary() << "\n";
    return kOk;
}

// ---- fixed points

struct ClosedForm {
    std::vector<FixedPointRecord> records;
    std::vector<std::string> notes;
};

FixedPointRecord swap_record(const FixedPointRecord& r, const AlgebraSpec& spec) {
    FixedPointRecord o;
    o.op = r.op;
    o.label = r.label;
    o.point = State(r.point.y, r.point.x);
    if (r.family) {
        Family f;
        f.base = State(r.family->base.y, r.family->base.x);
        const int n = r.point.n(), nu = r.point.nu();
        Eigen::VectorXd d(n + nu);
        d << r.family->direction.tail(nu), r.family->direction.head(n);
        f.direction = d;
        o.family = f;
    }
    populate(o, spec);
    return o;
}

std::optional<ClosedForm> closed_form_for(const Scenario& s, const AlgebraSpec& spec) {
    ClosedForm cf;
    switch (s.kind) {
        case ScenarioKind::DominantLethal_LethalMale:
        case ScenarioKind::DominantLethal_Mutation: {
            double g = spec.gamma(0, 0, 0);
            try {
                cf.records = closed_form_fixed_points_type11(g);
            } catch (const DegenerateParameter&) {
                cf.records = {};
                FixedPointRecord o;
                o.point = State({0.0}, {0.0});
                o.label = "origin";
                populate(o, spec);
                cf.records.push_back(o);
                cf.notes.push_back("gamma is 0 or 1: only the origin is fixed");
            }
            return cf;
        }
        case ScenarioKind::RecessiveLethal_LethalMale: {
            Type21 p = Type21::of(s);
            cf.records = closed_form_fixed_points_type21(p.g1, p.g2, p.d1, p.d2, &cf.notes);
            return cf;
        }
        case ScenarioKind::XicInactivation: {
            auto base = closed_form_fixed_points_type21(s.param("gamma1"), s.param("gamma2"), s.param("delta1"),
                                                        s.param("delta2"), &cf.notes);
            for (const auto& r : base) cf.records.push_back(swap_record(r, spec));
            return cf;
        }
        case ScenarioKind::RecessiveLethal_NonlethalMale: {
            try {
                cf.records = closed_form_fixed_points_hemophilia(s.param("mu"), s.param("eta"));
            } catch (const UncoveredCase& e) {
                return std::nullopt;
            }
            return cf;
        }
    }
    return std::nullopt;
}

// closed-form W points carried to the simplex for comparison with V roots
std::vector<FixedPointRecord> normalized_records(const std::vector<FixedPointRecord>& w, const AlgebraSpec& spec) {
    std::vector<FixedPointRecord> out;
    for (const auto& r : w) {
        FixedPointRecord v;
        v.op = Operator::V;
        v.label = r.label;
        try {
            v.point = normalize_fixed_point(r);
        } catch (const NotNormalizable&) {
            continue;
        }
        if (in_O(v.point)) continue;
        if (r.family) {
            Family f = *r.family;
            f.base = v.point;
            v.family = f;
        }
        populate(v, spec);
        out.push_back(v);
    }
    return out;
}

int cmd_fixed_points(const Config& c, std::ostream& out) {
    json_only(c, "fixed-points");
    Input in = load_input(c);
    Operator op = parse_operator(c.op);
    int grid = c.grid > 0 ? c.grid : (in.spec.dim() <= 4 ? 3 : 2);
    SolverDiagnostics diag;
    auto numeric = solve_fixed_points_numeric(in.spec, op, grid, c.seed, &diag);

    json rep{{"source", in.source},
             {"algebra", to_json(in.spec)},
             {"operator", to_string(op)},
             {"numeric", to_json(numeric)},
             {"diagnostics",
              {{"grid", grid},
               {"starts", diag.starts},
               {"converged", diag.converged},
               {"dropped", diag.dropped},
               {"omega_below_4_violations", diag.omega_violations}}}};
    int code = kOk;
    if (in.scenario) {
        if (auto cf = closed_form_for(*in.scenario, in.spec)) {
            auto closed = op == Operator::W ? cf->records : normalized_records(cf->records, in.spec);
            MatchReport m = match_fixed_point_sets(closed, numeric, 1e-6);
            rep["closed_form"] = to_json(closed);
            if (!cf->notes.empty()) rep["closed_form_notes"] = cf->notes;
            rep["cross_check"] = {{"max_mismatch", m.max_mismatch}, {"pass", m.matched}, {"unmatched", m.unmatched}};
            if (!m.matched) code = kDomainFailure;
        }
    }
    emit(c, dump(rep), out);
    return code;
}

// ---- identities

int cmd_identities(const Config& c, std::ostream& out) {
    json_only(c, "identities");
    AlgebraSpec spec = load_algebra(c.path);
    IdentityReport rep = check_identities(spec, c.samples, c.seed);
    emit(c, dump(json{{"algebra_file", c.path}, {"samples", c.samples}, {"seed", c.seed}, {"identities", to_json(rep)}}),
         out);
    return kOk;
}

// ---- predict

struct Verification {
    json checks = json::array();
    bool ok = true;
    void add(const std::string& name, bool pass, json detail = json::object()) {
        detail["name"] = name;
        detail["pass"] = pass;
        checks.push_back(detail);
        ok = ok && pass;
    }
};

bool on_simplex(const State& z) {
    for (double v : z.x)
        if (v < 0) return false;
    for (double v : z.y)
        if (v < 0) return false;
    return std::abs(omega(z) - 1.0) <= 1e-10 && !in_O(z);
}

bool near_zero_outcome(const Trajectory& tr) {
    auto k = tr.outcome.kind;
    return k == OutcomeKind::ExtinctAt || k == OutcomeKind::NumericallyExtinct ||
           (k == OutcomeKind::ConvergedTo && l1_norm(tr.outcome.limit) < 1e-6);
}

void verify_w_limit(Verification& v, WLimit predicted, const State& z0, const AlgebraSpec& spec, const Config& c) {
    if (predicted != WLimit::Zero && predicted != WLimit::Infinity) return;
    Trajectory tr = iterate(z0, spec, Operator::W, c.iteration());
    bool pass = predicted == WLimit::Zero ? near_zero_outcome(tr) : tr.outcome.kind == OutcomeKind::Divergent;
    v.add("w_limit", pass, {{"predicted", to_string(predicted)}, {"observed", tr.outcome.summary()}});
}

void verify_v_limit(Verification& v, const ClosedFormLimit& p, const State& z0, const AlgebraSpec& spec,
                    const Config& c) {
    if (!on_simplex(z0)) return;
    Trajectory tr = iterate(z0, spec, Operator::V, c.iteration());
    if (p.v_limit) {
        double err = tr.outcome.kind == OutcomeKind::ConvergedTo ? l1_distance(tr.outcome.limit, *p.v_limit)
                                                                 : std::numeric_limits<double>::infinity();
        v.add("v_limit", err <= 1e-6, {{"observed", tr.outcome.summary()}, {"error", err}});
    } else if (!p.v_cycle.empty()) {
        double err = std::numeric_limits<double>::infinity();
        if (tr.outcome.kind == OutcomeKind::Cycle && tr.outcome.period == 2) {
            const auto& a = tr.outcome.cycle;
            err = std::min(l1_distance(a[0], p.v_cycle[0]) + l1_distance(a[1], p.v_cycle[1]),
                           l1_distance(a[0], p.v_cycle[1]) + l1_distance(a[1], p.v_cycle[0]));
        }
        v.add("v_cycle", err <= 1e-6, {{"observed", tr.outcome.summary()}, {"error", err}});
    }
}

int cmd_predict(const Config& c, std::ostream& out) {
    json_only(c, "predict");
    Input in = load_input(c);
    if (!in.scenario) throw ParseError("predict needs a scenario (--scenario or --scenario-file)");
    const Scenario& s = *in.scenario;
    State z0 = initial_state(c, in.spec);
    json rep{{"source", in.source}, {"init", to_json(z0)}};
    Verification v;

    switch (s.kind) {
        case ScenarioKind::DominantLethal_LethalMale:
        case ScenarioKind::DominantLethal_Mutation: {
            double g = in.spec.gamma(0, 0, 0);
            ClosedFormLimit p = predict_limit_type11(z0, g);
            rep["prediction"] = to_json(p);
            if (p.boundary) {
                State w = z0;
                double worst = 0.0;
                for (int t = 1; t <= 6; ++t) {
                    w = apply_W(w, in.spec);
                    State cf = closed_form_trajectory_type11(z0, g, t);
                    worst = std::max(worst, l1_distance(w, cf) / std::max(l1_norm(cf), 1e-300));
                }
                v.add("boundary_closed_form", worst <= 1e-10, {{"relative_error", worst}});
            } else {
                verify_w_limit(v, p.w_limit, z0, in.spec, c);
            }
            if (on_simplex(z0)) {
                double err = l1_distance(apply_V(z0, in.spec), *p.v_limit);
                v.add("v_one_step", err <= 1e-12, {{"error", err}});
            }
            break;
        }
        case ScenarioKind::RecessiveLethal_LethalMale: {
            EsetClassification cls = classify_eset(z0, s);
            rep["classification"] = to_json(cls);
            ClosedFormLimit p = predict_limit_type21(z0, s, cls);
            rep["prediction"] = to_json(p);
            if (p.boundary) {
                State w = z0;
                for (int t = 1; t <= 3; ++t) w = apply_W(w, in.spec);
                // first orbit entry is the odd-step state, or the fixed point reached by step 3
                const State& expect = p.w_boundary_orbit[0];
                double err = l1_distance(w, expect) / std::max(l1_norm(expect), 1e-300);
                v.add("boundary_orbit", err <= 1e-9, {{"relative_error", err}});
            } else {
                verify_w_limit(v, p.w_limit, z0, in.spec, c);
            }
            verify_v_limit(v, p, z0, in.spec, c);
            break;
        }
        case ScenarioKind::RecessiveLethal_NonlethalMale: {
            double mu = s.param("mu"), eta = s.param("eta");
            try {
                HemophiliaPrediction p = hemophilia_degenerate_limits(z0, mu, eta);
                rep["prediction"] = to_json(p);
                if (p.zero_from > 0) {
                    State w = z0;
                    for (int t = 1; t <= p.zero_from; ++t) w = apply_W(w, in.spec);
                    v.add("extinct_at_" + std::to_string(p.zero_from), is_exact_zero(w), {{"state", to_json(w)}});
                } else {
                    if (p.boundary) {
                        State w = z0;
                        for (int t = 1; t <= 3; ++t) w = apply_W(w, in.spec);
                        double err = l1_distance(w, p.fixed_point) / l1_norm(p.fixed_point);
                        v.add("boundary_fixed_point", err <= 1e-9, {{"relative_error", err}});
                    } else {
                        verify_w_limit(v, p.w_limit, z0, in.spec, c);
                    }
                    if (on_simplex(z0)) {
                        State w = z0;
                        double worst = 0.0;
                        for (int t = 1; t <= p.v_constant_from + 5; ++t) {
                            w = apply_V(w, in.spec);
                            if (t >= p.v_constant_from) worst = std::max(worst, l1_distance(w, p.v_state));
                        }
                        v.add("v_constant", worst <= 1e-12, {{"error", worst}});
                    }
                }
            } catch (const UncoveredCase&) {
                // general case: convergence to zero plus the Lyapunov bound
                rep["prediction"] = {{"case", "general"}, {"w_limit", "zero"}};
                if (!on_simplex(z0)) throw ParseError("the general hemophilia case is checked from simplex starts");
                State w = z0;
                bool bound = true;
                for (int n = 1; n <= 8; ++n) {
                    w = apply_W(w, in.spec);
                    bound = bound && hemophilia_lyapunov(w) <= std::pow(0.25, std::ldexp(1.0, n)) * (1 + 1e-12);
                }
                v.add("lyapunov_bound", bound);
                verify_w_limit(v, WLimit::Zero, z0, in.spec, c);
            }
            break;
        }
        case ScenarioKind::XicInactivation:
            throw ParseError("predict covers lr_lethal, lr_mutation, rl_lethal and hemophilia");
    }
    rep["verification"] = v.checks;
    rep["agree"] = v.ok;
    emit(c, dump(rep), out);
    return v.ok ? kOk : kDomainFailure;
}

int cmd_scenario_list(std::ostream& out) {
    for (const auto& s : scenario_catalog()) {
        out << s.tag << " (";
        for (size_t i = 0; i < s.params.size(); ++i) out << (i ? ", " : "") << s.params[i];
        out << "): " << s.description << "\n";
    }
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Config c;
    CLI::App app{"gonosomal algebras and their evolution operators"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--out", c.out, "output path (default stdout)");
    app.add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--seed", c.seed, "seed for random algebras, starts and samples");
    app.add_option("--steps", c.steps, "iteration cap")->check(CLI::PositiveNumber);
    app.add_option("--tol", c.tol, "convergence tolerance (L1)")->check(CLI::PositiveNumber);
    app.add_option("--max-period", c.max_period, "longest cycle searched")->check(CLI::Range(2, 1000));

    auto add_input = [&](CLI::App* sub) {
        sub->add_option("--algebra", c.algebra_path, "algebra JSON file");
        sub->add_option("--scenario", c.scenario_tag, "scenario tag (see: scenario list)");
        sub->add_option("--scenario-file", c.scenario_path, "scenario JSON file");
        sub->add_option("--random", c.random_type, "random stochastic algebra of type n,nu")->delimiter(',');
        for (const auto& p : kParamNames)
            sub->add_option_function<double>("--" + p, [&c, p](double v) { c.params[p] = v; }, "scenario parameter");
    };

    auto* val = app.add_subcommand("validate", "check the defining constraints of an algebra file");
    val->add_option("path", c.path)->required();

    auto* sim = app.add_subcommand("simulate", "iterate W or V and write the trajectory");
    add_input(sim);
    sim->add_option("--operator", c.op, "W or V");
    sim->add_option("--init", c.init, "initial state x1,..,xn,y1,..,ynu")->delimiter(',');
    sim->add_flag("--init-simplex", c.init_simplex, "seeded uniform start on the simplex");
    sim->add_option("--patience", c.patience)->check(CLI::PositiveNumber);
    sim->add_option("--div-threshold", c.div_threshold)->check(CLI::PositiveNumber);

    auto* fp = app.add_subcommand("fixed-points", "solve W(z)=z or V(z)=z");
    add_input(fp);
    fp->add_option("--operator", c.op, "W or V");
    fp->add_option("--grid", c.grid, "lattice points per axis")->check(CLI::PositiveNumber);

    auto* ids = app.add_subcommand("identities", "search for identity violations");
    ids->add_option("path", c.path)->required();
    ids->add_option("--samples", c.samples)->check(CLI::PositiveNumber);

    auto* pred = app.add_subcommand("predict", "closed-form limits checked against iteration");
    add_input(pred);
    pred->add_option("--init", c.init, "initial state")->delimiter(',');
    pred->add_flag("--init-simplex", c.init_simplex, "seeded uniform start on the simplex");
    pred->add_option("--patience", c.patience)->check(CLI::PositiveNumber);

    auto* scen = app.add_subcommand("scenario", "scenario catalog");
    auto* scen_list = scen->add_subcommand("list", "list scenario tags and parameters");
    scen->require_subcommand(1);

    std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }

    try {
        if (*val) return cmd_validate(c, out);
        if (*sim) return cmd_simulate(c, out, err);
        if (*fp) return cmd_fixed_points(c, out);
        if (*ids) return cmd_identities(c, out);
        if (*pred) return cmd_predict(c, out);
        if (*scen_list) return cmd_scenario_list(out);
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const ShapeMismatch& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const InvalidParameter& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const DomainFailure& e) {
        err << "error: " << e.what() << "\n";
        return kDomainFailure;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kDomainFailure;
    }
    return kInputError;
}

}  // namespace gonosomal::cli
