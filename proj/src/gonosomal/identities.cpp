#include "gonosomal/identities.hpp"

#include <functional>
#include <random>

namespace gonosomal {

Element associator(const Element& a, const Element& b, const Element& c, const AlgebraSpec& spec) {
    return multiply(multiply(a, b, spec), c, spec) - multiply(a, multiply(b, c, spec), spec);
}

Element principal_power(const Element& a, int k, const AlgebraSpec& spec) {
    if (k < 1) throw InvalidParameter("principal power needs k >= 1");
    Element p = a;
    for (int i = 1; i < k; ++i) p = multiply(a, p, spec);
    return p;
}

std::string to_string(Verdict v) { return v == Verdict::Violated ? "violated" : "holds_on_samples"; }

namespace {

struct Defect {
    double value;
    std::string form;
};

using Check = std::function<Defect(const std::vector<Element>&, const AlgebraSpec&)>;

struct Identity {
    std::string name;
    int arity;
    Check check;
};

std::vector<Identity> identities() {
    auto mul = [](const Element& a, const Element& b, const AlgebraSpec& s) { return multiply(a, b, s); };
    return {
        {"associativity", 3,
         [](const std::vector<Element>& v, const AlgebraSpec& s) {
             return Defect{l1_norm(associator(v[0], v[1], v[2], s)), "(xy)z = x(yz)"};
         }},
        {"flexibility", 2,
         [mul](const std::vector<Element>& v, const AlgebraSpec& s) {
             const Element &x = v[0], &y = v[1];
             return Defect{l1_distance(mul(x, mul(y, x, s), s), mul(mul(x, y, s), x, s)), "x(yx) = (xy)x"};
         }},
        {"alternativity", 2,
         [mul](const std::vector<Element>& v, const AlgebraSpec& s) {
             const Element &x = v[0], &y = v[1];
             Element x2 = mul(x, x, s);
             double left = l1_distance(mul(x2, y, s), mul(x, mul(x, y, s), s));
             double right = l1_distance(mul(y, x2, s), mul(mul(y, x, s), x, s));
             if (left >= right) return Defect{left, "x^2 y = x(xy)"};
             return Defect{right, "y x^2 = (yx)x"};
         }},
        {"jordan", 2,
         [mul](const std::vector<Element>& v, const AlgebraSpec& s) {
             const Element &x = v[0], &y = v[1];
             Element x2 = mul(x, x, s);
             return Defect{l1_distance(mul(x2, mul(x, y, s), s), mul(x, mul(x2, y, s), s)),
                           "x^2(xy) = x(x^2 y)"};
         }},
        {"power_associativity", 1,
         [mul](const std::vector<Element>& v, const AlgebraSpec& s) {
             Element x2 = principal_power(v[0], 2, s);
             return Defect{l1_distance(mul(x2, x2, s), principal_power(v[0], 4, s)), "x^2 x^2 = x^4"};
         }},
        {"jacobi", 3,
         [mul](const std::vector<Element>& v, const AlgebraSpec& s) {
             const Element &x = v[0], &y = v[1], &z = v[2];
             Element j = mul(mul(x, y, s), z, s) + mul(mul(y, z, s), x, s) + mul(mul(z, x, s), y, s);
             return Defect{l1_norm(j), "(xy)z + (yz)x + (zx)y = 0"};
         }},
    };
}

// basis elements, then the mixed sums e_i + ẽ_p
std::vector<Element> basis_pool(const AlgebraSpec& spec) {
    const int n = spec.n(), nu = spec.nu();
    std::vector<Element> pool;
    for (int i = 0; i < n; ++i) pool.push_back(Element::female(n, nu, i));
    for (int p = 0; p < nu; ++p) pool.push_back(Element::male(n, nu, p));
    for (int i = 0; i < n; ++i)
        for (int p = 0; p < nu; ++p) pool.push_back(Element::female(n, nu, i) + Element::male(n, nu, p));
    return pool;
}

// visits every arity-tuple from pool; stops when visit returns true
bool for_each_tuple(const std::vector<Element>& pool, int arity,
                    const std::function<bool(const std::vector<Element>&)>& visit) {
    std::vector<size_t> idx(arity, 0);
    std::vector<Element> tup(arity);
    while (true) {
        for (int a = 0; a < arity; ++a) tup[a] = pool[idx[a]];
        if (visit(tup)) return true;
        int a = arity - 1;
        while (a >= 0 && ++idx[a] == pool.size()) idx[a--] = 0;
        if (a < 0) return false;
    }
}

}  // namespace

IdentityReport check_identities(const AlgebraSpec& spec, int samples, std::uint64_t seed) {
    if (samples < 1) throw InvalidParameter("samples must be at least 1");
    IdentityReport rep;
    auto pool = basis_pool(spec);
    auto ids = identities();
    for (size_t id = 0; id < ids.size(); ++id) {
        const Identity& ident = ids[id];
        IdentityResult res;
        auto visit = [&](const std::vector<Element>& tup, const char* source) {
            Defect d = ident.check(tup, spec);
            ++res.tested;
            if (d.value > kIdentityDefect) {
                res.verdict = Verdict::Violated;
                res.witness = tup;
                res.witness_source = source;
                res.form = d.form;
                res.defect = d.value;
                return true;
            }
            res.defect = std::max(res.defect, d.value);
            return false;
        };
        bool found = for_each_tuple(pool, ident.arity, [&](const std::vector<Element>& t) { return visit(t, "basis"); });
        if (!found) {
            std::mt19937_64 rng(seed + 0x9E3779B97F4A7C15ULL * (id + 1));
            std::uniform_real_distribution<double> u(0.0, 1.0);
            for (int s = 0; s < samples && !found; ++s) {
                std::vector<Element> tup;
                for (int a = 0; a < ident.arity; ++a) {
                    Element e = Element::zero(spec.n(), spec.nu());
                    for (double& v : e.x) v = u(rng);
                    for (double& v : e.y) v = u(rng);
                    tup.push_back(std::move(e));
                }
                found = visit(tup, "random");
            }
        }
        rep.results[ident.name] = std::move(res);
    }
    return rep;
}

json to_json(const IdentityReport& rep) {
    json out = json::object();
    for (const auto& [name, res] : rep.results) {
        json w = json::array();
        for (const auto& e : res.witness) w.push_back(to_json(e));
        json j{{"verdict", to_string(res.verdict)}, {"defect", res.defect}, {"tuples_tested", res.tested}};
        if (res.verdict == Verdict::Violated) {
            j["witness"] = w;
            j["witness_source"] = res.witness_source;
            j["identity_form"] = res.form;
        }
        out[name] = j;
    }
    return out;
}

}  // namespace gonosomal
