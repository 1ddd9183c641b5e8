#include "gonosomal/io.hpp"

#include <fstream>
#include <sstream>

namespace gonosomal {

json to_json(const AlgebraSpec& spec) {
    return json{{"n", spec.n()},
                {"nu", spec.nu()},
                {"gamma", spec.gamma_nested()},
                {"gamma_tilde", spec.gamma_tilde_nested()}};
}

static AlgebraSpec::Tensor3 tensor_from(const json& doc, const char* key) {
    if (!doc.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
    const json& t = doc.at(key);
    AlgebraSpec::Tensor3 out;
    if (!t.is_array()) throw ParseError(std::string(key) + " must be a nested array");
    for (const auto& a : t) {
        if (!a.is_array()) throw ParseError(std::string(key) + " must be a nested array");
        std::vector<std::vector<double>> mid;
        for (const auto& b : a) {
            if (!b.is_array()) throw ParseError(std::string(key) + " must be a nested array");
            std::vector<double> row;
            for (const auto& v : b) {
                if (!v.is_number()) throw ParseError(std::string(key) + " contains a non-number");
                row.push_back(v.get<double>());
            }
            mid.push_back(std::move(row));
        }
        out.push_back(std::move(mid));
    }
    return out;
}

AlgebraSpec algebra_from_json(const json& doc) {
    if (!doc.is_object()) throw ParseError("algebra document must be an object");
    for (const char* key : {"n", "nu"})
        if (!doc.contains(key) || !doc.at(key).is_number_integer())
            throw ParseError(std::string("field '") + key + "' must be an integer");
    int n = doc.at("n").get<int>(), nu = doc.at("nu").get<int>();
    if (n < 1 || nu < 1) throw ParseError("n and nu must be positive");
    return AlgebraSpec::from_nested(n, nu, tensor_from(doc, "gamma"), tensor_from(doc, "gamma_tilde"));
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

AlgebraSpec load_algebra(const std::string& path) { return algebra_from_json(read_json_file(path)); }

json to_json(const Element& e) { return json{{"x", e.x}, {"y", e.y}}; }

json to_json(const ValidationReport& rep) {
    json v = json::array();
    for (const auto& viol : rep.violations) {
        json j{{"kind", viol.kind == Violation::Kind::RowSum ? "row_sum" : "negative"},
               {"i", viol.i + 1},
               {"j", viol.j + 1},
               {"value", viol.value},
               {"message", viol.describe()}};
        if (viol.kind == Violation::Kind::Negative) {
            j["k"] = viol.k + 1;
            j["tensor"] = viol.male ? "gamma_tilde" : "gamma";
        }
        v.push_back(j);
    }
    return json{{"is_gonosomal", rep.is_gonosomal}, {"is_stochastic", rep.is_stochastic}, {"violations", v}};
}

}  // namespace gonosomal
