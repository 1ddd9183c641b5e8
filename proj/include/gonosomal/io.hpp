#pragma once

#include <string>

#include "json.hpp"

#include "gonosomal/algebra.hpp"

namespace gonosomal {

using json = nlohmann::json;

json to_json(const AlgebraSpec& spec);
// ParseError for malformed documents, ShapeMismatch for tensors that disagree with (n, nu)
AlgebraSpec algebra_from_json(const json& doc);
AlgebraSpec load_algebra(const std::string& path);
json read_json_file(const std::string& path);

json to_json(const Element& e);
json to_json(const ValidationReport& rep);

}  // namespace gonosomal
