#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gonosomal/algebra.hpp"
#include "gonosomal/io.hpp"

namespace gonosomal {

Element associator(const Element& a, const Element& b, const Element& c, const AlgebraSpec& spec);
Element principal_power(const Element& a, int k, const AlgebraSpec& spec);

enum class Verdict { HoldsOnSamples, Violated };

struct IdentityResult {
    Verdict verdict = Verdict::HoldsOnSamples;
    std::vector<Element> witness;  // empty when the identity held
    std::string witness_source;    // "basis" or "random"
    std::string form;              // which side of a two-form identity failed
    double defect = 0.0;           // witness defect, or the largest defect seen when it held
    int tested = 0;
};

struct IdentityReport {
    std::map<std::string, IdentityResult> results;
    const IdentityResult& at(const std::string& name) const { return results.at(name); }
};

inline constexpr double kIdentityDefect = 1e-8;

// names: associativity, flexibility, alternativity, jordan, power_associativity, jacobi
IdentityReport check_identities(const AlgebraSpec& spec, int samples, std::uint64_t seed);

json to_json(const IdentityReport& rep);
std::string to_string(Verdict v);

}  // namespace gonosomal
