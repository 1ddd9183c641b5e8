#pragma once

#include <stdexcept>
#include <string>

namespace gonosomal {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define GONOSOMAL_ERROR(Name)                       \
    class Name : public Error {                     \
    public:                                         \
        explicit Name(const std::string& what)      \
            : Error(std::string(#Name ": ") + what) {} \
    }

GONOSOMAL_ERROR(ShapeMismatch);
GONOSOMAL_ERROR(SingularBasisChange);
GONOSOMAL_ERROR(AbsorbedToO);
GONOSOMAL_ERROR(NotStochastic);
GONOSOMAL_ERROR(DegenerateParameter);
GONOSOMAL_ERROR(UncoveredCase);
GONOSOMAL_ERROR(NotIdempotent);
GONOSOMAL_ERROR(NotNormalizable);
GONOSOMAL_ERROR(SingularMap);
GONOSOMAL_ERROR(InvalidParameter);
GONOSOMAL_ERROR(MaleExtinction);
GONOSOMAL_ERROR(EqualModulusEigenvalues);
GONOSOMAL_ERROR(DegenerateDenominator);
GONOSOMAL_ERROR(ParseError);

#undef GONOSOMAL_ERROR

}  // namespace gonosomal
