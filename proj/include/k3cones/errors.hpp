#pragma once

#include <stdexcept>
#include <string>

namespace k3cones {

// Base class for all domain errors raised by the library.  `name()` is a
// stable machine-readable identifier (used by the CLI for stderr reporting
// and exit-code selection); `what()` carries a human-readable message.
class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& message)
        : std::runtime_error(message), name_(std::move(name)) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

#define K3CONES_DEFINE_ERROR(ClassName)                                  \
    class ClassName : public Error {                                     \
    public:                                                              \
        explicit ClassName(const std::string& message)                   \
            : Error(#ClassName, message) {}                              \
    }

K3CONES_DEFINE_ERROR(OddDegree);             // lattice degree parameter must be even
K3CONES_DEFINE_ERROR(NonPositiveDegree);     // lattice degree parameter must be >= 2
K3CONES_DEFINE_ERROR(NotPrimitive);          // vector has a common factor
K3CONES_DEFINE_ERROR(NonPositiveSquare);     // moduli vector needs square >= 2
K3CONES_DEFINE_ERROR(PerfectSquare);         // continued fraction of a square radicand
K3CONES_DEFINE_ERROR(DegenerateForm);        // quadratic form is not indefinite
K3CONES_DEFINE_ERROR(NoWitness);             // internal: wall record missing a witness
K3CONES_DEFINE_ERROR(UnstableEnumeration);   // wall set failed to stabilize under bound doubling
K3CONES_DEFINE_ERROR(DualityMismatch);       // the two effective-cone routes disagree
K3CONES_DEFINE_ERROR(EmptyPullbackLine);     // no distinguished ray for this vector
K3CONES_DEFINE_ERROR(NotRigid);              // bundle input vector must have square -2
K3CONES_DEFINE_ERROR(BadModuliVector);       // derived moduli vector is invalid
K3CONES_DEFINE_ERROR(NoRigidVector);         // no rigid vector exists for these parameters
K3CONES_DEFINE_ERROR(NotInComplement);       // ray cannot be restricted: wrong pairing with the distinguished class
K3CONES_DEFINE_ERROR(InternalError);         // invariant breach inside the library

#undef K3CONES_DEFINE_ERROR

}  // namespace k3cones
