#pragma once

#include <stdexcept>
#include <string>

namespace disint {

// Base class for everything this library throws on purpose.
// ContractError  -> caller handed us something malformed (CLI exit code 2).
// ExhaustionError-> a semidecision ran out of fuel / budget   (CLI exit code 3).
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct ContractError : Error {
    using Error::Error;
};

struct ExhaustionError : Error {
    using Error::Error;
};

// exact_reals
struct DivisorStraddlesZero : ExhaustionError {
    explicit DivisorStraddlesZero(const std::string& w = "interval divisor straddles zero at every queried precision")
        : ExhaustionError(w) {}
};
struct EnclosureStall : ExhaustionError {
    explicit EnclosureStall(const std::string& w) : ExhaustionError(w) {}
};

// spaces
struct UnknownKind : ContractError {
    explicit UnknownKind(const std::string& w) : ContractError(w) {}
};
struct SpaceMismatch : ContractError {
    explicit SpaceMismatch(const std::string& w) : ContractError(w) {}
};
struct CauchyViolation : ContractError {
    explicit CauchyViolation(const std::string& w) : ContractError(w) {}
};

// measures / continuity
struct NotNormalized : ContractError {
    explicit NotNormalized(const std::string& w) : ContractError(w) {}
};
struct WitnessInconsistent : ContractError {
    explicit WitnessInconsistent(const std::string& w) : ContractError(w) {}
};
struct InconsistentValues : ContractError {
    explicit InconsistentValues(const std::string& w) : ContractError(w) {}
};
struct CertificateTimeout : ExhaustionError {
    std::size_t stage;
    explicit CertificateTimeout(std::size_t s, const std::string& w)
        : ExhaustionError(w), stage(s) {}
};

// conditioning / disintegration
struct NullConditioningSet : ExhaustionError {
    explicit NullConditioningSet(const std::string& w) : ExhaustionError(w) {}
};
struct SearchDiverged : ExhaustionError {
    explicit SearchDiverged(const std::string& w) : ExhaustionError(w) {}
};
struct OracleExhausted : ExhaustionError {
    explicit OracleExhausted(const std::string& w) : ExhaustionError(w) {}
};

// oracle_harness
struct InputDemandExceeded : ExhaustionError {
    explicit InputDemandExceeded(const std::string& w) : ExhaustionError(w) {}
};

// constructions
struct AmbiguousAtom : ExhaustionError {
    explicit AmbiguousAtom(const std::string& w) : ExhaustionError(w) {}
};
struct NotFaithful : ContractError {
    explicit NotFaithful(const std::string& w) : ContractError(w) {}
};

// cli
struct BadSpec : ContractError {
    explicit BadSpec(const std::string& w) : ContractError(w) {}
};

} // namespace disint
