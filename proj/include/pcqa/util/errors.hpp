#pragma once

#include <stdexcept>
#include <string>

namespace pcqa {

/// Broad failure classes. The CLI maps these onto its exit-code contract.
enum class ErrorKind {
    Validation,   ///< bad user input, schema or domain violations
    Environment,  ///< missing binaries, unreadable paths
    Internal,     ///< invariant broken inside the toolkit
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

#define PCQA_DEFINE_ERROR(Name, Kind)                                                   \
    class Name : public Error {                                                         \
    public:                                                                             \
        explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {}        \
    }

PCQA_DEFINE_ERROR(ParseError, Validation);
PCQA_DEFINE_ERROR(UnsupportedFormatError, Validation);
PCQA_DEFINE_ERROR(SchemaError, Validation);
PCQA_DEFINE_ERROR(DomainError, Validation);
PCQA_DEFINE_ERROR(MissingAttributeError, Validation);
PCQA_DEFINE_ERROR(ConfigurationError, Validation);
PCQA_DEFINE_ERROR(ValidationError, Validation);
PCQA_DEFINE_ERROR(AuthError, Validation);
PCQA_DEFINE_ERROR(StateError, Validation);
PCQA_DEFINE_ERROR(IntegrityError, Validation);
PCQA_DEFINE_ERROR(EnvironmentError, Environment);
PCQA_DEFINE_ERROR(NumericalGuardError, Internal);
PCQA_DEFINE_ERROR(InternalError, Internal);

#undef PCQA_DEFINE_ERROR

}  // namespace pcqa
