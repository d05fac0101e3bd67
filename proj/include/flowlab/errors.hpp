#pragma once

#include <stdexcept>
#include <string>

namespace flowlab {

enum class ErrorKind {
    kConfig,
    kShape,
    kOrdering,
    kState,
    kNumerical,
    kArgument,
    kInterval,
    kValidation,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), m_kind(kind) {}
    ErrorKind kind() const noexcept { return m_kind; }

private:
    ErrorKind m_kind;
};

#define FLOWLAB_DEFINE_ERROR(Name, Kind)                                        \
    class Name : public Error {                                                 \
    public:                                                                     \
        explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
    };

FLOWLAB_DEFINE_ERROR(ConfigError, kConfig)
FLOWLAB_DEFINE_ERROR(ShapeError, kShape)
FLOWLAB_DEFINE_ERROR(OrderingError, kOrdering)
FLOWLAB_DEFINE_ERROR(StateError, kState)
FLOWLAB_DEFINE_ERROR(NumericalError, kNumerical)
FLOWLAB_DEFINE_ERROR(ArgumentError, kArgument)
FLOWLAB_DEFINE_ERROR(IntervalError, kInterval)
FLOWLAB_DEFINE_ERROR(ValidationError, kValidation)

#undef FLOWLAB_DEFINE_ERROR

/// Process exit code for an error: 2 for numerical failures, 1 for everything else.
inline int exit_code_for(const Error& e) {
    return e.kind() == ErrorKind::kNumerical ? 2 : 1;
}

}  // namespace flowlab
