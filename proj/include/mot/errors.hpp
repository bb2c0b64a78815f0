#pragma once

#include <stdexcept>
#include <string>

namespace mot {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonFiniteMean : Error {
    using Error::Error;
};
struct AtomicMuRejected : Error {
    using Error::Error;
};
struct AccumulationDetected : Error {
    using Error::Error;
};
struct ArbitrageInInput : Error {
    using Error::Error;
};
struct ConvexOrderViolated : Error {
    using Error::Error;
};
struct QuadratureFailure : Error {
    using Error::Error;
};
struct RootNotBracketed : Error {
    using Error::Error;
};
struct SpenceMirrleesViolated : Error {
    using Error::Error;
};
struct InverseMapUndefined : Error {
    using Error::Error;
};
struct UnsupportedSupport : Error {
    using Error::Error;
};
struct Infeasible : Error {
    using Error::Error;
};
struct UnboundedObjective : Error {
    using Error::Error;
};
struct IrreparablePair : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};

} // namespace mot
