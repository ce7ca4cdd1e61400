#pragma once

#include <stdexcept>
#include <string>

namespace wgspdc {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Errors caused by physically inadmissible inputs (cut-off modes, broken
// guidance, impossible layer lengths). The CLI maps these to exit code 3.
struct PhysicsError : Error {
    using Error::Error;
};

struct DomainError : Error {
    using Error::Error;
};

struct CutoffError : PhysicsError {
    CutoffError(int mode_order, double wavelength_um, const std::string& what)
        : PhysicsError(what), order(mode_order), wavelength(wavelength_um)
    {
    }
    int order;
    double wavelength;
};

struct EmptyCurveError : PhysicsError {
    using PhysicsError::PhysicsError;
};

struct StencilError : PhysicsError {
    using PhysicsError::PhysicsError;
};

struct InvalidLayerLength : PhysicsError {
    using PhysicsError::PhysicsError;
};

struct GuidanceViolation : PhysicsError {
    using PhysicsError::PhysicsError;
};

struct QuadratureNonConvergence : Error {
    using Error::Error;
};

struct IndexOutOfRange : Error {
    using Error::Error;
};

struct GridTooCoarse : Error {
    using Error::Error;
};

struct GridMismatch : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace wgspdc
