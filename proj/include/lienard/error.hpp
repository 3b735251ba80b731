#pragma once

#include <stdexcept>
#include <string>

namespace lienard {

enum class Errc {
    SyntaxError,
    UnknownFunction,
    UnboundVariable,
    NonFinite,
    UnknownModel,
    MissingParam,
    DomainViolation,
    AmplitudeOutOfRange,
    NoClosedForm,
    NoEnergyLaw,
    DegreeTooLarge,
    PoleOfGamma,
    OutOfBranch,
    BadWeight,
    NonTerminating,
    PoleInC,
    ParameterOutOfRange,
    DomainExit,
    StepFailure,
    TooFewCycles,
    NonOscillatory,
    QuadratureFailure,
    NoFirstIntegral,
    NoBoundedOrbit,
    SingularLeg,
    DomainError,
    ConvergenceFailure,
    NoFormula,
    IndexAboveBoundStates,
    NoSignChange,
    StiffFailure,
    GridTooCoarse,
    TooFewLevels,
    NoConvergence,
    DegenerateRoots,
    InconsistentSigma,
    ConfigError,
    JobFailure,
};

inline const char* errc_name(Errc c)
{
    switch (c) {
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::UnknownFunction: return "UnknownFunction";
    case Errc::UnboundVariable: return "UnboundVariable";
    case Errc::NonFinite: return "NonFinite";
    case Errc::UnknownModel: return "UnknownModel";
    case Errc::MissingParam: return "MissingParam";
    case Errc::DomainViolation: return "DomainViolation";
    case Errc::AmplitudeOutOfRange: return "AmplitudeOutOfRange";
    case Errc::NoClosedForm: return "NoClosedForm";
    case Errc::NoEnergyLaw: return "NoEnergyLaw";
    case Errc::DegreeTooLarge: return "DegreeTooLarge";
    case Errc::PoleOfGamma: return "PoleOfGamma";
    case Errc::OutOfBranch: return "OutOfBranch";
    case Errc::BadWeight: return "BadWeight";
    case Errc::NonTerminating: return "NonTerminating";
    case Errc::PoleInC: return "PoleInC";
    case Errc::ParameterOutOfRange: return "ParameterOutOfRange";
    case Errc::DomainExit: return "DomainExit";
    case Errc::StepFailure: return "StepFailure";
    case Errc::TooFewCycles: return "TooFewCycles";
    case Errc::NonOscillatory: return "NonOscillatory";
    case Errc::QuadratureFailure: return "QuadratureFailure";
    case Errc::NoFirstIntegral: return "NoFirstIntegral";
    case Errc::NoBoundedOrbit: return "NoBoundedOrbit";
    case Errc::SingularLeg: return "SingularLeg";
    case Errc::DomainError: return "DomainError";
    case Errc::ConvergenceFailure: return "ConvergenceFailure";
    case Errc::NoFormula: return "NoFormula";
    case Errc::IndexAboveBoundStates: return "IndexAboveBoundStates";
    case Errc::NoSignChange: return "NoSignChange";
    case Errc::StiffFailure: return "StiffFailure";
    case Errc::GridTooCoarse: return "GridTooCoarse";
    case Errc::TooFewLevels: return "TooFewLevels";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::DegenerateRoots: return "DegenerateRoots";
    case Errc::InconsistentSigma: return "InconsistentSigma";
    case Errc::ConfigError: return "ConfigError";
    case Errc::JobFailure: return "JobFailure";
    }
    return "Unknown";
}

/// Every library failure is an Error carrying a code; `offset` is set by the parser
/// (byte offset into the source) and `line` by the config loader.
struct Error : std::runtime_error {
    Errc code;
    long offset = -1;
    long line = -1;

    Error(Errc c, const std::string& what) : std::runtime_error(std::string(errc_name(c)) + ": " + what), code(c) {}
};

[[noreturn]] inline void fail(Errc c, const std::string& what) { throw Error(c, what); }

}
