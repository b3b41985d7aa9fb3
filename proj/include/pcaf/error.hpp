#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pcaf {

enum class ErrorCode {
    AsymmetricConductance,
    NonpositiveBaseMeasure,
    NegativeEntry,
    DimensionMismatch,
    NonpositiveAlpha,
    SolverFailure,
    EmptySet,
    NonpositiveTime,
    UnsupportedDimension,
    NotFiniteEnergy,
    NonintegrableSingularity,
    NonpositiveStep,
    NonLipschitzCoefficient,
    NotOneDimensional,
    SupportOutsideBins,
    GridMismatch,
    UnsupportedRegion,
    Unsupported,
    NumericalInconsistency,
    ConfigInvalid,
    UnsupportedFormat,
    IoFailure,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace pcaf
