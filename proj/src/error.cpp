#include "pcaf/error.hpp"

namespace pcaf {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::AsymmetricConductance: return "AsymmetricConductance";
    case ErrorCode::NonpositiveBaseMeasure: return "NonpositiveBaseMeasure";
    case ErrorCode::NegativeEntry: return "NegativeEntry";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonpositiveAlpha: return "NonpositiveAlpha";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::NonpositiveTime: return "NonpositiveTime";
    case ErrorCode::UnsupportedDimension: return "UnsupportedDimension";
    case ErrorCode::NotFiniteEnergy: return "NotFiniteEnergy";
    case ErrorCode::NonintegrableSingularity: return "NonintegrableSingularity";
    case ErrorCode::NonpositiveStep: return "NonpositiveStep";
    case ErrorCode::NonLipschitzCoefficient: return "NonLipschitzCoefficient";
    case ErrorCode::NotOneDimensional: return "NotOneDimensional";
    case ErrorCode::SupportOutsideBins: return "SupportOutsideBins";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::UnsupportedRegion: return "UnsupportedRegion";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::NumericalInconsistency: return "NumericalInconsistency";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::IoFailure: return "IoFailure";
    }
    return "Unknown";
}

}  // namespace pcaf
