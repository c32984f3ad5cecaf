#include "ncdnet/error.hpp"

namespace ncdnet {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InputTooLarge: return "InputTooLarge";
    case Errc::CorruptStream: return "CorruptStream";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::DegenerateCompression: return "DegenerateCompression";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::TooSmall: return "TooSmall";
    case Errc::InvalidMatrix: return "InvalidMatrix";
    case Errc::NonIntegerOutput: return "NonIntegerOutput";
    case Errc::FilterTooLarge: return "FilterTooLarge";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::BadRate: return "BadRate";
    case Errc::BadSigma: return "BadSigma";
    case Errc::NotSymmetric: return "NotSymmetric";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::BadK: return "BadK";
    case Errc::BadFormat: return "BadFormat";
    case Errc::IoFailure: return "IoFailure";
    case Errc::BadWindow: return "BadWindow";
    case Errc::BadParams: return "BadParams";
    case Errc::EmptyClass: return "EmptyClass";
    case Errc::DegenerateData: return "DegenerateData";
    case Errc::TooFewSizes: return "TooFewSizes";
    case Errc::BadConfig: return "BadConfig";
  }
  return "Unknown";
}

}  // namespace ncdnet
