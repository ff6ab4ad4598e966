#include "webcurv/error.hpp"

namespace webcurv {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NearZeroDivisor: return "NearZeroDivisor";
    case ErrorCode::ZeroOrderJet: return "ZeroOrderJet";
    case ErrorCode::OrderMismatch: return "OrderMismatch";
    case ErrorCode::BasePointMismatch: return "BasePointMismatch";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::BadNormalization: return "BadNormalization";
    case ErrorCode::InsufficientJetOrder: return "InsufficientJetOrder";
    case ErrorCode::SingularLeadingBlock: return "SingularLeadingBlock";
    case ErrorCode::SlopeCollision: return "SlopeCollision";
    case ErrorCode::VanishingFx: return "VanishingFx";
    case ErrorCode::VanishingGradient: return "VanishingGradient";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::UnsupportedWebSize: return "UnsupportedWebSize";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InputError: return "InputError";
  }
  return "Unknown";
}

}  // namespace webcurv
