#include "wmcp/error.hpp"

namespace wmcp {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MalformedJson: return "MalformedJson";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::OversizedDescription: return "OversizedDescription";
    case ErrorCode::MarkupInText: return "MarkupInText";
    case ErrorCode::MultipleInlineBlocks: return "MultipleInlineBlocks";
    case ErrorCode::BadKeyLength: return "BadKeyLength";
    case ErrorCode::UnknownKeyId: return "UnknownKeyId";
    case ErrorCode::SignatureInvalid: return "SignatureInvalid";
    case ErrorCode::MalformedSignature: return "MalformedSignature";
    case ErrorCode::MalformedPinFile: return "MalformedPinFile";
    case ErrorCode::DuplicateKeyId: return "DuplicateKeyId";
    case ErrorCode::UnsupportedAlgorithm: return "UnsupportedAlgorithm";
    case ErrorCode::AuthenticationFailed: return "AuthenticationFailed";
    case ErrorCode::MalformedCompactForm: return "MalformedCompactForm";
    case ErrorCode::TokenNotFound: return "TokenNotFound";
    case ErrorCode::AmbiguousToken: return "AmbiguousToken";
    case ErrorCode::InvalidScopeSyntax: return "InvalidScopeSyntax";
    case ErrorCode::MalformedToken: return "MalformedToken";
    case ErrorCode::UnknownSymbol: return "UnknownSymbol";
    case ErrorCode::Forbidden: return "Forbidden";
    case ErrorCode::TokenExpired: return "TokenExpired";
    case ErrorCode::TtlExceedsPolicy: return "TtlExceedsPolicy";
    case ErrorCode::MalformedRegistry: return "MalformedRegistry";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::NoActionableElement: return "NoActionableElement";
    case ErrorCode::MissingParam: return "MissingParam";
    case ErrorCode::ZeroHtmlTokens: return "ZeroHtmlTokens";
    case ErrorCode::UnparseableHtml: return "UnparseableHtml";
    case ErrorCode::InvalidSelector: return "InvalidSelector";
    case ErrorCode::PortUnavailable: return "PortUnavailable";
    case ErrorCode::FixtureInvalid: return "FixtureInvalid";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::string path)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      path_(std::move(path)) {}

}  // namespace wmcp
