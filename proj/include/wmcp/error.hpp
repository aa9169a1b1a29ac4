#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wmcp {

enum class ErrorCode {
  InvalidArgument,
  // documents
  MalformedJson,
  SchemaViolation,
  UnsupportedVersion,
  OversizedDescription,
  MarkupInText,
  MultipleInlineBlocks,
  // signatures
  BadKeyLength,
  UnknownKeyId,
  SignatureInvalid,
  MalformedSignature,
  MalformedPinFile,
  DuplicateKeyId,
  // payload encryption and csrf
  UnsupportedAlgorithm,
  AuthenticationFailed,
  MalformedCompactForm,
  TokenNotFound,
  AmbiguousToken,
  // endpoint shielding
  InvalidScopeSyntax,
  MalformedToken,
  UnknownSymbol,
  Forbidden,
  TokenExpired,
  TtlExceedsPolicy,
  MalformedRegistry,
  // graph
  DuplicateName,
  NoActionableElement,
  MissingParam,
  ZeroHtmlTokens,
  // html
  UnparseableHtml,
  InvalidSelector,
  // harness
  PortUnavailable,
  FixtureInvalid,
  IoFailure,
};

std::string_view to_string(ErrorCode code) noexcept;

// Single exception type for the toolkit. `path` locates the offending field
// for document errors (".elements[0].action.endpoint") and is empty otherwise.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string path = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& path() const noexcept { return path_; }

 private:
  ErrorCode code_;
  std::string path_;
};

}  // namespace wmcp
