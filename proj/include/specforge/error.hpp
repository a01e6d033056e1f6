#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace specforge {

enum class ErrorCode {
  // corpus
  ManifestSyntax,
  MissingSource,
  DuplicateId,
  PatchConflict,
  AmbiguousLocator,
  LocatorNotFound,
  InvalidMutation,
  // ctokens / acsl
  LexFailure,
  MalformedClause,
  // symbolic
  MalformedReport,
  HeaderMissing,
  RaggedRow,
  ToolMissing,
  ToolFailed,
  Timeout,
  // prompt
  ContextMismatch,
  UnresolvedPlaceholder,
  TemplateMissing,
  // llm
  AuthMissing,
  HttpError,
  RateLimited,
  CacheMiss,
  CacheConflict,
  MalformedProviderPayload,
  // pipeline
  MissingSymbolicArtifact,
  NoCodeBlock,
  StoreIo,
  Config,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace specforge
