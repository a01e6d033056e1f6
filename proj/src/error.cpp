#include "specforge/error.hpp"

namespace specforge {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ManifestSyntax: return "ManifestSyntax";
    case ErrorCode::MissingSource: return "MissingSource";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::PatchConflict: return "PatchConflict";
    case ErrorCode::AmbiguousLocator: return "AmbiguousLocator";
    case ErrorCode::LocatorNotFound: return "LocatorNotFound";
    case ErrorCode::InvalidMutation: return "InvalidMutation";
    case ErrorCode::LexFailure: return "LexFailure";
    case ErrorCode::MalformedClause: return "MalformedClause";
    case ErrorCode::MalformedReport: return "MalformedReport";
    case ErrorCode::HeaderMissing: return "HeaderMissing";
    case ErrorCode::RaggedRow: return "RaggedRow";
    case ErrorCode::ToolMissing: return "ToolMissing";
    case ErrorCode::ToolFailed: return "ToolFailed";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::ContextMismatch: return "ContextMismatch";
    case ErrorCode::UnresolvedPlaceholder: return "UnresolvedPlaceholder";
    case ErrorCode::TemplateMissing: return "TemplateMissing";
    case ErrorCode::AuthMissing: return "AuthMissing";
    case ErrorCode::HttpError: return "HttpError";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::CacheMiss: return "CacheMiss";
    case ErrorCode::CacheConflict: return "CacheConflict";
    case ErrorCode::MalformedProviderPayload: return "MalformedProviderPayload";
    case ErrorCode::MissingSymbolicArtifact: return "MissingSymbolicArtifact";
    case ErrorCode::NoCodeBlock: return "NoCodeBlock";
    case ErrorCode::StoreIo: return "StoreIo";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

}  // namespace specforge
