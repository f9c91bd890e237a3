#pragma once

#include <stdexcept>
#include <string>

namespace provnr {

// Closed set of error codes exposed by the library and mapped onto HTTP
// responses by the service layer.
enum class Errc {
    UnknownPrefix,
    DanglingEndpoint,
    KindMismatch,
    DuplicateElementId,
    NamespaceClash,
    IdKindConflict,
    SchemaViolation,
    UnboundVariable,
    ZonedTemplate,
    NoZones,
    TypeMismatch,
    SessionClosed,
    UnknownZone,
    ValidationFailure,
    InvalidTemplate,
    UnknownDocument,
    UnknownTemplate,
    TemplateNotRegistered,
    UnknownSession,
    UnknownHistory,
    MissingSubstitution,
    MissingTemplate,
    BrokenChain,
    BadRange,
    BadHashLength,
    MissingMetaProvenance,
    KeyUnavailable,
    NotaryUnavailable,
    DuplicateTokenId,
    StorageFailure,
    UnknownAction,
    DuplicateEvidence,
    ServerUnavailable,
    ConfigError,
    IoError,
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::UnknownPrefix: return "UnknownPrefix";
        case Errc::DanglingEndpoint: return "DanglingEndpoint";
        case Errc::KindMismatch: return "KindMismatch";
        case Errc::DuplicateElementId: return "DuplicateElementId";
        case Errc::NamespaceClash: return "NamespaceClash";
        case Errc::IdKindConflict: return "IdKindConflict";
        case Errc::SchemaViolation: return "SchemaViolation";
        case Errc::UnboundVariable: return "UnboundVariable";
        case Errc::ZonedTemplate: return "ZonedTemplate";
        case Errc::NoZones: return "NoZones";
        case Errc::TypeMismatch: return "TypeMismatch";
        case Errc::SessionClosed: return "SessionClosed";
        case Errc::UnknownZone: return "UnknownZone";
        case Errc::ValidationFailure: return "ValidationFailure";
        case Errc::InvalidTemplate: return "InvalidTemplate";
        case Errc::UnknownDocument: return "UnknownDocument";
        case Errc::UnknownTemplate: return "UnknownTemplate";
        case Errc::TemplateNotRegistered: return "TemplateNotRegistered";
        case Errc::UnknownSession: return "UnknownSession";
        case Errc::UnknownHistory: return "UnknownHistory";
        case Errc::MissingSubstitution: return "MissingSubstitution";
        case Errc::MissingTemplate: return "MissingTemplate";
        case Errc::BrokenChain: return "BrokenChain";
        case Errc::BadRange: return "BadRange";
        case Errc::BadHashLength: return "BadHashLength";
        case Errc::MissingMetaProvenance: return "MissingMetaProvenance";
        case Errc::KeyUnavailable: return "KeyUnavailable";
        case Errc::NotaryUnavailable: return "NotaryUnavailable";
        case Errc::DuplicateTokenId: return "DuplicateTokenId";
        case Errc::StorageFailure: return "StorageFailure";
        case Errc::UnknownAction: return "UnknownAction";
        case Errc::DuplicateEvidence: return "DuplicateEvidence";
        case Errc::ServerUnavailable: return "ServerUnavailable";
        case Errc::ConfigError: return "ConfigError";
        case Errc::IoError: return "IoError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
    throw Error(code, message);
}

} // namespace provnr
