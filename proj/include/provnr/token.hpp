#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "provnr/canonical.hpp"
#include "provnr/crypto.hpp"
#include "provnr/tsa.hpp"

namespace provnr {

// ---------------------------------------------------------------------------
// Non-repudiation tokens.
//
// Wire format (canonical JSON; digests lowercase hex, signatures and other
// binary blobs base64url):
//   {"header":{"certificates":[...],"notaryId":..,"patientId":..,
//              "serviceId":..,"timestamp":{...},"tokenId":..,"tsaId":..},
//    "payload":{"actionId":..,"actionName":..,"actionNumber":N,"docId":..,
//               "inputTimestamps":[...],"metaProvenance":b64url,
//               "requestReceivedAt":..,"substitutionHash"?:hex,
//               "templateHash"?:hex},
//    "signature1":b64url,"certRef":fingerprint}
// signature1 covers the SHA-256 of the canonical {header,payload} bytes; the
// notary receives the SHA-256 of the canonical signed-token bytes, signed
// with the second key.
// ---------------------------------------------------------------------------

struct TokenHeader {
    std::string token_id;
    std::string patient_id;
    std::string service_id;
    TimestampToken timestamp;
    std::string tsa_id;
    std::string notary_id;
    std::vector<crypto::Certificate> certificates; // key1, key2, tsa

    nlohmann::json to_json() const {
        nlohmann::json certs = nlohmann::json::array();
        for (const auto& c : certificates) certs.push_back(c.to_json());
        return {
            {"certificates", certs},
            {"notaryId", notary_id},
            {"patientId", patient_id},
            {"serviceId", service_id},
            {"timestamp", timestamp.to_json()},
            {"tokenId", token_id},
            {"tsaId", tsa_id},
        };
    }

    static TokenHeader from_json(const nlohmann::json& j) {
        detail::require_keys(
            j, {"certificates", "notaryId", "patientId", "serviceId", "timestamp", "tokenId", "tsaId"},
            {}, "/header");
        TokenHeader h;
        h.token_id = detail::require_string(j, "tokenId", "/header");
        h.patient_id = detail::require_string(j, "patientId", "/header");
        h.service_id = detail::require_string(j, "serviceId", "/header");
        h.timestamp = TimestampToken::from_json(j.at("timestamp"));
        h.tsa_id = detail::require_string(j, "tsaId", "/header");
        h.notary_id = detail::require_string(j, "notaryId", "/header");
        if (!j.at("certificates").is_array())
            fail(Errc::SchemaViolation, "header certificates must be an array");
        for (const auto& c : j.at("certificates"))
            h.certificates.push_back(crypto::Certificate::from_json(c));
        return h;
    }
};

struct TokenPayload {
    std::string doc_id;
    std::string action_id;     // qualified name of the action activity
    std::string action_name;
    std::int64_t action_number = 0;
    std::string meta_provenance_b64; // canonical bytes of the action's meta subgraph
    std::optional<std::string> template_hash;     // registerTemplate only
    std::optional<std::string> substitution_hash; // generation actions only
    Millis request_received_at = 0;
    std::vector<Millis> input_timestamps;

    nlohmann::json to_json() const {
        nlohmann::json inputs = nlohmann::json::array();
        for (Millis t : input_timestamps) inputs.push_back(format_rfc3339(t));
        nlohmann::json j = {
            {"actionId", action_id},
            {"actionName", action_name},
            {"actionNumber", action_number},
            {"docId", doc_id},
            {"inputTimestamps", inputs},
            {"metaProvenance", meta_provenance_b64},
            {"requestReceivedAt", format_rfc3339(request_received_at)},
        };
        if (template_hash) j["templateHash"] = *template_hash;
        if (substitution_hash) j["substitutionHash"] = *substitution_hash;
        return j;
    }

    static TokenPayload from_json(const nlohmann::json& j) {
        detail::require_keys(j,
                             {"actionId", "actionName", "actionNumber", "docId", "inputTimestamps",
                              "metaProvenance", "requestReceivedAt"},
                             {"templateHash", "substitutionHash"}, "/payload");
        TokenPayload p;
        p.action_id = detail::require_string(j, "actionId", "/payload");
        p.action_name = detail::require_string(j, "actionName", "/payload");
        if (!j.at("actionNumber").is_number_integer())
            fail(Errc::SchemaViolation, "actionNumber must be an integer");
        p.action_number = j.at("actionNumber").get<std::int64_t>();
        p.doc_id = detail::require_string(j, "docId", "/payload");
        p.meta_provenance_b64 = detail::require_string(j, "metaProvenance", "/payload");
        p.request_received_at = parse_rfc3339(detail::require_string(j, "requestReceivedAt", "/payload"));
        if (!j.at("inputTimestamps").is_array())
            fail(Errc::SchemaViolation, "inputTimestamps must be an array");
        for (const auto& t : j.at("inputTimestamps")) {
            if (!t.is_string()) fail(Errc::SchemaViolation, "inputTimestamps entries must be strings");
            p.input_timestamps.push_back(parse_rfc3339(t.get<std::string>()));
        }
        if (j.contains("templateHash"))
            p.template_hash = detail::require_string(j, "templateHash", "/payload");
        if (j.contains("substitutionHash"))
            p.substitution_hash = detail::require_string(j, "substitutionHash", "/payload");
        return p;
    }
};

struct NonRepudiationToken {
    TokenHeader header;
    TokenPayload payload;

    std::string canonical_text() const {
        return nlohmann::json{{"header", header.to_json()}, {"payload", payload.to_json()}}.dump();
    }
};

struct SignedToken {
    TokenHeader header;
    TokenPayload payload;
    crypto::Bytes signature1;
    std::string cert_ref; // fingerprint of the key-1 certificate

    std::string signed_portion_text() const {
        return nlohmann::json{{"header", header.to_json()}, {"payload", payload.to_json()}}.dump();
    }

    std::string canonical_text() const { return to_json().dump(); }

    std::string sha256_hex() const { return crypto::sha256_hex(canonical_text()); }

    nlohmann::json to_json() const {
        return {
            {"certRef", cert_ref},
            {"header", header.to_json()},
            {"payload", payload.to_json()},
            {"signature1", crypto::b64url_encode(signature1)},
        };
    }

    static SignedToken from_json(const nlohmann::json& j) {
        detail::require_keys(j, {"certRef", "header", "payload", "signature1"}, {}, "");
        SignedToken t;
        t.header = TokenHeader::from_json(j.at("header"));
        t.payload = TokenPayload::from_json(j.at("payload"));
        t.signature1 = crypto::b64url_decode(detail::require_string(j, "signature1", ""));
        t.cert_ref = detail::require_string(j, "certRef", "");
        return t;
    }

    static SignedToken parse(const std::string& text) {
        nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
        if (j.is_discarded()) fail(Errc::SchemaViolation, "token is not valid JSON");
        return from_json(j);
    }
};

inline SignedToken sign_token(const NonRepudiationToken& token, const crypto::KeyHandle& key1) {
    SignedToken st;
    st.header = token.header;
    st.payload = token.payload;
    st.signature1 = key1.sign(crypto::sha256(token.canonical_text()));
    st.cert_ref = key1.certificate().fingerprint();
    return st;
}

inline bool verify_token_signature(const SignedToken& st, const crypto::Certificate& cert) {
    return crypto::verify_digest(cert.public_key, crypto::sha256(st.signed_portion_text()),
                                 st.signature1);
}

} // namespace provnr
