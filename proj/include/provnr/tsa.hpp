#pragma once

#include <mutex>
#include <string>

#include <nlohmann/json.hpp>

#include "provnr/crypto.hpp"
#include "provnr/errors.hpp"
#include "provnr/time.hpp"

namespace provnr {

// A signed timestamp over a 32-byte message hash. The signature covers the
// canonical bytes {"genTime","messageHash","tsaId"}.
struct TimestampToken {
    std::string message_hash_hex; // 32 bytes, lowercase hex
    Millis gen_time = 0;
    std::string tsa_id;
    crypto::Bytes signature;

    std::string canonical_signed_text() const {
        return nlohmann::json{
            {"genTime", format_rfc3339(gen_time)},
            {"messageHash", message_hash_hex},
            {"tsaId", tsa_id},
        }.dump();
    }

    bool verify(const crypto::Certificate& tsa_cert) const {
        return crypto::verify_digest(tsa_cert.public_key, crypto::sha256(canonical_signed_text()),
                                     signature);
    }

    nlohmann::json to_json() const {
        return {
            {"genTime", format_rfc3339(gen_time)},
            {"messageHash", message_hash_hex},
            {"tsaId", tsa_id},
            {"tsaSignature", crypto::b64url_encode(signature)},
        };
    }

    static TimestampToken from_json(const nlohmann::json& j) {
        if (!j.is_object()) fail(Errc::SchemaViolation, "timestamp must be an object");
        for (auto& [k, v] : j.items())
            if (k != "genTime" && k != "messageHash" && k != "tsaId" && k != "tsaSignature")
                fail(Errc::SchemaViolation, "unknown timestamp key: " + k);
        for (const char* k : {"genTime", "messageHash", "tsaId", "tsaSignature"})
            if (!j.contains(k) || !j.at(k).is_string())
                fail(Errc::SchemaViolation, std::string("timestamp field missing: ") + k);
        TimestampToken t;
        t.gen_time = parse_rfc3339(j.at("genTime").get<std::string>());
        t.message_hash_hex = j.at("messageHash").get<std::string>();
        t.tsa_id = j.at("tsaId").get<std::string>();
        t.signature = crypto::b64url_decode(j.at("tsaSignature").get<std::string>());
        return t;
    }
};

// Client interface a remote RFC 3161 authority would sit behind.
class TsaClient {
public:
    virtual ~TsaClient() = default;

    virtual TimestampToken issue(const crypto::Bytes& message_hash) = 0;
    virtual std::string tsa_id() const = 0;

    TimestampToken issue(const crypto::Digest& digest) {
        return issue(crypto::Bytes(digest.begin(), digest.end()));
    }
};

// In-process authority. genTime is monotone non-decreasing across calls.
class LocalTsa : public TsaClient {
public:
    explicit LocalTsa(crypto::KeyHandle key) : key_(std::move(key)) {}

    using TsaClient::issue;

    TimestampToken issue(const crypto::Bytes& message_hash) override {
        if (message_hash.size() != 32) fail(Errc::BadHashLength, "message hash must be 32 bytes");
        TimestampToken t;
        t.message_hash_hex = crypto::to_hex(message_hash);
        t.tsa_id = key_.certificate().subject;
        {
            std::lock_guard lock(mu_);
            last_ = std::max(last_, now_millis());
            t.gen_time = last_;
        }
        t.signature = key_.sign(crypto::sha256(t.canonical_signed_text()));
        return t;
    }

    std::string tsa_id() const override { return key_.certificate().subject; }

    const crypto::Certificate& certificate() const { return key_.certificate(); }

private:
    crypto::KeyHandle key_;
    std::mutex mu_;
    Millis last_ = 0;
};

} // namespace provnr
