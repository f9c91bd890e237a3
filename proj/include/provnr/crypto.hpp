#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <sodium.h>

#include "provnr/errors.hpp"
#include "provnr/time.hpp"

#include <nlohmann/json.hpp>

namespace provnr::crypto {

using Bytes = std::vector<unsigned char>;
using Digest = std::array<unsigned char, 32>;

inline void init() {
    static const int rc = sodium_init();
    if (rc < 0) fail(Errc::KeyUnavailable, "libsodium initialization failed");
}

inline Digest sha256(const void* data, size_t len) {
    init();
    Digest out{};
    crypto_hash_sha256(out.data(), static_cast<const unsigned char*>(data), len);
    return out;
}

inline Digest sha256(std::string_view s) { return sha256(s.data(), s.size()); }
inline Digest sha256(const Bytes& b) { return sha256(b.data(), b.size()); }

inline std::string to_hex(const unsigned char* data, size_t len) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (size_t i = 0; i < len; ++i) {
        out.push_back(digits[data[i] >> 4]);
        out.push_back(digits[data[i] & 0xf]);
    }
    return out;
}

inline std::string to_hex(const Digest& d) { return to_hex(d.data(), d.size()); }
inline std::string to_hex(const Bytes& b) { return to_hex(b.data(), b.size()); }

inline Bytes from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) fail(Errc::SchemaViolation, "odd-length hex string");
    auto nibble = [&](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        fail(Errc::SchemaViolation, "invalid hex character");
    };
    Bytes out(hex.size() / 2);
    for (size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<unsigned char>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
    return out;
}

inline std::string sha256_hex(std::string_view s) { return to_hex(sha256(s)); }

inline std::string b64url_encode(const unsigned char* data, size_t len) {
    init();
    std::string out(sodium_base64_ENCODED_LEN(len, sodium_base64_VARIANT_URLSAFE_NO_PADDING), '\0');
    sodium_bin2base64(out.data(), out.size(), data, len, sodium_base64_VARIANT_URLSAFE_NO_PADDING);
    out.resize(std::strlen(out.c_str()));
    return out;
}

inline std::string b64url_encode(const Bytes& b) { return b64url_encode(b.data(), b.size()); }
inline std::string b64url_encode(const Digest& d) { return b64url_encode(d.data(), d.size()); }
inline std::string b64url_encode(std::string_view s) {
    return b64url_encode(reinterpret_cast<const unsigned char*>(s.data()), s.size());
}

inline Bytes b64url_decode(std::string_view s) {
    init();
    Bytes out(s.size() + 4);
    size_t out_len = 0;
    if (sodium_base642bin(out.data(), out.size(), s.data(), s.size(), nullptr, &out_len, nullptr,
                          sodium_base64_VARIANT_URLSAFE_NO_PADDING) != 0)
        fail(Errc::SchemaViolation, "invalid base64url data");
    out.resize(out_len);
    return out;
}

// ---------------------------------------------------------------------------
// Ed25519 signing. Signatures are always computed over a 32-byte SHA-256
// digest of the message's canonical bytes, never over the message itself.
// ---------------------------------------------------------------------------

struct KeyPair {
    std::array<unsigned char, crypto_sign_PUBLICKEYBYTES> public_key{};
    std::array<unsigned char, crypto_sign_SECRETKEYBYTES> secret_key{};

    static KeyPair generate() {
        init();
        KeyPair kp;
        crypto_sign_keypair(kp.public_key.data(), kp.secret_key.data());
        return kp;
    }
};

inline Bytes sign_digest(const std::array<unsigned char, crypto_sign_SECRETKEYBYTES>& sk, const Digest& digest) {
    init();
    Bytes sig(crypto_sign_BYTES);
    unsigned long long sig_len = 0;
    crypto_sign_detached(sig.data(), &sig_len, digest.data(), digest.size(), sk.data());
    sig.resize(sig_len);
    return sig;
}

inline bool verify_digest(const Bytes& public_key, const Digest& digest, const Bytes& signature) {
    init();
    if (public_key.size() != crypto_sign_PUBLICKEYBYTES || signature.size() != crypto_sign_BYTES) return false;
    return crypto_sign_verify_detached(signature.data(), digest.data(), digest.size(), public_key.data()) == 0;
}

// ---------------------------------------------------------------------------
// Self-signed JSON certificates. The canonical body is the sorted compact
// JSON of {algorithm, notAfter, notBefore, publicKey, subject}; the
// fingerprint is the SHA-256 of those bytes and the self-signature covers
// the same digest.
// ---------------------------------------------------------------------------

struct Certificate {
    std::string subject;
    std::string algorithm = "ed25519";
    Bytes public_key;
    Millis not_before = 0;
    Millis not_after = 0;
    Bytes self_signature;

    nlohmann::json body_json() const {
        return {
            {"algorithm", algorithm},
            {"notAfter", format_rfc3339(not_after)},
            {"notBefore", format_rfc3339(not_before)},
            {"publicKey", b64url_encode(public_key)},
            {"subject", subject},
        };
    }

    std::string canonical_body() const { return body_json().dump(); }

    std::string fingerprint() const { return sha256_hex(canonical_body()); }

    nlohmann::json to_json() const {
        auto j = body_json();
        j["signature"] = b64url_encode(self_signature);
        return j;
    }

    static Certificate from_json(const nlohmann::json& j) {
        if (!j.is_object()) fail(Errc::SchemaViolation, "certificate must be an object");
        static const std::set<std::string> keys = {"algorithm", "notAfter", "notBefore",
                                                   "publicKey", "signature", "subject"};
        for (auto& [k, v] : j.items())
            if (!keys.count(k)) fail(Errc::SchemaViolation, "unknown certificate key: " + k);
        for (const auto& k : keys)
            if (!j.contains(k) || !j.at(k).is_string())
                fail(Errc::SchemaViolation, "certificate field missing or not a string: " + k);
        Certificate c;
        c.subject = j.at("subject").get<std::string>();
        c.algorithm = j.at("algorithm").get<std::string>();
        c.public_key = b64url_decode(j.at("publicKey").get<std::string>());
        c.not_before = parse_rfc3339(j.at("notBefore").get<std::string>());
        c.not_after = parse_rfc3339(j.at("notAfter").get<std::string>());
        c.self_signature = b64url_decode(j.at("signature").get<std::string>());
        return c;
    }

    bool verify_self() const {
        return algorithm == "ed25519" && verify_digest(public_key, sha256(canonical_body()), self_signature);
    }

    bool valid_at(Millis t) const { return t >= not_before && t <= not_after; }
};

// A signing handle exposes sign/verify and the public certificate only; the
// secret key never leaves it through the evidence pipeline.
class KeyHandle {
public:
    KeyHandle() = default;

    KeyHandle(KeyPair kp, Certificate cert) : kp_(std::move(kp)), cert_(std::move(cert)) {}

    static KeyHandle create(const std::string& subject, Millis not_before, Millis not_after) {
        KeyPair kp = KeyPair::generate();
        Certificate cert;
        cert.subject = subject;
        cert.public_key.assign(kp.public_key.begin(), kp.public_key.end());
        cert.not_before = not_before;
        cert.not_after = not_after;
        cert.self_signature = sign_digest(kp.secret_key, sha256(cert.canonical_body()));
        return KeyHandle(kp, cert);
    }

    const Certificate& certificate() const { return cert_; }

    Bytes sign(const Digest& digest) const {
        if (!loaded_()) fail(Errc::KeyUnavailable, "signing key not loaded");
        return sign_digest(kp_.secret_key, digest);
    }

    nlohmann::json to_json() const {
        return {
            {"certificate", cert_.to_json()},
            {"privateKey", b64url_encode(kp_.secret_key.data(), kp_.secret_key.size())},
        };
    }

    static KeyHandle from_json(const nlohmann::json& j) {
        if (!j.is_object() || !j.contains("certificate") || !j.contains("privateKey"))
            fail(Errc::SchemaViolation, "key file must contain certificate and privateKey");
        Certificate cert = Certificate::from_json(j.at("certificate"));
        Bytes sk = b64url_decode(j.at("privateKey").get<std::string>());
        if (sk.size() != crypto_sign_SECRETKEYBYTES) fail(Errc::KeyUnavailable, "bad private key length");
        KeyPair kp;
        std::copy(sk.begin(), sk.end(), kp.secret_key.begin());
        std::copy(cert.public_key.begin(), cert.public_key.end(), kp.public_key.begin());
        return KeyHandle(kp, cert);
    }

    static KeyHandle load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) fail(Errc::KeyUnavailable, "cannot open key file: " + path.string());
        nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
        if (j.is_discarded()) fail(Errc::KeyUnavailable, "key file is not valid JSON: " + path.string());
        return from_json(j);
    }

    void save(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::trunc);
        if (!out) fail(Errc::IoError, "cannot write key file: " + path.string());
        out << to_json().dump(2) << '\n';
    }

private:
    bool loaded_() const { return !cert_.public_key.empty(); }

    KeyPair kp_;
    Certificate cert_;
};

// Role-separated keys: key1 signs tokens, key2 signs token hashes for the
// notary, tsa signs timestamps.
struct Keyring {
    KeyHandle key1;
    KeyHandle key2;
    KeyHandle tsa;

    static Keyring generate(const std::string& service_id, Millis now = now_millis()) {
        const Millis day = 86400000LL;
        Keyring kr;
        kr.key1 = KeyHandle::create(service_id + "/token-signing", now - day, now + 3650 * day);
        kr.key2 = KeyHandle::create(service_id + "/hash-signing", now - day, now + 3650 * day);
        kr.tsa = KeyHandle::create("tsa-local", now - day, now + 3650 * day);
        return kr;
    }

    static Keyring load(const std::filesystem::path& dir) {
        Keyring kr;
        kr.key1 = KeyHandle::load(dir / "key1.json");
        kr.key2 = KeyHandle::load(dir / "key2.json");
        kr.tsa = KeyHandle::load(dir / "tsa.json");
        return kr;
    }

    void save(const std::filesystem::path& dir) const {
        std::filesystem::create_directories(dir);
        key1.save(dir / "key1.json");
        key2.save(dir / "key2.json");
        tsa.save(dir / "tsa.json");
    }
};

// Local revocation list: a JSON array of certificate fingerprints.
class RevocationList {
public:
    RevocationList() = default;

    explicit RevocationList(std::set<std::string> revoked) : revoked_(std::move(revoked)) {}

    static RevocationList load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) fail(Errc::IoError, "cannot open revocation list: " + path.string());
        nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
        if (j.is_discarded() || !j.is_array())
            fail(Errc::SchemaViolation, "revocation list must be a JSON array");
        std::set<std::string> revoked;
        for (const auto& e : j) {
            if (!e.is_string()) fail(Errc::SchemaViolation, "revocation entries must be strings");
            revoked.insert(e.get<std::string>());
        }
        return RevocationList(std::move(revoked));
    }

    bool contains(const std::string& fingerprint) const { return revoked_.count(fingerprint) > 0; }
    void add(const std::string& fingerprint) { revoked_.insert(fingerprint); }
    size_t size() const { return revoked_.size(); }

private:
    std::set<std::string> revoked_;
};

inline std::string random_id(const char* prefix, size_t bytes = 12) {
    init();
    Bytes buf(bytes);
    randombytes_buf(buf.data(), buf.size());
    return std::string(prefix) + "-" + to_hex(buf);
}

} // namespace provnr::crypto
