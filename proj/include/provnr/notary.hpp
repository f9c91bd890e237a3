#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <fcntl.h>
#include <unistd.h>
#include <zlib.h>

#include <nlohmann/json.hpp>

#include "provnr/crypto.hpp"
#include "provnr/errors.hpp"
#include "provnr/time.hpp"

namespace provnr {

// ---------------------------------------------------------------------------
// Notary records and reports
// ---------------------------------------------------------------------------

// What the notary stores per token: a signed hash only, never payload data.
struct NotaryRecord {
    std::string token_id;
    std::string hash_hex;       // SHA-256 of the canonical signed-token bytes
    std::string signature2_b64; // signature over the 32 hash bytes, key 2
    Millis received_at = 0;

    std::string canonical_text() const {
        return nlohmann::json{
            {"hash", hash_hex},
            {"receivedAt", format_rfc3339(received_at)},
            {"signature2", signature2_b64},
            {"tokenId", token_id},
        }.dump();
    }

    static NotaryRecord from_json(const nlohmann::json& j) {
        if (!j.is_object()) fail(Errc::SchemaViolation, "notary record must be an object");
        for (auto& [k, v] : j.items())
            if (k != "hash" && k != "receivedAt" && k != "signature2" && k != "tokenId")
                fail(Errc::SchemaViolation, "unknown notary record key: " + k);
        NotaryRecord r;
        for (const char* k : {"hash", "receivedAt", "signature2", "tokenId"})
            if (!j.contains(k) || !j.at(k).is_string())
                fail(Errc::SchemaViolation, std::string("notary record field missing: ") + k);
        r.hash_hex = j.at("hash").get<std::string>();
        r.received_at = parse_rfc3339(j.at("receivedAt").get<std::string>());
        r.signature2_b64 = j.at("signature2").get<std::string>();
        r.token_id = j.at("tokenId").get<std::string>();
        return r;
    }
};

struct PresenceReport {
    std::string token_id;
    bool found = false;
    std::optional<bool> hash_match;       // set when a hash was supplied and the record exists
    std::optional<bool> signature2_valid; // set when the notary knows the submitter certificate
    std::optional<Millis> received_at;

    nlohmann::json to_json() const {
        nlohmann::json j = {{"found", found}, {"tokenId", token_id}};
        j["hashMatch"] = hash_match ? nlohmann::json(*hash_match) : nlohmann::json(nullptr);
        j["signature2Valid"] = signature2_valid ? nlohmann::json(*signature2_valid) : nlohmann::json(nullptr);
        j["receivedAt"] = received_at ? nlohmann::json(format_rfc3339(*received_at)) : nlohmann::json(nullptr);
        return j;
    }
};

struct AuditIssue {
    std::string location; // e.g. "block 3", "offset 128", "object tok-..."
    std::string problem;
};

struct AuditReport {
    bool clean = true;
    std::size_t records_checked = 0;
    std::vector<AuditIssue> issues;

    void flag(std::string location, std::string problem) {
        clean = false;
        issues.push_back({std::move(location), std::move(problem)});
    }

    nlohmann::json to_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& i : issues) arr.push_back({{"location", i.location}, {"problem", i.problem}});
        return {{"clean", clean}, {"issues", arr}, {"recordsChecked", records_checked}};
    }
};

// ---------------------------------------------------------------------------
// Storage backends. All are write-once per tokenId; a failed add leaves the
// store unchanged. Durability policy is part of each backend's semantics:
// the ledger fsyncs block and head per commit, the append-only file
// fdatasyncs per record, the object store relies on content addressing and
// defers durability to the filesystem.
// ---------------------------------------------------------------------------

class NotaryStore {
public:
    virtual ~NotaryStore() = default;

    virtual std::string add(const NotaryRecord& record) = 0; // returns locator
    virtual std::optional<NotaryRecord> fetch(const std::string& token_id) const = 0;
    virtual AuditReport audit() const = 0;
    virtual std::string kind() const = 0;
    virtual std::size_t size() const = 0;
};

namespace notary_detail {

class Fd {
public:
    Fd() = default;
    explicit Fd(int fd) : fd_(fd) {}
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    Fd(Fd&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }
    Fd& operator=(Fd&& o) noexcept {
        if (this != &o) { close_(); fd_ = o.fd_; o.fd_ = -1; }
        return *this;
    }
    ~Fd() { close_(); }
    int get() const { return fd_; }
    bool valid() const { return fd_ >= 0; }

private:
    void close_() { if (fd_ >= 0) ::close(fd_); }
    int fd_ = -1;
};

inline void write_all(int fd, const void* data, std::size_t len) {
    const char* p = static_cast<const char*>(data);
    while (len > 0) {
        const ssize_t n = ::write(fd, p, len);
        if (n < 0) fail(Errc::StorageFailure, "write failed");
        p += n;
        len -= static_cast<std::size_t>(n);
    }
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::StorageFailure, "cannot read " + path.string());
    std::string out((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return out;
}

inline bool safe_object_name(const std::string& id) {
    if (id.empty() || id.size() > 200 || id[0] == '.') return false;
    for (char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                        c == '-' || c == '_' || c == '.';
        if (!ok) return false;
    }
    return true;
}

inline std::uint32_t crc32_of(const std::string& data) {
    return static_cast<std::uint32_t>(
        ::crc32(0L, reinterpret_cast<const Bytef*>(data.data()), static_cast<uInt>(data.size())));
}

inline void put_be32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>((v >> 24) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>(v & 0xff));
}

inline std::uint32_t get_be32(const std::string& buf, std::size_t pos) {
    return (static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos])) << 24) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + 1])) << 16) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + 2])) << 8) |
           static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + 3]));
}

} // namespace notary_detail

// ---------------------------------------------------------------------------
// LedgerStore: hash-chained block log.
//
// blocks.log holds one block per line:
//   {"blockHash":hex,"index":i,"prevHash":hex,"records":[record...]}
// blockHash = SHA-256(decimal(index) + "|" + prevHash + "|" + canonical
// records array); block 0 chains from 64 zero hex digits. head.json records
// the tip {"blockHash","index"}. Each commit appends a block, fsyncs the
// log, rewrites the head and fsyncs it.
// ---------------------------------------------------------------------------

class LedgerStore : public NotaryStore {
public:
    struct Options {
        std::size_t batch_size = 1;
        bool fsync = true;
        int commit_delay_ms = 0; // artificial; defaults to none
    };

    explicit LedgerStore(std::filesystem::path dir, Options options = {})
        : dir_(std::move(dir)), options_(options) {
        std::filesystem::create_directories(dir_);
        load_();
        log_fd_ = notary_detail::Fd(
            ::open(blocks_path_().c_str(), O_WRONLY | O_APPEND | O_CREAT, 0644));
        if (!log_fd_.valid()) fail(Errc::StorageFailure, "cannot open " + blocks_path_().string());
    }

    ~LedgerStore() override {
        try { flush(); } catch (...) {}
    }

    std::string add(const NotaryRecord& record) override {
        if (records_.count(record.token_id))
            fail(Errc::DuplicateTokenId, "token already notarized: " + record.token_id);
        pending_.push_back(record);
        records_.emplace(record.token_id, record);
        const std::int64_t index = next_index_;
        if (pending_.size() >= options_.batch_size) commit_block_();
        return "block-" + std::to_string(index);
    }

    void flush() {
        if (!pending_.empty()) commit_block_();
    }

    std::optional<NotaryRecord> fetch(const std::string& token_id) const override {
        auto it = records_.find(token_id);
        if (it == records_.end()) return std::nullopt;
        return it->second;
    }

    std::string kind() const override { return "ledger"; }
    std::size_t size() const override { return records_.size(); }

    // Full chain re-hash from disk; the first broken link is named by index.
    AuditReport audit() const override {
        AuditReport report;
        std::string prev(64, '0');
        std::int64_t expected_index = 0;
        std::ifstream in(blocks_path_());
        std::string line;
        nlohmann::json last_block;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            nlohmann::json block = nlohmann::json::parse(line, nullptr, false);
            if (block.is_discarded() || !block.is_object() || !block.contains("index") ||
                !block.contains("prevHash") || !block.contains("blockHash") || !block.contains("records") ||
                !block.at("index").is_number_integer() || !block.at("prevHash").is_string() ||
                !block.at("blockHash").is_string() || !block.at("records").is_array()) {
                report.flag("block " + std::to_string(expected_index), "unparseable block");
                return report;
            }
            const std::int64_t index = block.at("index").get<std::int64_t>();
            if (index != expected_index) {
                report.flag("block " + std::to_string(expected_index),
                            "index gap: found " + std::to_string(index));
                return report;
            }
            if (block.at("prevHash").get<std::string>() != prev) {
                report.flag("block " + std::to_string(index), "previous-hash link broken");
                return report;
            }
            const std::string recomputed = block_hash_(index, prev, block.at("records"));
            if (block.at("blockHash").get<std::string>() != recomputed) {
                report.flag("block " + std::to_string(index), "block hash mismatch");
                return report;
            }
            for (const auto& rec : block.at("records")) {
                try {
                    NotaryRecord::from_json(rec);
                } catch (const Error& e) {
                    report.flag("block " + std::to_string(index), e.what());
                    return report;
                }
                ++report.records_checked;
            }
            prev = block.at("blockHash").get<std::string>();
            ++expected_index;
            last_block = block;
        }
        if (expected_index > 0) {
            std::ifstream head_in(head_path_());
            nlohmann::json head = head_in ? nlohmann::json::parse(head_in, nullptr, false)
                                          : nlohmann::json();
            if (head.is_discarded() || !head.is_object() || !head.contains("blockHash") ||
                !head.contains("index") || head.at("blockHash") != last_block.at("blockHash") ||
                head.at("index") != last_block.at("index")) {
                report.flag("head", "head does not match last block");
            }
        }
        return report;
    }

private:
    std::filesystem::path blocks_path_() const { return dir_ / "blocks.log"; }
    std::filesystem::path head_path_() const { return dir_ / "head.json"; }

    static std::string block_hash_(std::int64_t index, const std::string& prev,
                                   const nlohmann::json& records) {
        return crypto::sha256_hex(std::to_string(index) + "|" + prev + "|" + records.dump());
    }

    void commit_block_() {
        nlohmann::json records = nlohmann::json::array();
        for (const auto& r : pending_)
            records.push_back(nlohmann::json::parse(r.canonical_text()));
        const std::int64_t index = next_index_;
        const std::string block_hash = block_hash_(index, last_hash_, records);
        // verify the tail link before extending the chain
        if (index > 0 && last_hash_.size() != 64)
            fail(Errc::StorageFailure, "ledger tail corrupt");
        nlohmann::json block = {
            {"blockHash", block_hash},
            {"index", index},
            {"prevHash", last_hash_},
            {"records", records},
        };
        const std::string line = block.dump() + "\n";
        notary_detail::write_all(log_fd_.get(), line.data(), line.size());
        if (options_.fsync) ::fsync(log_fd_.get());

        const std::string head = nlohmann::json{{"blockHash", block_hash}, {"index", index}}.dump();
        notary_detail::Fd head_fd(::open(head_path_().c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644));
        if (!head_fd.valid()) fail(Errc::StorageFailure, "cannot write ledger head");
        notary_detail::write_all(head_fd.get(), head.data(), head.size());
        if (options_.fsync) ::fsync(head_fd.get());

        if (options_.commit_delay_ms > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(options_.commit_delay_ms));

        last_hash_ = block_hash;
        next_index_ = index + 1;
        pending_.clear();
    }

    void load_() {
        records_.clear();
        next_index_ = 0;
        last_hash_.assign(64, '0');
        std::ifstream in(blocks_path_());
        if (!in) return;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            nlohmann::json block = nlohmann::json::parse(line, nullptr, false);
            if (block.is_discarded() || !block.is_object() || !block.contains("records")) continue;
            for (const auto& rec : block.at("records")) {
                try {
                    NotaryRecord r = NotaryRecord::from_json(rec);
                    records_.emplace(r.token_id, r);
                } catch (const Error&) {}
            }
            if (block.contains("blockHash") && block.at("blockHash").is_string())
                last_hash_ = block.at("blockHash").get<std::string>();
            if (block.contains("index") && block.at("index").is_number_integer())
                next_index_ = block.at("index").get<std::int64_t>() + 1;
        }
    }

    std::filesystem::path dir_;
    Options options_;
    notary_detail::Fd log_fd_;
    std::map<std::string, NotaryRecord> records_;
    std::vector<NotaryRecord> pending_;
    std::int64_t next_index_ = 0;
    std::string last_hash_ = std::string(64, '0');
};

// ---------------------------------------------------------------------------
// ObjectStore: content-addressed single-write object directory.
//
// objects/<tokenId> holds the canonical record; index.log appends
// {"sha256":hex,"tokenId":id} per object. A second write to the same
// tokenId is rejected by O_EXCL. Audit re-hashes every object against its
// recorded content address.
// ---------------------------------------------------------------------------

class ObjectStore : public NotaryStore {
public:
    explicit ObjectStore(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(objects_dir_());
        load_();
        index_out_.open(index_path_(), std::ios::app | std::ios::binary);
        if (!index_out_) fail(Errc::StorageFailure, "cannot open " + index_path_().string());
    }

    std::string add(const NotaryRecord& record) override {
        if (!notary_detail::safe_object_name(record.token_id))
            fail(Errc::StorageFailure, "token id not usable as object name: " + record.token_id);
        if (records_.count(record.token_id))
            fail(Errc::DuplicateTokenId, "token already notarized: " + record.token_id);
        const std::string content = record.canonical_text();
        const std::filesystem::path path = objects_dir_() / record.token_id;
        notary_detail::Fd fd(::open(path.c_str(), O_WRONLY | O_CREAT | O_EXCL, 0644));
        if (!fd.valid()) {
            if (errno == EEXIST) fail(Errc::DuplicateTokenId, "object exists: " + record.token_id);
            fail(Errc::StorageFailure, "cannot create object: " + path.string());
        }
        notary_detail::write_all(fd.get(), content.data(), content.size());
        index_out_ << nlohmann::json{{"sha256", crypto::sha256_hex(content)},
                                     {"tokenId", record.token_id}}
                          .dump()
                   << '\n';
        index_out_.flush();
        records_.emplace(record.token_id, record);
        return "object-" + record.token_id;
    }

    std::optional<NotaryRecord> fetch(const std::string& token_id) const override {
        auto it = records_.find(token_id);
        if (it == records_.end()) return std::nullopt;
        return it->second;
    }

    std::string kind() const override { return "object"; }
    std::size_t size() const override { return records_.size(); }

    AuditReport audit() const override {
        AuditReport report;
        std::set<std::string> indexed;
        std::ifstream in(index_path_());
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            nlohmann::json e = nlohmann::json::parse(line, nullptr, false);
            if (e.is_discarded() || !e.is_object() || !e.contains("sha256") || !e.contains("tokenId") ||
                !e.at("sha256").is_string() || !e.at("tokenId").is_string()) {
                report.flag("index line " + std::to_string(line_no), "unparseable index entry");
                continue;
            }
            const std::string token_id = e.at("tokenId").get<std::string>();
            const std::string expected = e.at("sha256").get<std::string>();
            if (!indexed.insert(token_id).second) {
                report.flag("object " + token_id, "duplicate index entry");
                continue;
            }
            const std::filesystem::path path = objects_dir_() / token_id;
            std::error_code ec;
            if (!std::filesystem::exists(path, ec)) {
                report.flag("object " + token_id, "object file missing");
                continue;
            }
            const std::string content = notary_detail::read_file(path);
            if (crypto::sha256_hex(content) != expected) {
                report.flag("object " + token_id, "content-address mismatch");
                continue;
            }
            try {
                NotaryRecord::from_json(nlohmann::json::parse(content));
            } catch (...) {
                report.flag("object " + token_id, "object content unparseable");
                continue;
            }
            ++report.records_checked;
        }
        for (const auto& entry : std::filesystem::directory_iterator(objects_dir_())) {
            const std::string name = entry.path().filename().string();
            if (!indexed.count(name)) report.flag("object " + name, "object not in index");
        }
        return report;
    }

private:
    std::filesystem::path objects_dir_() const { return dir_ / "objects"; }
    std::filesystem::path index_path_() const { return dir_ / "index.log"; }

    void load_() {
        records_.clear();
        for (const auto& entry : std::filesystem::directory_iterator(objects_dir_())) {
            try {
                nlohmann::json j = nlohmann::json::parse(notary_detail::read_file(entry.path()),
                                                         nullptr, false);
                if (j.is_discarded()) continue;
                NotaryRecord r = NotaryRecord::from_json(j);
                records_.emplace(r.token_id, r);
            } catch (...) {}
        }
    }

    std::filesystem::path dir_;
    std::ofstream index_out_;
    std::map<std::string, NotaryRecord> records_;
};

// ---------------------------------------------------------------------------
// AppendFileStore: length-prefixed append-only record file.
//
// records.log is a sequence of frames: 4-byte big-endian length, the
// canonical record JSON, 4-byte big-endian CRC32 of the JSON bytes. Each
// add appends one frame and fdatasyncs. Audit re-parses the framing and
// checksums sequentially.
// ---------------------------------------------------------------------------

class AppendFileStore : public NotaryStore {
public:
    explicit AppendFileStore(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
        load_();
        fd_ = notary_detail::Fd(::open(log_path_().c_str(), O_WRONLY | O_APPEND | O_CREAT, 0644));
        if (!fd_.valid()) fail(Errc::StorageFailure, "cannot open " + log_path_().string());
    }

    std::string add(const NotaryRecord& record) override {
        if (records_.count(record.token_id))
            fail(Errc::DuplicateTokenId, "token already notarized: " + record.token_id);
        const std::string content = record.canonical_text();
        std::string frame;
        frame.reserve(content.size() + 8);
        notary_detail::put_be32(frame, static_cast<std::uint32_t>(content.size()));
        frame += content;
        notary_detail::put_be32(frame, notary_detail::crc32_of(content));
        const auto offset = ::lseek(fd_.get(), 0, SEEK_END);
        notary_detail::write_all(fd_.get(), frame.data(), frame.size());
        ::fdatasync(fd_.get());
        records_.emplace(record.token_id, record);
        return "offset-" + std::to_string(offset);
    }

    std::optional<NotaryRecord> fetch(const std::string& token_id) const override {
        auto it = records_.find(token_id);
        if (it == records_.end()) return std::nullopt;
        return it->second;
    }

    std::string kind() const override { return "file"; }
    std::size_t size() const override { return records_.size(); }

    AuditReport audit() const override {
        AuditReport report;
        scan_(
            [&](std::size_t, const NotaryRecord&) { ++report.records_checked; },
            [&](std::size_t offset, const std::string& problem) {
                report.flag("offset " + std::to_string(offset), problem);
            });
        return report;
    }

private:
    std::filesystem::path log_path_() const { return dir_ / "records.log"; }

    template <typename OnRecord, typename OnIssue>
    void scan_(OnRecord on_record, OnIssue on_issue) const {
        std::string buf;
        {
            std::ifstream in(log_path_(), std::ios::binary);
            if (!in) return;
            buf.assign((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        }
        std::size_t pos = 0;
        while (pos < buf.size()) {
            if (buf.size() - pos < 4) {
                on_issue(pos, "truncated frame header");
                return;
            }
            const std::uint32_t len = notary_detail::get_be32(buf, pos);
            if (len == 0 || len > (16u << 20)) {
                on_issue(pos, "implausible frame length");
                return;
            }
            if (buf.size() - pos - 4 < len + 4) {
                on_issue(pos, "truncated frame body");
                return;
            }
            const std::string content = buf.substr(pos + 4, len);
            const std::uint32_t crc = notary_detail::get_be32(buf, pos + 4 + len);
            if (crc != notary_detail::crc32_of(content)) {
                on_issue(pos, "frame checksum mismatch");
                return;
            }
            nlohmann::json j = nlohmann::json::parse(content, nullptr, false);
            if (j.is_discarded()) {
                on_issue(pos, "frame content is not JSON");
                return;
            }
            try {
                on_record(pos, NotaryRecord::from_json(j));
            } catch (const Error& e) {
                on_issue(pos, e.what());
                return;
            }
            pos += 4 + len + 4;
        }
    }

    void load_() {
        records_.clear();
        scan_([&](std::size_t, const NotaryRecord& r) { records_.emplace(r.token_id, r); },
              [&](std::size_t, const std::string&) {});
    }

    std::filesystem::path dir_;
    notary_detail::Fd fd_;
    std::map<std::string, NotaryRecord> records_;
};

inline std::unique_ptr<NotaryStore> make_notary_store(const std::string& kind,
                                                      const std::filesystem::path& dir,
                                                      LedgerStore::Options ledger_options = {}) {
    if (kind == "ledger") return std::make_unique<LedgerStore>(dir, ledger_options);
    if (kind == "object") return std::make_unique<ObjectStore>(dir);
    if (kind == "file") return std::make_unique<AppendFileStore>(dir);
    fail(Errc::ConfigError, "unknown notary kind: " + kind + " (expected ledger|object|file)");
}

// ---------------------------------------------------------------------------
// NotaryService: schema-validating front over a store. The submission schema
// is exactly {tokenId, hash, signature2}; anything else is rejected, which
// keeps payload data out of the notary by construction.
// ---------------------------------------------------------------------------

class NotaryService {
public:
    explicit NotaryService(std::unique_ptr<NotaryStore> store,
                           std::optional<crypto::Certificate> submitter_cert = std::nullopt)
        : store_(std::move(store)), submitter_cert_(std::move(submitter_cert)) {}

    struct AddResult {
        std::string locator;
        Millis received_at;
    };

    AddResult add(const nlohmann::json& submission) {
        if (!submission.is_object()) fail(Errc::SchemaViolation, "submission must be an object");
        for (auto& [k, v] : submission.items())
            if (k != "tokenId" && k != "hash" && k != "signature2")
                fail(Errc::SchemaViolation, "submission key not allowed: " + k);
        for (const char* k : {"tokenId", "hash", "signature2"})
            if (!submission.contains(k) || !submission.at(k).is_string())
                fail(Errc::SchemaViolation, std::string("submission field missing: ") + k);
        NotaryRecord record;
        record.token_id = submission.at("tokenId").get<std::string>();
        record.hash_hex = submission.at("hash").get<std::string>();
        record.signature2_b64 = submission.at("signature2").get<std::string>();
        if (record.hash_hex.size() != 64) fail(Errc::BadHashLength, "hash must be 32 bytes hex");
        crypto::from_hex(record.hash_hex);
        record.received_at = now_millis();
        std::lock_guard lock(mu_);
        return {store_->add(record), record.received_at};
    }

    PresenceReport validate(const std::string& token_id, const std::optional<std::string>& hash_hex) const {
        std::lock_guard lock(mu_);
        PresenceReport report;
        report.token_id = token_id;
        const auto record = store_->fetch(token_id);
        if (!record) return report;
        report.found = true;
        report.received_at = record->received_at;
        if (hash_hex) report.hash_match = (*hash_hex == record->hash_hex);
        if (submitter_cert_) {
            crypto::Digest digest{};
            const crypto::Bytes hash_bytes = crypto::from_hex(record->hash_hex);
            bool ok = hash_bytes.size() == digest.size();
            if (ok) {
                std::copy(hash_bytes.begin(), hash_bytes.end(), digest.begin());
                ok = crypto::verify_digest(submitter_cert_->public_key, digest,
                                           crypto::b64url_decode(record->signature2_b64));
            }
            report.signature2_valid = ok;
        }
        return report;
    }

    std::optional<NotaryRecord> fetch(const std::string& token_id) const {
        std::lock_guard lock(mu_);
        return store_->fetch(token_id);
    }

    AuditReport audit() const {
        std::lock_guard lock(mu_);
        return store_->audit();
    }

    std::string kind() const { return store_->kind(); }
    std::size_t size() const {
        std::lock_guard lock(mu_);
        return store_->size();
    }

private:
    std::unique_ptr<NotaryStore> store_;
    std::optional<crypto::Certificate> submitter_cert_;
    mutable std::mutex mu_;
};

} // namespace provnr
