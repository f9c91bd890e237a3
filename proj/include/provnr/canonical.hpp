#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "provnr/crypto.hpp"
#include "provnr/prov.hpp"

namespace provnr {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Canonical interchange form.
//
// The canonical encoding is UTF-8 JSON with lexicographically sorted object
// keys and no insignificant whitespace. Statement arrays are sorted:
// elements by (kind, id), relations by (kind, source, target, time,
// attributes), namespaces by prefix; attributes within a statement by
// (name, type, value). Element kinds order entity < activity < agent and
// relation kinds follow the fixed order used, wasGeneratedBy,
// wasAssociatedWith, wasAttributedTo, wasDerivedFrom, wasInformedBy,
// specializationOf, alternateOf; literal types order string, integer,
// decimal, boolean, timestamp, qname. Timestamps are UTC RFC 3339 with
// millisecond precision. The same bytes are the interchange payload of the
// service API, so decode(encode(d)) is statement-set-equal to d and hashes
// are stable across processes.
// ---------------------------------------------------------------------------

namespace detail {

inline json literal_value_json(const Literal& v) {
    switch (v.type) {
        case LiteralType::Integer: return json(std::stoll(v.lexical));
        case LiteralType::Boolean: return json(v.lexical == "true");
        default: return json(v.lexical);
    }
}

inline json attribute_json(const Attribute& a) {
    return {
        {"name", a.first.str()},
        {"type", literal_type_name(a.second.type)},
        {"value", literal_value_json(a.second)},
    };
}

inline json attributes_json(const AttributeSet& attrs) {
    json arr = json::array();
    for (const auto& a : attrs) arr.push_back(attribute_json(a));
    return arr;
}

inline json element_json(const ProvElement& e) {
    json j = {
        {"attributes", attributes_json(e.attributes)},
        {"id", e.id.str()},
        {"kind", element_kind_name(e.kind)},
    };
    if (e.start_time) j["start"] = format_rfc3339(*e.start_time);
    if (e.end_time) j["end"] = format_rfc3339(*e.end_time);
    return j;
}

inline json relation_json(const ProvRelation& r) {
    json j = {
        {"attributes", attributes_json(r.attributes)},
        {"kind", relation_kind_name(r.kind)},
        {"source", r.source.str()},
        {"target", r.target.str()},
    };
    if (r.time) j["time"] = format_rfc3339(*r.time);
    return j;
}

} // namespace detail

inline json to_interchange_json(const ProvDocument& doc) {
    json namespaces = json::array();
    for (const auto& [prefix, uri] : doc.namespaces())
        namespaces.push_back({{"prefix", prefix}, {"uri", uri}});

    std::vector<const ProvElement*> elements;
    elements.reserve(doc.elements().size());
    for (const auto& [id, e] : doc.elements()) elements.push_back(&e);
    std::sort(elements.begin(), elements.end(), [](const ProvElement* a, const ProvElement* b) {
        if (a->kind != b->kind) return a->kind < b->kind;
        return a->id < b->id;
    });
    json element_arr = json::array();
    for (const ProvElement* e : elements) element_arr.push_back(detail::element_json(*e));

    json relation_arr = json::array();
    for (const ProvRelation& r : doc.relations()) relation_arr.push_back(detail::relation_json(r));

    return {{"elements", element_arr}, {"namespaces", namespaces}, {"relations", relation_arr}};
}

inline std::string canonical_bytes(const ProvDocument& doc) { return to_interchange_json(doc).dump(); }

inline std::string encode_document(const ProvDocument& doc) { return canonical_bytes(doc); }

inline std::string document_sha256_hex(const ProvDocument& doc) {
    return crypto::sha256_hex(canonical_bytes(doc));
}

// ---------------------------------------------------------------------------
// Decoding. Strict: unknown keys, wrong JSON types, undeclared prefixes and
// dangling endpoints are all SchemaViolation with the offending JSON path.
// ---------------------------------------------------------------------------

namespace detail {

[[noreturn]] inline void schema_fail(const std::string& path, const std::string& message) {
    fail(Errc::SchemaViolation, message + " at " + path);
}

inline void require_keys(const json& j, const std::set<std::string>& required,
                         const std::set<std::string>& optional, const std::string& path) {
    if (!j.is_object()) schema_fail(path, "expected an object");
    for (auto& [k, v] : j.items())
        if (!required.count(k) && !optional.count(k)) schema_fail(path + "/" + k, "unknown key");
    for (const auto& k : required)
        if (!j.contains(k)) schema_fail(path, "missing key '" + k + "'");
}

inline std::string require_string(const json& j, const char* key, const std::string& path) {
    if (!j.contains(key) || !j.at(key).is_string()) schema_fail(path + "/" + key, "expected a string");
    return j.at(key).get<std::string>();
}

inline Literal decode_literal(const json& j, const std::string& path) {
    require_keys(j, {"name", "type", "value"}, {}, path);
    // name handled by caller
    const LiteralType type = literal_type_from_name(require_string(j, "type", path));
    const json& value = j.at("value");
    switch (type) {
        case LiteralType::Integer:
            if (!value.is_number_integer()) schema_fail(path + "/value", "expected an integer");
            return Literal::integer(value.get<std::int64_t>());
        case LiteralType::Boolean:
            if (!value.is_boolean()) schema_fail(path + "/value", "expected a boolean");
            return Literal::boolean(value.get<bool>());
        case LiteralType::Timestamp: {
            if (!value.is_string()) schema_fail(path + "/value", "expected a string");
            return Literal::timestamp(parse_rfc3339(value.get<std::string>()));
        }
        case LiteralType::QName: {
            if (!value.is_string()) schema_fail(path + "/value", "expected a string");
            return Literal::qname(QualifiedName::parse(value.get<std::string>()));
        }
        case LiteralType::Decimal: {
            if (!value.is_string()) schema_fail(path + "/value", "expected a string");
            return Literal::decimal(value.get<std::string>());
        }
        case LiteralType::String:
            if (!value.is_string()) schema_fail(path + "/value", "expected a string");
            return Literal::string(value.get<std::string>());
    }
    schema_fail(path, "unreachable literal type");
}

inline AttributeSet decode_attributes(const json& j, const std::string& path) {
    if (!j.is_array()) schema_fail(path, "expected an array");
    AttributeSet out;
    size_t i = 0;
    for (const auto& a : j) {
        const std::string apath = path + "/" + std::to_string(i++);
        const QualifiedName name = QualifiedName::parse(require_string(a, "name", apath));
        out.emplace(name, decode_literal(a, apath));
    }
    return out;
}

} // namespace detail

// Decodes interchange JSON; `extra_allowed` admits sibling keys (the template
// file format adds "zones") which the caller consumes itself.
inline ProvDocument decode_document_json(const json& j, const std::set<std::string>& extra_allowed = {}) {
    using namespace detail;
    std::set<std::string> optional = extra_allowed;
    require_keys(j, {"elements", "namespaces", "relations"}, optional, "");

    ProvDocument doc;
    try {
        const json& ns = j.at("namespaces");
        if (!ns.is_array()) schema_fail("/namespaces", "expected an array");
        size_t i = 0;
        for (const auto& n : ns) {
            const std::string path = "/namespaces/" + std::to_string(i++);
            require_keys(n, {"prefix", "uri"}, {}, path);
            doc.add_namespace(require_string(n, "prefix", path), require_string(n, "uri", path));
        }

        const json& elements = j.at("elements");
        if (!elements.is_array()) schema_fail("/elements", "expected an array");
        i = 0;
        for (const auto& e : elements) {
            const std::string path = "/elements/" + std::to_string(i++);
            require_keys(e, {"attributes", "id", "kind"}, {"start", "end"}, path);
            ProvElement el;
            el.id = QualifiedName::parse(require_string(e, "id", path));
            el.kind = element_kind_from_name(require_string(e, "kind", path));
            el.attributes = decode_attributes(e.at("attributes"), path + "/attributes");
            if (e.contains("start")) el.start_time = parse_rfc3339(require_string(e, "start", path));
            if (e.contains("end")) el.end_time = parse_rfc3339(require_string(e, "end", path));
            doc.add(el);
        }

        const json& relations = j.at("relations");
        if (!relations.is_array()) schema_fail("/relations", "expected an array");
        i = 0;
        for (const auto& r : relations) {
            const std::string path = "/relations/" + std::to_string(i++);
            require_keys(r, {"attributes", "kind", "source", "target"}, {"time"}, path);
            ProvRelation rel;
            rel.kind = relation_kind_from_name(require_string(r, "kind", path));
            rel.source = QualifiedName::parse(require_string(r, "source", path));
            rel.target = QualifiedName::parse(require_string(r, "target", path));
            rel.attributes = decode_attributes(r.at("attributes"), path + "/attributes");
            if (r.contains("time")) rel.time = parse_rfc3339(require_string(r, "time", path));
            doc.add(rel);
        }
    } catch (const Error& e) {
        // Model-level violations surface as schema violations on decode.
        if (e.code() == Errc::SchemaViolation) throw;
        fail(Errc::SchemaViolation, e.what());
    }
    return doc;
}

inline ProvDocument decode_document(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) fail(Errc::SchemaViolation, "input is not valid JSON");
    return decode_document_json(j);
}

} // namespace provnr
