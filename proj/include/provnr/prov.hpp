#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "provnr/errors.hpp"
#include "provnr/time.hpp"

namespace provnr {

// ---------------------------------------------------------------------------
// Qualified names and literals
// ---------------------------------------------------------------------------

struct QualifiedName {
    std::string prefix;
    std::string local;

    auto operator<=>(const QualifiedName&) const = default;

    std::string str() const { return prefix + ":" + local; }

    static QualifiedName parse(std::string_view s) {
        const auto colon = s.find(':');
        if (colon == std::string_view::npos || colon == 0 || colon + 1 >= s.size())
            fail(Errc::SchemaViolation, "not a qualified name: " + std::string(s));
        QualifiedName qn{std::string(s.substr(0, colon)), std::string(s.substr(colon + 1))};
        for (char c : qn.local)
            if (c == ' ' || c == '\t' || c == '\n' || c == '\r')
                fail(Errc::SchemaViolation, "whitespace in local name: " + std::string(s));
        return qn;
    }
};

// Prefixes usable without declaration. `var`/`vvar` mark identifier and
// value variables in templates; `meta` carries the service's own vocabulary.
inline const std::map<std::string, std::string>& builtin_namespaces() {
    static const std::map<std::string, std::string> ns = {
        {"prov", "http://www.w3.org/ns/prov#"},
        {"meta", "urn:provtmpl:meta"},
        {"var", "urn:provtmpl:var"},
        {"vvar", "urn:provtmpl:vvar"},
    };
    return ns;
}

enum class LiteralType { String, Integer, Decimal, Boolean, Timestamp, QName };

inline const char* literal_type_name(LiteralType t) {
    switch (t) {
        case LiteralType::String: return "string";
        case LiteralType::Integer: return "integer";
        case LiteralType::Decimal: return "decimal";
        case LiteralType::Boolean: return "boolean";
        case LiteralType::Timestamp: return "timestamp";
        case LiteralType::QName: return "qname";
    }
    return "unknown";
}

inline LiteralType literal_type_from_name(std::string_view s) {
    if (s == "string") return LiteralType::String;
    if (s == "integer") return LiteralType::Integer;
    if (s == "decimal") return LiteralType::Decimal;
    if (s == "boolean") return LiteralType::Boolean;
    if (s == "timestamp") return LiteralType::Timestamp;
    if (s == "qname") return LiteralType::QName;
    fail(Errc::SchemaViolation, "unknown literal type: " + std::string(s));
}

// A typed literal stored in normalized lexical form: integers canonicalized
// through int64, booleans as true/false, timestamps as RFC 3339 ms UTC,
// qnames as prefix:local. Decimals keep their exact lexical form.
struct Literal {
    LiteralType type = LiteralType::String;
    std::string lexical;

    auto operator<=>(const Literal&) const = default;

    static Literal string(std::string s) { return {LiteralType::String, std::move(s)}; }
    static Literal integer(std::int64_t v) { return {LiteralType::Integer, std::to_string(v)}; }
    static Literal decimal(std::string s) { return {LiteralType::Decimal, std::move(s)}; }
    static Literal boolean(bool b) { return {LiteralType::Boolean, b ? "true" : "false"}; }
    static Literal timestamp(Millis ms) { return {LiteralType::Timestamp, format_rfc3339(ms)}; }
    static Literal qname(const QualifiedName& qn) { return {LiteralType::QName, qn.str()}; }

    std::int64_t as_integer() const {
        if (type != LiteralType::Integer) fail(Errc::TypeMismatch, "literal is not an integer");
        return std::stoll(lexical);
    }
    bool as_boolean() const {
        if (type != LiteralType::Boolean) fail(Errc::TypeMismatch, "literal is not a boolean");
        return lexical == "true";
    }
    Millis as_timestamp() const {
        if (type != LiteralType::Timestamp) fail(Errc::TypeMismatch, "literal is not a timestamp");
        return parse_rfc3339(lexical);
    }
    QualifiedName as_qname() const {
        if (type != LiteralType::QName) fail(Errc::TypeMismatch, "literal is not a qualified name");
        return QualifiedName::parse(lexical);
    }
};

using Attribute = std::pair<QualifiedName, Literal>;
using AttributeSet = std::set<Attribute>;

// ---------------------------------------------------------------------------
// Statements
// ---------------------------------------------------------------------------

enum class ElementKind { Entity, Activity, Agent };

inline const char* element_kind_name(ElementKind k) {
    switch (k) {
        case ElementKind::Entity: return "entity";
        case ElementKind::Activity: return "activity";
        case ElementKind::Agent: return "agent";
    }
    return "unknown";
}

inline ElementKind element_kind_from_name(std::string_view s) {
    if (s == "entity") return ElementKind::Entity;
    if (s == "activity") return ElementKind::Activity;
    if (s == "agent") return ElementKind::Agent;
    fail(Errc::SchemaViolation, "unknown element kind: " + std::string(s));
}

struct ProvElement {
    QualifiedName id;
    ElementKind kind = ElementKind::Entity;
    AttributeSet attributes;
    std::optional<Millis> start_time; // Activity only
    std::optional<Millis> end_time;   // Activity only

    bool operator==(const ProvElement&) const = default;

    std::optional<Literal> attribute(const QualifiedName& name) const {
        for (const auto& [n, v] : attributes)
            if (n == name) return v;
        return std::nullopt;
    }
};

enum class RelationKind {
    Used,
    WasGeneratedBy,
    WasAssociatedWith,
    WasAttributedTo,
    WasDerivedFrom,
    WasInformedBy,
    SpecializationOf,
    AlternateOf,
};

inline const char* relation_kind_name(RelationKind k) {
    switch (k) {
        case RelationKind::Used: return "used";
        case RelationKind::WasGeneratedBy: return "wasGeneratedBy";
        case RelationKind::WasAssociatedWith: return "wasAssociatedWith";
        case RelationKind::WasAttributedTo: return "wasAttributedTo";
        case RelationKind::WasDerivedFrom: return "wasDerivedFrom";
        case RelationKind::WasInformedBy: return "wasInformedBy";
        case RelationKind::SpecializationOf: return "specializationOf";
        case RelationKind::AlternateOf: return "alternateOf";
    }
    return "unknown";
}

inline RelationKind relation_kind_from_name(std::string_view s) {
    if (s == "used") return RelationKind::Used;
    if (s == "wasGeneratedBy") return RelationKind::WasGeneratedBy;
    if (s == "wasAssociatedWith") return RelationKind::WasAssociatedWith;
    if (s == "wasAttributedTo") return RelationKind::WasAttributedTo;
    if (s == "wasDerivedFrom") return RelationKind::WasDerivedFrom;
    if (s == "wasInformedBy") return RelationKind::WasInformedBy;
    if (s == "specializationOf") return RelationKind::SpecializationOf;
    if (s == "alternateOf") return RelationKind::AlternateOf;
    fail(Errc::SchemaViolation, "unknown relation kind: " + std::string(s));
}

// (source kind, target kind) admitted per relation kind.
inline std::pair<ElementKind, ElementKind> relation_endpoint_kinds(RelationKind k) {
    switch (k) {
        case RelationKind::Used: return {ElementKind::Activity, ElementKind::Entity};
        case RelationKind::WasGeneratedBy: return {ElementKind::Entity, ElementKind::Activity};
        case RelationKind::WasAssociatedWith: return {ElementKind::Activity, ElementKind::Agent};
        case RelationKind::WasAttributedTo: return {ElementKind::Entity, ElementKind::Agent};
        case RelationKind::WasDerivedFrom: return {ElementKind::Entity, ElementKind::Entity};
        case RelationKind::WasInformedBy: return {ElementKind::Activity, ElementKind::Activity};
        case RelationKind::SpecializationOf: return {ElementKind::Entity, ElementKind::Entity};
        case RelationKind::AlternateOf: return {ElementKind::Entity, ElementKind::Entity};
    }
    fail(Errc::KindMismatch, "unknown relation kind");
}

struct ProvRelation {
    RelationKind kind = RelationKind::Used;
    QualifiedName source;
    QualifiedName target;
    std::optional<Millis> time;
    AttributeSet attributes;

    auto operator<=>(const ProvRelation&) const = default;
};

// ---------------------------------------------------------------------------
// Documents
// ---------------------------------------------------------------------------

// A provenance graph document. Operations either leave the document unchanged
// or apply completely; callers treat documents as values.
class ProvDocument {
public:
    ProvDocument() = default;

    const std::string& doc_id() const { return doc_id_; }
    void set_doc_id(std::string id) { doc_id_ = std::move(id); }

    const std::map<std::string, std::string>& namespaces() const { return namespaces_; }
    const std::map<QualifiedName, ProvElement>& elements() const { return elements_; }
    const std::set<ProvRelation>& relations() const { return relations_; }

    bool has_prefix(const std::string& prefix) const {
        return namespaces_.count(prefix) > 0 || builtin_namespaces().count(prefix) > 0;
    }

    std::optional<std::string> uri_for(const std::string& prefix) const {
        if (auto it = namespaces_.find(prefix); it != namespaces_.end()) return it->second;
        if (auto it = builtin_namespaces().find(prefix); it != builtin_namespaces().end()) return it->second;
        return std::nullopt;
    }

    void add_namespace(const std::string& prefix, const std::string& uri) {
        if (prefix.empty()) fail(Errc::SchemaViolation, "empty namespace prefix");
        if (uri.empty()) fail(Errc::SchemaViolation, "empty namespace uri");
        if (auto existing = uri_for(prefix); existing && *existing != uri)
            fail(Errc::NamespaceClash, "prefix '" + prefix + "' already bound to " + *existing);
        if (builtin_namespaces().count(prefix)) return; // identical to builtin, keep implicit
        namespaces_.emplace(prefix, uri);
    }

    const ProvElement* find_element(const QualifiedName& id) const {
        auto it = elements_.find(id);
        return it == elements_.end() ? nullptr : &it->second;
    }

    void add(const ProvElement& e) {
        check_element_(e);
        auto it = elements_.find(e.id);
        if (it != elements_.end()) {
            if (it->second == e) return; // idempotent duplicate
            fail(Errc::DuplicateElementId, "element redefined with different content: " + e.id.str());
        }
        elements_.emplace(e.id, e);
    }

    void add(const ProvRelation& r) {
        check_relation_(r);
        relations_.insert(r); // set insert is idempotent
    }

    // Attribute union on an existing element (same unification merge applies).
    void add_element_attributes(const QualifiedName& id, const AttributeSet& attrs) {
        auto it = elements_.find(id);
        if (it == elements_.end()) fail(Errc::DanglingEndpoint, "no such element: " + id.str());
        check_attributes_(attrs);
        it->second.attributes.insert(attrs.begin(), attrs.end());
    }

    // Union merge. Validates the whole merge before mutating anything.
    void merge(const ProvDocument& frag) {
        for (const auto& [prefix, uri] : frag.namespaces_)
            if (auto existing = uri_for(prefix); existing && *existing != uri)
                fail(Errc::NamespaceClash, "prefix '" + prefix + "' bound to conflicting uris");
        std::vector<std::pair<QualifiedName, ProvElement>> unified;
        for (const auto& [id, e] : frag.elements_) {
            auto it = elements_.find(id);
            if (it == elements_.end()) continue;
            const ProvElement& mine = it->second;
            if (mine.kind != e.kind)
                fail(Errc::IdKindConflict, "element '" + id.str() + "' merged with conflicting kinds");
            if (mine.start_time && e.start_time && *mine.start_time != *e.start_time)
                fail(Errc::IdKindConflict, "element '" + id.str() + "' merged with conflicting start times");
            if (mine.end_time && e.end_time && *mine.end_time != *e.end_time)
                fail(Errc::IdKindConflict, "element '" + id.str() + "' merged with conflicting end times");
        }
        for (const auto& [prefix, uri] : frag.namespaces_)
            add_namespace(prefix, uri);
        for (const auto& [id, e] : frag.elements_) {
            auto [it, inserted] = elements_.emplace(id, e);
            if (!inserted) {
                it->second.attributes.insert(e.attributes.begin(), e.attributes.end());
                if (!it->second.start_time) it->second.start_time = e.start_time;
                if (!it->second.end_time) it->second.end_time = e.end_time;
            }
        }
        relations_.insert(frag.relations_.begin(), frag.relations_.end());
    }

    // Statement-set equality; doc ids are administrative and excluded.
    bool same_statements(const ProvDocument& other) const {
        return namespaces_ == other.namespaces_ && elements_ == other.elements_ &&
               relations_ == other.relations_;
    }

    size_t statement_count() const { return elements_.size() + relations_.size(); }

    std::vector<const ProvRelation*> relations_from(const QualifiedName& source) const {
        std::vector<const ProvRelation*> out;
        for (const auto& r : relations_)
            if (r.source == source) out.push_back(&r);
        return out;
    }

    std::vector<const ProvElement*> elements_of_type(const QualifiedName& type) const {
        std::vector<const ProvElement*> out;
        for (const auto& [id, e] : elements_)
            if (auto t = e.attribute({"prov", "type"}); t && t->type == LiteralType::QName && t->lexical == type.str())
                out.push_back(&e);
        return out;
    }

    // Whole-document validator: prefix declarations, endpoint presence and
    // typing, timing rules.
    void validate() const {
        for (const auto& [id, e] : elements_) {
            check_element_(e);
            if (id != e.id) fail(Errc::ValidationFailure, "element index out of sync");
        }
        for (const auto& r : relations_) check_relation_(r);
    }

private:
    void check_prefix_(const QualifiedName& qn) const {
        if (qn.prefix.empty() || qn.local.empty())
            fail(Errc::SchemaViolation, "empty prefix or local name: '" + qn.str() + "'");
        if (!has_prefix(qn.prefix)) fail(Errc::UnknownPrefix, "undeclared prefix: " + qn.prefix);
    }

    void check_attributes_(const AttributeSet& attrs) const {
        for (const auto& [name, value] : attrs) {
            check_prefix_(name);
            if (value.type == LiteralType::QName) check_prefix_(QualifiedName::parse(value.lexical));
        }
    }

    void check_element_(const ProvElement& e) const {
        check_prefix_(e.id);
        check_attributes_(e.attributes);
        if (e.kind != ElementKind::Activity && (e.start_time || e.end_time))
            fail(Errc::SchemaViolation, "start/end times only allowed on activities: " + e.id.str());
        if (e.start_time && e.end_time && *e.start_time > *e.end_time)
            fail(Errc::SchemaViolation, "activity start after end: " + e.id.str());
    }

    void check_relation_(const ProvRelation& r) const {
        check_prefix_(r.source);
        check_prefix_(r.target);
        check_attributes_(r.attributes);
        const auto [source_kind, target_kind] = relation_endpoint_kinds(r.kind);
        const ProvElement* s = find_element(r.source);
        const ProvElement* t = find_element(r.target);
        if (!s) fail(Errc::DanglingEndpoint, "relation source not in document: " + r.source.str());
        if (!t) fail(Errc::DanglingEndpoint, "relation target not in document: " + r.target.str());
        if (s->kind != source_kind)
            fail(Errc::KindMismatch, std::string(relation_kind_name(r.kind)) + " source must be " +
                                         element_kind_name(source_kind) + ": " + r.source.str());
        if (t->kind != target_kind)
            fail(Errc::KindMismatch, std::string(relation_kind_name(r.kind)) + " target must be " +
                                         element_kind_name(target_kind) + ": " + r.target.str());
    }

    std::string doc_id_;
    std::map<std::string, std::string> namespaces_;
    std::map<QualifiedName, ProvElement> elements_;
    std::set<ProvRelation> relations_;
};

} // namespace provnr
