#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "provnr/canonical.hpp"
#include "provnr/prov.hpp"

namespace provnr {

// ---------------------------------------------------------------------------
// Templates: abstract provenance documents whose element ids may live in the
// `var:` namespace and whose attribute values may reference `vvar:` value
// variables. Zones are vertex-disjoint element subsets that may be
// instantiated repeatedly within one fragment.
// ---------------------------------------------------------------------------

inline bool is_id_variable(const QualifiedName& qn) { return qn.prefix == "var"; }

inline bool is_value_variable(const Literal& v) {
    return v.type == LiteralType::QName && v.lexical.rfind("vvar:", 0) == 0;
}

struct Zone {
    std::string id;
    std::set<QualifiedName> members;
};

struct Substitution {
    // Identifier variables (var:) bind to QName literals; value variables
    // (vvar:) bind to non-QName literals.
    std::map<QualifiedName, Literal> bindings;
    std::vector<std::pair<std::string, std::map<QualifiedName, Literal>>> zone_bindings;
};

struct CheckReport {
    std::vector<QualifiedName> unbound;
    std::vector<QualifiedName> extraneous;

    bool clean() const { return unbound.empty() && extraneous.empty(); }
};

class Template {
public:
    Template() = default;

    explicit Template(ProvDocument body, std::vector<Zone> zones = {}) : body_(std::move(body)) {
        for (auto& z : zones) {
            if (zones_.count(z.id)) fail(Errc::InvalidTemplate, "duplicate zone id: " + z.id);
            zones_.emplace(z.id, std::move(z));
        }
        validate_();
    }

    const ProvDocument& body() const { return body_; }
    const std::map<std::string, Zone>& zones() const { return zones_; }
    bool has_zones() const { return !zones_.empty(); }

    const Zone& zone(const std::string& id) const {
        auto it = zones_.find(id);
        if (it == zones_.end()) fail(Errc::UnknownZone, "no such zone: " + id);
        return it->second;
    }

    std::optional<std::string> zone_of(const QualifiedName& element_id) const {
        for (const auto& [zid, z] : zones_)
            if (z.members.count(element_id)) return zid;
        return std::nullopt;
    }

    // All variables of the template, of one zone, or of the fixed part.
    std::set<QualifiedName> variables() const { return collect_(nullptr, false); }
    std::set<QualifiedName> zone_variables(const std::string& zone_id) const {
        const Zone& z = zone(zone_id);
        return collect_(&z, false);
    }
    std::set<QualifiedName> fixed_variables() const { return collect_(nullptr, true); }

    json to_json() const {
        json j = to_interchange_json(body_);
        if (!zones_.empty()) {
            json zs = json::array();
            for (const auto& [zid, z] : zones_) {
                json members = json::array();
                for (const auto& m : z.members) members.push_back(m.str());
                zs.push_back({{"id", zid}, {"members", members}});
            }
            j["zones"] = zs;
        }
        return j;
    }

    std::string canonical_text() const { return to_json().dump(); }

    static Template from_json(const json& j) {
        ProvDocument body = decode_document_json(j, {"zones"});
        std::vector<Zone> zones;
        if (j.contains("zones")) {
            const json& zs = j.at("zones");
            if (!zs.is_array()) fail(Errc::SchemaViolation, "zones must be an array");
            for (const auto& zj : zs) {
                detail::require_keys(zj, {"id", "members"}, {}, "/zones");
                Zone z;
                if (!zj.at("id").is_string()) fail(Errc::SchemaViolation, "zone id must be a string");
                z.id = zj.at("id").get<std::string>();
                if (!zj.at("members").is_array()) fail(Errc::SchemaViolation, "zone members must be an array");
                for (const auto& m : zj.at("members")) {
                    if (!m.is_string()) fail(Errc::SchemaViolation, "zone member must be a string");
                    z.members.insert(QualifiedName::parse(m.get<std::string>()));
                }
                zones.push_back(std::move(z));
            }
        }
        return Template(std::move(body), std::move(zones));
    }

private:
    static void collect_element_(const ProvElement& e, std::set<QualifiedName>& out) {
        if (is_id_variable(e.id)) out.insert(e.id);
        for (const auto& [name, value] : e.attributes)
            if (is_value_variable(value)) out.insert(QualifiedName::parse(value.lexical));
    }

    static void collect_relation_(const ProvRelation& r, std::set<QualifiedName>& out) {
        if (is_id_variable(r.source)) out.insert(r.source);
        if (is_id_variable(r.target)) out.insert(r.target);
        for (const auto& [name, value] : r.attributes)
            if (is_value_variable(value)) out.insert(QualifiedName::parse(value.lexical));
    }

    bool in_any_zone_(const QualifiedName& id) const { return zone_of(id).has_value(); }

    std::set<QualifiedName> collect_(const Zone* only_zone, bool fixed_only) const {
        std::set<QualifiedName> out;
        for (const auto& [id, e] : body_.elements()) {
            if (only_zone) {
                if (only_zone->members.count(id)) collect_element_(e, out);
            } else if (!fixed_only || !in_any_zone_(id)) {
                collect_element_(e, out);
            }
        }
        for (const auto& r : body_.relations()) {
            const bool touches_zone = in_any_zone_(r.source) || in_any_zone_(r.target);
            if (only_zone) {
                if (only_zone->members.count(r.source) || only_zone->members.count(r.target))
                    collect_relation_(r, out);
            } else if (!fixed_only || !touches_zone) {
                collect_relation_(r, out);
            }
        }
        return out;
    }

    void validate_() {
        body_.validate();
        // vvar names must occur in exactly one attribute position
        std::set<QualifiedName> seen;
        auto check_attrs = [&](const AttributeSet& attrs, const std::string& where) {
            for (const auto& [name, value] : attrs) {
                if (!is_value_variable(value)) continue;
                const QualifiedName v = QualifiedName::parse(value.lexical);
                if (!seen.insert(v).second)
                    fail(Errc::InvalidTemplate, "value variable used twice: " + v.str() + " (" + where + ")");
            }
        };
        for (const auto& [id, e] : body_.elements()) check_attrs(e.attributes, id.str());
        for (const auto& r : body_.relations()) check_attrs(r.attributes, r.source.str());

        for (const auto& [zid, z] : zones_) {
            for (const auto& m : z.members) {
                if (!body_.find_element(m))
                    fail(Errc::InvalidTemplate, "zone '" + zid + "' member not in template: " + m.str());
                for (const auto& [other_id, other] : zones_)
                    if (other_id != zid && other.members.count(m))
                        fail(Errc::InvalidTemplate,
                             "zones '" + zid + "' and '" + other_id + "' overlap on " + m.str());
            }
        }
        // cross-zone edges are not supported
        for (const auto& r : body_.relations()) {
            auto zs = zone_of(r.source);
            auto zt = zone_of(r.target);
            if (zs && zt && *zs != *zt)
                fail(Errc::InvalidTemplate, "relation crosses zones '" + *zs + "' and '" + *zt + "'");
        }
    }

    ProvDocument body_;
    std::map<std::string, Zone> zones_;
};

// ---------------------------------------------------------------------------
// Substitution checking and instantiation
// ---------------------------------------------------------------------------

inline CheckReport check_substitution(const Template& t, const Substitution& s) {
    CheckReport report;
    const std::set<QualifiedName> required = t.has_zones() ? t.fixed_variables() : t.variables();
    const std::set<QualifiedName> all = t.variables();
    for (const auto& v : required)
        if (!s.bindings.count(v)) report.unbound.push_back(v);
    for (const auto& [v, value] : s.bindings)
        if (!all.count(v)) report.extraneous.push_back(v);
    return report;
}

using NamespaceTable = std::map<std::string, std::string>;

namespace detail {

inline const Literal& lookup_binding(const std::map<QualifiedName, Literal>& bindings,
                                     const QualifiedName& var) {
    auto it = bindings.find(var);
    if (it == bindings.end()) fail(Errc::UnboundVariable, "no binding for " + var.str());
    return it->second;
}

inline QualifiedName resolve_id(const QualifiedName& id,
                                const std::map<QualifiedName, Literal>& bindings) {
    if (!is_id_variable(id)) return id;
    const Literal& v = lookup_binding(bindings, id);
    if (v.type != LiteralType::QName)
        fail(Errc::TypeMismatch, "identifier variable " + id.str() + " bound to a literal");
    return QualifiedName::parse(v.lexical);
}

inline Literal resolve_value(const Literal& v, const std::map<QualifiedName, Literal>& bindings) {
    if (!is_value_variable(v)) return v;
    const QualifiedName var = QualifiedName::parse(v.lexical);
    const Literal& bound = lookup_binding(bindings, var);
    if (bound.type == LiteralType::QName)
        fail(Errc::TypeMismatch, "value variable " + var.str() + " bound to a qualified name");
    return bound;
}

// prov:start / prov:end / prov:time attribute values become the PROV timing
// fields of the instantiated statement.
inline std::optional<Millis> take_timing(AttributeSet& attrs, const QualifiedName& name) {
    for (auto it = attrs.begin(); it != attrs.end(); ++it) {
        if (it->first != name) continue;
        const Literal v = it->second;
        if (v.type != LiteralType::Timestamp)
            fail(Errc::TypeMismatch, name.str() + " must resolve to a timestamp");
        attrs.erase(it);
        return v.as_timestamp();
    }
    return std::nullopt;
}

inline ProvElement instantiate_element(const ProvElement& e,
                                       const std::map<QualifiedName, Literal>& bindings,
                                       const std::string& iteration_suffix = {}) {
    ProvElement out;
    out.id = resolve_id(e.id, bindings);
    out.id.local += iteration_suffix;
    out.kind = e.kind;
    for (const auto& [name, value] : e.attributes)
        out.attributes.emplace(name, resolve_value(value, bindings));
    if (auto t = take_timing(out.attributes, {"prov", "start"})) out.start_time = t;
    if (auto t = take_timing(out.attributes, {"prov", "end"})) out.end_time = t;
    if (!out.start_time) out.start_time = e.start_time;
    if (!out.end_time) out.end_time = e.end_time;
    return out;
}

inline ProvRelation instantiate_relation(const ProvRelation& r,
                                         const std::map<QualifiedName, Literal>& bindings) {
    ProvRelation rel;
    rel.kind = r.kind;
    rel.source = resolve_id(r.source, bindings);
    rel.target = resolve_id(r.target, bindings);
    for (const auto& [name, value] : r.attributes)
        rel.attributes.emplace(name, resolve_value(value, bindings));
    if (auto tm = take_timing(rel.attributes, {"prov", "time"})) rel.time = tm;
    if (!rel.time) rel.time = r.time;
    return rel;
}

// Declare the namespaces a set of resolved bindings drags into a fragment.
// Prefixes resolve against the template body first, then the caller's table.
inline void declare_binding_namespaces(ProvDocument& frag, const Template& t,
                                       const std::map<QualifiedName, Literal>& bindings,
                                       const NamespaceTable& extra) {
    for (const auto& [var, value] : bindings) {
        if (value.type != LiteralType::QName) continue;
        const QualifiedName qn = QualifiedName::parse(value.lexical);
        if (frag.has_prefix(qn.prefix)) continue;
        if (auto uri = t.body().uri_for(qn.prefix)) {
            frag.add_namespace(qn.prefix, *uri);
        } else if (auto it = extra.find(qn.prefix); it != extra.end()) {
            frag.add_namespace(qn.prefix, it->second);
        }
    }
}

} // namespace detail

// One-shot instantiation of a zone-free template. `extra_namespaces` supplies
// declarations for binding prefixes the template body does not know (usually
// the enclosing document's table).
inline ProvDocument instantiate(const Template& t, const Substitution& s,
                                const NamespaceTable& extra_namespaces = {}) {
    if (t.has_zones()) fail(Errc::ZonedTemplate, "template has zones; use the zoned path");
    const CheckReport report = check_substitution(t, s);
    if (!report.unbound.empty())
        fail(Errc::UnboundVariable, "unbound variable: " + report.unbound.front().str());

    ProvDocument out;
    for (const auto& [prefix, uri] : t.body().namespaces()) out.add_namespace(prefix, uri);
    detail::declare_binding_namespaces(out, t, s.bindings, extra_namespaces);
    for (const auto& [id, e] : t.body().elements())
        out.add(detail::instantiate_element(e, s.bindings));
    for (const auto& r : t.body().relations())
        out.add(detail::instantiate_relation(r, s.bindings));
    return out;
}

// ---------------------------------------------------------------------------
// Zoned instantiation. The fixed part is instantiated once; each zone
// iteration instantiates the zone subgraph with iteration-qualified
// identifiers (local part suffixed ".k", k from 1, applied to every zone
// member) and re-wires every edge incident to the fixed part.
// ---------------------------------------------------------------------------

class FragmentSession {
public:
    enum class State { Open, Finalised };

    static FragmentSession begin(const Template& t, const Substitution& s,
                                 const NamespaceTable& extra_namespaces = {}) {
        if (!t.has_zones()) fail(Errc::NoZones, "template has no zones");
        for (const auto& v : t.fixed_variables())
            if (!s.bindings.count(v)) fail(Errc::UnboundVariable, "unbound variable: " + v.str());

        FragmentSession sess;
        sess.template_ = t;
        sess.base_bindings_ = s.bindings;
        sess.extra_namespaces_ = extra_namespaces;

        ProvDocument& frag = sess.fragment_;
        for (const auto& [prefix, uri] : t.body().namespaces()) frag.add_namespace(prefix, uri);
        detail::declare_binding_namespaces(frag, t, s.bindings, extra_namespaces);
        for (const auto& [id, e] : t.body().elements())
            if (!t.zone_of(id)) frag.add(detail::instantiate_element(e, s.bindings));
        for (const auto& r : t.body().relations()) {
            if (t.zone_of(r.source) || t.zone_of(r.target)) continue;
            frag.add(detail::instantiate_relation(r, s.bindings));
        }
        return sess;
    }

    State state() const { return state_; }

    const ProvDocument& fragment() const { return fragment_; }

    std::int64_t iteration_count(const std::string& zone_id) const {
        auto it = iterations_.find(zone_id);
        return it == iterations_.end() ? 0 : it->second;
    }

    const std::map<std::string, std::int64_t>& iteration_counts() const { return iterations_; }

    void add_zone_iteration(const std::string& zone_id,
                            const std::map<QualifiedName, Literal>& bindings) {
        require_open_();
        const Zone& zone = template_.zone(zone_id);
        const std::set<QualifiedName> zone_vars = template_.zone_variables(zone_id);
        for (const auto& v : zone_vars)
            if (!bindings.count(v) && !base_bindings_.count(v))
                fail(Errc::UnboundVariable, "unbound zone variable: " + v.str());
        for (const auto& [v, value] : bindings)
            if (!zone_vars.count(v))
                fail(Errc::UnboundVariable, "binding outside zone '" + zone_id + "': " + v.str());

        const std::int64_t k = iterations_[zone_id] + 1;
        const std::string suffix = "." + std::to_string(k);

        std::map<QualifiedName, Literal> merged = base_bindings_;
        for (const auto& [v, value] : bindings) merged[v] = value;

        auto iteration_id = [&](const QualifiedName& id) {
            QualifiedName resolved = detail::resolve_id(id, merged);
            if (zone.members.count(id)) resolved.local += suffix;
            return resolved;
        };

        ProvDocument part;
        for (const auto& [prefix, uri] : fragment_.namespaces()) part.add_namespace(prefix, uri);
        detail::declare_binding_namespaces(part, template_, merged, extra_namespaces_);
        for (const auto& m : zone.members) {
            const ProvElement* e = template_.body().find_element(m);
            part.add(detail::instantiate_element(*e, merged, suffix));
        }
        for (const auto& r : template_.body().relations()) {
            if (!zone.members.count(r.source) && !zone.members.count(r.target)) continue;
            ProvRelation rel;
            rel.kind = r.kind;
            rel.source = iteration_id(r.source);
            rel.target = iteration_id(r.target);
            for (const auto& [name, value] : r.attributes)
                rel.attributes.emplace(name, detail::resolve_value(value, merged));
            if (auto tm = detail::take_timing(rel.attributes, {"prov", "time"})) rel.time = tm;
            if (!rel.time) rel.time = r.time;
            // boundary relations borrow their fixed endpoint from the fragment
            for (const QualifiedName* end : {&rel.source, &rel.target})
                if (!part.find_element(*end))
                    if (const ProvElement* fixed = fragment_.find_element(*end)) part.add(*fixed);
            part.add(rel);
        }
        fragment_.merge(part);
        iterations_[zone_id] = k;
    }

    ProvDocument finalise() {
        require_open_();
        state_ = State::Finalised;
        try {
            fragment_.validate();
        } catch (const Error& e) {
            fail(Errc::ValidationFailure, e.what());
        }
        return fragment_;
    }

private:
    void require_open_() const {
        if (state_ != State::Open) fail(Errc::SessionClosed, "fragment session is finalised");
    }

    Template template_;
    std::map<QualifiedName, Literal> base_bindings_;
    NamespaceTable extra_namespaces_;
    ProvDocument fragment_;
    std::map<std::string, std::int64_t> iterations_;
    State state_ = State::Open;
};

// ---------------------------------------------------------------------------
// Substitution JSON codec and canonical forms
// ---------------------------------------------------------------------------

inline json binding_value_json(const Literal& v) {
    return {{"type", literal_type_name(v.type)}, {"value", detail::literal_value_json(v)}};
}

inline Literal binding_value_from_json(const json& j, const std::string& path) {
    detail::require_keys(j, {"type", "value"}, {}, path);
    json wrapped = {{"name", "x:x"}, {"type", j.at("type")}, {"value", j.at("value")}};
    return detail::decode_literal(wrapped, path);
}

inline json bindings_to_json(const std::map<QualifiedName, Literal>& bindings) {
    json out = json::object();
    for (const auto& [v, value] : bindings) out[v.str()] = binding_value_json(value);
    return out;
}

inline std::map<QualifiedName, Literal> bindings_from_json(const json& j, const std::string& path) {
    if (!j.is_object()) detail::schema_fail(path, "expected an object");
    std::map<QualifiedName, Literal> out;
    for (auto& [k, v] : j.items()) {
        const QualifiedName var = QualifiedName::parse(k);
        if (var.prefix != "var" && var.prefix != "vvar")
            detail::schema_fail(path + "/" + k, "binding keys must be var: or vvar: names");
        out.emplace(var, binding_value_from_json(v, path + "/" + k));
    }
    return out;
}

inline json substitution_to_json(const Substitution& s) {
    json j = {{"bindings", bindings_to_json(s.bindings)}};
    if (!s.zone_bindings.empty()) {
        json zb = json::array();
        for (const auto& [zone_id, bindings] : s.zone_bindings)
            zb.push_back({{"bindings", bindings_to_json(bindings)}, {"zone", zone_id}});
        j["zoneBindings"] = zb;
    }
    return j;
}

inline Substitution substitution_from_json(const json& j) {
    detail::require_keys(j, {"bindings"}, {"zoneBindings"}, "");
    Substitution s;
    s.bindings = bindings_from_json(j.at("bindings"), "/bindings");
    if (j.contains("zoneBindings")) {
        const json& zb = j.at("zoneBindings");
        if (!zb.is_array()) detail::schema_fail("/zoneBindings", "expected an array");
        size_t i = 0;
        for (const auto& e : zb) {
            const std::string path = "/zoneBindings/" + std::to_string(i++);
            detail::require_keys(e, {"bindings", "zone"}, {}, path);
            if (!e.at("zone").is_string()) detail::schema_fail(path + "/zone", "expected a string");
            s.zone_bindings.emplace_back(e.at("zone").get<std::string>(),
                                         bindings_from_json(e.at("bindings"), path + "/bindings"));
        }
    }
    return s;
}

// The "ordered representation" hashed into token payloads: sorted bindings
// only, since each service call carries exactly one flat binding map.
inline std::string canonical_bindings_text(const std::map<QualifiedName, Literal>& bindings) {
    return json{{"bindings", bindings_to_json(bindings)}}.dump();
}

inline std::string bindings_sha256_hex(const std::map<QualifiedName, Literal>& bindings) {
    return crypto::sha256_hex(canonical_bindings_text(bindings));
}

inline std::string template_sha256_hex(const Template& t) {
    return crypto::sha256_hex(t.canonical_text());
}

} // namespace provnr
