#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "provnr/canonical.hpp"
#include "provnr/template_engine.hpp"
#include "provnr/token.hpp"

namespace provnr {

// ---------------------------------------------------------------------------
// Meta-provenance: per-document history documents built by instantiating
// built-in templates for every service action, substitution documents, and
// document reconstruction by replay.
//
// Instance identifiers live in the `mp:` namespace: the tracked document is
// always mp:document, action k is mp:action-k, and the entities attached to
// action k are suffixed -k likewise.
// ---------------------------------------------------------------------------

inline const std::string& instance_ns_uri() {
    static const std::string uri = "urn:provtmpl:instance";
    return uri;
}

inline const std::set<std::string>& action_names() {
    static const std::set<std::string> names = {
        "newTemplate",  "newDocument",  "addNamespace",       "registerTemplate",
        "generate",     "generateInitialise", "generateZone", "generateFinalise",
    };
    return names;
}

namespace meta_detail {

inline QualifiedName qn(const char* prefix, const std::string& local) { return {prefix, local}; }

inline Attribute type_attr(const std::string& meta_type) {
    return {{"prov", "type"}, Literal::qname({"meta", meta_type})};
}

inline Attribute vvar_attr(const char* name, const char* var) {
    return {{"meta", name}, Literal::qname({"vvar", var})};
}

inline ProvElement entity(const std::string& var, const std::string& meta_type, AttributeSet extra = {}) {
    ProvElement e;
    e.id = {"var", var};
    e.kind = ElementKind::Entity;
    e.attributes = std::move(extra);
    e.attributes.insert(type_attr(meta_type));
    return e;
}

inline ProvElement document_node() {
    return entity("document", "Document", {vvar_attr("identifier", "documentId")});
}

inline ProvElement action_node(const std::string& action_name) {
    ProvElement a;
    a.id = {"var", "action"};
    a.kind = ElementKind::Activity;
    a.attributes = {
        type_attr("Action"),
        {{"meta", "actionName"}, Literal::string(action_name)},
        vvar_attr("actionNumber", "actionNumber"),
        {{"prov", "end"}, Literal::qname({"vvar", "endTime"})},
    };
    return a;
}

inline ProvRelation edge(RelationKind kind, const std::string& source_var, const std::string& target_var) {
    ProvRelation r;
    r.kind = kind;
    r.source = {"var", source_var};
    r.target = {"var", target_var};
    return r;
}

inline Template build_meta_template(const std::string& action_name) {
    ProvDocument body;
    body.add_namespace("mp", instance_ns_uri());
    const auto with_action_and_document = [&] {
        body.add(document_node());
        body.add(action_node(action_name));
    };
    if (action_name == "newDocument") {
        with_action_and_document();
        body.add(edge(RelationKind::WasGeneratedBy, "document", "action"));
    } else if (action_name == "addNamespace") {
        with_action_and_document();
        body.add(edge(RelationKind::Used, "action", "document"));
    } else if (action_name == "newTemplate") {
        with_action_and_document();
        body.add(entity("template", "Template", {vvar_attr("identifier", "templateId")}));
        body.add(edge(RelationKind::Used, "action", "document"));
        body.add(edge(RelationKind::WasGeneratedBy, "template", "action"));
    } else if (action_name == "registerTemplate") {
        with_action_and_document();
        body.add(entity("template", "Template", {vvar_attr("identifier", "templateId")}));
        body.add(edge(RelationKind::Used, "action", "document"));
        body.add(edge(RelationKind::Used, "action", "template"));
    } else if (action_name == "generate") {
        with_action_and_document();
        body.add(entity("template", "Template", {vvar_attr("identifier", "templateId")}));
        body.add(entity("substitution", "Substitution", {vvar_attr("identifier", "substitutionId")}));
        body.add(entity("fragment", "Fragment", {vvar_attr("identifier", "fragmentId")}));
        body.add(edge(RelationKind::Used, "action", "document"));
        body.add(edge(RelationKind::Used, "action", "template"));
        body.add(edge(RelationKind::Used, "action", "substitution"));
        body.add(edge(RelationKind::WasGeneratedBy, "fragment", "action"));
        body.add(edge(RelationKind::WasDerivedFrom, "document", "fragment"));
    } else if (action_name == "generateInitialise") {
        with_action_and_document();
        body.add(entity("template", "Template", {vvar_attr("identifier", "templateId")}));
        body.add(entity("substitution", "Substitution", {vvar_attr("identifier", "substitutionId")}));
        body.add(edge(RelationKind::Used, "action", "document"));
        body.add(edge(RelationKind::Used, "action", "template"));
        body.add(edge(RelationKind::Used, "action", "substitution"));
    } else if (action_name == "generateZone") {
        with_action_and_document();
        body.add(entity("substitution", "Substitution", {vvar_attr("identifier", "substitutionId")}));
        body.add(edge(RelationKind::Used, "action", "document"));
        body.add(edge(RelationKind::Used, "action", "substitution"));
    } else if (action_name == "generateFinalise") {
        with_action_and_document();
        body.add(entity("fragment", "Fragment", {vvar_attr("identifier", "fragmentId")}));
        body.add(edge(RelationKind::Used, "action", "document"));
        body.add(edge(RelationKind::WasGeneratedBy, "fragment", "action"));
        body.add(edge(RelationKind::WasDerivedFrom, "document", "fragment"));
    } else if (action_name == "newSubstitution") {
        ProvElement sub = entity("substitution", "Substitution", {vvar_attr("identifier", "substitutionId")});
        body.add(sub);
    } else if (action_name == "addBinding") {
        body.add(entity("substitution", "Substitution", {vvar_attr("identifier", "substitutionId")}));
        body.add(entity("binding", "Binding",
                        {vvar_attr("variable", "variable"), vvar_attr("valueType", "valueType"),
                         vvar_attr("value", "value")}));
        body.add(edge(RelationKind::WasDerivedFrom, "binding", "substitution"));
    } else if (action_name == "evidence") {
        ProvElement action;
        action.id = {"var", "action"};
        action.kind = ElementKind::Activity; // graft point, no attributes
        body.add(action);
        body.add(entity("serviceCall", "ServiceCall",
                        {vvar_attr("clientId", "clientId"), vvar_attr("userId", "userId")}));
        body.add(entity("tokenHeader", "TokenHeader",
                        {vvar_attr("identifier", "tokenId"), vvar_attr("tsaId", "tsaId"),
                         vvar_attr("notaryId", "notaryId"), vvar_attr("genTime", "genTime")}));
        body.add(entity("tokenContent", "TokenContent", {vvar_attr("hash", "payloadHash")}));
        body.add(entity("signature", "Signature",
                        {vvar_attr("value", "signatureValue"), vvar_attr("certificate", "certificate")}));
        ProvElement sign_token;
        sign_token.id = {"var", "signToken"};
        sign_token.kind = ElementKind::Activity;
        sign_token.attributes = {type_attr("SignToken"),
                                 {{"prov", "end"}, Literal::qname({"vvar", "signTime"})}};
        body.add(sign_token);
        body.add(edge(RelationKind::Used, "action", "serviceCall"));
        body.add(edge(RelationKind::WasGeneratedBy, "tokenHeader", "action"));
        body.add(edge(RelationKind::WasGeneratedBy, "tokenContent", "action"));
        body.add(edge(RelationKind::Used, "signToken", "tokenHeader"));
        body.add(edge(RelationKind::Used, "signToken", "tokenContent"));
        body.add(edge(RelationKind::WasGeneratedBy, "signature", "signToken"));
        body.add(edge(RelationKind::WasInformedBy, "signToken", "action"));
    } else {
        fail(Errc::UnknownAction, "no meta template for action: " + action_name);
    }
    return Template(std::move(body));
}

} // namespace meta_detail

// Built-in templates, shipped read-only with the server.
inline const std::map<std::string, Template>& meta_templates() {
    static const std::map<std::string, Template> templates = [] {
        std::map<std::string, Template> t;
        for (const auto& name : action_names()) t.emplace(name, meta_detail::build_meta_template(name));
        t.emplace("newSubstitution", meta_detail::build_meta_template("newSubstitution"));
        t.emplace("addBinding", meta_detail::build_meta_template("addBinding"));
        t.emplace("evidence", meta_detail::build_meta_template("evidence"));
        return t;
    }();
    return templates;
}

inline QualifiedName action_qname(std::int64_t action_number) {
    return {"mp", "action-" + std::to_string(action_number)};
}

// ---------------------------------------------------------------------------
// recordAction
// ---------------------------------------------------------------------------

struct ActionRefs {
    std::optional<std::string> template_id;
    std::optional<std::string> substitution_id;
    std::optional<std::string> fragment_id;
    std::optional<std::string> zone_id;
    std::optional<std::string> session_id;
};

struct RecordedAction {
    QualifiedName action_id;
    std::int64_t action_number = 0;
    ProvDocument fragment; // exactly the statements this action adds to the history
};

inline ProvDocument make_history_document(const std::string& history_id) {
    ProvDocument h;
    h.set_doc_id(history_id);
    return h;
}

// Builds the meta-provenance fragment for one successful service call. The
// caller merges it into the history document (and persists both together).
inline RecordedAction build_action_fragment(const std::string& doc_id, std::int64_t action_number,
                                            const std::string& action_name, Millis end_time,
                                            const ActionRefs& refs = {},
                                            const AttributeSet& extra_annotations = {}) {
    if (!action_names().count(action_name))
        fail(Errc::UnknownAction, "not a service action: " + action_name);
    const Template& tmpl = meta_templates().at(action_name);

    Substitution s;
    s.bindings[{"var", "document"}] = Literal::qname({"mp", "document"});
    s.bindings[{"var", "action"}] = Literal::qname(action_qname(action_number));
    s.bindings[{"vvar", "documentId"}] = Literal::string(doc_id);
    s.bindings[{"vvar", "actionNumber"}] = Literal::integer(action_number);
    s.bindings[{"vvar", "endTime"}] = Literal::timestamp(end_time);
    if (refs.template_id) {
        s.bindings[{"var", "template"}] = Literal::qname({"mp", "template-" + *refs.template_id});
        s.bindings[{"vvar", "templateId"}] = Literal::string(*refs.template_id);
    }
    if (refs.substitution_id) {
        s.bindings[{"var", "substitution"}] = Literal::qname({"mp", "substitution-" + *refs.substitution_id});
        s.bindings[{"vvar", "substitutionId"}] = Literal::string(*refs.substitution_id);
    }
    if (refs.fragment_id) {
        s.bindings[{"var", "fragment"}] = Literal::qname({"mp", "fragment-" + std::to_string(action_number)});
        s.bindings[{"vvar", "fragmentId"}] = Literal::string(*refs.fragment_id);
    }

    RecordedAction out;
    out.action_id = action_qname(action_number);
    out.action_number = action_number;
    out.fragment = instantiate(tmpl, s);

    AttributeSet extras = extra_annotations;
    if (refs.zone_id) extras.emplace(QualifiedName{"meta", "zoneId"}, Literal::string(*refs.zone_id));
    if (refs.session_id) extras.emplace(QualifiedName{"meta", "sessionId"}, Literal::string(*refs.session_id));
    if (!extras.empty()) out.fragment.add_element_attributes(out.action_id, extras);
    return out;
}

inline RecordedAction record_action(ProvDocument& history, const std::string& doc_id,
                                    std::int64_t action_number, const std::string& action_name,
                                    Millis end_time, const ActionRefs& refs = {},
                                    const AttributeSet& extra_annotations = {}) {
    RecordedAction rec =
        build_action_fragment(doc_id, action_number, action_name, end_time, refs, extra_annotations);
    history.merge(rec.fragment);
    return rec;
}

// ---------------------------------------------------------------------------
// Evidence (the non-repudiation template instance grafted onto an action)
// ---------------------------------------------------------------------------

inline ProvDocument build_evidence_fragment(std::int64_t action_number, const SignedToken& st,
                                            const std::string& client_id, const std::string& user_id,
                                            Millis sign_time) {
    const Template& tmpl = meta_templates().at("evidence");
    const std::string n = std::to_string(action_number);
    Substitution s;
    s.bindings[{"var", "action"}] = Literal::qname(action_qname(action_number));
    s.bindings[{"var", "serviceCall"}] = Literal::qname({"mp", "call-" + n});
    s.bindings[{"var", "tokenHeader"}] = Literal::qname({"mp", "token-header-" + n});
    s.bindings[{"var", "tokenContent"}] = Literal::qname({"mp", "token-content-" + n});
    s.bindings[{"var", "signature"}] = Literal::qname({"mp", "signature-" + n});
    s.bindings[{"var", "signToken"}] = Literal::qname({"mp", "sign-token-" + n});
    s.bindings[{"vvar", "clientId"}] = Literal::string(client_id);
    s.bindings[{"vvar", "userId"}] = Literal::string(user_id);
    s.bindings[{"vvar", "tokenId"}] = Literal::string(st.header.token_id);
    s.bindings[{"vvar", "tsaId"}] = Literal::string(st.header.tsa_id);
    s.bindings[{"vvar", "notaryId"}] = Literal::string(st.header.notary_id);
    s.bindings[{"vvar", "genTime"}] = Literal::timestamp(st.header.timestamp.gen_time);
    s.bindings[{"vvar", "payloadHash"}] = Literal::string(crypto::sha256_hex(st.payload.to_json().dump()));
    s.bindings[{"vvar", "signatureValue"}] = Literal::string(crypto::b64url_encode(st.signature1));
    s.bindings[{"vvar", "certificate"}] = Literal::string(st.cert_ref);
    s.bindings[{"vvar", "signTime"}] = Literal::timestamp(sign_time);
    return instantiate(tmpl, s);
}

// Grafts evidence onto an existing action. One evidence subgraph per action.
inline void record_evidence(ProvDocument& history, std::int64_t action_number, const SignedToken& st,
                            const std::string& client_id, const std::string& user_id,
                            Millis sign_time) {
    if (!history.find_element(action_qname(action_number)))
        fail(Errc::UnknownAction, "no recorded action " + std::to_string(action_number));
    if (history.find_element({"mp", "signature-" + std::to_string(action_number)}))
        fail(Errc::DuplicateEvidence, "evidence already recorded for action " + std::to_string(action_number));
    history.merge(build_evidence_fragment(action_number, st, client_id, user_id, sign_time));
}

// ---------------------------------------------------------------------------
// Substitution documents
// ---------------------------------------------------------------------------

struct SubstitutionDocument {
    std::string id;
    ProvDocument doc;
};

inline std::string substitution_document_id(const std::map<QualifiedName, Literal>& bindings) {
    return "sub-" + crypto::sha256_hex(canonical_bindings_text(bindings)).substr(0, 16);
}

// Encodes a flat binding map as newSubstitution + one addBinding instance per
// binding, bindings processed in canonical (sorted) variable order. Content
// is deterministic: the identifier derives from the bindings themselves.
inline SubstitutionDocument persist_substitution(const std::map<QualifiedName, Literal>& bindings) {
    SubstitutionDocument out;
    out.id = substitution_document_id(bindings);
    out.doc.set_doc_id(out.id);

    Substitution head;
    head.bindings[{"var", "substitution"}] = Literal::qname({"mp", "substitution"});
    head.bindings[{"vvar", "substitutionId"}] = Literal::string(out.id);
    out.doc.merge(instantiate(meta_templates().at("newSubstitution"), head));

    std::int64_t i = 0;
    for (const auto& [var, value] : bindings) {
        Substitution b;
        b.bindings[{"var", "substitution"}] = Literal::qname({"mp", "substitution"});
        b.bindings[{"var", "binding"}] = Literal::qname({"mp", "binding-" + std::to_string(++i)});
        b.bindings[{"vvar", "substitutionId"}] = Literal::string(out.id);
        b.bindings[{"vvar", "variable"}] = Literal::string(var.str());
        b.bindings[{"vvar", "valueType"}] = Literal::string(literal_type_name(value.type));
        b.bindings[{"vvar", "value"}] = Literal::string(value.lexical);
        out.doc.merge(instantiate(meta_templates().at("addBinding"), b));
    }
    return out;
}

inline std::map<QualifiedName, Literal> decode_substitution_document(const ProvDocument& doc) {
    const auto subs = doc.elements_of_type({"meta", "Substitution"});
    if (subs.size() != 1)
        fail(Errc::SchemaViolation, "substitution document must contain exactly one meta:Substitution");
    std::map<QualifiedName, Literal> bindings;
    for (const ProvElement* b : doc.elements_of_type({"meta", "Binding"})) {
        const auto variable = b->attribute({"meta", "variable"});
        const auto value_type = b->attribute({"meta", "valueType"});
        const auto value = b->attribute({"meta", "value"});
        if (!variable || !value_type || !value)
            fail(Errc::SchemaViolation, "binding entity missing attributes: " + b->id.str());
        Literal lit;
        lit.type = literal_type_from_name(value_type->lexical);
        lit.lexical = value->lexical;
        bindings.emplace(QualifiedName::parse(variable->lexical), lit);
    }
    return bindings;
}

// ---------------------------------------------------------------------------
// History inspection and replay
// ---------------------------------------------------------------------------

struct HistoryAction {
    std::int64_t number = 0;
    std::string name;
    QualifiedName id;
    std::optional<Millis> end_time;
    std::optional<std::string> template_id;
    std::optional<std::string> substitution_id;
    std::optional<std::string> fragment_id;
    std::optional<std::string> zone_id;
    std::optional<std::string> session_id;
    std::optional<std::string> prefix;
    std::optional<std::string> uri;
};

// Extracts the recorded actions ordered by actionNumber, enforcing the
// history invariants (single tracked document, contiguous numbering 1..N).
inline std::vector<HistoryAction> history_actions(const ProvDocument& history) {
    const auto docs = history.elements_of_type({"meta", "Document"});
    if (docs.size() != 1)
        fail(Errc::UnknownHistory, "history must contain exactly one meta:Document entity");

    std::map<std::int64_t, HistoryAction> by_number;
    for (const ProvElement* a : history.elements_of_type({"meta", "Action"})) {
        HistoryAction act;
        act.id = a->id;
        const auto number = a->attribute({"meta", "actionNumber"});
        const auto name = a->attribute({"meta", "actionName"});
        if (!number || number->type != LiteralType::Integer)
            fail(Errc::BrokenChain, "action without meta:actionNumber: " + a->id.str());
        if (!name || !action_names().count(name->lexical))
            fail(Errc::UnknownHistory, "action with unknown meta:actionName: " + a->id.str());
        act.number = number->as_integer();
        act.name = name->lexical;
        act.end_time = a->end_time;
        if (auto z = a->attribute({"meta", "zoneId"})) act.zone_id = z->lexical;
        if (auto sid = a->attribute({"meta", "sessionId"})) act.session_id = sid->lexical;
        if (auto p = a->attribute({"meta", "prefix"})) act.prefix = p->lexical;
        if (auto u = a->attribute({"meta", "uri"})) act.uri = u->lexical;
        for (const ProvRelation* r : history.relations_from(a->id)) {
            if (r->kind != RelationKind::Used) continue;
            const ProvElement* target = history.find_element(r->target);
            if (!target) continue;
            const auto type = target->attribute({"prov", "type"});
            const auto ident = target->attribute({"meta", "identifier"});
            if (!type || !ident) continue;
            if (type->lexical == "meta:Template") act.template_id = ident->lexical;
            if (type->lexical == "meta:Substitution") act.substitution_id = ident->lexical;
        }
        for (const auto& r : history.relations()) {
            if (r.kind != RelationKind::WasGeneratedBy || r.target != a->id) continue;
            const ProvElement* source = history.find_element(r.source);
            if (!source) continue;
            const auto type = source->attribute({"prov", "type"});
            const auto ident = source->attribute({"meta", "identifier"});
            if (type && ident && type->lexical == "meta:Fragment") act.fragment_id = ident->lexical;
        }
        if (!by_number.emplace(act.number, act).second)
            fail(Errc::BrokenChain, "duplicate actionNumber " + std::to_string(act.number));
    }

    std::vector<HistoryAction> out;
    std::int64_t expected = 1;
    for (const auto& [n, act] : by_number) {
        if (n != expected)
            fail(Errc::BrokenChain, "actionNumber gap: expected " + std::to_string(expected) +
                                        ", found " + std::to_string(n));
        ++expected;
        out.push_back(act);
    }
    return out;
}

using TemplateLookup = std::function<Template(const std::string&)>;
using SubstitutionLookup = std::function<std::map<QualifiedName, Literal>(const std::string&)>;

namespace meta_detail {

inline ProvDocument replay(const std::vector<HistoryAction>& actions, std::int64_t from,
                           std::int64_t to, const TemplateLookup& templates,
                           const SubstitutionLookup& substitutions) {
    ProvDocument state;
    ProvDocument out;
    std::map<std::string, FragmentSession> sessions;
    std::map<std::string, std::string> session_templates;

    for (const HistoryAction& act : actions) {
        if (act.number > to) break;
        const bool in_range = act.number >= from;
        auto emit = [&](const ProvDocument& frag) {
            state.merge(frag);
            if (in_range) out.merge(frag);
        };
        if (act.name == "newDocument" || act.name == "newTemplate" || act.name == "registerTemplate") {
            // no object-level statements
        } else if (act.name == "addNamespace") {
            if (!act.prefix || !act.uri)
                fail(Errc::UnknownHistory, "addNamespace action missing prefix/uri annotations");
            state.add_namespace(*act.prefix, *act.uri);
            if (in_range) out.add_namespace(*act.prefix, *act.uri);
        } else if (act.name == "generate") {
            if (!act.template_id) fail(Errc::MissingTemplate, "generate action without template reference");
            if (!act.substitution_id)
                fail(Errc::MissingSubstitution, "generate action without substitution reference");
            const Template t = templates(*act.template_id);
            Substitution s;
            s.bindings = substitutions(*act.substitution_id);
            emit(instantiate(t, s, state.namespaces()));
        } else if (act.name == "generateInitialise") {
            if (!act.template_id || !act.substitution_id || !act.session_id)
                fail(Errc::UnknownHistory, "generateInitialise action missing references");
            const Template t = templates(*act.template_id);
            Substitution s;
            s.bindings = substitutions(*act.substitution_id);
            sessions.emplace(*act.session_id, FragmentSession::begin(t, s, state.namespaces()));
            session_templates[*act.session_id] = *act.template_id;
        } else if (act.name == "generateZone") {
            if (!act.session_id || !act.zone_id || !act.substitution_id)
                fail(Errc::UnknownHistory, "generateZone action missing references");
            auto it = sessions.find(*act.session_id);
            if (it == sessions.end())
                fail(Errc::UnknownHistory, "generateZone for unknown session " + *act.session_id);
            it->second.add_zone_iteration(*act.zone_id, substitutions(*act.substitution_id));
        } else if (act.name == "generateFinalise") {
            if (!act.session_id) fail(Errc::UnknownHistory, "generateFinalise action missing session");
            auto it = sessions.find(*act.session_id);
            if (it == sessions.end())
                fail(Errc::UnknownHistory, "generateFinalise for unknown session " + *act.session_id);
            emit(it->second.finalise());
            sessions.erase(it);
        }
    }
    return out;
}

} // namespace meta_detail

// Replays the full chain of recorded actions through a fresh in-memory
// pipeline; the result is statement-set-equal to the live object document.
inline ProvDocument reconstruct_document(const ProvDocument& history, const TemplateLookup& templates,
                                         const SubstitutionLookup& substitutions) {
    const std::vector<HistoryAction> actions = history_actions(history);
    const std::int64_t n = static_cast<std::int64_t>(actions.size());
    return meta_detail::replay(actions, 1, n, templates, substitutions);
}

// Partial reconstruction: the statements contributed by actions in
// [from_action, to_action]. Prefix state (registered templates, namespaces,
// open sessions) is rebuilt internally, so the range may start anywhere.
inline ProvDocument reconstruct_between(const ProvDocument& history, std::int64_t from_action,
                                        std::int64_t to_action, const TemplateLookup& templates,
                                        const SubstitutionLookup& substitutions) {
    const std::vector<HistoryAction> actions = history_actions(history);
    const std::int64_t n = static_cast<std::int64_t>(actions.size());
    if (from_action < 1 || from_action > to_action || to_action > n)
        fail(Errc::BadRange, "action range [" + std::to_string(from_action) + "," +
                                 std::to_string(to_action) + "] outside 1.." + std::to_string(n));
    return meta_detail::replay(actions, from_action, to_action, templates, substitutions);
}

} // namespace provnr
