#include "codezoom/grammar.hpp"

namespace codezoom {

using nlohmann::json;

json to_interchange(const Statement& statement)
{
    if (auto* s = std::get_if<SimpleStmt>(&statement.node))
        return {{"kind", "simple"}, {"text", s->text.text()}};
    if (auto* w = std::get_if<WhileStmt>(&statement.node))
        return {{"kind", "while"}, {"cond", w->cond.text()}, {"body", to_interchange(w->body)}};
    if (auto* f = std::get_if<ForStmt>(&statement.node))
        return {{"kind", "for"}, {"cond", f->cond.text()}, {"body", to_interchange(f->body)}};

    const auto& chain = std::get<IfStmt>(statement.node);
    json elifs = json::array();
    for (const auto& arm : chain.elifs)
        elifs.push_back({{"cond", arm.cond.text()}, {"body", to_interchange(arm.body)}});
    json node = {{"kind", "if"}, {"cond", chain.cond.text()}, {"then", to_interchange(chain.then)},
                 {"elifs", std::move(elifs)}};
    if (chain.else_)
        node["else"] = to_interchange(*chain.else_);
    return node;
}

json to_interchange(const Block& block)
{
    json nodes = json::array();
    for (const auto& s : block)
        nodes.push_back(to_interchange(s));
    return nodes;
}

json to_interchange(const PseudoProgram& program)
{
    return {{"goal", program.goal.text()}, {"steps", to_interchange(program.steps)}};
}

namespace {

void require_object(const json& node, const std::string& path)
{
    if (!node.is_object())
        throw SchemaError(path, "expected an object");
}

void reject_unknown_keys(const json& node, const std::string& path, std::initializer_list<std::string_view> allowed)
{
    for (const auto& [key, value] : node.items()) {
        bool known = false;
        for (auto a : allowed)
            known = known || key == a;
        if (!known)
            throw SchemaError(path + "." + key, "unexpected property");
    }
}

Description text_field(const json& node, const std::string& key, const std::string& path)
{
    std::string where = path + "." + key;
    if (!node.contains(key))
        throw SchemaError(where, "required property missing");
    const json& v = node.at(key);
    if (!v.is_string())
        throw SchemaError(where, "expected a string");
    const std::string& s = v.get_ref<const std::string&>();
    if (auto why = Description::violation(s))
        throw SchemaError(where, *why);
    return Description(s);
}

Block block_field(const json& node, const std::string& key, const std::string& path)
{
    std::string where = path + "." + key;
    if (!node.contains(key))
        throw SchemaError(where, "required property missing");
    return block_from_interchange(node.at(key), where);
}

Statement statement_from(const json& node, const std::string& path)
{
    require_object(node, path);
    if (!node.contains("kind") || !node.at("kind").is_string())
        throw SchemaError(path + ".kind", "required string property missing");
    const std::string& kind = node.at("kind").get_ref<const std::string&>();

    if (kind == "simple") {
        reject_unknown_keys(node, path, {"kind", "text"});
        return Statement{SimpleStmt{text_field(node, "text", path)}};
    }
    if (kind == "while" || kind == "for") {
        reject_unknown_keys(node, path, {"kind", "cond", "body"});
        Description cond = text_field(node, "cond", path);
        Block body = block_field(node, "body", path);
        if (kind == "while")
            return Statement{WhileStmt{std::move(cond), std::move(body)}};
        return Statement{ForStmt{std::move(cond), std::move(body)}};
    }
    if (kind == "if") {
        reject_unknown_keys(node, path, {"kind", "cond", "then", "elifs", "else"});
        IfStmt chain{text_field(node, "cond", path), block_field(node, "then", path), {}, std::nullopt};
        if (node.contains("elifs")) {
            const json& elifs = node.at("elifs");
            if (!elifs.is_array())
                throw SchemaError(path + ".elifs", "expected an array");
            for (std::size_t i = 0; i < elifs.size(); ++i) {
                std::string where = path + ".elifs[" + std::to_string(i) + "]";
                require_object(elifs[i], where);
                reject_unknown_keys(elifs[i], where, {"cond", "body"});
                chain.elifs.push_back(ElifArm{text_field(elifs[i], "cond", where), block_field(elifs[i], "body", where)});
            }
        }
        if (node.contains("else") && !node.at("else").is_null())
            chain.else_ = block_field(node, "else", path);
        return Statement{std::move(chain)};
    }
    throw SchemaError(path + ".kind", "unknown statement kind \"" + kind + "\"");
}

} // namespace

Block block_from_interchange(const json& nodes, const std::string& path)
{
    if (!nodes.is_array())
        throw SchemaError(path, "expected an array of statements");
    if (nodes.empty())
        throw SchemaError(path, "(Statement)+ violated: at least one statement is required");
    Block out;
    out.reserve(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i)
        out.push_back(statement_from(nodes[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

PseudoProgram from_interchange(const json& document)
{
    if (!document.is_object())
        throw SchemaError("$", "expected an object");
    reject_unknown_keys(document, "$", {"goal", "steps"});
    if (!document.contains("goal"))
        throw SchemaError("goal", "required property missing");
    if (!document.at("goal").is_string())
        throw SchemaError("goal", "expected a string");
    const std::string& goal = document.at("goal").get_ref<const std::string&>();
    if (auto why = Description::violation(goal))
        throw SchemaError("goal", *why);
    if (!document.contains("steps"))
        throw SchemaError("steps", "required property missing");
    return PseudoProgram{Description(goal), block_from_interchange(document.at("steps"), "steps")};
}

std::string_view interchange_schema()
{
    static const std::string schema = R"({
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "PseudoProgram",
  "type": "object",
  "additionalProperties": false,
  "required": ["goal", "steps"],
  "properties": {
    "goal": {"$ref": "#/$defs/description"},
    "steps": {"$ref": "#/$defs/block"}
  },
  "$defs": {
    "description": {"type": "string", "pattern": "^[^;{}()\\n\\r]+$"},
    "block": {"type": "array", "minItems": 1, "items": {"$ref": "#/$defs/node"}},
    "node": {
      "oneOf": [
        {"type": "object", "additionalProperties": false, "required": ["kind", "text"],
         "properties": {"kind": {"const": "simple"}, "text": {"$ref": "#/$defs/description"}}},
        {"type": "object", "additionalProperties": false, "required": ["kind", "cond", "then"],
         "properties": {"kind": {"const": "if"}, "cond": {"$ref": "#/$defs/description"},
                        "then": {"$ref": "#/$defs/block"},
                        "elifs": {"type": "array", "items": {"type": "object", "additionalProperties": false,
                                  "required": ["cond", "body"],
                                  "properties": {"cond": {"$ref": "#/$defs/description"},
                                                 "body": {"$ref": "#/$defs/block"}}}},
                        "else": {"$ref": "#/$defs/block"}}},
        {"type": "object", "additionalProperties": false, "required": ["kind", "cond", "body"],
         "properties": {"kind": {"const": "while"}, "cond": {"$ref": "#/$defs/description"},
                        "body": {"$ref": "#/$defs/block"}}},
        {"type": "object", "additionalProperties": false, "required": ["kind", "cond", "body"],
         "properties": {"kind": {"const": "for"}, "cond": {"$ref": "#/$defs/description"},
                        "body": {"$ref": "#/$defs/block"}}}
      ]
    }
  }
}
)";
    return schema;
}

} // namespace codezoom
