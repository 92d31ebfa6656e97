#include "llm4tag/core.hpp"

#include <cmath>

#include "llm4tag/jsonl.hpp"
#include "llm4tag/util.hpp"

namespace llm4tag {

void Content::validate() const {
    if (id.empty()) fail(ErrorCode::InvalidInput, "content id must be non-empty");
    if (trim(title).empty() && trim(body).empty())
        fail(ErrorCode::InvalidInput, "content '" + id.str() + "' needs a non-empty title or body");
}

void Tag::validate() const {
    if (id.empty()) fail(ErrorCode::InvalidInput, "tag id must be non-empty");
    if (trim(name).empty()) fail(ErrorCode::InvalidInput, "tag '" + id.str() + "' needs a non-empty name");
}

std::string_view to_string(Provenance p) noexcept {
    switch (p) {
        case Provenance::C2T: return "C2T";
        case Provenance::C2C2T: return "C2C2T";
        case Provenance::Both: return "BOTH";
        case Provenance::Feedback: return "FEEDBACK";
    }
    return "C2T";
}

Provenance provenance_from_string(std::string_view text) {
    if (text == "C2T") return Provenance::C2T;
    if (text == "C2C2T") return Provenance::C2C2T;
    if (text == "BOTH") return Provenance::Both;
    if (text == "FEEDBACK") return Provenance::Feedback;
    fail(ErrorCode::ParseError, "unknown provenance '" + std::string(text) + "'");
}

void TagAssignment::validate() const {
    if (confidence && !(*confidence > 0.0 && *confidence < 1.0))
        fail(ErrorCode::InvalidInput, "confidence must lie strictly inside (0, 1)");
}

namespace {

void append_field(std::string& out, std::string_view field) {
    std::string t = trim(field);
    if (t.empty()) return;
    if (!out.empty()) out.push_back(' ');
    out += t;
}

}  // namespace

std::string canonical_text(const Content& content) {
    std::string out;
    append_field(out, content.title);
    append_field(out, content.category);
    append_field(out, content.body);
    for (const auto& [key, value] : content.extra) append_field(out, value);
    return out;
}

std::string canonical_text(const Tag& tag) {
    std::string out;
    append_field(out, tag.name);
    append_field(out, tag.description);
    return out;
}

std::string normalize_tag_name(std::string_view name) { return normalize_text(name); }

void TagRepository::add(Tag tag) {
    tag.validate();
    if (tags_.contains(tag.id)) fail(ErrorCode::DuplicateVertex, "duplicate tag id '" + tag.id.str() + "'");
    std::string key = normalize_tag_name(tag.name);
    if (auto it = by_name_.find(key); it != by_name_.end())
        fail(ErrorCode::DuplicateVertex,
             "tag '" + tag.id.str() + "' duplicates the name of tag '" + it->second.str() + "'");
    by_name_.emplace(std::move(key), tag.id);
    TagId id = tag.id;
    tags_.emplace(std::move(id), std::move(tag));
}

const Tag& TagRepository::get(const TagId& id) const {
    if (const Tag* t = find(id)) return *t;
    fail(ErrorCode::UnknownVertex, "unknown tag '" + id.str() + "'");
}

const Tag* TagRepository::find(const TagId& id) const noexcept {
    auto it = tags_.find(id);
    return it == tags_.end() ? nullptr : &it->second;
}

const Tag* TagRepository::find_by_name(std::string_view name) const noexcept {
    auto it = by_name_.find(normalize_tag_name(name));
    return it == by_name_.end() ? nullptr : find(it->second);
}

std::vector<const Tag*> TagRepository::all() const {
    std::vector<const Tag*> out;
    out.reserve(tags_.size());
    for (const auto& [id, tag] : tags_) out.push_back(&tag);
    return out;
}

json to_json(const Content& content) {
    json j = {{"id", content.id.str()}, {"title", content.title}};
    if (!content.category.empty()) j["category"] = content.category;
    if (!content.body.empty()) j["body"] = content.body;
    if (!content.extra.empty()) j["extra"] = content.extra;
    return j;
}

json to_json(const Tag& tag) {
    json j = {{"id", tag.id.str()}, {"name", tag.name}};
    if (!tag.description.empty()) j["description"] = tag.description;
    return j;
}

namespace {

std::string optional_string(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return {};
    if (!it->is_string()) fail(ErrorCode::ParseError, std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
}

void reject_unknown_keys(const json& j, std::initializer_list<std::string_view> known) {
    for (const auto& item : j.items()) {
        bool ok = false;
        for (auto k : known) ok = ok || item.key() == k;
        if (!ok) fail(ErrorCode::ParseError, "unknown field '" + item.key() + "'");
    }
}

}  // namespace

Content content_from_json(const json& j) {
    if (!j.is_object()) fail(ErrorCode::ParseError, "content record must be a JSON object");
    reject_unknown_keys(j, {"id", "title", "category", "body", "extra"});
    Content c;
    c.id = ContentId(optional_string(j, "id"));
    c.title = optional_string(j, "title");
    c.category = optional_string(j, "category");
    c.body = optional_string(j, "body");
    if (auto it = j.find("extra"); it != j.end() && !it->is_null()) {
        if (!it->is_object()) fail(ErrorCode::ParseError, "field 'extra' must be an object");
        for (const auto& [key, value] : it->items()) {
            if (!value.is_string()) fail(ErrorCode::ParseError, "extra field '" + key + "' must be a string");
            c.extra.emplace(key, value.get<std::string>());
        }
    }
    c.validate();
    return c;
}

Tag tag_from_json(const json& j) {
    if (!j.is_object()) fail(ErrorCode::ParseError, "tag record must be a JSON object");
    reject_unknown_keys(j, {"id", "name", "description"});
    Tag t;
    t.id = TagId(optional_string(j, "id"));
    t.name = optional_string(j, "name");
    t.description = optional_string(j, "description");
    t.validate();
    return t;
}

std::vector<Content> load_contents(const std::string& path) {
    std::vector<Content> out;
    for_each_jsonl_file(path, [&](const json& j, std::size_t) { out.push_back(content_from_json(j)); });
    return out;
}

std::vector<Tag> load_tags(const std::string& path) {
    std::vector<Tag> out;
    for_each_jsonl_file(path, [&](const json& j, std::size_t) { out.push_back(tag_from_json(j)); });
    return out;
}

TagRepository load_repository(const std::string& path) {
    TagRepository repo;
    for_each_jsonl_file(path, [&](const json& j, std::size_t) { repo.add(tag_from_json(j)); });
    return repo;
}

}  // namespace llm4tag
