#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "llm4tag/error.hpp"

namespace llm4tag {

using json = nlohmann::json;

/// Opaque non-empty identifier. The tag type keeps content and tag ids
/// from being mixed up at compile time.
template <typename Kind>
class StrongId {
public:
    StrongId() = default;
    explicit StrongId(std::string value);

    [[nodiscard]] const std::string& str() const noexcept { return value_; }
    [[nodiscard]] bool empty() const noexcept { return value_.empty(); }

    friend auto operator<=>(const StrongId&, const StrongId&) = default;
    friend bool operator==(const StrongId&, const StrongId&) = default;

private:
    std::string value_;
};

struct ContentIdKind {};
struct TagIdKind {};
using ContentId = StrongId<ContentIdKind>;
using TagId = StrongId<TagIdKind>;

struct Content {
    ContentId id;
    std::string title;
    std::string category;
    std::string body;
    std::map<std::string, std::string> extra;

    /// Throws InvalidInput unless the id is set and title or body carries text.
    void validate() const;
};

struct Tag {
    TagId id;
    std::string name;
    std::string description;

    void validate() const;
};

/// Where a candidate or assignment came from in the graph.
enum class Provenance { C2T, C2C2T, Both, Feedback };

std::string_view to_string(Provenance p) noexcept;
Provenance provenance_from_string(std::string_view text);

struct TagAssignment {
    ContentId content;
    TagId tag;
    std::optional<double> confidence;
    Provenance provenance = Provenance::C2T;

    void validate() const;
};

/// Fields joined by single spaces in a fixed order, empties skipped.
/// Content: title, category, body, extras by key. Tag: name, description.
std::string canonical_text(const Content& content);
std::string canonical_text(const Tag& tag);

/// Key used for duplicate-name detection and for resolving generated names.
std::string normalize_tag_name(std::string_view name);

/// The tag vocabulary. Ids are unique and names are unique after
/// normalization; a rejected insert leaves the repository untouched.
class TagRepository {
public:
    void add(Tag tag);

    [[nodiscard]] const Tag& get(const TagId& id) const;
    [[nodiscard]] const Tag* find(const TagId& id) const noexcept;
    [[nodiscard]] const Tag* find_by_name(std::string_view name) const noexcept;
    [[nodiscard]] bool contains(const TagId& id) const noexcept { return find(id) != nullptr; }

    [[nodiscard]] std::size_t size() const noexcept { return tags_.size(); }
    [[nodiscard]] bool empty() const noexcept { return tags_.empty(); }

    /// Tags in id order.
    [[nodiscard]] std::vector<const Tag*> all() const;

private:
    std::map<TagId, Tag> tags_;
    std::unordered_map<std::string, TagId> by_name_;
};

// Line-delimited JSON exchange records.
json to_json(const Content& content);
json to_json(const Tag& tag);
Content content_from_json(const json& j);
Tag tag_from_json(const json& j);

std::vector<Content> load_contents(const std::string& path);
std::vector<Tag> load_tags(const std::string& path);
TagRepository load_repository(const std::string& path);

template <typename Kind>
StrongId<Kind>::StrongId(std::string value) : value_(std::move(value)) {
    if (value_.empty()) fail(ErrorCode::InvalidInput, "identifier must be non-empty");
}

}  // namespace llm4tag

template <typename Kind>
struct std::hash<llm4tag::StrongId<Kind>> {
    std::size_t operator()(const llm4tag::StrongId<Kind>& id) const noexcept {
        return std::hash<std::string>{}(id.str());
    }
};
