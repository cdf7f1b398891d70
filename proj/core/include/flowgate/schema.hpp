#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace flowgate {

enum class UnmappedPolicy { error, drop, own_category };

// Class vocabulary plus the class -> category grouping used by the
// categorizing topology. One-hot position of a class is its index in `classes`.
struct ClassSchema {
    std::vector<std::string> classes;
    std::map<std::string, std::string> categories;   // class -> category
    std::vector<std::string> category_order;         // stable category indices
    std::vector<std::string> terminal_categories;    // no sub-classifier behind these
    std::string benign_class = "BENIGN";
    UnmappedPolicy unmapped_policy = UnmappedPolicy::drop;

    std::optional<std::size_t> index_of(std::string_view name) const;
    bool contains(std::string_view name) const { return index_of(name).has_value(); }

    // nullptr when the class has no category.
    const std::string* category_of(std::string_view name) const;

    // Member classes of a category, in `classes` order.
    std::vector<std::string> members(std::string_view category) const;

    // Every class except the benign one, in `classes` order.
    std::vector<std::string> attack_classes() const;

    bool is_terminal(std::string_view category) const;

    // Throws InvalidConfig when a category entry references an unknown class
    // or a category missing from category_order.
    void validate() const;

    // The 15-label CICIDS-2017 vocabulary and its seven categories.
    static ClassSchema cicids2017();
};

std::string_view to_string(UnmappedPolicy p);
UnmappedPolicy unmapped_policy_from_string(std::string_view s);

void to_json(nlohmann::json& j, const ClassSchema& s);
void from_json(const nlohmann::json& j, ClassSchema& s);

} // namespace flowgate
