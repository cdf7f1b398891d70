#include "flowgate/schema.hpp"

#include <algorithm>
#include <set>

#include "flowgate/error.hpp"

namespace flowgate {

std::optional<std::size_t> ClassSchema::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < classes.size(); ++i) {
        if (classes[i] == name) return i;
    }
    return std::nullopt;
}

const std::string* ClassSchema::category_of(std::string_view name) const {
    auto it = categories.find(std::string(name));
    return it == categories.end() ? nullptr : &it->second;
}

std::vector<std::string> ClassSchema::members(std::string_view category) const {
    std::vector<std::string> out;
    for (const auto& c : classes) {
        const auto* cat = category_of(c);
        if (cat && *cat == category) out.push_back(c);
    }
    return out;
}

std::vector<std::string> ClassSchema::attack_classes() const {
    std::vector<std::string> out;
    for (const auto& c : classes) {
        if (c != benign_class) out.push_back(c);
    }
    return out;
}

bool ClassSchema::is_terminal(std::string_view category) const {
    return std::find(terminal_categories.begin(), terminal_categories.end(), category) !=
           terminal_categories.end();
}

void ClassSchema::validate() const {
    if (classes.empty()) throw Error(Errc::invalid_config, "schema has no classes");
    std::set<std::string> seen;
    for (const auto& c : classes) {
        if (!seen.insert(c).second) throw Error(Errc::invalid_config, "duplicate class '" + c + "'");
    }
    for (const auto& [cls, cat] : categories) {
        if (!contains(cls)) {
            throw Error(Errc::invalid_config, "category map references unknown class '" + cls + "'");
        }
        if (std::find(category_order.begin(), category_order.end(), cat) == category_order.end()) {
            throw Error(Errc::invalid_config, "category '" + cat + "' missing from category_order");
        }
    }
    for (const auto& t : terminal_categories) {
        if (std::find(category_order.begin(), category_order.end(), t) == category_order.end()) {
            throw Error(Errc::invalid_config, "terminal category '" + t + "' missing from category_order");
        }
    }
}

ClassSchema ClassSchema::cicids2017() {
    ClassSchema s;
    s.classes = {
        "BENIGN",
        "Bot",
        "DDoS",
        "DoS GoldenEye",
        "DoS Hulk",
        "DoS Slowhttptest",
        "DoS slowloris",
        "FTP-Patator",
        "Heartbleed",
        "Infiltration",
        "PortScan",
        "SSH-Patator",
        "Web Attack – Brute Force",
        "Web Attack – Sql Injection",
        "Web Attack – XSS",
    };
    s.categories = {
        {"BENIGN", "Benign"},
        {"Bot", "Bot"},
        {"DDoS", "DDoS"},
        {"DoS GoldenEye", "DoS"},
        {"DoS Hulk", "DoS"},
        {"DoS Slowhttptest", "DoS"},
        {"DoS slowloris", "DoS"},
        {"FTP-Patator", "Patator"},
        {"SSH-Patator", "Patator"},
        {"PortScan", "PortScan"},
        {"Web Attack – Brute Force", "Web Attack"},
        {"Web Attack – Sql Injection", "Web Attack"},
        {"Web Attack – XSS", "Web Attack"},
    };
    s.category_order = {"Benign", "Bot", "DDoS", "DoS", "Patator", "PortScan", "Web Attack"};
    s.terminal_categories = {"Benign", "DDoS", "PortScan"};
    s.benign_class = "BENIGN";
    s.unmapped_policy = UnmappedPolicy::drop;
    return s;
}

std::string_view to_string(UnmappedPolicy p) {
    switch (p) {
    case UnmappedPolicy::error: return "error";
    case UnmappedPolicy::drop: return "drop";
    case UnmappedPolicy::own_category: return "own-category";
    }
    return "drop";
}

UnmappedPolicy unmapped_policy_from_string(std::string_view s) {
    if (s == "error") return UnmappedPolicy::error;
    if (s == "drop") return UnmappedPolicy::drop;
    if (s == "own-category") return UnmappedPolicy::own_category;
    throw Error(Errc::invalid_config, "unknown unmapped_policy '" + std::string(s) + "'");
}

void to_json(nlohmann::json& j, const ClassSchema& s) {
    j = nlohmann::json{
        {"classes", s.classes},
        {"categories", s.categories},
        {"category_order", s.category_order},
        {"terminal_categories", s.terminal_categories},
        {"benign_class", s.benign_class},
        {"unmapped_policy", std::string(to_string(s.unmapped_policy))},
    };
}

void from_json(const nlohmann::json& j, ClassSchema& s) {
    s = ClassSchema{};
    j.at("classes").get_to(s.classes);
    if (j.contains("categories")) {
        // Either class -> category or category -> [classes].
        for (const auto& [key, value] : j.at("categories").items()) {
            if (value.is_array()) {
                for (const auto& member : value) s.categories[member.get<std::string>()] = key;
            } else {
                s.categories[key] = value.get<std::string>();
            }
        }
    }
    if (j.contains("category_order")) j.at("category_order").get_to(s.category_order);
    if (j.contains("terminal_categories")) j.at("terminal_categories").get_to(s.terminal_categories);
    if (j.contains("benign_class")) j.at("benign_class").get_to(s.benign_class);
    if (j.contains("unmapped_policy")) {
        s.unmapped_policy = unmapped_policy_from_string(j.at("unmapped_policy").get<std::string>());
    }
    s.validate();
}

} // namespace flowgate
