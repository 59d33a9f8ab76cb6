#include "scvd/category.hpp"

#include "scvd/errors.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>

namespace scvd {

std::string_view to_string(VulnCategory c) noexcept {
    switch (c) {
        case VulnCategory::Reentrancy: return "reentrancy";
        case VulnCategory::MissingEvent: return "missing_event";
        case VulnCategory::Centralization: return "centralization";
        case VulnCategory::InputValidation: return "input_validation";
        case VulnCategory::WeakRandomness: return "weak_randomness";
        case VulnCategory::SandwichAttack: return "sandwich_attack";
        case VulnCategory::RedundantStatements: return "redundant_statements";
        case VulnCategory::FlashloanAttack: return "flashloan_attack";
        case VulnCategory::TooManyDigits: return "too_many_digits";
        case VulnCategory::ErrorMessage: return "error_message";
        case VulnCategory::ConstantOptimization: return "constant_optimization";
        case VulnCategory::ReturnValueCheck: return "return_value_check";
        case VulnCategory::DivisionBeforeMultiplication: return "division_before_multiplication";
    }
    return "unknown";
}

std::optional<VulnCategory> parse_category(std::string_view name) noexcept {
    for (auto c : kAllCategories) {
        if (to_string(c) == name) return c;
    }
    return std::nullopt;
}

const CategoryInfo& CategoryMetadata::at(VulnCategory c) const {
    for (const auto& info : categories) {
        if (info.category == c) return info;
    }
    throw NotFound("no metadata for category " + std::string(to_string(c)));
}

CategoryMetadata load_category_metadata(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(file.string() + ": " + e.what());
    }

    CategoryMetadata meta;
    meta.version = doc.value("version", 0);
    std::vector<std::optional<CategoryInfo>> slots(kAllCategories.size());
    for (const auto& entry : doc.at("categories")) {
        const auto id = entry.at("id").get<std::string>();
        const auto cat = parse_category(id);
        if (!cat) throw ConfigError(file.string() + ": unknown category '" + id + "'");
        auto& slot = slots[static_cast<std::size_t>(*cat)];
        if (slot) throw ConfigError(file.string() + ": duplicate category '" + id + "'");
        slot = CategoryInfo{*cat, entry.at("display_name").get<std::string>(),
                            entry.at("description").get<std::string>(), entry.at("instance_count").get<long>()};
    }
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (!slots[i]) throw ConfigError(file.string() + ": missing category '" +
                                         std::string(to_string(kAllCategories[i])) + "'");
        meta.categories.push_back(std::move(*slots[i]));
    }
    return meta;
}

std::filesystem::path default_data_dir() {
    if (const char* env = std::getenv("SCVD_DATA_DIR"); env && *env) return env;
    return SCVD_DEFAULT_DATA_DIR;
}

}  // namespace scvd
