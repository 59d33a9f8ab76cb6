#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace scvd {

enum class VulnCategory {
    Reentrancy,
    MissingEvent,
    Centralization,
    InputValidation,
    WeakRandomness,
    SandwichAttack,
    RedundantStatements,
    FlashloanAttack,
    TooManyDigits,
    ErrorMessage,
    ConstantOptimization,
    ReturnValueCheck,
    DivisionBeforeMultiplication,
};

inline constexpr std::array kAllCategories = {
    VulnCategory::Reentrancy,           VulnCategory::MissingEvent,       VulnCategory::Centralization,
    VulnCategory::InputValidation,      VulnCategory::WeakRandomness,     VulnCategory::SandwichAttack,
    VulnCategory::RedundantStatements,  VulnCategory::FlashloanAttack,    VulnCategory::TooManyDigits,
    VulnCategory::ErrorMessage,         VulnCategory::ConstantOptimization, VulnCategory::ReturnValueCheck,
    VulnCategory::DivisionBeforeMultiplication,
};

/// Snake-case identifier used on the command line, in manifests and as the
/// prompt-store directory name.
std::string_view to_string(VulnCategory c) noexcept;
std::optional<VulnCategory> parse_category(std::string_view name) noexcept;

struct CategoryInfo {
    VulnCategory category;
    std::string display_name;
    std::string description;
    long instance_count = 0;
};

struct CategoryMetadata {
    int version = 0;
    std::vector<CategoryInfo> categories;  // in enumeration order

    const CategoryInfo& at(VulnCategory c) const;
};

/// Loads `categories.json`. Throws ConfigError when an entry is unknown,
/// duplicated or missing.
CategoryMetadata load_category_metadata(const std::filesystem::path& file);

/// Data directory shipped with the sources (`data/`), overridable with the
/// SCVD_DATA_DIR environment variable.
std::filesystem::path default_data_dir();

}  // namespace scvd
