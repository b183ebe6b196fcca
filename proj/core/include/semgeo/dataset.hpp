#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace semgeo {

enum class ItemClass { meaningful, structural, borderline, functional, compositional };

inline constexpr ItemClass kAllItemClasses[] = {
    ItemClass::meaningful, ItemClass::structural, ItemClass::borderline,
    ItemClass::functional, ItemClass::compositional};

std::string_view to_string(ItemClass c);
// Throws ValidationError for anything outside the five known names.
ItemClass parse_item_class(std::string_view s);

struct LexicalItem {
    std::string label;
    std::string gloss;
    std::string language;
    std::string category;
    ItemClass item_class = ItemClass::meaningful;
    std::optional<std::size_t> sequence_index;
    std::optional<std::string> network_root;

    bool operator==(const LexicalItem&) const = default;
};

struct Dataset {
    std::string id;
    std::string name;
    std::vector<LexicalItem> items;
    std::set<std::string> declared_domains;

    std::size_t size() const { return items.size(); }
    std::vector<std::string> labels() const;

    bool operator==(const Dataset&) const = default;
};

struct FilterSpec {
    std::set<ItemClass> include_classes;
    std::optional<std::set<std::string>> include_categories;
    std::optional<std::set<std::string>> include_languages;

    static FilterSpec all();
    bool matches(const LexicalItem& item) const;
};

/// Checks label uniqueness, category membership and sequence_index
/// uniqueness within each (category, network_root) group.
void validate(const Dataset& dataset);

/// Parses the dataset CSV format. `fallback_id` is used when the text carries
/// no `# id:` metadata line.
Dataset parse_dataset(std::string_view text, std::string fallback_id = {});
std::string format_dataset(const Dataset& dataset);

Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

std::map<ItemClass, std::vector<LexicalItem>> partition_by_class(const Dataset& dataset);

/// Throws EmptyResultError when nothing survives the filter.
Dataset apply_filter(const Dataset& dataset, const FilterSpec& spec);

/// Directory holding the shipped datasets: $SEMGEO_DATA_DIR when set,
/// otherwise the location baked in at build time.
std::filesystem::path default_data_dir();

/// Resolves `name_or_path` as an existing file, then as `<data dir>/<name>`
/// and `<data dir>/<name>.csv`.
std::filesystem::path resolve_dataset_path(const std::string& name_or_path);

}  // namespace semgeo
