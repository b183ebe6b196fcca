#include "semgeo/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

#include "csv.hpp"
#include "semgeo/error.hpp"

#ifndef SEMGEO_DEFAULT_DATA_DIR
#define SEMGEO_DEFAULT_DATA_DIR "data/datasets"
#endif

namespace semgeo {
namespace {

constexpr std::string_view kHeader =
    "label,gloss,language,category,item_class,sequence_index,network_root";

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

bool valid_utf8(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
        const auto c = static_cast<unsigned char>(s[i]);
        std::size_t len = 0;
        if (c < 0x80) len = 1;
        else if ((c >> 5) == 0x6) len = 2;
        else if ((c >> 4) == 0xE) len = 3;
        else if ((c >> 3) == 0x1E) len = 4;
        else return false;
        if (i + len > s.size()) return false;
        for (std::size_t k = 1; k < len; ++k) {
            if ((static_cast<unsigned char>(s[i + k]) >> 6) != 0x2) return false;
        }
        i += len;
    }
    return true;
}

std::vector<std::string> split_domains(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto bar = s.find('|', start);
        const auto piece = trim(s.substr(start, bar == std::string_view::npos ? s.npos : bar - start));
        if (!piece.empty()) out.emplace_back(piece);
        if (bar == std::string_view::npos) break;
        start = bar + 1;
    }
    return out;
}

}  // namespace

std::string_view to_string(ItemClass c) {
    switch (c) {
        case ItemClass::meaningful: return "meaningful";
        case ItemClass::structural: return "structural";
        case ItemClass::borderline: return "borderline";
        case ItemClass::functional: return "functional";
        case ItemClass::compositional: return "compositional";
    }
    return "?";
}

ItemClass parse_item_class(std::string_view s) {
    for (ItemClass c : kAllItemClasses) {
        if (to_string(c) == s) return c;
    }
    throw ValidationError("unknown item_class '" + std::string(s) +
                          "' (expected meaningful, structural, borderline, functional or compositional)");
}

std::vector<std::string> Dataset::labels() const {
    std::vector<std::string> out;
    out.reserve(items.size());
    for (const auto& it : items) out.push_back(it.label);
    return out;
}

FilterSpec FilterSpec::all() {
    FilterSpec spec;
    spec.include_classes.insert(std::begin(kAllItemClasses), std::end(kAllItemClasses));
    return spec;
}

bool FilterSpec::matches(const LexicalItem& item) const {
    if (!include_classes.contains(item.item_class)) return false;
    if (include_categories && !include_categories->contains(item.category)) return false;
    if (include_languages && !include_languages->contains(item.language)) return false;
    return true;
}

void validate(const Dataset& dataset) {
    std::map<std::string, std::size_t> seen;
    std::map<std::tuple<std::string, std::string, std::size_t>, std::string> sequence_slots;
    for (std::size_t i = 0; i < dataset.items.size(); ++i) {
        const auto& item = dataset.items[i];
        if (item.label.empty()) throw ValidationError("item " + std::to_string(i) + " has an empty label");
        auto [pos, fresh] = seen.emplace(item.label, i);
        if (!fresh) {
            throw ValidationError("duplicate label '" + item.label + "' (items " +
                                  std::to_string(pos->second) + " and " + std::to_string(i) + ")");
        }
        if (item.category.empty()) throw ValidationError("item '" + item.label + "' has an empty category");
        if (!dataset.declared_domains.contains(item.category)) {
            throw ValidationError("item '" + item.label + "' has undeclared category '" +
                                  item.category + "'");
        }
        if (item.sequence_index) {
            auto key = std::make_tuple(item.category, item.network_root.value_or(""), *item.sequence_index);
            auto [slot, ok] = sequence_slots.emplace(key, item.label);
            if (!ok) {
                throw ValidationError("sequence_index " + std::to_string(*item.sequence_index) +
                                      " repeated in category '" + item.category + "' ('" +
                                      slot->second + "' and '" + item.label + "')");
            }
        }
    }
    for (const auto& domain : dataset.declared_domains) {
        if (domain.empty() || domain.find_first_of("|\r\n") != std::string::npos) {
            throw ValidationError("invalid domain name '" + domain + "' (must be non-empty, without '|' or line breaks)");
        }
    }
}

Dataset parse_dataset(std::string_view text, std::string fallback_id) {
    if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
    if (!valid_utf8(text)) throw ParseError(1, "input is not valid UTF-8");

    Dataset ds;
    ds.id = std::move(fallback_id);
    std::optional<std::vector<std::string>> domains;
    std::map<std::string, std::size_t> label_line;
    bool have_header = false;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == text.npos ? text.npos : nl - pos);
        pos = nl == text.npos ? text.size() : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

        if (line.starts_with('#')) {
            auto body = trim(line.substr(1));
            auto colon = body.find(':');
            if (colon != body.npos) {
                auto key = trim(body.substr(0, colon));
                auto value = trim(body.substr(colon + 1));
                if (key == "id") ds.id = std::string(value);
                else if (key == "name") ds.name = std::string(value);
                else if (key == "domains") domains = split_domains(value);
            }
            continue;
        }
        if (trim(line).empty()) continue;

        if (!have_header) {
            if (line != kHeader) {
                throw ParseError(line_no, "expected header '" + std::string(kHeader) + "'");
            }
            have_header = true;
            continue;
        }

        std::string record(line);
        const std::size_t record_line = line_no;
        while (detail::has_open_quote(record)) {
            if (pos >= text.size()) throw ParseError(record_line, "unterminated quoted field");
            nl = text.find('\n', pos);
            std::string_view more = text.substr(pos, nl == text.npos ? text.npos : nl - pos);
            pos = nl == text.npos ? text.size() : nl + 1;
            ++line_no;
            if (!more.empty() && more.back() == '\r') more.remove_suffix(1);
            record += '\n';
            record += more;
        }
        auto fields = detail::split_csv_record(record, record_line);
        if (fields.size() != 7) {
            throw ParseError(record_line, "expected 7 fields, found " + std::to_string(fields.size()));
        }
        LexicalItem item;
        item.label = std::move(fields[0]);
        if (item.label.empty()) throw ParseError(record_line, "empty label");
        item.gloss = std::move(fields[1]);
        item.language = std::move(fields[2]);
        item.category = std::move(fields[3]);
        try {
            item.item_class = parse_item_class(fields[4]);
        } catch (const ValidationError& e) {
            throw ParseError(record_line, e.what());
        }
        if (!fields[5].empty()) {
            std::size_t v = 0;
            const auto& f = fields[5];
            auto [end, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (ec != std::errc{} || end != f.data() + f.size()) {
                throw ParseError(record_line, "sequence_index '" + f + "' is not a non-negative integer");
            }
            item.sequence_index = v;
        }
        if (!fields[6].empty()) item.network_root = std::move(fields[6]);

        auto [prev, fresh] = label_line.emplace(item.label, record_line);
        if (!fresh) {
            throw ValidationError("duplicate label '" + item.label + "' on lines " +
                                  std::to_string(prev->second) + " and " + std::to_string(record_line));
        }
        ds.items.push_back(std::move(item));
    }
    if (!have_header) throw ParseError(line_no == 0 ? 1 : line_no, "missing header row");

    if (domains) {
        ds.declared_domains.insert(domains->begin(), domains->end());
    } else {
        for (const auto& it : ds.items) ds.declared_domains.insert(it.category);
    }
    validate(ds);
    return ds;
}

std::string format_dataset(const Dataset& dataset) {
    std::ostringstream out;
    if (!dataset.id.empty()) out << "# id: " << dataset.id << '\n';
    if (!dataset.name.empty()) out << "# name: " << dataset.name << '\n';
    out << "# domains: ";
    bool first = true;
    for (const auto& d : dataset.declared_domains) {
        if (!first) out << '|';
        out << d;
        first = false;
    }
    out << '\n' << kHeader << '\n';
    for (const auto& it : dataset.items) {
        out << detail::join_csv_record({
                   it.label,
                   it.gloss,
                   it.language,
                   it.category,
                   std::string(to_string(it.item_class)),
                   it.sequence_index ? std::to_string(*it.sequence_index) : std::string(),
                   it.network_root.value_or(""),
               })
            << '\n';
    }
    return out.str();
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open dataset file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_dataset(buf.str(), path.stem().string());
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
    validate(dataset);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write dataset file " + path.string());
    out << format_dataset(dataset);
    if (!out) throw IoError("write failed for " + path.string());
}

std::map<ItemClass, std::vector<LexicalItem>> partition_by_class(const Dataset& dataset) {
    std::map<ItemClass, std::vector<LexicalItem>> buckets;
    for (ItemClass c : kAllItemClasses) buckets[c];
    for (const auto& it : dataset.items) buckets[it.item_class].push_back(it);
    return buckets;
}

Dataset apply_filter(const Dataset& dataset, const FilterSpec& spec) {
    if (spec.include_classes.empty()) throw ValidationError("filter must include at least one item class");
    Dataset out;
    out.id = dataset.id;
    out.name = dataset.name;
    out.declared_domains = dataset.declared_domains;
    std::copy_if(dataset.items.begin(), dataset.items.end(), std::back_inserter(out.items),
                 [&](const LexicalItem& it) { return spec.matches(it); });
    if (out.items.empty()) {
        throw EmptyResultError("filter leaves no items in dataset '" + dataset.id + "'");
    }
    return out;
}

std::filesystem::path default_data_dir() {
    if (const char* env = std::getenv("SEMGEO_DATA_DIR"); env && *env) return env;
    return SEMGEO_DEFAULT_DATA_DIR;
}

std::filesystem::path resolve_dataset_path(const std::string& name_or_path) {
    namespace fs = std::filesystem;
    if (fs::is_regular_file(name_or_path)) return name_or_path;
    const auto dir = default_data_dir();
    for (const auto& candidate : {dir / name_or_path, dir / (name_or_path + ".csv")}) {
        if (fs::is_regular_file(candidate)) return candidate;
    }
    throw IoError("dataset '" + name_or_path + "' not found (looked in " + dir.string() + ")");
}

}  // namespace semgeo
