#include "csv.hpp"

#include "semgeo/error.hpp"

namespace semgeo::detail {

std::vector<std::string> split_csv_record(std::string_view line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool in_quotes = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cur.push_back(c);
            }
            continue;
        }
        if (c == '"') {
            if (!cur.empty() || was_quoted) {
                throw ParseError(line_no, "unexpected quote inside unquoted field");
            }
            in_quotes = true;
            was_quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
            was_quoted = false;
        } else {
            if (was_quoted) throw ParseError(line_no, "characters after closing quote");
            cur.push_back(c);
        }
    }
    if (in_quotes) throw ParseError(line_no, "unterminated quoted field");
    fields.push_back(std::move(cur));
    return fields;
}

bool has_open_quote(std::string_view text) {
    bool open = false;
    for (char c : text) {
        if (c == '"') open = !open;
    }
    return open;
}

std::string quote_csv_field(std::string_view field) {
    const bool needs = field.find_first_of(",\"\r\n") != std::string_view::npos ||
                       (!field.empty() && (field.front() == '#' || field.front() == ' ' ||
                                           field.back() == ' '));
    if (!needs) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string join_csv_record(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.push_back(',');
        out += quote_csv_field(fields[i]);
    }
    return out;
}

}  // namespace semgeo::detail
