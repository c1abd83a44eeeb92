#include "metaprobe/csv.hpp"

#include "metaprobe/errors.hpp"
#include "metaprobe/util.hpp"

namespace metaprobe::csv {

std::vector<Row> parse(const std::string& text) {
    std::vector<Row> rows;
    Row row;
    std::string field;
    bool in_quotes = false;
    bool row_started = false;
    size_t i = 0;
    const size_t n = text.size();
    while (i < n) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < n && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            in_quotes = true;
            row_started = true;
        } else if (c == ',') {
            row.push_back(field);
            field.clear();
            row_started = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < n && text[i + 1] == '\n') ++i;
            if (row_started || !field.empty()) {
                row.push_back(field);
                rows.push_back(row);
            }
            row.clear();
            field.clear();
            row_started = false;
        } else {
            field.push_back(c);
            row_started = true;
        }
        ++i;
    }
    if (row_started || !field.empty()) {
        row.push_back(field);
        rows.push_back(row);
    }
    return rows;
}

std::vector<Row> read_file(const std::string& path) {
    return parse(util::read_file(path));
}

std::string escape(const std::string& field) {
    bool needs = field.find_first_of(",\"\n\r") != std::string::npos;
    if (!needs) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string write_row(const Row& row) {
    std::string out;
    for (size_t i = 0; i < row.size(); ++i) {
        if (i) out.push_back(',');
        out += escape(row[i]);
    }
    out.push_back('\n');
    return out;
}

Header::Header(const Row& header_row) {
    for (size_t i = 0; i < header_row.size(); ++i) {
        std::string key = util::lowercase(util::trim(header_row[i]));
        if (!index_.count(key)) index_[key] = i;
    }
}

size_t Header::require(const std::string& name) const {
    auto it = index_.find(util::lowercase(name));
    if (it == index_.end()) throw SchemaError("missing required column: " + name);
    return it->second;
}

int Header::find(const std::string& name) const {
    auto it = index_.find(util::lowercase(name));
    return it == index_.end() ? -1 : static_cast<int>(it->second);
}

}  // namespace metaprobe::csv
