#pragma once

#include <map>
#include <string>
#include <vector>

namespace metaprobe::csv {

using Row = std::vector<std::string>;

// RFC-4180 style: quoted fields, doubled quotes, commas and newlines inside quotes.
std::vector<Row> parse(const std::string& text);
std::vector<Row> read_file(const std::string& path);

std::string escape(const std::string& field);
std::string write_row(const Row& row);

// Header utilities. Column names are matched case-insensitively after trimming.
class Header {
public:
    explicit Header(const Row& header_row);
    // Index of a required column; throws SchemaError listing the missing name.
    size_t require(const std::string& name) const;
    // -1 when absent.
    int find(const std::string& name) const;

private:
    std::map<std::string, size_t> index_;
};

}  // namespace metaprobe::csv
