#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include "cavarray/cli.hpp"
#include "cavarray/errors.hpp"

namespace cavarray::cli {

std::string format_double(double x) {
    char buf[32];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf, static_cast<std::size_t>(n));
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& header)
    : out_(out), columns_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out_ << ',';
        out_ << header[i];
    }
    out_ << '\n';
}

void CsvWriter::separator() {
    if (column_ >= columns_) throw Error("CSV row has more fields than the header");
    if (column_++ > 0) out_ << ',';
}

CsvWriter& CsvWriter::operator<<(double x) {
    separator();
    out_ << format_double(x);
    return *this;
}

CsvWriter& CsvWriter::operator<<(int x) {
    separator();
    out_ << x;
    return *this;
}

CsvWriter& CsvWriter::operator<<(std::string_view x) {
    separator();
    out_ << x;
    return *this;
}

void CsvWriter::end_row() {
    if (column_ != columns_) throw Error("CSV row has fewer fields than the header");
    out_ << '\n';
    column_ = 0;
}

std::size_t CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw Error("CSV has no column '" + std::string(name) + "'");
}

CsvTable parse_csv(std::string_view text) {
    CsvTable table;
    bool first = true;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        const std::string line(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        for (std::string field; std::getline(ss, field, ',');) fields.push_back(field);
        if (first) {
            table.header = std::move(fields);
            first = false;
            continue;
        }
        if (fields.size() != table.header.size()) throw Error("CSV row width mismatch");
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields) {
            char* end = nullptr;
            const double x = std::strtod(f.c_str(), &end);
            if (end == f.c_str() || *end != '\0') throw Error("CSV field '" + f + "' is not numeric");
            row.push_back(x);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_csv(text.str());
}

}  // namespace cavarray::cli
