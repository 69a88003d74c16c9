#include "mipred/schema.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include "mipred/error.hpp"

namespace mipred::tabular {

const char* to_string(ColumnKind kind) {
    switch (kind) {
        case ColumnKind::numeric: return "numeric";
        case ColumnKind::binary: return "binary";
        case ColumnKind::categorical_ordinal: return "ordinal";
        case ColumnKind::categorical_nominal: return "nominal";
        case ColumnKind::id: return "id";
        case ColumnKind::target: return "target";
    }
    return "?";
}

ColumnKind kind_from_string(const std::string& text) {
    if (text == "numeric") return ColumnKind::numeric;
    if (text == "binary") return ColumnKind::binary;
    if (text == "ordinal") return ColumnKind::categorical_ordinal;
    if (text == "nominal") return ColumnKind::categorical_nominal;
    if (text == "id") return ColumnKind::id;
    if (text == "target") return ColumnKind::target;
    throw SchemaError("unknown column kind '" + text + "'");
}

void validate_schema(const std::vector<ColumnSchema>& schema) {
    std::size_t id_count = 0;
    std::size_t target_count = 0;
    std::unordered_set<std::string> names;
    for (const auto& col : schema) {
        if (!names.insert(col.name).second)
            throw SchemaError("duplicate column name '" + col.name + "'");
        if (col.kind == ColumnKind::id) ++id_count;
        if (col.kind == ColumnKind::target) ++target_count;
        const bool is_ordinal = col.kind == ColumnKind::categorical_ordinal;
        if (is_ordinal && col.ordinal_order.empty())
            throw SchemaError("ordinal column '" + col.name + "' lacks its category order");
        if (!is_ordinal && !col.ordinal_order.empty())
            throw SchemaError("column '" + col.name + "' is not ordinal but lists categories");
        if (is_ordinal) {
            std::unordered_set<std::string> cats;
            for (const auto& cat : col.ordinal_order)
                if (!cats.insert(cat).second)
                    throw SchemaError("ordinal column '" + col.name + "' repeats category '" +
                                      cat + "'");
        }
    }
    if (id_count != 1)
        throw SchemaError("schema must declare exactly one id column, found " +
                          std::to_string(id_count));
    if (target_count == 0) throw SchemaError("schema declares no target column");
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

std::vector<ColumnSchema> load_schema(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open schema file '" + path + "'");
    std::vector<ColumnSchema> schema;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string::size_type hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string::size_type eq = line.find('=');
        if (eq == std::string::npos)
            throw SchemaError(path + ":" + std::to_string(line_no) + ": expected 'name = kind'");
        ColumnSchema col;
        col.name = trim(line.substr(0, eq));
        std::string rhs = trim(line.substr(eq + 1));
        // kind[, cat0, cat1, ...]
        std::vector<std::string> parts;
        std::stringstream ss(rhs);
        std::string part;
        while (std::getline(ss, part, ',')) parts.push_back(trim(part));
        if (parts.empty())
            throw SchemaError(path + ":" + std::to_string(line_no) + ": missing kind");
        col.kind = kind_from_string(parts[0]);
        col.ordinal_order.assign(parts.begin() + 1, parts.end());
        schema.push_back(std::move(col));
    }
    validate_schema(schema);
    return schema;
}

void save_schema(const std::vector<ColumnSchema>& schema, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write schema file '" + path + "'");
    for (const auto& col : schema) {
        out << col.name << " = " << to_string(col.kind);
        for (const auto& cat : col.ordinal_order) out << ", " << cat;
        out << "\n";
    }
    if (!out) throw IoError("failed writing schema file '" + path + "'");
}

}  // namespace mipred::tabular
