#pragma once

#include <string>
#include <vector>

namespace mipred::tabular {

enum class ColumnKind {
    numeric,
    binary,
    categorical_ordinal,
    categorical_nominal,
    id,
    target,
};

const char* to_string(ColumnKind kind);
ColumnKind kind_from_string(const std::string& text);

struct ColumnSchema {
    std::string name;
    ColumnKind kind = ColumnKind::numeric;
    // Ordered category list; present exactly for categorical_ordinal columns.
    std::vector<std::string> ordinal_order;
};

// Validates the per-column invariants plus: exactly one id column, at least
// one target column. Throws SchemaError.
void validate_schema(const std::vector<ColumnSchema>& schema);

// Line-oriented schema file: `name = kind[, cat0, cat1, ...]`.
// '#' starts a comment; blank lines ignored.
std::vector<ColumnSchema> load_schema(const std::string& path);
void save_schema(const std::vector<ColumnSchema>& schema, const std::string& path);

}  // namespace mipred::tabular
