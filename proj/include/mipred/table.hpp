#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "mipred/schema.hpp"

namespace mipred::tabular {

// Columnar table of raw tokens with an explicit missing mask. Cells are kept
// as the text they were ingested from; numeric interpretation happens at the
// feature-encoding boundary. Immutable by convention after construction.
struct Table {
    std::vector<ColumnSchema> schema;
    std::size_t n_rows = 0;
    std::vector<std::vector<std::string>> columns;  // [col][row], "" when missing
    std::vector<std::vector<char>> missing;         // [col][row], 1 = missing

    std::size_t n_cols() const { return schema.size(); }
    bool is_missing(std::size_t row, std::size_t col) const { return missing[col][row] != 0; }
    const std::string& cell(std::size_t row, std::size_t col) const { return columns[col][row]; }

    // Index of a named column; throws SchemaError when absent.
    std::size_t column_index(const std::string& name) const;

    // New table keeping the given columns (by index), all rows.
    Table select_columns(const std::vector<std::size_t>& cols) const;
    // New table keeping the given rows (by index), all columns.
    Table select_rows(const std::vector<std::size_t>& rows) const;
};

inline const std::set<std::string>& default_missing_tokens() {
    static const std::set<std::string> tokens = {"", "?", "NA"};
    return tokens;
}

// CSV ingestion: comma separator, first row is the header and must match the
// schema names exactly (same order). Cells equal to a missing token are
// flagged missing. Numeric/binary/target cells must parse as decimal numbers;
// ordinal cells must appear in the schema's category list.
Table load_table(const std::string& path, const std::vector<ColumnSchema>& schema,
                 const std::set<std::string>& missing_tokens = default_missing_tokens());

// Writes the table back as CSV, missing cells as "". Fields containing
// separators or quotes are quoted RFC-4180 style.
void save_table(const Table& table, const std::string& path);

// Dense numeric view of one column: NaN where missing. numeric/binary/target
// parse as decimal; ordinal maps to its rank in ordinal_order; other kinds
// throw SchemaError.
std::vector<double> numeric_column(const Table& table, std::size_t col);

struct BinaryTarget {
    std::vector<int> values;  // 0 = alive, 1 = deceased

    std::size_t size() const { return values.size(); }
    std::size_t count_positive() const;
};

// Maps the lethal-outcome column (categories 0..7) to {0,1}: any nonzero
// category is a death. Missing target cells are a DataError.
BinaryTarget binarize_target(const Table& table, const std::string& lethal_column);

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    std::uint64_t seed = 0;
    double test_fraction = 0.0;
};

// Deterministic stratified split. Per-class test count is
// round-half-up(class_count * fraction); if the rounded counts miss the
// global target round-half-up(n * fraction), the majority class absorbs the
// +-1 correction. Shuffling is Fisher-Yates on the fixed repo generator.
SplitIndices stratified_split(const BinaryTarget& target, double test_fraction,
                              std::uint64_t seed);

}  // namespace mipred::tabular
