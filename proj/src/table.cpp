#include "mipred/table.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <unordered_map>

#include "mipred/error.hpp"
#include "mipred/rng.hpp"

namespace mipred::tabular {

std::size_t Table::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < schema.size(); ++i)
        if (schema[i].name == name) return i;
    throw SchemaError("unknown column '" + name + "'");
}

Table Table::select_columns(const std::vector<std::size_t>& cols) const {
    Table out;
    out.n_rows = n_rows;
    for (std::size_t c : cols) {
        out.schema.push_back(schema[c]);
        out.columns.push_back(columns[c]);
        out.missing.push_back(missing[c]);
    }
    return out;
}

Table Table::select_rows(const std::vector<std::size_t>& rows) const {
    Table out;
    out.schema = schema;
    out.n_rows = rows.size();
    out.columns.resize(n_cols());
    out.missing.resize(n_cols());
    for (std::size_t c = 0; c < n_cols(); ++c) {
        out.columns[c].reserve(rows.size());
        out.missing[c].reserve(rows.size());
        for (std::size_t r : rows) {
            out.columns[c].push_back(columns[c][r]);
            out.missing[c].push_back(missing[c][r]);
        }
    }
    return out;
}

namespace {

// One CSV record; supports RFC-4180 quoting, no embedded newlines.
std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no,
                                        const std::string& path) {
    std::vector<std::string> fields;
    std::string field;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"' && field.empty()) {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\r' && i + 1 == line.size()) {
            // tolerate CRLF line endings
        } else {
            field += c;
        }
    }
    if (in_quotes)
        throw IngestError(path + ":" + std::to_string(line_no) + ": unterminated quoted field");
    fields.push_back(std::move(field));
    return fields;
}

bool parse_double(const std::string& token, double& out) {
    if (token.empty()) return false;
    char* end = nullptr;
    out = std::strtod(token.c_str(), &end);
    return end == token.c_str() + token.size() && std::isfinite(out);
}

}  // namespace

Table load_table(const std::string& path, const std::vector<ColumnSchema>& schema,
                 const std::set<std::string>& missing_tokens) {
    validate_schema(schema);
    std::ifstream in(path);
    if (!in) throw IoError("cannot open data file '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw IngestError(path + ": empty file, expected a header row");
    const auto header = split_csv_line(line, 1, path);
    if (header.size() != schema.size())
        throw SchemaError(path + ": header has " + std::to_string(header.size()) +
                          " columns, schema has " + std::to_string(schema.size()));
    for (std::size_t c = 0; c < header.size(); ++c)
        if (header[c] != schema[c].name)
            throw SchemaError(path + ": header column " + std::to_string(c + 1) + " is '" +
                              header[c] + "', schema expects '" + schema[c].name + "'");

    Table table;
    table.schema = schema;
    table.columns.resize(schema.size());
    table.missing.resize(schema.size());

    // Per-ordinal-column category lookup for validation.
    std::vector<std::unordered_map<std::string, std::size_t>> ordinal_ranks(schema.size());
    for (std::size_t c = 0; c < schema.size(); ++c)
        for (std::size_t k = 0; k < schema[c].ordinal_order.size(); ++k)
            ordinal_ranks[c][schema[c].ordinal_order[k]] = k;

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;
        const auto fields = split_csv_line(line, line_no, path);
        if (fields.size() != schema.size())
            throw IngestError(path + ":" + std::to_string(line_no) + ": row has " +
                              std::to_string(fields.size()) + " fields, expected " +
                              std::to_string(schema.size()));
        for (std::size_t c = 0; c < schema.size(); ++c) {
            const std::string& token = fields[c];
            const bool is_missing = missing_tokens.count(token) > 0;
            if (!is_missing) {
                double value;
                switch (schema[c].kind) {
                    case ColumnKind::numeric:
                    case ColumnKind::binary:
                    case ColumnKind::target:
                        if (!parse_double(token, value))
                            throw IngestError(path + ":" + std::to_string(line_no) +
                                              ": column '" + schema[c].name +
                                              "': cannot parse '" + token + "' as a number");
                        break;
                    case ColumnKind::categorical_ordinal:
                        if (!ordinal_ranks[c].count(token))
                            throw IngestError(path + ":" + std::to_string(line_no) +
                                              ": column '" + schema[c].name + "': category '" +
                                              token + "' is not in the declared order");
                        break;
                    case ColumnKind::categorical_nominal:
                    case ColumnKind::id:
                        break;
                }
            }
            table.columns[c].push_back(is_missing ? std::string() : token);
            table.missing[c].push_back(is_missing ? 1 : 0);
        }
        ++table.n_rows;
    }
    return table;
}

void save_table(const Table& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write data file '" + path + "'");
    auto write_field = [&out](const std::string& field) {
        if (field.find_first_of(",\"\n") != std::string::npos) {
            out << '"';
            for (char c : field) {
                if (c == '"') out << '"';
                out << c;
            }
            out << '"';
        } else {
            out << field;
        }
    };
    for (std::size_t c = 0; c < table.n_cols(); ++c) {
        if (c) out << ',';
        write_field(table.schema[c].name);
    }
    out << '\n';
    for (std::size_t r = 0; r < table.n_rows; ++r) {
        for (std::size_t c = 0; c < table.n_cols(); ++c) {
            if (c) out << ',';
            if (!table.is_missing(r, c)) write_field(table.cell(r, c));
        }
        out << '\n';
    }
    if (!out) throw IoError("failed writing data file '" + path + "'");
}

std::vector<double> numeric_column(const Table& table, std::size_t col) {
    const ColumnSchema& schema = table.schema[col];
    std::vector<double> values(table.n_rows, std::numeric_limits<double>::quiet_NaN());
    std::unordered_map<std::string, std::size_t> ranks;
    for (std::size_t k = 0; k < schema.ordinal_order.size(); ++k)
        ranks[schema.ordinal_order[k]] = k;
    for (std::size_t r = 0; r < table.n_rows; ++r) {
        if (table.is_missing(r, col)) continue;
        const std::string& token = table.cell(r, col);
        switch (schema.kind) {
            case ColumnKind::numeric:
            case ColumnKind::binary:
            case ColumnKind::target: {
                double value;
                if (!parse_double(token, value))
                    throw DataError("column '" + schema.name + "': cannot parse '" + token +
                                    "' as a number");
                values[r] = value;
                break;
            }
            case ColumnKind::categorical_ordinal: {
                auto it = ranks.find(token);
                if (it == ranks.end())
                    throw DataError("column '" + schema.name + "': category '" + token +
                                    "' is not in the declared order");
                values[r] = static_cast<double>(it->second);
                break;
            }
            default:
                throw SchemaError("column '" + schema.name + "' has no numeric interpretation");
        }
    }
    return values;
}

std::size_t BinaryTarget::count_positive() const {
    std::size_t total = 0;
    for (int v : values) total += static_cast<std::size_t>(v);
    return total;
}

BinaryTarget binarize_target(const Table& table, const std::string& lethal_column) {
    const std::size_t col = table.column_index(lethal_column);
    if (table.schema[col].kind != ColumnKind::target)
        throw SchemaError("column '" + lethal_column + "' is not a target column");
    BinaryTarget target;
    target.values.reserve(table.n_rows);
    for (std::size_t r = 0; r < table.n_rows; ++r) {
        if (table.is_missing(r, col))
            throw DataError("target column '" + lethal_column + "' is missing at row " +
                            std::to_string(r) + "; the target must be complete");
        double value;
        if (!parse_double(table.cell(r, col), value))
            throw DataError("target column '" + lethal_column + "': cannot parse '" +
                            table.cell(r, col) + "'");
        target.values.push_back(value != 0.0 ? 1 : 0);
    }
    return target;
}

namespace {

std::size_t round_half_up(double x) { return static_cast<std::size_t>(std::floor(x + 0.5)); }

}  // namespace

SplitIndices stratified_split(const BinaryTarget& target, double test_fraction,
                              std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ParamError("test_fraction must lie in (0,1)");

    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < target.values.size(); ++i)
        by_class[target.values[i]].push_back(i);
    if (by_class[0].empty() || by_class[1].empty())
        throw DataError("stratified split needs both classes present");

    const std::size_t n = target.values.size();
    const std::size_t global_test = round_half_up(static_cast<double>(n) * test_fraction);
    std::size_t want[2] = {
        round_half_up(static_cast<double>(by_class[0].size()) * test_fraction),
        round_half_up(static_cast<double>(by_class[1].size()) * test_fraction),
    };
    // Per-class rounding can miss the global target by one row; the majority
    // class absorbs the correction.
    const int majority = by_class[1].size() > by_class[0].size() ? 1 : 0;
    const std::size_t have = want[0] + want[1];
    if (have < global_test)
        want[majority] += global_test - have;
    else if (have > global_test)
        want[majority] -= have - global_test;
    for (int c = 0; c < 2; ++c)
        if (want[c] == 0 || want[c] >= by_class[c].size())
            throw DataError("test_fraction leaves class " + std::to_string(c) +
                            " without train or test rows");

    SplitIndices split;
    split.seed = seed;
    split.test_fraction = test_fraction;
    auto gen = rng::substream(seed, "split");
    for (int c = 0; c < 2; ++c) {
        auto rows = by_class[c];
        rng::shuffle(rows, gen);
        for (std::size_t i = 0; i < rows.size(); ++i)
            (i < want[c] ? split.test : split.train).push_back(rows[i]);
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

}  // namespace mipred::tabular
