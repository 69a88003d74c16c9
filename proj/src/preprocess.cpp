#include "mipred/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <unordered_map>

#include <json.hpp>

#include "mipred/error.hpp"
#include "mipred/rng.hpp"

namespace mipred::preprocess {

using tabular::ColumnKind;
using tabular::ColumnSchema;

namespace {

bool is_feature(ColumnKind kind) {
    return kind == ColumnKind::numeric || kind == ColumnKind::binary ||
           kind == ColumnKind::categorical_ordinal || kind == ColumnKind::categorical_nominal;
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::pair<Table, CleaningReport> clean(const Table& table, const std::string& target_column) {
    const std::size_t target_idx = table.column_index(target_column);
    if (table.schema[target_idx].kind != ColumnKind::target)
        throw SchemaError("column '" + target_column + "' is not a target column");

    CleaningReport report;

    // Dataset-level missingness over the feature columns, reported both ways
    // (rows touched and total cells) since either reading is defensible.
    std::vector<char> row_has_missing(table.n_rows, 0);
    std::size_t feature_cols = 0;
    std::size_t missing_cells = 0;
    for (std::size_t c = 0; c < table.n_cols(); ++c) {
        if (!is_feature(table.schema[c].kind)) continue;
        ++feature_cols;
        for (std::size_t r = 0; r < table.n_rows; ++r) {
            if (table.is_missing(r, c)) {
                ++missing_cells;
                row_has_missing[r] = 1;
            }
        }
    }
    if (table.n_rows > 0 && feature_cols > 0) {
        std::size_t rows_touched = 0;
        for (char flag : row_has_missing) rows_touched += flag;
        report.missing_row_fraction =
            static_cast<double>(rows_touched) / static_cast<double>(table.n_rows);
        report.missing_cell_fraction = static_cast<double>(missing_cells) /
                                       static_cast<double>(table.n_rows * feature_cols);
    }

    std::vector<std::size_t> kept;
    for (std::size_t c = 0; c < table.n_cols(); ++c) {
        const auto& col = table.schema[c];
        if (col.kind == ColumnKind::id) continue;
        if (col.kind == ColumnKind::target) {
            if (c == target_idx) kept.push_back(c);
            continue;
        }
        if (!is_feature(col.kind)) continue;

        std::size_t miss = 0;
        for (std::size_t r = 0; r < table.n_rows; ++r)
            if (table.is_missing(r, c)) ++miss;
        const double miss_frac =
            table.n_rows ? static_cast<double>(miss) / static_cast<double>(table.n_rows) : 0.0;
        if (miss_frac > 0.10) {
            report.dropped_missing.push_back({col.name, miss_frac});
            continue;
        }

        // Dominance over non-missing cells only: a sparse column should not be
        // dropped as "dominant" merely for being sparse.
        std::unordered_map<std::string, std::size_t> counts;
        std::size_t present = 0;
        for (std::size_t r = 0; r < table.n_rows; ++r) {
            if (table.is_missing(r, c)) continue;
            ++present;
            ++counts[table.cell(r, c)];
        }
        std::size_t top = 0;
        for (const auto& [token, count] : counts) top = std::max(top, count);
        const double dom_frac =
            present ? static_cast<double>(top) / static_cast<double>(present) : 0.0;
        if (dom_frac > 0.95) {
            report.dropped_dominant.push_back({col.name, dom_frac});
            continue;
        }

        report.surviving_features.push_back(col.name);
        kept.push_back(c);
    }

    return {table.select_columns(kept), report};
}

std::vector<std::size_t> random_undersample(const std::vector<std::size_t>& rows,
                                            const BinaryTarget& target, double alpha,
                                            std::uint64_t seed) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ParamError("undersampling alpha must lie in (0,1]");

    std::vector<std::size_t> by_class[2];
    for (std::size_t row : rows) {
        if (row >= target.values.size()) throw DataError("undersample row index out of range");
        by_class[target.values[row]].push_back(row);
    }
    const int minority = by_class[1].size() < by_class[0].size() ? 1 : 0;
    const int majority = 1 - minority;
    const std::size_t n_min = by_class[minority].size();
    const std::size_t keep_majority =
        static_cast<std::size_t>(std::floor(static_cast<double>(n_min) / alpha));
    if (by_class[majority].size() <= keep_majority) return rows;

    auto gen = rng::substream(seed, "undersample");
    auto sampled = rng::sample_without_replacement(by_class[majority], keep_majority, gen);

    std::vector<std::size_t> out = by_class[minority];
    out.insert(out.end(), sampled.begin(), sampled.end());
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

struct EncodedColumn {
    std::string source;
    std::size_t source_col = 0;
    std::size_t offset = 0;  // first output column
    std::size_t width = 1;   // 1, or category count for nominal
};

// Encodes one source column into `width` output columns for every row of
// `table`, leaving NaN where the cell is missing. Nominal categories outside
// the codec's list produce an all-zero block.
void encode_column(const Table& table, std::size_t col,
                   const PipelineFitState::ColumnCodec& codec, std::size_t offset,
                   FeatureMatrix& out, bool warn_unseen) {
    const auto& schema = table.schema[col];
    if (codec.kind == ColumnKind::categorical_nominal) {
        std::unordered_map<std::string, std::size_t> index;
        for (std::size_t k = 0; k < codec.categories.size(); ++k) index[codec.categories[k]] = k;
        bool warned = false;
        for (std::size_t r = 0; r < table.n_rows; ++r) {
            if (table.is_missing(r, col)) {
                for (std::size_t k = 0; k < codec.categories.size(); ++k)
                    out.at(r, offset + k) = kNaN;
                continue;
            }
            auto it = index.find(table.cell(r, col));
            for (std::size_t k = 0; k < codec.categories.size(); ++k) out.at(r, offset + k) = 0.0;
            if (it != index.end()) {
                out.at(r, offset + it->second) = 1.0;
            } else if (warn_unseen && !warned) {
                std::cerr << "warning: column '" << schema.name << "': unseen category '"
                          << table.cell(r, col) << "' encoded as all-zero\n";
                warned = true;
            }
        }
        return;
    }

    if (codec.kind == ColumnKind::categorical_ordinal) {
        std::unordered_map<std::string, std::size_t> ranks;
        for (std::size_t k = 0; k < codec.categories.size(); ++k) ranks[codec.categories[k]] = k;
        for (std::size_t r = 0; r < table.n_rows; ++r) {
            if (table.is_missing(r, col)) {
                out.at(r, offset) = kNaN;
                continue;
            }
            auto it = ranks.find(table.cell(r, col));
            if (it == ranks.end())
                throw DataError("column '" + schema.name + "': category '" + table.cell(r, col) +
                                "' is not in the fitted order");
            out.at(r, offset) = static_cast<double>(it->second);
        }
        return;
    }

    for (std::size_t r = 0; r < table.n_rows; ++r) {
        if (table.is_missing(r, col)) {
            out.at(r, offset) = kNaN;
            continue;
        }
        char* end = nullptr;
        const std::string& token = table.cell(r, col);
        const double value = std::strtod(token.c_str(), &end);
        if (end != token.c_str() + token.size() || !std::isfinite(value))
            throw DataError("column '" + schema.name + "': cannot parse '" + token +
                            "' as a number");
        out.at(r, offset) = value;
    }
}

double median_of(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// Most frequent value; ties break toward the smallest value.
double mode_of(const std::vector<double>& values) {
    std::map<double, std::size_t> counts;
    for (double v : values) ++counts[v];
    double best = 0.0;
    std::size_t best_count = 0;
    for (const auto& [value, count] : counts) {
        if (count > best_count) {
            best = value;
            best_count = count;
        }
    }
    return best;
}

}  // namespace

FitResult fit_transform(const Table& train, const BinaryTarget& target,
                        const PipelineConfig& config) {
    if (config.mode != PipelineMode::preprocessed)
        throw ParamError("fit_transform requires preprocessed mode");
    if (config.k == 0) throw ParamError("selected feature count k must be positive");
    if (target.values.size() != train.n_rows)
        throw DataError("target length does not match table rows");

    std::vector<std::size_t> all_rows(train.n_rows);
    for (std::size_t i = 0; i < train.n_rows; ++i) all_rows[i] = i;
    const auto sampled = random_undersample(all_rows, target, config.alpha, config.seed);
    const Table sub = train.select_rows(sampled);

    FitResult result;
    PipelineFitState& state = result.state;
    state.mode = PipelineMode::preprocessed;
    state.alpha = config.alpha;
    state.k = config.k;
    state.seed = config.seed;
    result.sampled_rows = sampled;

    // Fit encoders on the sampled rows: nominal categories are the sorted set
    // of seen tokens; ordinal order comes from the schema.
    std::vector<EncodedColumn> layout;
    std::size_t width = 0;
    for (std::size_t c = 0; c < sub.n_cols(); ++c) {
        const auto& col = sub.schema[c];
        if (!is_feature(col.kind)) continue;
        PipelineFitState::ColumnCodec codec;
        codec.kind = col.kind;
        if (col.kind == ColumnKind::categorical_nominal) {
            std::vector<std::string> cats;
            for (std::size_t r = 0; r < sub.n_rows; ++r)
                if (!sub.is_missing(r, c)) cats.push_back(sub.cell(r, c));
            std::sort(cats.begin(), cats.end());
            cats.erase(std::unique(cats.begin(), cats.end()), cats.end());
            if (cats.empty())
                throw DataError("imputation impossible: column '" + col.name +
                                "' is entirely missing after undersampling");
            codec.categories = cats;
        } else if (col.kind == ColumnKind::categorical_ordinal) {
            codec.categories = col.ordinal_order;
        }
        const std::size_t w =
            col.kind == ColumnKind::categorical_nominal ? codec.categories.size() : 1;
        layout.push_back({col.name, c, width, w});
        state.source_columns.push_back(col.name);
        state.codecs[col.name] = std::move(codec);
        width += w;
    }

    FeatureMatrix encoded(sub.n_rows, width);
    for (const auto& entry : layout) {
        encode_column(sub, entry.source_col, state.codecs[entry.source],
                      entry.offset, encoded, /*warn_unseen=*/false);
        const auto& col = sub.schema[entry.source_col];
        if (col.kind == ColumnKind::categorical_nominal) {
            for (std::size_t k = 0; k < entry.width; ++k)
                encoded.names.push_back(col.name + "=" +
                                        state.codecs[entry.source].categories[k]);
        } else {
            encoded.names.push_back(col.name);
        }
    }

    // Imputers in encoded space: median for numeric, mode otherwise. A fully
    // missing column cannot be imputed.
    for (const auto& entry : layout) {
        auto& codec = state.codecs[entry.source];
        if (codec.kind == ColumnKind::categorical_nominal) {
            // Mode category: count per category over present rows.
            std::vector<std::size_t> counts(entry.width, 0);
            std::size_t present = 0;
            for (std::size_t r = 0; r < sub.n_rows; ++r) {
                if (FeatureMatrix::is_missing(encoded.at(r, entry.offset))) continue;
                ++present;
                for (std::size_t k = 0; k < entry.width; ++k)
                    if (encoded.at(r, entry.offset + k) == 1.0) ++counts[k];
            }
            if (present == 0)
                throw DataError("imputation impossible: column '" + entry.source +
                                "' is entirely missing after undersampling");
            std::size_t mode_idx = 0;
            for (std::size_t k = 1; k < entry.width; ++k)
                if (counts[k] > counts[mode_idx]) mode_idx = k;
            codec.impute_value = static_cast<double>(mode_idx);
            for (std::size_t r = 0; r < sub.n_rows; ++r) {
                if (!FeatureMatrix::is_missing(encoded.at(r, entry.offset))) continue;
                for (std::size_t k = 0; k < entry.width; ++k)
                    encoded.at(r, entry.offset + k) = k == mode_idx ? 1.0 : 0.0;
            }
        } else {
            std::vector<double> present;
            for (std::size_t r = 0; r < sub.n_rows; ++r) {
                const double v = encoded.at(r, entry.offset);
                if (!FeatureMatrix::is_missing(v)) present.push_back(v);
            }
            if (present.empty())
                throw DataError("imputation impossible: column '" + entry.source +
                                "' is entirely missing after undersampling");
            codec.impute_value = codec.kind == ColumnKind::numeric ? median_of(present)
                                                                   : mode_of(present);
            for (std::size_t r = 0; r < sub.n_rows; ++r)
                if (FeatureMatrix::is_missing(encoded.at(r, entry.offset)))
                    encoded.at(r, entry.offset) = codec.impute_value;
        }
    }

    // Min-max to [0,1] from training statistics; constant columns map to 0.
    state.encoded_names = encoded.names;
    state.min_max.resize(width);
    for (std::size_t c = 0; c < width; ++c) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < encoded.n_rows; ++r) {
            lo = std::min(lo, encoded.at(r, c));
            hi = std::max(hi, encoded.at(r, c));
        }
        if (encoded.n_rows == 0) lo = hi = 0.0;
        state.min_max[c] = {lo, hi};
        for (std::size_t r = 0; r < encoded.n_rows; ++r) {
            const double v = encoded.at(r, c);
            encoded.at(r, c) = hi > lo ? (v - lo) / (hi - lo) : 0.0;
        }
    }

    BinaryTarget sub_target;
    sub_target.values.reserve(sampled.size());
    for (std::size_t row : sampled) sub_target.values.push_back(target.values[row]);
    state.chi2 = chi2_scores(encoded, sub_target);

    // Top-k by (score desc, index asc); emitted in ascending column order.
    std::vector<std::size_t> order(width);
    for (std::size_t i = 0; i < width; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (state.chi2[a] != state.chi2[b]) return state.chi2[a] > state.chi2[b];
        return a < b;
    });
    const std::size_t take = std::min<std::size_t>(config.k, width);
    state.selected.assign(order.begin(), order.begin() + take);
    std::sort(state.selected.begin(), state.selected.end());
    for (std::size_t c : state.selected) state.selected_names.push_back(encoded.names[c]);

    FeatureMatrix final_matrix(encoded.n_rows, take);
    final_matrix.names = state.selected_names;
    for (std::size_t r = 0; r < encoded.n_rows; ++r)
        for (std::size_t i = 0; i < take; ++i)
            final_matrix.at(r, i) = encoded.at(r, state.selected[i]);
    result.matrix = std::move(final_matrix);
    return result;
}

FeatureMatrix transform(const Table& table, const PipelineFitState& state) {
    if (state.mode == PipelineMode::raw) return raw_matrix(table);

    std::size_t width = 0;
    std::vector<EncodedColumn> layout;
    for (const auto& name : state.source_columns) {
        const auto& codec = state.codecs.at(name);
        const std::size_t w =
            codec.kind == ColumnKind::categorical_nominal ? codec.categories.size() : 1;
        layout.push_back({name, table.column_index(name), width, w});
        width += w;
    }
    if (width != state.encoded_names.size())
        throw SchemaError("fitted state does not match the table layout");

    FeatureMatrix encoded(table.n_rows, width);
    encoded.names = state.encoded_names;
    for (const auto& entry : layout) {
        const auto& codec = state.codecs.at(entry.source);
        encode_column(table, entry.source_col, codec, entry.offset, encoded,
                      /*warn_unseen=*/true);
        // Stored imputation, then stored normalization. Unseen categories left
        // the block all-zero above and skip imputation (they are not missing).
        if (codec.kind == ColumnKind::categorical_nominal) {
            const auto mode_idx = static_cast<std::size_t>(codec.impute_value);
            for (std::size_t r = 0; r < table.n_rows; ++r) {
                if (!FeatureMatrix::is_missing(encoded.at(r, entry.offset))) continue;
                for (std::size_t k = 0; k < entry.width; ++k)
                    encoded.at(r, entry.offset + k) = k == mode_idx ? 1.0 : 0.0;
            }
        } else {
            for (std::size_t r = 0; r < table.n_rows; ++r)
                if (FeatureMatrix::is_missing(encoded.at(r, entry.offset)))
                    encoded.at(r, entry.offset) = codec.impute_value;
        }
    }

    for (std::size_t c = 0; c < width; ++c) {
        const auto [lo, hi] = state.min_max[c];
        for (std::size_t r = 0; r < encoded.n_rows; ++r) {
            const double v = encoded.at(r, c);
            encoded.at(r, c) = hi > lo ? (v - lo) / (hi - lo) : 0.0;
        }
    }

    FeatureMatrix out(encoded.n_rows, state.selected.size());
    out.names = state.selected_names;
    for (std::size_t r = 0; r < encoded.n_rows; ++r)
        for (std::size_t i = 0; i < state.selected.size(); ++i)
            out.at(r, i) = encoded.at(r, state.selected[i]);
    return out;
}

FeatureMatrix raw_matrix(const Table& table) {
    std::vector<std::size_t> cols;
    for (std::size_t c = 0; c < table.n_cols(); ++c)
        if (is_feature(table.schema[c].kind)) cols.push_back(c);

    FeatureMatrix out(table.n_rows, cols.size());
    for (std::size_t i = 0; i < cols.size(); ++i) {
        const auto& col = table.schema[cols[i]];
        if (col.kind == ColumnKind::categorical_nominal)
            throw SchemaError("column '" + col.name +
                              "' is nominal and has no raw numeric form");
        out.names.push_back(col.name);
        const auto values = tabular::numeric_column(table, cols[i]);
        for (std::size_t r = 0; r < table.n_rows; ++r) out.at(r, i) = values[r];
    }
    return out;
}

PipelineFitState raw_state(const PipelineConfig& config) {
    PipelineFitState state;
    state.mode = PipelineMode::raw;
    state.alpha = config.alpha;
    state.k = config.k;
    state.seed = config.seed;
    return state;
}

std::vector<double> chi2_scores(const FeatureMatrix& features, const BinaryTarget& target) {
    if (features.n_rows != target.values.size())
        throw DataError("chi2: feature rows do not match target length");
    const std::size_t n = features.n_rows;
    std::size_t class_count[2] = {0, 0};
    for (int y : target.values) ++class_count[y];

    std::vector<double> scores(features.n_cols, 0.0);
    for (std::size_t c = 0; c < features.n_cols; ++c) {
        double observed[2] = {0.0, 0.0};
        for (std::size_t r = 0; r < n; ++r) {
            const double v = features.at(r, c);
            if (std::isnan(v)) throw DataError("chi2: missing value in feature matrix");
            if (v < 0.0)
                throw DataError("chi2 requires non-negative features, column " +
                                (c < features.names.size() ? features.names[c]
                                                           : std::to_string(c)));
            observed[target.values[r]] += v;
        }
        const double total = observed[0] + observed[1];
        if (total == 0.0 || n == 0) continue;
        double score = 0.0;
        for (int cls = 0; cls < 2; ++cls) {
            const double expected =
                total * static_cast<double>(class_count[cls]) / static_cast<double>(n);
            if (expected > 0.0) {
                const double d = observed[cls] - expected;
                score += d * d / expected;
            }
        }
        scores[c] = score;
    }
    return scores;
}

// ---------------------------------------------------------------------------
// JSON serialization

namespace {

using nlohmann::json;
constexpr int kStateFormatVersion = 1;

}  // namespace

std::string PipelineFitState::to_json() const {
    json j;
    j["format_version"] = kStateFormatVersion;
    j["kind"] = "mipred.pipeline_state";
    j["mode"] = mode == PipelineMode::raw ? "raw" : "preprocessed";
    j["alpha"] = alpha;
    j["k"] = k;
    j["seed"] = seed;
    if (mode == PipelineMode::preprocessed) {
        json cols = json::array();
        for (const auto& name : source_columns) {
            const auto& codec = codecs.at(name);
            json col;
            col["name"] = name;
            col["kind"] = tabular::to_string(codec.kind);
            col["categories"] = codec.categories;
            col["impute"] = codec.impute_value;
            cols.push_back(col);
        }
        j["columns"] = cols;
        json encoded;
        encoded["names"] = encoded_names;
        json lo = json::array(), hi = json::array();
        for (const auto& [a, b] : min_max) {
            lo.push_back(a);
            hi.push_back(b);
        }
        encoded["min"] = lo;
        encoded["max"] = hi;
        encoded["chi2"] = chi2;
        j["encoded"] = encoded;
        j["selected"] = selected;
    }
    return j.dump(2) + "\n";
}

PipelineFitState PipelineFitState::from_json(const std::string& text) {
    json j = json::parse(text);
    if (!j.contains("format_version") || j["format_version"].get<int>() != kStateFormatVersion)
        throw DataError("unsupported pipeline_state format version");
    PipelineFitState state;
    state.mode = j.at("mode").get<std::string>() == "raw" ? PipelineMode::raw
                                                          : PipelineMode::preprocessed;
    state.alpha = j.at("alpha").get<double>();
    state.k = j.at("k").get<std::size_t>();
    state.seed = j.at("seed").get<std::uint64_t>();
    if (state.mode == PipelineMode::raw) return state;

    for (const auto& col : j.at("columns")) {
        ColumnCodec codec;
        codec.kind = tabular::kind_from_string(col.at("kind").get<std::string>());
        codec.categories = col.at("categories").get<std::vector<std::string>>();
        codec.impute_value = col.at("impute").get<double>();
        const auto name = col.at("name").get<std::string>();
        state.source_columns.push_back(name);
        state.codecs[name] = std::move(codec);
    }
    const auto& encoded = j.at("encoded");
    state.encoded_names = encoded.at("names").get<std::vector<std::string>>();
    const auto lo = encoded.at("min").get<std::vector<double>>();
    const auto hi = encoded.at("max").get<std::vector<double>>();
    if (lo.size() != hi.size()) throw DataError("pipeline_state min/max size mismatch");
    for (std::size_t i = 0; i < lo.size(); ++i) state.min_max.emplace_back(lo[i], hi[i]);
    state.chi2 = encoded.at("chi2").get<std::vector<double>>();
    state.selected = j.at("selected").get<std::vector<std::size_t>>();
    for (std::size_t c : state.selected) {
        if (c >= state.encoded_names.size()) throw DataError("pipeline_state selection out of range");
        state.selected_names.push_back(state.encoded_names[c]);
    }
    return state;
}

std::string cleaning_report_to_json(const CleaningReport& report) {
    json j;
    j["format_version"] = 1;
    j["kind"] = "mipred.cleaning_report";
    json miss = json::array(), dom = json::array();
    for (const auto& d : report.dropped_missing)
        miss.push_back({{"name", d.name}, {"missing_fraction", d.fraction}});
    for (const auto& d : report.dropped_dominant)
        dom.push_back({{"name", d.name}, {"dominance_fraction", d.fraction}});
    j["dropped_missing"] = miss;
    j["dropped_dominant"] = dom;
    j["surviving_features"] = report.surviving_features;
    j["surviving_count"] = report.surviving_features.size();
    j["missing_row_fraction"] = report.missing_row_fraction;
    j["missing_cell_fraction"] = report.missing_cell_fraction;
    return j.dump(2) + "\n";
}

}  // namespace mipred::preprocess
