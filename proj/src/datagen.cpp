#include "mipred/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "mipred/error.hpp"
#include "mipred/rng.hpp"
#include "mipred/schema.hpp"

namespace mipred::datagen {

using tabular::ColumnKind;
using tabular::ColumnSchema;
using tabular::Table;

namespace {

std::string format_int(double v) { return std::to_string(static_cast<long long>(std::llround(v))); }

std::string format_fixed(double v, int decimals) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.*f", decimals, v);
    return std::string(buffer);
}

std::size_t round_half_up(double x) { return static_cast<std::size_t>(std::floor(x + 0.5)); }

struct Builder {
    std::size_t n_rows;
    std::uint64_t seed;
    Table table;
    // Numeric view of feature columns that feed the outcome score.
    std::vector<std::vector<double>> numeric;  // NaN where missing

    explicit Builder(std::size_t rows, std::uint64_t master_seed)
        : n_rows(rows), seed(master_seed) {
        table.n_rows = rows;
    }

    rng::Xoshiro256 stream(const std::string& topic, const std::string& name) {
        return rng::substream(seed, topic + ":" + name);
    }

    // Exact-count missing mask: round(frac * n) cells, uniformly placed.
    std::vector<char> missing_mask(const std::string& name, double frac) {
        std::vector<char> mask(n_rows, 0);
        const std::size_t count = round_half_up(frac * static_cast<double>(n_rows));
        if (count == 0) return mask;
        std::vector<std::size_t> rows(n_rows);
        std::iota(rows.begin(), rows.end(), 0);
        auto gen = stream("miss", name);
        const auto picked = rng::sample_without_replacement(rows, count, gen);
        for (std::size_t r : picked) mask[r] = 1;
        return mask;
    }

    void push(ColumnSchema schema, std::vector<std::string> cells, std::vector<char> miss,
              std::vector<double> values) {
        for (std::size_t r = 0; r < n_rows; ++r)
            if (miss[r]) {
                cells[r].clear();
                values[r] = std::numeric_limits<double>::quiet_NaN();
            }
        table.schema.push_back(std::move(schema));
        table.columns.push_back(std::move(cells));
        table.missing.push_back(std::move(miss));
        numeric.push_back(std::move(values));
    }

    // Binary column with an exact count of ones among the non-missing cells,
    // so the dominance fraction is pinned, not sampled.
    void binary(const std::string& name, double rate_of_ones, double missing_frac,
                ColumnKind kind = ColumnKind::binary) {
        auto mask = missing_mask(name, missing_frac);
        std::vector<std::size_t> present;
        for (std::size_t r = 0; r < n_rows; ++r)
            if (!mask[r]) present.push_back(r);
        const std::size_t ones =
            round_half_up(rate_of_ones * static_cast<double>(present.size()));
        auto gen = stream("col", name);
        const auto picked = rng::sample_without_replacement(present, ones, gen);
        std::vector<double> values(n_rows, 0.0);
        for (std::size_t r : picked) values[r] = 1.0;
        std::vector<std::string> cells(n_rows);
        for (std::size_t r = 0; r < n_rows; ++r) cells[r] = values[r] != 0.0 ? "1" : "0";
        ColumnSchema schema{name, kind, {}};
        push(std::move(schema), std::move(cells), std::move(mask), std::move(values));
    }

    // Ordinal column sampled iid from the given category weights; the stored
    // numeric view is the category rank. first_label shifts the printed
    // labels (time-to-admission categories start at 1).
    std::vector<double> ordinal(const std::string& name, const std::vector<double>& weights,
                                double missing_frac, int first_label = 0) {
        std::vector<std::string> order;
        for (std::size_t k = 0; k < weights.size(); ++k)
            order.push_back(std::to_string(first_label + static_cast<int>(k)));
        const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
        auto gen = stream("col", name);
        std::vector<double> values(n_rows);
        std::vector<std::string> cells(n_rows);
        for (std::size_t r = 0; r < n_rows; ++r) {
            double u = gen.uniform() * total;
            std::size_t k = 0;
            while (k + 1 < weights.size() && u >= weights[k]) {
                u -= weights[k];
                ++k;
            }
            values[r] = static_cast<double>(k);
            cells[r] = order[k];
        }
        auto mask = missing_mask(name, missing_frac);
        ColumnSchema schema{name, ColumnKind::categorical_ordinal, order};
        auto view = values;
        push(std::move(schema), std::move(cells), std::move(mask), std::move(view));
        return values;
    }

    // Numeric column: normal draw, clamped, rounded to a step or decimals.
    std::vector<double> normal(const std::string& name, double mean, double sd, double lo,
                               double hi, double step, int decimals, double missing_frac) {
        auto gen = stream("col", name);
        std::vector<double> values(n_rows);
        std::vector<std::string> cells(n_rows);
        for (std::size_t r = 0; r < n_rows; ++r) {
            double v = mean + sd * gen.normal();
            v = std::clamp(v, lo, hi);
            if (step > 0.0) v = std::round(v / step) * step;
            values[r] = v;
            cells[r] = decimals == 0 ? format_int(v) : format_fixed(v, decimals);
        }
        auto mask = missing_mask(name, missing_frac);
        ColumnSchema schema{name, ColumnKind::numeric, {}};
        auto view = values;
        push(std::move(schema), std::move(cells), std::move(mask), std::move(view));
        return values;
    }

    std::vector<double> lognormal(const std::string& name, double log_mean, double log_sd,
                                  double lo, double hi, int decimals, double missing_frac) {
        auto gen = stream("col", name);
        std::vector<double> values(n_rows);
        std::vector<std::string> cells(n_rows);
        for (std::size_t r = 0; r < n_rows; ++r) {
            double v = std::exp(log_mean + log_sd * gen.normal());
            v = std::clamp(v, lo, hi);
            const double step = std::pow(10.0, -decimals);
            v = std::round(v / step) * step;
            values[r] = v;
            cells[r] = decimals == 0 ? format_int(v) : format_fixed(v, decimals);
        }
        auto mask = missing_mask(name, missing_frac);
        ColumnSchema schema{name, ColumnKind::numeric, {}};
        auto view = values;
        push(std::move(schema), std::move(cells), std::move(mask), std::move(view));
        return values;
    }

    std::size_t column(const std::string& name) const {
        for (std::size_t c = 0; c < table.schema.size(); ++c)
            if (table.schema[c].name == name) return c;
        throw Error("datagen: unknown column " + name);
    }

    // Standardized numeric view with missing cells at 0 (the column mean).
    std::vector<double> standardized(const std::string& name) const {
        const auto& raw = numeric[column(name)];
        double mean = 0.0;
        std::size_t present = 0;
        for (double v : raw)
            if (!std::isnan(v)) {
                mean += v;
                ++present;
            }
        mean /= static_cast<double>(present);
        double ss = 0.0;
        for (double v : raw)
            if (!std::isnan(v)) ss += (v - mean) * (v - mean);
        const double sd = std::sqrt(ss / static_cast<double>(present));
        std::vector<double> out(raw.size(), 0.0);
        if (sd == 0.0) return out;
        for (std::size_t r = 0; r < raw.size(); ++r)
            if (!std::isnan(raw[r])) out[r] = (raw[r] - mean) / sd;
        return out;
    }
};

}  // namespace

Table reference_replica(const ReplicaSpec& spec) {
    if (spec.n_deceased == 0 || spec.n_deceased >= spec.n_rows)
        throw ParamError("replica needs 0 < n_deceased < n_rows");
    Builder b(spec.n_rows, spec.seed);
    const std::size_t n = spec.n_rows;

    // --- id ---------------------------------------------------------------
    {
        std::vector<std::string> cells(n);
        std::vector<double> values(n);
        for (std::size_t r = 0; r < n; ++r) {
            cells[r] = std::to_string(r + 1);
            values[r] = static_cast<double>(r + 1);
        }
        b.push(ColumnSchema{"ID", ColumnKind::id, {}}, std::move(cells),
               std::vector<char>(n, 0), std::move(values));
    }

    // --- anamnesis block ----------------------------------------------------
    b.normal("AGE", 61.5, 11.2, 26, 92, 1, 0, 0.004);
    b.binary("SEX", 0.63, 0.0);
    b.ordinal("INF_ANAM", {0.55, 0.25, 0.13, 0.07}, 0.01);
    b.ordinal("STENOK_AN", {0.40, 0.13, 0.12, 0.10, 0.08, 0.07, 0.10}, 0.02);
    b.ordinal("FK_STENOK", {0.45, 0.14, 0.22, 0.14, 0.05}, 0.02);
    b.ordinal("IBS_POST", {0.45, 0.33, 0.22}, 0.02);
    b.binary("IBS_NASL", 0.30, 0.65);  // dropped: sparse family history
    b.ordinal("GB", {0.40, 0.12, 0.38, 0.10}, 0.01);
    b.binary("SIM_GIPERT", 0.02, 0.0);  // dropped: dominant
    b.ordinal("DLIT_AG", {0.45, 0.08, 0.08, 0.07, 0.06, 0.05, 0.06, 0.15}, 0.02);
    b.ordinal("ZSN_A", {0.68, 0.14, 0.10, 0.05, 0.03}, 0.01);

    const char* nr_names[] = {"nr_01", "nr_02", "nr_03", "nr_04", "nr_07", "nr_08", "nr_11"};
    const double nr_rates[] = {0.12, 0.02, 0.015, 0.03, 0.09, 0.10, 0.14};
    for (int i = 0; i < 7; ++i) b.binary(nr_names[i], nr_rates[i], 0.005);

    const char* np_names[] = {"np_01", "np_04", "np_05", "np_07", "np_08", "np_09", "np_10"};
    const double np_rates[] = {0.11, 0.035, 0.02, 0.13, 0.025, 0.012, 0.04};
    for (int i = 0; i < 7; ++i) b.binary(np_names[i], np_rates[i], 0.005);

    b.binary("endocr_01", 0.14, 0.005);
    b.binary("endocr_02", 0.02, 0.005);   // dropped: dominant
    b.binary("endocr_03", 0.03, 0.005);   // dropped: dominant
    b.binary("zab_leg_01", 0.13, 0.005);
    b.binary("zab_leg_02", 0.025, 0.005);  // dropped: dominant
    b.binary("zab_leg_03", 0.02, 0.005);   // dropped: dominant
    b.binary("zab_leg_04", 0.012, 0.005);  // dropped: dominant
    b.binary("zab_leg_06", 0.03, 0.005);   // dropped: dominant

    // --- pressures ----------------------------------------------------------
    b.normal("S_AD_KBRIG", 137, 28, 60, 260, 5, 0, 0.74);  // dropped: mostly missing
    b.normal("D_AD_KBRIG", 83, 14, 30, 190, 5, 0, 0.74);   // dropped: mostly missing
    b.normal("S_AD_ORIT", 136, 27, 60, 260, 5, 0, 0.02);
    b.normal("D_AD_ORIT", 82, 13, 30, 190, 5, 0, 0.02);

    // --- admission complications --------------------------------------------
    b.binary("O_L_POST", 0.10, 0.0);
    b.binary("K_SH_POST", 0.085, 0.0);
    b.binary("MP_TP_POST", 0.03, 0.0);   // dropped: dominant
    b.binary("SVT_POST", 0.015, 0.0);    // dropped: dominant
    b.binary("GT_POST", 0.02, 0.0);      // dropped: dominant
    b.binary("FIB_G_POST", 0.025, 0.0);  // dropped: dominant

    // --- infarction site (ECG) ----------------------------------------------
    b.ordinal("ant_im", {0.42, 0.18, 0.18, 0.14, 0.08}, 0.01);
    b.ordinal("lat_im", {0.52, 0.18, 0.15, 0.10, 0.05}, 0.01);
    b.ordinal("inf_im", {0.55, 0.15, 0.14, 0.11, 0.05}, 0.01);
    b.ordinal("post_im", {0.68, 0.12, 0.11, 0.06, 0.03}, 0.01);
    b.binary("IM_PG_P", 0.025, 0.0);  // dropped: dominant

    const char* ritm_names[] = {"ritm_ecg_p_01", "ritm_ecg_p_02", "ritm_ecg_p_04",
                                "ritm_ecg_p_06", "ritm_ecg_p_07", "ritm_ecg_p_08"};
    const double ritm_rates[] = {0.80, 0.10, 0.03, 0.09, 0.02, 0.015};
    for (int i = 0; i < 6; ++i) b.binary(ritm_names[i], ritm_rates[i], 0.005);

    const char* nre_names[] = {"n_r_ecg_p_01", "n_r_ecg_p_02", "n_r_ecg_p_03",
                               "n_r_ecg_p_04", "n_r_ecg_p_05", "n_r_ecg_p_06",
                               "n_r_ecg_p_08", "n_r_ecg_p_09", "n_r_ecg_p_10"};
    const double nre_rates[] = {0.13, 0.10, 0.08, 0.09, 0.12, 0.11, 0.03, 0.02, 0.015};
    for (int i = 0; i < 9; ++i) b.binary(nre_names[i], nre_rates[i], 0.005);

    for (int i = 1; i <= 11; ++i) {
        char name[24];
        std::snprintf(name, sizeof(name), "n_p_ecg_p_%02d", i);
        const double rates[] = {0.09, 0.12, 0.10, 0.08, 0.14, 0.11,
                                0.13, 0.10, 0.09, 0.12, 0.08};
        b.binary(name, rates[i - 1], 0.005);
    }

    // --- thrombolytic therapy (dropped: sparse recording) --------------------
    const char* fibr_names[] = {"fibr_ter_01", "fibr_ter_02", "fibr_ter_03", "fibr_ter_05",
                                "fibr_ter_06", "fibr_ter_07", "fibr_ter_08"};
    const double fibr_miss[] = {0.12, 0.12, 0.12, 0.13, 0.13, 0.13, 0.13};
    for (int i = 0; i < 7; ++i) b.binary(fibr_names[i], 0.12, fibr_miss[i]);

    // --- blood panel ----------------------------------------------------------
    b.binary("GIPO_K", 0.16, 0.03);
    b.normal("K_BLOOD", 4.2, 0.7, 2.0, 8.5, 0.0, 1, 0.22);    // dropped: missing
    b.binary("GIPER_NA", 0.11, 0.03);
    b.normal("NA_BLOOD", 137, 5.5, 110, 165, 1, 0, 0.22);     // dropped: missing
    b.lognormal("ALT_BLOOD", std::log(0.45), 0.5, 0.05, 6.0, 2, 0.18);  // dropped
    b.lognormal("AST_BLOOD", std::log(0.30), 0.5, 0.04, 5.0, 2, 0.18);  // dropped
    b.lognormal("KFK_BLOOD", std::log(90.0), 0.8, 5.0, 1500.0, 0, 0.99);  // dropped
    b.lognormal("L_BLOOD", std::log(8.5), 0.33, 2.5, 30.0, 1, 0.05);
    b.lognormal("ROE", std::log(11.0), 0.55, 1.0, 65.0, 0, 0.06);

    // --- course of disease -----------------------------------------------------
    b.ordinal("TIME_B_S", {0.22, 0.30, 0.18, 0.09, 0.07, 0.05, 0.04, 0.03, 0.02},
              0.01, 1);
    b.ordinal("R_AB_1_n", {0.70, 0.15, 0.09, 0.06}, 0.01);
    b.ordinal("R_AB_2_n", {0.80, 0.11, 0.06, 0.03}, 0.01);
    b.ordinal("R_AB_3_n", {0.78, 0.12, 0.06, 0.04}, 0.0);

    b.binary("NA_KB", 0.55, 0.45);      // dropped: missing
    b.binary("NOT_NA_KB", 0.45, 0.47);  // dropped: missing
    b.binary("LID_KB", 0.30, 0.49);     // dropped: missing
    b.binary("NITR_S", 0.42, 0.02);
    b.ordinal("NA_R_1_n", {0.35, 0.30, 0.20, 0.10, 0.05}, 0.25);   // dropped: missing
    b.ordinal("NA_R_2_n", {0.55, 0.25, 0.15, 0.05}, 0.28);         // dropped: missing
    b.ordinal("NA_R_3_n", {0.70, 0.20, 0.10}, 0.31);               // dropped: missing
    b.ordinal("NOT_NA_1_n", {0.40, 0.28, 0.18, 0.09, 0.05}, 0.25); // dropped: missing
    b.ordinal("NOT_NA_2_n", {0.60, 0.22, 0.13, 0.05}, 0.28);       // dropped: missing
    b.ordinal("NOT_NA_3_n", {0.75, 0.17, 0.08}, 0.31);             // dropped: missing
    b.binary("LID_S_n", 0.28, 0.02);
    b.binary("B_BLOK_S_n", 0.22, 0.02);
    b.binary("ANT_CA_S_n", 0.35, 0.02);
    b.binary("GEPAR_S_n", 0.45, 0.02);
    b.binary("ASP_S_n", 0.40, 0.02);
    b.binary("TIKL_S_n", 0.09, 0.02);
    b.binary("TRENT_S_n", 0.18, 0.02);

    // --- outcome score ----------------------------------------------------------
    // Deaths concentrate where admission systolic pressure is low, the attack-
    // to-admission delay short, pain relapses on day three, and age / white
    // cell count run high. Noise keeps the boundary learnable but not trivial.
    struct Weight {
        const char* column;
        double beta;
    };
    const Weight weights[] = {
        {"S_AD_ORIT", -1.70}, {"TIME_B_S", -1.15}, {"R_AB_3_n", 0.85},
        {"AGE", 0.65},        {"L_BLOOD", 0.60},   {"lat_im", 0.40},
        {"ZSN_A", 0.35},      {"K_SH_POST", 0.30}, {"ant_im", 0.25},
        {"ROE", 0.20},
    };
    std::vector<double> risk(n, 0.0);
    for (const auto& w : weights) {
        const auto z = b.standardized(w.column);
        for (std::size_t r = 0; r < n; ++r) risk[r] += w.beta * z[r];
    }
    {
        auto gen = b.stream("risk", "noise");
        for (std::size_t r = 0; r < n; ++r) risk[r] += 0.85 * gen.normal();
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t bdx) { return risk[a] > risk[bdx]; });
    std::vector<char> deceased(n, 0);
    for (std::size_t i = 0; i < spec.n_deceased; ++i) deceased[order[i]] = 1;

    // --- target columns -----------------------------------------------------------
    const char* complication_names[] = {"FIBR_PREDS", "PREDS_TAH", "JELUD_TAH", "FIBR_JELUD",
                                        "A_V_BLOK",   "OTEK_LANC", "RAZRIV",    "DRESSLER",
                                        "ZSN",        "REC_IM",    "P_IM_STEN"};
    const double complication_base[] = {0.10, 0.03, 0.025, 0.04, 0.035, 0.09,
                                        0.03, 0.045, 0.23, 0.09, 0.08};
    for (int i = 0; i < 11; ++i) {
        auto gen = b.stream("target", complication_names[i]);
        std::vector<std::string> cells(n);
        std::vector<double> values(n, 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            // Complications run higher among the deceased.
            const double p = complication_base[i] * (deceased[r] ? 3.0 : 0.75);
            values[r] = gen.uniform() < p ? 1.0 : 0.0;
            cells[r] = values[r] != 0.0 ? "1" : "0";
        }
        b.push(ColumnSchema{complication_names[i], ColumnKind::target, {}}, std::move(cells),
               std::vector<char>(n, 0), std::move(values));
    }
    {
        // Lethal outcome: 0 alive, 1..7 the recorded cause of death.
        const double cause_weights[] = {90, 18, 54, 44, 12, 27, 26};
        const double cause_total = std::accumulate(std::begin(cause_weights),
                                                   std::end(cause_weights), 0.0);
        auto gen = b.stream("target", "LET_IS");
        std::vector<std::string> cells(n);
        std::vector<double> values(n, 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            if (!deceased[r]) {
                cells[r] = "0";
                continue;
            }
            double u = gen.uniform() * cause_total;
            int cause = 1;
            for (int k = 0; k < 7; ++k) {
                if (u < cause_weights[k]) {
                    cause = k + 1;
                    break;
                }
                u -= cause_weights[k];
            }
            values[r] = cause;
            cells[r] = std::to_string(cause);
        }
        b.push(ColumnSchema{"LET_IS", ColumnKind::target, {}}, std::move(cells),
               std::vector<char>(n, 0), std::move(values));
    }

    tabular::validate_schema(b.table.schema);
    return std::move(b.table);
}

void write_reference_dataset(const std::string& csv_path, const std::string& schema_path,
                             const ReplicaSpec& spec) {
    const Table table = reference_replica(spec);
    tabular::save_table(table, csv_path);
    tabular::save_schema(table.schema, schema_path);
}

}  // namespace mipred::datagen
