// Integration tests driving the installed binaries end to end.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "test_support.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run(const std::string& command) {
    const int status = std::system((command + " > /dev/null 2>&1").c_str());
    if (status == -1) return -1;
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CliFixture {
    testsupport::TempDir tmp{"cli"};
    std::string data, schema;

    CliFixture() {
        REQUIRE(run(std::string(MIPRED_DATAGEN) + " --out " + tmp.path("data") +
                    " --rows 400 --deceased 64") == 0);
        data = tmp.path("data") + "/mi_complications.csv";
        schema = tmp.path("data") + "/mi_schema.txt";
    }

    std::string cli(const std::string& args) const {
        return std::string(MIPRED_CLI) + " " + args + " --data " + data + " --schema " +
               schema;
    }
};

}  // namespace

TEST_CASE("prepare writes the full artifact set") {
    CliFixture fx;
    const auto out = fx.tmp.path("prepared");
    REQUIRE(run(fx.cli("prepare --out " + out)) == 0);
    for (const char* name : {"train.csv", "test.csv", "schema_prepared.txt",
                             "cleaning_report.json", "pipeline_state.json"})
        CHECK(fs::exists(fs::path(out) / name));

    const json report = json::parse(slurp(out + "/cleaning_report.json"));
    CHECK(report["surviving_count"] == 61);
    CHECK(report.contains("seed"));
    CHECK(report.contains("config_hash"));
    CHECK(report.contains("missing_row_fraction"));
    CHECK(report.contains("missing_cell_fraction"));

    const json state = json::parse(slurp(out + "/pipeline_state.json"));
    CHECK(state["mode"] == "preprocessed");
    CHECK(state.contains("columns"));
}

TEST_CASE("prepare raw mode records an identity pipeline state") {
    CliFixture fx;
    const auto out = fx.tmp.path("raw_prep");
    REQUIRE(run(fx.cli("prepare --pipeline raw --out " + out)) == 0);
    const json state = json::parse(slurp(out + "/pipeline_state.json"));
    CHECK(state["mode"] == "raw");
    CHECK_FALSE(state.contains("columns"));  // no fitted statistics
    CHECK_FALSE(state.contains("encoded"));
}

TEST_CASE("missing data file exits 2 without partial outputs") {
    CliFixture fx;
    const auto out = fx.tmp.path("nope_out");
    const int code = run(std::string(MIPRED_CLI) + " prepare --data " +
                         fx.tmp.path("absent.csv") + " --schema " + fx.schema + " --out " +
                         out);
    CHECK(code == 2);
    CHECK_FALSE(fs::exists(out));
}

TEST_CASE("usage errors exit 2, help exits 0") {
    CHECK(run(std::string(MIPRED_CLI) + " --help") == 0);
    CHECK(run(std::string(MIPRED_CLI) + " frobnicate") == 2);
    CHECK(run(std::string(MIPRED_CLI) + " train --no-such-flag") == 2);
    CliFixture fx;
    CHECK(run(fx.cli("report --out " + fx.tmp.path("empty_out"))) == 2);
}

TEST_CASE("train, evaluate, explain and report chain together") {
    CliFixture fx;
    const auto out = fx.tmp.path("chain");
    const std::string small = " --gbdt.n_trees 40 --gbdt.max_leaves 15";
    REQUIRE(run(fx.cli("train --pipeline raw --out " + out + small)) == 0);
    REQUIRE(fs::exists(out + "/model.json"));
    REQUIRE(run(fx.cli("evaluate --pipeline raw --out " + out + small)) == 0);
    REQUIRE(run(fx.cli("explain --pipeline raw --out " + out + small)) == 0);
    for (const char* name :
         {"evaluation.json", "evaluation.txt", "shap_values.json", "shap_values.csv",
          "importance_ranking.txt", "beeswarm.svg"})
        CHECK(fs::exists(fs::path(out) / name));

    // The beeswarm is well-formed XML with one group per plotted feature.
    const auto svg = slurp(out + "/beeswarm.svg");
    std::size_t groups = 0;
    CHECK(testsupport::xml_well_formed(svg, &groups));
    CHECK(groups == 20);  // default max_features

    REQUIRE(run(fx.cli("report --out " + out)) == 0);
    const auto report = slurp(out + "/report.txt");
    CHECK(report.find("wF1") != std::string::npos);
    CHECK(report.find("gbdt (test)") != std::string::npos);

    // Every artifact embeds the stamp.
    const json evaluation = json::parse(slurp(out + "/evaluation.json"));
    CHECK(evaluation.contains("format_version"));
    CHECK(evaluation.contains("seed"));
    CHECK(evaluation.contains("config_hash"));
}

TEST_CASE("re-running with identical config reproduces artifacts byte for byte") {
    CliFixture fx;
    const auto out_a = fx.tmp.path("rep_a");
    const auto out_b = fx.tmp.path("rep_b");
    const std::string small = " --gbdt.n_trees 30 --gbdt.max_leaves 9 --seed 23";
    REQUIRE(run(fx.cli("train --pipeline preprocessed --out " + out_a + small)) == 0);
    REQUIRE(run(fx.cli("train --pipeline preprocessed --out " + out_b + small)) == 0);
    CHECK(slurp(out_a + "/model.json") == slurp(out_b + "/model.json"));
    CHECK(slurp(out_a + "/pipeline_state.json") == slurp(out_b + "/pipeline_state.json"));
    CHECK(slurp(out_a + "/train_report.json") == slurp(out_b + "/train_report.json"));

    // A different seed changes the config hash (and generally the model).
    const auto out_c = fx.tmp.path("rep_c");
    REQUIRE(run(fx.cli("train --pipeline preprocessed --out " + out_c +
                       " --gbdt.n_trees 30 --gbdt.max_leaves 9 --seed 24")) == 0);
    const json a = json::parse(slurp(out_a + "/model.json"));
    const json c = json::parse(slurp(out_c + "/model.json"));
    CHECK(a["config_hash"] != c["config_hash"]);
}

TEST_CASE("config file seeds defaults and flags override it") {
    CliFixture fx;
    const auto cfg = fx.tmp.path("run.ini");
    {
        std::ofstream out(cfg);
        out << "data = " << fx.data << "\n"
            << "schema = " << fx.schema << "\n"
            << "pipeline = raw\n"
            << "seed = 5\n\n"
            << "[gbdt]\n"
            << "n_trees = 17\n"
            << "max_leaves = 8\n";
    }
    const auto out = fx.tmp.path("cfg_out");
    REQUIRE(run(std::string(MIPRED_CLI) + " train --config " + cfg + " --out " + out +
                " --gbdt.n_trees 11") == 0);
    const json model = json::parse(slurp(out + "/model.json"));
    CHECK(model["params"]["n_trees"] == 11);    // flag wins
    CHECK(model["params"]["max_leaves"] == 8);  // file wins over default
    CHECK(model["seed"] == 5);

    CHECK(run(std::string(MIPRED_CLI) + " train --config " + fx.tmp.path("missing.ini")) ==
          2);
}

TEST_CASE("ablate emits the two-pipeline table with a t-test") {
    CliFixture fx;
    const auto out = fx.tmp.path("ablate_out");
    REQUIRE(run(fx.cli("ablate --out " + out +
                       " --cv-folds 4 --gbdt.n_trees 25 --gbdt.max_leaves 9")) == 0);
    const json j = json::parse(slurp(out + "/ablation.json"));
    CHECK(j["pipeline_1"]["folds"].size() == 4);
    CHECK(j["pipeline_2"]["folds"].size() == 4);
    CHECK(j["t_test"].contains("p_value"));
    CHECK(j.contains("partition_hash"));
    const auto text = slurp(out + "/ablation.txt");
    CHECK(text.find("Pipeline") != std::string::npos);
    CHECK(text.find("paired t-test") != std::string::npos);
    CHECK(text.find("partition_hash") != std::string::npos);
}
