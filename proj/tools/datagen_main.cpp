// Writes the bundled stand-in for the myocardial-infarction complications
// dataset (CSV + schema). The real public dataset drops in via the same
// schema file; see the README.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "mipred/datagen.hpp"
#include "mipred/error.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Generate the bundled reference dataset replica"};
    std::string out_dir = "data";
    mipred::datagen::ReplicaSpec spec;
    app.add_option("--out", out_dir, "Output directory")->capture_default_str();
    app.add_option("--rows", spec.n_rows, "Row count")->capture_default_str();
    app.add_option("--deceased", spec.n_deceased, "Deceased count")->capture_default_str();
    app.add_option("--seed", spec.seed, "Generator seed")->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    try {
        std::filesystem::create_directories(out_dir);
        const auto csv = (std::filesystem::path(out_dir) / "mi_complications.csv").string();
        const auto schema = (std::filesystem::path(out_dir) / "mi_schema.txt").string();
        mipred::datagen::write_reference_dataset(csv, schema, spec);
        std::cout << "wrote " << csv << " and " << schema << "\n";
    } catch (const mipred::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
