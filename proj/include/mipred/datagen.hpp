#pragma once

#include <cstdint>
#include <string>

#include "mipred/table.hpp"

namespace mipred::datagen {

// Deterministic stand-in for the public myocardial-infarction complications
// dataset, matching its documented shape: 1700 rows; 124 columns (111 input
// features, 12 target columns, 1 id); 271 deceased / 1429 alive after target
// binarization; 61 feature columns surviving the >10% missing and >95%
// dominance cleaning rules; roughly 7.6% of feature cells missing. Clinical
// outcome structure (low admission systolic pressure, short attack-to-
// admission time, pain relapse, age, white cell count raising risk) is
// planted so downstream attribution has real signal to find.
//
// The real dataset (UCI id 579) drops in as a replacement: same schema file,
// same column names. See README for the swap instructions.
struct ReplicaSpec {
    std::size_t n_rows = 1700;
    std::size_t n_deceased = 271;
    std::uint64_t seed = 1990;  // fixed; the replica is part of the repo contract
};

tabular::Table reference_replica(const ReplicaSpec& spec = {});

// Writes the replica CSV plus its schema file.
void write_reference_dataset(const std::string& csv_path, const std::string& schema_path,
                             const ReplicaSpec& spec = {});

}  // namespace mipred::datagen
