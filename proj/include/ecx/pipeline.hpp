#ifndef ECX_PIPELINE_HPP
#define ECX_PIPELINE_HPP

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "ecx/records.hpp"

namespace ecx {

// One input file: either (geo, activity, value, period) records or patent
// rows that are turned into records by counting.
struct InputConfig {
    std::string path;
    std::string kind = "records";  // records | patents
    std::string layer = "trade";
    CsvSchema schema;
    PatentSchema patent_schema;
    std::string counting = "fractional";  // patents: fractional | full
    int geo_level = 0;                    // patents: leading chars of the location id
};

struct RunConfig {
    std::string output_dir = "out";
    std::uint64_t seed = 0;
    InputConfig input;
    InputConfig input2;  // optional second layer; empty path disables
    int period = 0;
    int digits = 0;  // code aggregation depth; 0 keeps codes as ingested
    double threshold = 1.0;

    std::string method = "fitness";  // reflections | eci | fitness
    double tol = 1e-10;
    int max_iter = 100000;
    std::string scale = "mean-one";  // mean-one | dummy
    std::string exogenous_q;         // score CSV; empty disables
    int reflections_iterations = 20;

    double phi_cutoff = 0.6;

    int lag = 0;  // assist target period = period + lag
    int samples = 1000;
    double alpha = 0.05;
    std::string correction = "bh-fdr";  // bonferroni | bh-fdr

    std::string green_list;    // path; empty disables the green stage
    std::string green_scheme;  // defaults to the input scheme
    std::string gci_mode = "raw";           // raw | rank
    std::string gcp_weighting = "unweighted";  // unweighted | pci

    // Stages to execute; empty means every stage the config enables.
    std::vector<std::string> stages;
};

// All defaults, as a documented JSON object (--print-default-config).
nlohmann::ordered_json default_config_json();

RunConfig config_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json config_to_json(const RunConfig& config);
RunConfig load_config(const std::filesystem::path& path);

// Throws config_error on invalid parameters, data_error on missing inputs.
void validate_config(const RunConfig& config);

// Stage names in dependency order for this config.
std::vector<std::string> enabled_stages(const RunConfig& config);

struct StageRecord {
    std::string name;
    double wall_seconds = 0.0;
    std::vector<std::string> outputs;   // paths relative to output_dir
    std::vector<std::string> warnings;
    nlohmann::ordered_json details;     // convergence records, counts, parameters
};

struct RunManifest {
    std::string version;
    nlohmann::ordered_json config;
    std::vector<std::pair<std::string, std::string>> inputs;  // path, digest
    std::vector<StageRecord> stages;

    nlohmann::ordered_json to_json() const;
};

// Executes the requested stages in dependency order. Each stage reads its
// upstream artifacts from disk, so any suffix of the pipeline can be rerun
// from cached outputs. A failing stage has its output directory renamed to
// "<stage>.quarantine"; the manifest written so far plus an error report
// land in the output directory before the exception propagates.
RunManifest run_pipeline(const RunConfig& config, const std::vector<std::string>& only = {});

}  // namespace ecx

#endif  // ECX_PIPELINE_HPP
