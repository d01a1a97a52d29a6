#include <CLI11.hpp>
#include <Eigen/Core>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "ecx/errors.hpp"
#include "ecx/green.hpp"
#include "ecx/io.hpp"
#include "ecx/pipeline.hpp"
#include "ecx/version.hpp"

namespace {

using ordered_json = nlohmann::ordered_json;

// One pipeline subcommand: a config file, the stages it runs, and the flag
// overrides recorded in the order they appeared.
struct PipelineCmd {
    std::string config_path;
    std::vector<std::string> only;
    std::vector<std::function<void(ecx::RunConfig&)>> overrides;
};

template <typename T>
void add_override(CLI::App* cmd, PipelineCmd* st, const std::string& flag,
                  const std::string& desc, void (*set)(ecx::RunConfig&, const T&)) {
    cmd->add_option_function<T>(
        flag,
        [st, set](const T& v) {
            st->overrides.push_back([set, v](ecx::RunConfig& c) { set(c, v); });
        },
        desc);
}

void add_pipeline_options(CLI::App* cmd, PipelineCmd* st) {
    cmd->add_option("config", st->config_path, "JSON configuration file")
        ->check(CLI::ExistingFile);
    add_override<std::string>(cmd, st, "--output-dir", "artifact directory",
                              +[](ecx::RunConfig& c, const std::string& v) { c.output_dir = v; });
    add_override<std::uint64_t>(cmd, st, "--seed", "RNG seed (overrides config)",
                                +[](ecx::RunConfig& c, const std::uint64_t& v) { c.seed = v; });
    add_override<std::string>(cmd, st, "--input", "primary input file",
                              +[](ecx::RunConfig& c, const std::string& v) { c.input.path = v; });
    add_override<std::string>(cmd, st, "--input2", "second-layer input file",
                              +[](ecx::RunConfig& c, const std::string& v) { c.input2.path = v; });
    add_override<std::string>(cmd, st, "--layer", "primary layer name",
                              +[](ecx::RunConfig& c, const std::string& v) { c.input.layer = v; });
    add_override<std::string>(cmd, st, "--layer2", "second layer name",
                              +[](ecx::RunConfig& c, const std::string& v) { c.input2.layer = v; });
    add_override<std::string>(cmd, st, "--kind", "primary input kind: records|patents",
                              +[](ecx::RunConfig& c, const std::string& v) { c.input.kind = v; });
    add_override<std::string>(
        cmd, st, "--counting", "patent counting: fractional|full",
        +[](ecx::RunConfig& c, const std::string& v) { c.input.counting = v; });
    add_override<int>(cmd, st, "--geo-level", "patent location prefix length (0 = full id)",
                      +[](ecx::RunConfig& c, const int& v) { c.input.geo_level = v; });
    add_override<int>(cmd, st, "--period", "period (year) to analyse",
                      +[](ecx::RunConfig& c, const int& v) { c.period = v; });
    add_override<int>(cmd, st, "--digits", "code aggregation depth (0 = as ingested)",
                      +[](ecx::RunConfig& c, const int& v) { c.digits = v; });
    add_override<double>(cmd, st, "--threshold", "RCA binarization threshold",
                         +[](ecx::RunConfig& c, const double& v) { c.threshold = v; });
    add_override<std::string>(cmd, st, "--method", "complexity method: reflections|eci|fitness",
                              +[](ecx::RunConfig& c, const std::string& v) { c.method = v; });
    add_override<double>(cmd, st, "--tol", "iterative solver tolerance",
                         +[](ecx::RunConfig& c, const double& v) { c.tol = v; });
    add_override<int>(cmd, st, "--max-iter", "iterative solver iteration cap",
                      +[](ecx::RunConfig& c, const int& v) { c.max_iter = v; });
    add_override<std::string>(cmd, st, "--scale", "fitness scale: mean-one|dummy",
                              +[](ecx::RunConfig& c, const std::string& v) { c.scale = v; });
    add_override<std::string>(
        cmd, st, "--exogenous-q", "reference complexity score CSV",
        +[](ecx::RunConfig& c, const std::string& v) { c.exogenous_q = v; });
    add_override<int>(cmd, st, "--reflections-iterations", "reflections iteration count",
                      +[](ecx::RunConfig& c, const int& v) { c.reflections_iterations = v; });
    add_override<double>(cmd, st, "--phi-cutoff", "proximity edge cutoff for plot exports",
                         +[](ecx::RunConfig& c, const double& v) { c.phi_cutoff = v; });
    add_override<int>(cmd, st, "--lag", "assist target period offset",
                      +[](ecx::RunConfig& c, const int& v) { c.lag = v; });
    add_override<int>(cmd, st, "--samples", "validation Monte Carlo sample count",
                      +[](ecx::RunConfig& c, const int& v) { c.samples = v; });
    add_override<double>(cmd, st, "--alpha", "validation significance level",
                         +[](ecx::RunConfig& c, const double& v) { c.alpha = v; });
    add_override<std::string>(
        cmd, st, "--correction", "multiple-testing correction: bonferroni|bh-fdr",
        +[](ecx::RunConfig& c, const std::string& v) { c.correction = v; });
    add_override<std::string>(cmd, st, "--green-list", "green classification code list",
                              +[](ecx::RunConfig& c, const std::string& v) { c.green_list = v; });
    add_override<std::string>(
        cmd, st, "--green-scheme", "scheme of the green list (defaults to the input scheme)",
        +[](ecx::RunConfig& c, const std::string& v) { c.green_scheme = v; });
    add_override<std::string>(cmd, st, "--gci-mode", "GCI weights: raw|rank",
                              +[](ecx::RunConfig& c, const std::string& v) { c.gci_mode = v; });
    add_override<std::string>(
        cmd, st, "--gcp-weighting", "GCP weighting: unweighted|pci",
        +[](ecx::RunConfig& c, const std::string& v) { c.gcp_weighting = v; });
}

void execute(const PipelineCmd& cmd) {
    ecx::RunConfig config =
        cmd.config_path.empty() ? ecx::RunConfig{} : ecx::load_config(cmd.config_path);
    for (const auto& apply : cmd.overrides) apply(config);
    ecx::RunManifest manifest = ecx::run_pipeline(config, cmd.only);
    for (const ecx::StageRecord& s : manifest.stages) {
        std::cout << "ok " << s.name << " (" << s.wall_seconds << "s, " << s.outputs.size()
                  << (s.outputs.size() == 1 ? " output)" : " outputs)") << '\n';
        for (const std::string& w : s.warnings) std::cerr << s.name << ": " << w << '\n';
    }
    std::cout << "manifest: " << (std::filesystem::path(config.output_dir) / "manifest.json").string()
              << '\n';
}

// Ad-hoc green scoring from artifact files, outside any pipeline run.
struct GreenScoreCmd {
    std::string matrix, pci, proximity, green_list, green_scheme;
    std::string gci_mode = "raw";
    std::string gcp_weighting = "unweighted";
    std::string output = "green_scores.csv";
};

void execute(const GreenScoreCmd& g) {
    ecx::BinaryBipartite m = ecx::io::load_binary(g.matrix);
    ecx::ProximityNetwork net = ecx::io::load_proximity(g.proximity);
    ecx::ScoreVector pci = ecx::io::load_scores(g.pci);
    pci.axis = ecx::Axis::Activity;

    std::ifstream in(g.green_list, std::ios::binary);
    if (!in) throw ecx::data_error("cannot read " + g.green_list);
    const ecx::Scheme scheme =
        g.green_scheme.empty() ? m.scheme : ecx::scheme_from_string(g.green_scheme);
    ecx::GreenClassification cls = ecx::parse_green_list(
        in, std::filesystem::path(g.green_list).stem().string(), scheme);
    std::vector<bool> mask = ecx::green_mask(m.activities, m.scheme, cls);

    ecx::GreenScores scores = ecx::green_scores(
        m, net, pci, mask,
        g.gci_mode == "rank" ? ecx::GciMode::RankTransformed : ecx::GciMode::Raw,
        g.gcp_weighting == "pci" ? ecx::GcpWeighting::PciWeighted
                                 : ecx::GcpWeighting::Unweighted);
    ecx::io::save_green(scores, g.output);
    for (const std::string& w : scores.warnings) std::cerr << w << '\n';
    std::cout << "ok green score (" << scores.geos.size() << " geos) -> " << g.output << '\n';
}

int report_error(const std::string& kind, const std::string& message, int code,
                 const std::vector<ecx::parse_error::bad_line>* lines = nullptr) {
    ordered_json j{{"error", kind}, {"message", message}, {"exit_code", code}};
    if (lines) {
        j["lines"] = ordered_json::array();
        for (const auto& l : *lines)
            j["lines"].push_back(ordered_json{{"line", l.line}, {"message", l.message}});
    }
    std::cerr << j.dump() << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    if (const char* threads = std::getenv("ECX_THREADS")) {
        const int n = std::atoi(threads);
        if (n > 0) Eigen::setNbThreads(n);
    }

    CLI::App app{
        "Economic-complexity toolkit: specialization matrices, complexity metrics,\n"
        "relatedness networks, null-model validation, and green-transition scores.\n"
        "ECX_THREADS sets the linear-algebra thread count."};
    app.set_version_flag("--version", std::string(ecx::version));
    bool print_defaults = false;
    app.add_flag("--print-default-config", print_defaults,
                 "print the default configuration as JSON and exit");
    app.require_subcommand(0, 1);

    std::vector<std::unique_ptr<PipelineCmd>> cmds;
    std::function<void()> action;

    auto add_stage = [&](const std::string& name, const std::string& desc,
                         std::vector<std::string> only) {
        cmds.push_back(std::make_unique<PipelineCmd>());
        PipelineCmd* st = cmds.back().get();
        st->only = std::move(only);
        CLI::App* cmd = app.add_subcommand(name, desc);
        add_pipeline_options(cmd, st);
        cmd->callback([&action, st]() {
            if (!action) action = [st]() { execute(*st); };
        });
        return cmd;
    };

    add_stage("run", "execute every stage the configuration enables", {});
    add_stage("ingest", "parse inputs and build weight matrices", {"ingest"});
    add_stage("rca", "comparative-advantage ratios from cached matrices", {"rca"});
    add_stage("binarize", "threshold RCA into the 0/1 specialization matrix", {"binarize"});
    add_stage("complexity", "complexity scores (reflections, ECI/PCI, or fitness)",
              {"complexity"});
    add_stage("proximity", "activity proximity network", {"proximity"});
    add_stage("assist", "lagged or cross-layer assist matrix", {"assist"});
    add_stage("validate", "null-model validation of assist links", {"validate"});
    CLI::App* green = add_stage("green", "green complexity scores from cached artifacts",
                                {"green"});
    add_stage("nestedness", "matrix nestedness report", {"nestedness"});
    add_stage("report", "plot-ready CSV bundles", {"report"});

    GreenScoreCmd gs;
    CLI::App* score = green->add_subcommand("score", "score green metrics from artifact files");
    score->add_option("--matrix", gs.matrix, "binary matrix CSV")
        ->required()
        ->check(CLI::ExistingFile);
    score->add_option("--pci", gs.pci, "activity complexity score CSV")
        ->required()
        ->check(CLI::ExistingFile);
    score->add_option("--proximity", gs.proximity, "proximity matrix CSV")
        ->required()
        ->check(CLI::ExistingFile);
    score->add_option("--green-list", gs.green_list, "green classification code list")
        ->required()
        ->check(CLI::ExistingFile);
    score->add_option("--green-scheme", gs.green_scheme,
                      "scheme of the green list (defaults to the matrix scheme)");
    score->add_option("--gci-mode", gs.gci_mode, "GCI weights: raw|rank");
    score->add_option("--gcp-weighting", gs.gcp_weighting, "GCP weighting: unweighted|pci");
    score->add_option("--output", gs.output, "output CSV path");
    score->callback([&action, &gs]() { action = [&gs]() { execute(gs); }; });

    try {
        app.parse(argc, argv);
        if (print_defaults && !action) {
            std::cout << ecx::default_config_json().dump(2) << '\n';
            return 0;
        }
        if (!action) {
            std::cout << app.help();
            return 2;
        }
        action();
        return 0;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        return report_error("usage", e.what(), 2);
    } catch (const ecx::config_error& e) {
        return report_error("config", e.what(), 2);
    } catch (const ecx::parse_error& e) {
        const auto& lines = e.lines();
        return report_error("parse", e.what(), 3, &lines);
    } catch (const ecx::data_error& e) {
        return report_error("data", e.what(), 3);
    } catch (const ecx::convergence_error& e) {
        return report_error("convergence", e.what(), 4);
    } catch (const std::exception& e) {
        return report_error("internal", e.what(), 1);
    }
}
