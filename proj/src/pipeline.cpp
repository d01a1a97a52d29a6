#include "ecx/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <set>
#include <utility>

#include "ecx/assist.hpp"
#include "ecx/bicm.hpp"
#include "ecx/bipartite.hpp"
#include "ecx/eci.hpp"
#include "ecx/errors.hpp"
#include "ecx/fitness.hpp"
#include "ecx/green.hpp"
#include "ecx/ingest.hpp"
#include "ecx/io.hpp"
#include "ecx/nestedness.hpp"
#include "ecx/proximity.hpp"
#include "ecx/reflections.hpp"
#include "ecx/validate.hpp"
#include "ecx/version.hpp"

namespace ecx {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kAllStages[] = {"ingest",  "rca",      "binarize", "complexity",
                                      "proximity", "assist", "validate", "green",
                                      "nestedness", "report"};

ordered_json schema_json(const CsvSchema& s) {
    return ordered_json{{"geo_column", s.geo_column},
                        {"activity_column", s.activity_column},
                        {"value_column", s.value_column},
                        {"period_column", s.period_column},
                        {"scheme", to_string(s.scheme)},
                        {"min_year", s.min_year},
                        {"max_year", s.max_year},
                        {"mode", s.mode == ParseMode::Strict ? "strict" : "lenient"}};
}

CsvSchema schema_from(const ordered_json& j) {
    CsvSchema s;
    s.geo_column = j.value("geo_column", s.geo_column);
    s.activity_column = j.value("activity_column", s.activity_column);
    s.value_column = j.value("value_column", s.value_column);
    s.period_column = j.value("period_column", s.period_column);
    s.scheme = scheme_from_string(j.value("scheme", "HS"));
    s.min_year = j.value("min_year", s.min_year);
    s.max_year = j.value("max_year", s.max_year);
    const std::string mode = j.value("mode", "strict");
    if (mode != "strict" && mode != "lenient")
        throw config_error("parse mode must be strict or lenient, got '" + mode + "'");
    s.mode = mode == "strict" ? ParseMode::Strict : ParseMode::Lenient;
    return s;
}

ordered_json patent_schema_json(const PatentSchema& s) {
    return ordered_json{{"id_column", s.id_column},
                        {"period_column", s.period_column},
                        {"codes_column", s.codes_column},
                        {"locations_column", s.locations_column},
                        {"scheme", to_string(s.scheme)},
                        {"min_year", s.min_year},
                        {"max_year", s.max_year},
                        {"mode", s.mode == ParseMode::Strict ? "strict" : "lenient"}};
}

PatentSchema patent_schema_from(const ordered_json& j) {
    PatentSchema s;
    s.id_column = j.value("id_column", s.id_column);
    s.period_column = j.value("period_column", s.period_column);
    s.codes_column = j.value("codes_column", s.codes_column);
    s.locations_column = j.value("locations_column", s.locations_column);
    s.scheme = scheme_from_string(j.value("scheme", "CPC"));
    s.min_year = j.value("min_year", s.min_year);
    s.max_year = j.value("max_year", s.max_year);
    s.mode = j.value("mode", "strict") == std::string("lenient") ? ParseMode::Lenient
                                                                 : ParseMode::Strict;
    return s;
}

ordered_json input_json(const InputConfig& in) {
    return ordered_json{{"path", in.path},
                        {"kind", in.kind},
                        {"layer", in.layer},
                        {"schema", schema_json(in.schema)},
                        {"patent_schema", patent_schema_json(in.patent_schema)},
                        {"counting", in.counting},
                        {"geo_level", in.geo_level}};
}

InputConfig input_from(const ordered_json& j) {
    InputConfig in;
    in.path = j.value("path", "");
    in.kind = j.value("kind", "records");
    in.layer = j.value("layer", "trade");
    if (j.contains("schema")) in.schema = schema_from(j["schema"]);
    if (j.contains("patent_schema")) in.patent_schema = patent_schema_from(j["patent_schema"]);
    in.counting = j.value("counting", "fractional");
    in.geo_level = j.value("geo_level", 0);
    return in;
}

Scheme input_scheme(const InputConfig& in) {
    return in.kind == "patents" ? in.patent_schema.scheme : in.schema.scheme;
}

// Artifact layout under output_dir; every stage addresses upstream files
// through these helpers only.
struct Paths {
    fs::path root;
    explicit Paths(const RunConfig& c) : root(c.output_dir) {}

    fs::path stage(const std::string& name) const { return root / name; }
    fs::path records(bool second) const {
        return root / "ingest" / (second ? "records2.csv" : "records.csv");
    }
    static std::string tag(const std::string& layer, int period) {
        return layer + "_" + std::to_string(period);
    }
    fs::path matrix(const std::string& layer, int period) const {
        return root / "ingest" / ("matrix_" + tag(layer, period) + ".csv");
    }
    fs::path rca(const std::string& layer, int period) const {
        return root / "rca" / ("rca_" + tag(layer, period) + ".csv");
    }
    fs::path binary(const std::string& layer, int period) const {
        return root / "binarize" / ("m_" + tag(layer, period) + ".csv");
    }
    fs::path scores(const std::string& name) const {
        return root / "complexity" / (name + ".csv");
    }
    fs::path proximity() const { return root / "proximity" / "phi.csv"; }
    fs::path assist() const { return root / "assist" / "b.csv"; }
    fs::path bicm(bool second) const {
        return root / "validate" / (second ? "bicm_target.csv" : "bicm_source.csv");
    }
    fs::path validated() const { return root / "validate" / "edges.csv"; }
    fs::path green() const { return root / "green" / "green_scores.csv"; }
    fs::path gtf() const { return root / "green" / "gtf.csv"; }
    fs::path nestedness() const { return root / "nestedness" / "report.json"; }
    fs::path plots() const { return root / "report" / "plots"; }
};

std::string relative_to_root(const fs::path& p, const fs::path& root) {
    return p.lexically_relative(root).generic_string();
}

// Target layer/period of the assist computation: the second input when
// present, otherwise the primary layer shifted by the lag.
struct AssistSpec {
    std::string source_layer, target_layer;
    int source_period, target_period;
};

AssistSpec assist_spec(const RunConfig& c) {
    AssistSpec s;
    s.source_layer = c.input.layer;
    s.source_period = c.period;
    s.target_layer = c.input2.path.empty() ? c.input.layer : c.input2.layer;
    s.target_period = c.period + c.lag;
    return s;
}

bool assist_enabled(const RunConfig& c) { return c.lag > 0 || !c.input2.path.empty(); }

FitnessOptions fitness_options(const RunConfig& c) {
    FitnessOptions opt;
    opt.tol = c.tol;
    opt.max_iter = c.max_iter;
    opt.scale = c.scale == "dummy" ? FitnessScale::Dummy : FitnessScale::MeanOne;
    return opt;
}

// ---- individual stages ----------------------------------------------------

void stage_ingest(const RunConfig& c, const Paths& paths, StageRecord& rec) {
    const bool two = !c.input2.path.empty();
    for (int side = 0; side < (two ? 2 : 1); ++side) {
        const InputConfig& in = side == 0 ? c.input : c.input2;
        IngestReport report;
        std::vector<RawRecord> records;
        std::ifstream stream(in.path, std::ios::binary);
        if (!stream) throw data_error("cannot read " + in.path);
        if (in.kind == "patents") {
            std::vector<PatentRecord> patents = parse_patents(stream, in.patent_schema, &report);
            records = count_patents(patents,
                                    in.counting == "full" ? CountMode::Full : CountMode::Fractional,
                                    in.geo_level, c.digits);
        } else {
            records = parse_records(stream, in.schema, &report);
        }
        io::save_records(records, input_scheme(in), paths.records(side == 1));
        rec.outputs.push_back(relative_to_root(paths.records(side == 1), paths.root));

        std::set<int> periods{side == 0 ? c.period : assist_spec(c).target_period};
        if (side == 0 && assist_enabled(c) && c.input2.path.empty())
            periods.insert(assist_spec(c).target_period);
        for (int period : periods) {
            IngestReport mreport;
            WeightedBipartite m = build_matrix(records, period, c.digits, in.layer, &mreport);
            io::save_weighted(m, paths.matrix(in.layer, period));
            rec.outputs.push_back(relative_to_root(paths.matrix(in.layer, period), paths.root));
            ordered_json detail{{"layer", in.layer},
                                {"period", period},
                                {"geos", m.geos.size()},
                                {"activities", m.activities.size()},
                                {"zero_geos", mreport.zero_geos},
                                {"zero_activities", mreport.zero_activities}};
            rec.details["matrices"].push_back(detail);
        }
        rec.details[side == 0 ? "input" : "input2"] =
            ordered_json{{"rows_read", report.rows_read},
                         {"records_kept", report.records_kept},
                         {"zero_value_rows", report.zero_value_rows},
                         {"skipped", report.skipped.size()}};
        for (const auto& bad : report.skipped)
            rec.warnings.push_back(in.path + ":" + std::to_string(bad.line) + ": " + bad.message);
    }
}

// Matrices the downstream network stages need, as (layer, period) pairs.
std::vector<std::pair<std::string, int>> needed_matrices(const RunConfig& c) {
    std::vector<std::pair<std::string, int>> out{{c.input.layer, c.period}};
    if (assist_enabled(c)) {
        AssistSpec s = assist_spec(c);
        if (std::pair<std::string, int>{s.target_layer, s.target_period} != out[0])
            out.emplace_back(s.target_layer, s.target_period);
    }
    return out;
}

void stage_rca(const RunConfig& c, const Paths& paths, StageRecord& rec) {
    for (const auto& [layer, period] : needed_matrices(c)) {
        WeightedBipartite m = io::load_weighted(paths.matrix(layer, period));
        RcaMatrix rca = compute_rca(m);
        io::save_rca(rca, paths.rca(layer, period));
        rec.outputs.push_back(relative_to_root(paths.rca(layer, period), paths.root));
        rec.details["undefined_cells_" + Paths::tag(layer, period)] =
            static_cast<std::int64_t>(rca.defined.size() - rca.defined.count());
    }
}

void stage_binarize(const RunConfig& c, const Paths& paths, StageRecord& rec) {
    for (const auto& [layer, period] : needed_matrices(c)) {
        RcaMatrix rca = io::load_rca(paths.rca(layer, period));
        BinaryBipartite m = binarize(rca, c.threshold);
        io::save_binary(m, paths.binary(layer, period));
        rec.outputs.push_back(relative_to_root(paths.binary(layer, period), paths.root));
        rec.details["fill_" + Paths::tag(layer, period)] =
            m.entries.sum() / static_cast<double>(m.entries.size());
    }
}

// The solvers require positive degrees; zero rows/columns are dropped here,
// once, and the drop is recorded.
BinaryBipartite load_trimmed(const Paths& paths, const RunConfig& c, StageRecord& rec) {
    BinaryBipartite m = io::load_binary(paths.binary(c.input.layer, c.period));
    BinaryBipartite trimmed = drop_zero_degrees(m);
    if (trimmed.geos.size() != m.geos.size() || trimmed.activities.size() != m.activities.size())
        rec.warnings.push_back("dropped " + std::to_string(m.geos.size() - trimmed.geos.size()) +
                               " zero-degree geos and " +
                               std::to_string(m.activities.size() - trimmed.activities.size()) +
                               " activities");
    return trimmed;
}

void stage_complexity(const RunConfig& c, const Paths& paths, StageRecord& rec) {
    BinaryBipartite m = load_trimmed(paths, c, rec);
    auto emit = [&](const ScoreVector& s, const std::string& name) {
        io::save_scores(s, paths.scores(name));
        rec.outputs.push_back(relative_to_root(paths.scores(name), paths.root));
        rec.details[name] = ordered_json{{"iterations", s.convergence.iterations},
                                         {"residual", s.convergence.residual},
                                         {"converged", s.convergence.converged}};
        for (const std::string& w : s.warnings) rec.warnings.push_back(name + ": " + w);
    };

    const bool want_pci = !c.green_list.empty();
    if (c.method == "reflections") {
        ReflectionsTrace tr = reflections(m, c.reflections_iterations);
        int even = c.reflections_iterations - c.reflections_iterations % 2;
        ScoreVector geo;
        geo.axis = Axis::Geo;
        geo.ids = m.geos;
        geo.values = tr.geo_std[static_cast<std::size_t>(even)];
        geo.method = Method::Reflections;
        geo.normalization = Normalization::Standardized;
        geo.convergence.iterations = even;
        if (!tr.geo_std_ok[static_cast<std::size_t>(even)])
            geo.warnings.push_back("iterate is constant; standardized scores are zero");
        ScoreVector act = geo;
        act.axis = Axis::Activity;
        act.ids = m.activities;
        act.values = tr.activity_std[static_cast<std::size_t>(even)];
        act.warnings.clear();
        if (!tr.activity_std_ok[static_cast<std::size_t>(even)])
            act.warnings.push_back("iterate is constant; standardized scores are zero");
        emit(geo, "scores_geo");
        emit(act, "scores_activity");
    } else if (c.method == "eci") {
        auto [eci_s, pci_s] = eci_pci(m);
        emit(eci_s, "eci");
        emit(pci_s, "pci");
    } else {
        FitnessResult fr = fitness_complexity(m, fitness_options(c));
        emit(fr.fitness, "fitness");
        emit(fr.complexity, "complexity_q");
    }
    if (want_pci && c.method != "eci") {
        auto [eci_s, pci_s] = eci_pci(m);
        emit(pci_s, "pci");
    }
    if (!c.exogenous_q.empty()) {
        ScoreVector q_ref = io::load_scores(c.exogenous_q);
        q_ref.axis = Axis::Activity;
        emit(exogenous_fitness(m, q_ref), "exogenous_fitness");
    }
}

void stage_proximity(const RunConfig& c, const Paths& paths, StageRecord& rec) {
    BinaryBipartite m = io::load_binary(paths.binary(c.input.layer, c.period));
    ProximityNetwork net = proximity(m);
    io::save_proximity(net, paths.proximity());
    rec.outputs.push_back(relative_to_root(paths.proximity(), paths.root));
    rec.details["zero_ubiquity"] = net.zero_ubiquity;
}

void stage_assist(const RunConfig& c, const Paths& paths, StageRecord& rec) {
    AssistSpec s = assist_spec(c);
    BinaryBipartite src = io::load_binary(paths.binary(s.source_layer, s.source_period));
    BinaryBipartite tgt = io::load_binary(paths.binary(s.target_layer, s.target_period));
    AssistMatrix b = assist_matrix(src, tgt);
    io::save_assist(b, paths.assist());
    rec.outputs.push_back(relative_to_root(paths.assist(), paths.root));
    rec.details["geos_used"] = b.geos.size();
    rec.details["zero_rows"] = b.zero_rows;
    for (const std::string& w : b.warnings) rec.warnings.push_back(w);
}

void stage_validate(const RunConfig& c, const Paths& paths, StageRecord& rec) {
    AssistSpec s = assist_spec(c);
    BinaryBipartite src = io::load_binary(paths.binary(s.source_layer, s.source_period));
    BinaryBipartite tgt = io::load_binary(paths.binary(s.target_layer, s.target_period));
    AssistMatrix b = io::load_assist(paths.assist());

    BicmModel null_src = fit_bicm(src);
    BicmModel null_tgt = fit_bicm(tgt);
    io::save_bicm(null_src, paths.bicm(false));
    io::save_bicm(null_tgt, paths.bicm(true));
    rec.outputs.push_back(relative_to_root(paths.bicm(false), paths.root));
    rec.outputs.push_back(relative_to_root(paths.bicm(true), paths.root));

    ValidationOptions opt;
    opt.samples = c.samples;
    opt.alpha = c.alpha;
    opt.correction = c.correction == "bonferroni" ? Correction::Bonferroni : Correction::BhFdr;
    opt.seed = c.seed;
    ValidatedNetwork net = validate_links(b, null_src, null_tgt, opt);
    io::save_validated(net, paths.validated());
    rec.outputs.push_back(relative_to_root(paths.validated(), paths.root));
    rec.details["significant_edges"] = net.edges.size();
    rec.details["paired"] = net.paired;
    rec.details["null_fit"] = ordered_json{
        {"source", ordered_json{{"iterations", null_src.convergence.iterations},
                                {"residual", null_src.convergence.residual}}},
        {"target", ordered_json{{"iterations", null_tgt.convergence.iterations},
                                {"residual", null_tgt.convergence.residual}}}};
    for (const std::string& w : net.warnings) rec.warnings.push_back(w);
}

void stage_green(const RunConfig& c, const Paths& paths, StageRecord& rec) {
    BinaryBipartite m = io::load_binary(paths.binary(c.input.layer, c.period));
    ProximityNetwork net = io::load_proximity(paths.proximity());
    ScoreVector pci = io::load_scores(paths.scores("pci"));

    std::ifstream list(c.green_list, std::ios::binary);
    if (!list) throw data_error("cannot read " + c.green_list);
    const Scheme scheme =
        c.green_scheme.empty() ? m.scheme : scheme_from_string(c.green_scheme);
    GreenClassification cls =
        parse_green_list(list, fs::path(c.green_list).stem().string(), scheme);
    std::vector<bool> mask = green_mask(m.activities, m.scheme, cls);

    const GciMode mode = c.gci_mode == "rank" ? GciMode::RankTransformed : GciMode::Raw;
    const GcpWeighting weighting =
        c.gcp_weighting == "pci" ? GcpWeighting::PciWeighted : GcpWeighting::Unweighted;
    GreenScores g = green_scores(m, net, pci, mask, mode, weighting);
    io::save_green(g, paths.green());
    rec.outputs.push_back(relative_to_root(paths.green(), paths.root));
    rec.details["green_activities"] = g.green_activities;
    for (const std::string& w : g.warnings) rec.warnings.push_back(w);

    // Sectoral fitness needs the full-spectrum complexity run; emit it when
    // the complexity stage produced one.
    if (fs::exists(paths.scores("complexity_q"))) {
        ScoreVector q_full = io::load_scores(paths.scores("complexity_q"));
        ScoreVector gtf = sectoral_fitness(m, q_full, mask, cls.name);
        io::save_scores(gtf, paths.gtf());
        rec.outputs.push_back(relative_to_root(paths.gtf(), paths.root));
    } else {
        rec.warnings.push_back("no full-spectrum complexity artifact, sectoral fitness skipped");
    }
}

void stage_nestedness(const RunConfig& c, const Paths& paths, StageRecord& rec) {
    BinaryBipartite m = io::load_binary(paths.binary(c.input.layer, c.period));
    NestednessReport rep = nestedness(m);
    io::save_nestedness(rep, m.geos, m.activities, paths.nestedness());
    rec.outputs.push_back(relative_to_root(paths.nestedness(), paths.root));
    rec.details["defined"] = rep.defined;
    if (rep.defined) rec.details["score"] = rep.score;
}

void stage_report(const RunConfig& c, const Paths& paths, StageRecord& rec) {
    fs::create_directories(paths.plots());

    // Ranked score curve: rank vs value, descending.
    const std::string score_name = c.method == "reflections" ? "scores_geo"
                                   : c.method == "eci"       ? "eci"
                                                             : "fitness";
    ScoreVector s = io::load_scores(paths.scores(score_name));
    {
        std::ofstream out(paths.plots() / "score_curve.csv", std::ios::binary);
        out << "x,y,label\n";
        std::vector<Eigen::Index> order = ranking(s.values);
        for (std::size_t pos = 0; pos < order.size(); ++pos)
            out << pos + 1 << ',' << io::format_float(s.values(order[pos])) << ','
                << s.ids[static_cast<std::size_t>(order[pos])] << '\n';
    }
    rec.outputs.push_back(relative_to_root(paths.plots() / "score_curve.csv", paths.root));

    // Nestedness-ordered nonzero cells, row-major in the ordered matrix.
    BinaryBipartite m = io::load_binary(paths.binary(c.input.layer, c.period));
    NestednessReport rep = nestedness(m);
    {
        std::ofstream out(paths.plots() / "matrix_cells.csv", std::ios::binary);
        out << "x,y,label\n";
        for (std::size_t r = 0; r < rep.row_order.size(); ++r)
            for (std::size_t col = 0; col < rep.col_order.size(); ++col) {
                const Eigen::Index g = rep.row_order[r];
                const Eigen::Index a = rep.col_order[col];
                if (m.entries(g, a) != 0.0)
                    out << col + 1 << ',' << r + 1 << ','
                        << m.geos[static_cast<std::size_t>(g)] << ':'
                        << m.activities[static_cast<std::size_t>(a)] << '\n';
            }
    }
    rec.outputs.push_back(relative_to_root(paths.plots() / "matrix_cells.csv", paths.root));

    // Proximity edges above the cutoff.
    ProximityNetwork net = io::load_proximity(paths.proximity());
    {
        std::ofstream out(paths.plots() / "proximity_edges.csv", std::ios::binary);
        out << "source,target,phi\n";
        for (Eigen::Index i = 0; i < net.phi.rows(); ++i)
            for (Eigen::Index j = i + 1; j < net.phi.cols(); ++j)
                if (net.phi(i, j) >= c.phi_cutoff)
                    out << net.activities[static_cast<std::size_t>(i)] << ','
                        << net.activities[static_cast<std::size_t>(j)] << ','
                        << io::format_float(net.phi(i, j)) << '\n';
    }
    rec.outputs.push_back(relative_to_root(paths.plots() / "proximity_edges.csv", paths.root));
    rec.details["phi_cutoff"] = c.phi_cutoff;
}

}  // namespace

ordered_json default_config_json() { return config_to_json(RunConfig{}); }

ordered_json config_to_json(const RunConfig& c) {
    ordered_json j;
    j["output_dir"] = c.output_dir;
    j["seed"] = c.seed;
    j["input"] = input_json(c.input);
    j["input2"] = input_json(c.input2);
    j["period"] = c.period;
    j["digits"] = c.digits;
    j["threshold"] = c.threshold;
    j["method"] = c.method;
    j["tol"] = c.tol;
    j["max_iter"] = c.max_iter;
    j["scale"] = c.scale;
    j["exogenous_q"] = c.exogenous_q;
    j["reflections_iterations"] = c.reflections_iterations;
    j["phi_cutoff"] = c.phi_cutoff;
    j["lag"] = c.lag;
    j["samples"] = c.samples;
    j["alpha"] = c.alpha;
    j["correction"] = c.correction;
    j["green_list"] = c.green_list;
    j["green_scheme"] = c.green_scheme;
    j["gci_mode"] = c.gci_mode;
    j["gcp_weighting"] = c.gcp_weighting;
    j["stages"] = c.stages;
    return j;
}

RunConfig config_from_json(const ordered_json& j) {
    RunConfig c;
    c.output_dir = j.value("output_dir", c.output_dir);
    c.seed = j.value("seed", c.seed);
    if (j.contains("input")) c.input = input_from(j["input"]);
    if (j.contains("input2")) c.input2 = input_from(j["input2"]);
    c.period = j.value("period", c.period);
    c.digits = j.value("digits", c.digits);
    c.threshold = j.value("threshold", c.threshold);
    c.method = j.value("method", c.method);
    c.tol = j.value("tol", c.tol);
    c.max_iter = j.value("max_iter", c.max_iter);
    c.scale = j.value("scale", c.scale);
    c.exogenous_q = j.value("exogenous_q", c.exogenous_q);
    c.reflections_iterations = j.value("reflections_iterations", c.reflections_iterations);
    c.phi_cutoff = j.value("phi_cutoff", c.phi_cutoff);
    c.lag = j.value("lag", c.lag);
    c.samples = j.value("samples", c.samples);
    c.alpha = j.value("alpha", c.alpha);
    c.correction = j.value("correction", c.correction);
    c.green_list = j.value("green_list", c.green_list);
    c.green_scheme = j.value("green_scheme", c.green_scheme);
    c.gci_mode = j.value("gci_mode", c.gci_mode);
    c.gcp_weighting = j.value("gcp_weighting", c.gcp_weighting);
    c.stages = j.value("stages", c.stages);
    return c;
}

RunConfig load_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot read config " + path.string());
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw config_error("config " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

void validate_config(const RunConfig& c) {
    if (c.input.path.empty()) throw config_error("config: input.path is required");
    if (!fs::exists(c.input.path)) throw data_error("input not found: " + c.input.path);
    if (!c.input2.path.empty() && !fs::exists(c.input2.path))
        throw data_error("input2 not found: " + c.input2.path);
    if (!c.exogenous_q.empty() && !fs::exists(c.exogenous_q))
        throw data_error("exogenous_q not found: " + c.exogenous_q);
    if (!c.green_list.empty() && !fs::exists(c.green_list))
        throw data_error("green_list not found: " + c.green_list);
    if (!c.input2.path.empty() && c.input2.layer == c.input.layer && c.lag == 0)
        throw config_error(
            "config: input2 needs a distinct layer name (or a positive lag) so its matrix "
            "artifact does not collide with the primary one");
    if (!(c.threshold > 0.0)) throw config_error("config: threshold must be > 0");
    if (!(c.tol > 0.0)) throw config_error("config: tol must be > 0");
    if (c.max_iter < 1) throw config_error("config: max_iter must be >= 1");
    if (c.samples < 100) throw config_error("config: samples must be >= 100");
    if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw config_error("config: alpha must be in (0, 1)");
    if (c.lag < 0) throw config_error("config: lag must be >= 0");
    if (c.digits < 0) throw config_error("config: digits must be >= 0");
    if (c.reflections_iterations < 1)
        throw config_error("config: reflections_iterations must be >= 1");
    if (c.method != "reflections" && c.method != "eci" && c.method != "fitness")
        throw config_error("config: method must be reflections, eci, or fitness");
    if (c.scale != "mean-one" && c.scale != "dummy")
        throw config_error("config: scale must be mean-one or dummy");
    if (c.correction != "bonferroni" && c.correction != "bh-fdr")
        throw config_error("config: correction must be bonferroni or bh-fdr");
    if (c.input.kind != "records" && c.input.kind != "patents")
        throw config_error("config: input.kind must be records or patents");
    if (!c.input2.path.empty() && c.input2.kind != "records" && c.input2.kind != "patents")
        throw config_error("config: input2.kind must be records or patents");
    if (c.input.counting != "fractional" && c.input.counting != "full")
        throw config_error("config: counting must be fractional or full");
    if (c.gci_mode != "raw" && c.gci_mode != "rank")
        throw config_error("config: gci_mode must be raw or rank");
    if (c.gcp_weighting != "unweighted" && c.gcp_weighting != "pci")
        throw config_error("config: gcp_weighting must be unweighted or pci");
    for (const std::string& s : c.stages)
        if (std::find(std::begin(kAllStages), std::end(kAllStages), s) == std::end(kAllStages))
            throw config_error("config: unknown stage '" + s + "'");
}

std::vector<std::string> enabled_stages(const RunConfig& c) {
    std::vector<std::string> out{"ingest", "rca", "binarize", "complexity", "proximity"};
    if (assist_enabled(c)) {
        out.push_back("assist");
        out.push_back("validate");
    }
    if (!c.green_list.empty()) out.push_back("green");
    out.push_back("nestedness");
    out.push_back("report");
    return out;
}

ordered_json RunManifest::to_json() const {
    ordered_json j;
    j["version"] = version;
    j["config"] = config;
    j["inputs"] = ordered_json::array();
    for (const auto& [path, digest] : inputs)
        j["inputs"].push_back(ordered_json{{"path", path}, {"digest", digest}});
    j["stages"] = ordered_json::array();
    for (const StageRecord& s : stages) {
        ordered_json sj{{"name", s.name},
                        {"wall_seconds", s.wall_seconds},
                        {"outputs", s.outputs},
                        {"warnings", s.warnings}};
        if (!s.details.is_null()) sj["details"] = s.details;
        j["stages"].push_back(sj);
    }
    return j;
}

RunManifest run_pipeline(const RunConfig& config, const std::vector<std::string>& only) {
    validate_config(config);
    const std::vector<std::string> enabled = enabled_stages(config);
    std::vector<std::string> selected;
    const std::vector<std::string>& requested = !only.empty() ? only : config.stages;
    if (requested.empty()) {
        selected = enabled;
    } else {
        for (const std::string& name : enabled)
            if (std::find(requested.begin(), requested.end(), name) != requested.end())
                selected.push_back(name);
        for (const std::string& name : requested)
            if (std::find(enabled.begin(), enabled.end(), name) == enabled.end())
                throw config_error("stage '" + name + "' is not enabled by this config");
    }

    Paths paths(config);
    fs::create_directories(paths.root);
    fs::remove(paths.root / "error.json");

    RunManifest manifest;
    manifest.version = version;
    manifest.config = config_to_json(config);
    manifest.inputs.emplace_back(config.input.path, io::digest_file(config.input.path));
    if (!config.input2.path.empty())
        manifest.inputs.emplace_back(config.input2.path, io::digest_file(config.input2.path));

    auto write_manifest = [&]() {
        std::ofstream out(paths.root / "manifest.json", std::ios::binary);
        out << manifest.to_json().dump(2) << '\n';
    };

    for (const std::string& name : selected) {
        StageRecord rec;
        rec.name = name;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            if (name == "ingest") stage_ingest(config, paths, rec);
            else if (name == "rca") stage_rca(config, paths, rec);
            else if (name == "binarize") stage_binarize(config, paths, rec);
            else if (name == "complexity") stage_complexity(config, paths, rec);
            else if (name == "proximity") stage_proximity(config, paths, rec);
            else if (name == "assist") stage_assist(config, paths, rec);
            else if (name == "validate") stage_validate(config, paths, rec);
            else if (name == "green") stage_green(config, paths, rec);
            else if (name == "nestedness") stage_nestedness(config, paths, rec);
            else if (name == "report") stage_report(config, paths, rec);
        } catch (const std::exception& e) {
            // Quarantine partial outputs so reruns cannot pick them up.
            const fs::path dir = paths.stage(name);
            if (fs::exists(dir)) {
                fs::path q = dir;
                q += ".quarantine";
                fs::remove_all(q);
                fs::rename(dir, q);
            }
            rec.warnings.push_back(std::string("failed: ") + e.what());
            rec.wall_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            manifest.stages.push_back(std::move(rec));
            write_manifest();

            ordered_json err{{"stage", name}, {"error", e.what()}};
            std::ofstream out(paths.root / "error.json", std::ios::binary);
            out << err.dump(2) << '\n';
            throw;
        }
        rec.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        manifest.stages.push_back(std::move(rec));
    }
    write_manifest();
    return manifest;
}

}  // namespace ecx
