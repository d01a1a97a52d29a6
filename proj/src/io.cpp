#include "ecx/io.hpp"

#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>

#include "ecx/errors.hpp"

namespace ecx::io {

using ordered_json = nlohmann::ordered_json;

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path, std::ios::binary);  // binary: no \r\n translation
    if (!out) throw data_error("cannot write " + path.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot read " + path.string());
    return in;
}

std::filesystem::path meta_path(const std::filesystem::path& csv) {
    std::filesystem::path p = csv;
    p += ".meta.json";
    return p;
}

void write_json(const std::filesystem::path& path, const ordered_json& j) {
    open_out(path) << j.dump(2) << '\n';
}

ordered_json read_json(const std::filesystem::path& path) {
    return ordered_json::parse(open_in(path));
}

std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(delim, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string chomp(std::string line) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    return line;
}

double parse_cell(const std::string& s, const std::filesystem::path& path) {
    try {
        return std::stod(s);
    } catch (const std::exception&) {
        throw data_error(path.string() + ": not a number: '" + s + "'");
    }
}

struct Grid {
    std::vector<std::string> row_ids;
    std::vector<std::string> col_ids;
    Eigen::MatrixXd values;
    BoolGrid present;
};

void write_grid(const std::filesystem::path& csv, const std::string& corner,
                const std::vector<std::string>& row_ids, const std::vector<std::string>& col_ids,
                const Eigen::MatrixXd& values, const BoolGrid* present = nullptr) {
    std::ofstream out = open_out(csv);
    out << corner;
    for (const std::string& c : col_ids) out << ',' << c;
    out << '\n';
    for (std::size_t r = 0; r < row_ids.size(); ++r) {
        out << row_ids[r];
        for (std::size_t c = 0; c < col_ids.size(); ++c) {
            const Eigen::Index ri = static_cast<Eigen::Index>(r);
            const Eigen::Index ci = static_cast<Eigen::Index>(c);
            out << ',';
            if (!present || (*present)(ri, ci)) out << format_float(values(ri, ci));
        }
        out << '\n';
    }
}

Grid read_grid(const std::filesystem::path& csv) {
    std::ifstream in = open_in(csv);
    std::string line;
    if (!std::getline(in, line)) throw data_error(csv.string() + ": empty file");
    std::vector<std::string> header = split(chomp(line), ',');
    if (header.size() < 2) throw data_error(csv.string() + ": no activity columns");
    Grid g;
    g.col_ids.assign(header.begin() + 1, header.end());
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        std::string l = chomp(line);
        if (l.empty()) continue;
        std::vector<std::string> fields = split(l, ',');
        if (fields.size() != header.size())
            throw data_error(csv.string() + ": ragged row '" + fields[0] + "'");
        g.row_ids.push_back(fields[0]);
        rows.push_back(std::move(fields));
    }
    const Eigen::Index nr = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index nc = static_cast<Eigen::Index>(g.col_ids.size());
    g.values = Eigen::MatrixXd::Zero(nr, nc);
    g.present = BoolGrid::Constant(nr, nc, true);
    for (Eigen::Index r = 0; r < nr; ++r)
        for (Eigen::Index c = 0; c < nc; ++c) {
            const std::string& cell = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c) + 1];
            if (cell.empty())
                g.present(r, c) = false;
            else
                g.values(r, c) = parse_cell(cell, csv);
        }
    return g;
}

ordered_json convergence_json(const ConvergenceRecord& r) {
    return ordered_json{{"iterations", r.iterations},
                        {"residual", r.residual},
                        {"converged", r.converged},
                        {"ranks_stable_since", r.ranks_stable_since}};
}

ConvergenceRecord convergence_from(const ordered_json& j) {
    ConvergenceRecord r;
    r.iterations = j.value("iterations", 0);
    r.residual = j.value("residual", 0.0);
    r.converged = j.value("converged", true);
    r.ranks_stable_since = j.value("ranks_stable_since", -1);
    return r;
}

void require_kind(const ordered_json& meta, const std::string& kind,
                  const std::filesystem::path& csv) {
    if (meta.value("kind", "") != kind)
        throw data_error(csv.string() + ": expected a " + kind + " artifact, found '" +
                         meta.value("kind", "") + "'");
}

}  // namespace

std::string format_float(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string digest_file(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char chunk[1 << 16];
    while (in.read(chunk, sizeof chunk) || in.gcount() > 0) {
        const std::streamsize n = in.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(chunk[i]);
            h *= 0x100000001b3ULL;
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void save_weighted(const WeightedBipartite& m, const std::filesystem::path& csv) {
    write_grid(csv, "geo", m.geos, m.activities, m.weights);
    write_json(meta_path(csv), ordered_json{{"kind", "weighted"},
                                            {"scheme", to_string(m.scheme)},
                                            {"period", m.period},
                                            {"layer", m.layer}});
}

WeightedBipartite load_weighted(const std::filesystem::path& csv) {
    Grid g = read_grid(csv);
    ordered_json meta = read_json(meta_path(csv));
    require_kind(meta, "weighted", csv);
    WeightedBipartite m;
    m.geos = std::move(g.row_ids);
    m.activities = std::move(g.col_ids);
    m.weights = std::move(g.values);
    m.scheme = scheme_from_string(meta.value("scheme", "custom"));
    m.period = meta.value("period", 0);
    m.layer = meta.value("layer", "");
    return m;
}

void save_rca(const RcaMatrix& m, const std::filesystem::path& csv) {
    write_grid(csv, "geo", m.geos, m.activities, m.values, &m.defined);
    ordered_json meta{{"kind", "rca"},
                      {"scheme", to_string(m.scheme)},
                      {"period", m.period},
                      {"layer", m.layer}};
    meta["zero_geos"] = m.zero_geos;
    meta["zero_activities"] = m.zero_activities;
    write_json(meta_path(csv), meta);
}

RcaMatrix load_rca(const std::filesystem::path& csv) {
    Grid g = read_grid(csv);
    ordered_json meta = read_json(meta_path(csv));
    require_kind(meta, "rca", csv);
    RcaMatrix m;
    m.geos = std::move(g.row_ids);
    m.activities = std::move(g.col_ids);
    m.values = std::move(g.values);
    m.defined = std::move(g.present);
    m.scheme = scheme_from_string(meta.value("scheme", "custom"));
    m.period = meta.value("period", 0);
    m.layer = meta.value("layer", "");
    for (const auto& v : meta.value("zero_geos", std::vector<std::int64_t>{}))
        m.zero_geos.push_back(static_cast<Eigen::Index>(v));
    for (const auto& v : meta.value("zero_activities", std::vector<std::int64_t>{}))
        m.zero_activities.push_back(static_cast<Eigen::Index>(v));
    return m;
}

void save_binary(const BinaryBipartite& m, const std::filesystem::path& csv) {
    write_grid(csv, "geo", m.geos, m.activities, m.entries);
    write_json(meta_path(csv), ordered_json{{"kind", "binary"},
                                            {"scheme", to_string(m.scheme)},
                                            {"threshold", m.threshold},
                                            {"period", m.period},
                                            {"layer", m.layer}});
}

BinaryBipartite load_binary(const std::filesystem::path& csv) {
    Grid g = read_grid(csv);
    ordered_json meta = read_json(meta_path(csv));
    require_kind(meta, "binary", csv);
    BinaryBipartite m;
    m.geos = std::move(g.row_ids);
    m.activities = std::move(g.col_ids);
    m.entries = std::move(g.values);
    for (Eigen::Index g2 = 0; g2 < m.entries.rows(); ++g2)
        for (Eigen::Index a = 0; a < m.entries.cols(); ++a)
            if (m.entries(g2, a) != 0.0 && m.entries(g2, a) != 1.0)
                throw data_error(csv.string() + ": non-binary entry at row " +
                                 m.geos[static_cast<std::size_t>(g2)]);
    m.scheme = scheme_from_string(meta.value("scheme", "custom"));
    m.threshold = meta.value("threshold", 1.0);
    m.period = meta.value("period", 0);
    m.layer = meta.value("layer", "");
    return m;
}

void save_scores(const ScoreVector& s, const std::filesystem::path& csv) {
    std::ofstream out = open_out(csv);
    out << "id,value,rank\n";
    std::vector<int> ranks = ranks_of(s.values);
    for (std::size_t i = 0; i < s.size(); ++i)
        out << s.ids[i] << ',' << format_float(s.values(static_cast<Eigen::Index>(i))) << ','
            << ranks[i] << '\n';
    ordered_json meta{{"kind", "scores"},
                      {"axis", s.axis == Axis::Geo ? "geo" : "activity"},
                      {"method", to_string(s.method)},
                      {"normalization", to_string(s.normalization)},
                      {"reference_id", s.reference_id},
                      {"subset_name", s.subset_name},
                      {"convergence", convergence_json(s.convergence)},
                      {"non_unique", s.non_unique},
                      {"extremal_ids", s.extremal_ids},
                      {"warnings", s.warnings}};
    write_json(meta_path(csv), meta);
}

ScoreVector load_scores(const std::filesystem::path& csv) {
    std::ifstream in = open_in(csv);
    std::string line;
    if (!std::getline(in, line) || !chomp(line).starts_with("id,value"))
        throw data_error(csv.string() + ": not a score table");
    ScoreVector s;
    std::vector<double> values;
    while (std::getline(in, line)) {
        std::string l = chomp(line);
        if (l.empty()) continue;
        std::vector<std::string> fields = split(l, ',');
        if (fields.size() < 2) throw data_error(csv.string() + ": ragged row '" + l + "'");
        s.ids.push_back(fields[0]);
        values.push_back(parse_cell(fields[1], csv));
    }
    s.values = Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
    const std::filesystem::path mp = meta_path(csv);
    if (std::filesystem::exists(mp)) {
        ordered_json meta = read_json(mp);
        s.axis = meta.value("axis", "geo") == std::string("activity") ? Axis::Activity : Axis::Geo;
        const std::string method = meta.value("method", "fitness");
        for (Method m : {Method::Reflections, Method::Eci, Method::Pci, Method::Fitness,
                         Method::Complexity, Method::ExogenousFitness, Method::SectoralFitness})
            if (to_string(m) == method) s.method = m;
        const std::string norm = meta.value("normalization", "mean-one");
        for (Normalization n :
             {Normalization::Standardized, Normalization::MeanOne, Normalization::DummyReferenced})
            if (to_string(n) == norm) s.normalization = n;
        s.reference_id = meta.value("reference_id", "");
        s.subset_name = meta.value("subset_name", "");
        if (meta.contains("convergence")) s.convergence = convergence_from(meta["convergence"]);
        s.non_unique = meta.value("non_unique", false);
        s.extremal_ids = meta.value("extremal_ids", std::vector<std::string>{});
        s.warnings = meta.value("warnings", std::vector<std::string>{});
    }
    return s;
}

void save_proximity(const ProximityNetwork& net, const std::filesystem::path& csv) {
    write_grid(csv, "activity", net.activities, net.activities, net.phi);
    write_json(meta_path(csv),
               ordered_json{{"kind", "proximity"}, {"zero_ubiquity", net.zero_ubiquity}});
}

ProximityNetwork load_proximity(const std::filesystem::path& csv) {
    Grid g = read_grid(csv);
    ordered_json meta = read_json(meta_path(csv));
    require_kind(meta, "proximity", csv);
    if (g.row_ids != g.col_ids) throw data_error(csv.string() + ": not a square activity grid");
    ProximityNetwork net;
    net.activities = std::move(g.col_ids);
    net.phi = std::move(g.values);
    net.zero_ubiquity = meta.value("zero_ubiquity", std::vector<std::string>{});
    return net;
}

void save_assist(const AssistMatrix& b, const std::filesystem::path& csv) {
    write_grid(csv, "source", b.source_activities, b.target_activities, b.b);
    write_json(meta_path(csv), ordered_json{{"kind", "assist"},
                                            {"zero_rows", b.zero_rows},
                                            {"geos", b.geos},
                                            {"warnings", b.warnings}});
}

AssistMatrix load_assist(const std::filesystem::path& csv) {
    Grid g = read_grid(csv);
    ordered_json meta = read_json(meta_path(csv));
    require_kind(meta, "assist", csv);
    AssistMatrix b;
    b.source_activities = std::move(g.row_ids);
    b.target_activities = std::move(g.col_ids);
    b.b = std::move(g.values);
    b.zero_rows = meta.value("zero_rows", std::vector<std::string>{});
    b.geos = meta.value("geos", std::vector<std::string>{});
    b.warnings = meta.value("warnings", std::vector<std::string>{});
    return b;
}

void save_bicm(const BicmModel& model, const std::filesystem::path& csv) {
    write_grid(csv, "geo", model.geos, model.activities, model.p);
    write_json(meta_path(csv), ordered_json{{"kind", "bicm"},
                                            {"layer", model.layer},
                                            {"period", model.period},
                                            {"pinned_rows", model.pinned_rows},
                                            {"pinned_cols", model.pinned_cols},
                                            {"convergence", convergence_json(model.convergence)}});
}

BicmModel load_bicm(const std::filesystem::path& csv) {
    Grid g = read_grid(csv);
    ordered_json meta = read_json(meta_path(csv));
    require_kind(meta, "bicm", csv);
    BicmModel model;
    model.geos = std::move(g.row_ids);
    model.activities = std::move(g.col_ids);
    model.p = std::move(g.values);
    model.layer = meta.value("layer", "");
    model.period = meta.value("period", 0);
    model.pinned_rows = meta.value("pinned_rows", 0);
    model.pinned_cols = meta.value("pinned_cols", 0);
    if (meta.contains("convergence")) model.convergence = convergence_from(meta["convergence"]);
    return model;
}

void save_validated(const ValidatedNetwork& net, const std::filesystem::path& edges_csv) {
    std::ofstream out = open_out(edges_csv);
    out << "source,target,weight,p_value,significant\n";
    for (const ValidatedEdge& e : net.edges)
        out << e.source << ',' << e.target << ',' << format_float(e.weight) << ','
            << format_float(e.p_value) << ",1\n";

    std::filesystem::path pvals = edges_csv;
    pvals.replace_filename(edges_csv.stem().string() + "_pvalues.csv");
    write_grid(pvals, "source", net.source_activities, net.target_activities, net.p_values);

    ordered_json graph{{"kind", "validated-network"},
                       {"alpha", net.alpha},
                       {"correction", to_string(net.correction)},
                       {"samples", net.samples},
                       {"seed", net.seed},
                       {"paired", net.paired},
                       {"warnings", net.warnings}};
    graph["nodes"] = ordered_json::array();
    for (const std::string& a : net.source_activities)
        graph["nodes"].push_back(ordered_json{{"id", a}, {"side", "source"}});
    for (const std::string& a : net.target_activities)
        graph["nodes"].push_back(ordered_json{{"id", a}, {"side", "target"}});
    graph["edges"] = ordered_json::array();
    for (const ValidatedEdge& e : net.edges)
        graph["edges"].push_back(ordered_json{{"source", e.source},
                                              {"target", e.target},
                                              {"weight", e.weight},
                                              {"p_value", e.p_value}});
    std::filesystem::path gj = edges_csv;
    gj.replace_filename(edges_csv.stem().string() + "_graph.json");
    write_json(gj, graph);
}

void save_green(const GreenScores& g, const std::filesystem::path& csv) {
    std::ofstream out = open_out(csv);
    out << "geo,gci,gcp,n_green_specializations\n";
    for (std::size_t i = 0; i < g.geos.size(); ++i) {
        out << g.geos[i] << ',' << format_float(g.gci(static_cast<Eigen::Index>(i))) << ',';
        if (g.gcp_defined[i]) out << format_float(g.gcp(static_cast<Eigen::Index>(i)));
        out << ',' << g.n_green[i] << '\n';
    }
    write_json(meta_path(csv), ordered_json{{"kind", "green"},
                                            {"green_activities", g.green_activities},
                                            {"warnings", g.warnings}});
}

void save_nestedness(const NestednessReport& rep, const std::vector<std::string>& geos,
                     const std::vector<std::string>& activities,
                     const std::filesystem::path& json) {
    ordered_json j{{"kind", "nestedness"}, {"defined", rep.defined}};
    if (rep.defined) j["score"] = rep.score;
    std::vector<std::string> row_order, col_order;
    for (Eigen::Index i : rep.row_order) row_order.push_back(geos[static_cast<std::size_t>(i)]);
    for (Eigen::Index i : rep.col_order)
        col_order.push_back(activities[static_cast<std::size_t>(i)]);
    j["row_order"] = row_order;
    j["col_order"] = col_order;
    write_json(json, j);
}

void save_records(const std::vector<RawRecord>& records, Scheme scheme,
                  const std::filesystem::path& csv) {
    std::ofstream out = open_out(csv);
    out << "geo,activity,value,period\n";
    for (const RawRecord& r : records)
        out << r.geo << ',' << r.activity.code << ',' << format_float(r.value) << ',' << r.period
            << '\n';
    write_json(meta_path(csv), ordered_json{{"kind", "records"}, {"scheme", to_string(scheme)}});
}

std::vector<RawRecord> load_records(const std::filesystem::path& csv) {
    ordered_json meta = read_json(meta_path(csv));
    require_kind(meta, "records", csv);
    const Scheme scheme = scheme_from_string(meta.value("scheme", "custom"));
    std::ifstream in = open_in(csv);
    std::string line;
    if (!std::getline(in, line)) throw data_error(csv.string() + ": empty file");
    std::vector<RawRecord> records;
    while (std::getline(in, line)) {
        std::string l = chomp(line);
        if (l.empty()) continue;
        std::vector<std::string> fields = split(l, ',');
        if (fields.size() != 4) throw data_error(csv.string() + ": ragged row '" + l + "'");
        RawRecord r;
        r.geo = fields[0];
        r.activity = make_code(scheme, fields[1]);
        r.value = parse_cell(fields[2], csv);
        r.period = std::stoi(fields[3]);
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace ecx::io
