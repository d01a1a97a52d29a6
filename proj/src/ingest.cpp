#include "ecx/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <tuple>
#include <unordered_set>

#include "ecx/errors.hpp"
#include "ecx/numeric.hpp"

namespace ecx {

namespace {

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

std::string strip(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (strip(header[i]) == name) return i;
    throw config_error("input is missing column '" + name + "'");
}

double parse_value(const std::string& field) {
    const std::string s = strip(field);
    double v = 0.0;
    const char* begin = s.data();
    const char* end = begin + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v))
        throw data_error("not a number: '" + field + "'");
    return v;
}

int parse_year(const std::string& field, int min_year, int max_year) {
    const std::string s = strip(field);
    int v = 0;
    const char* begin = s.data();
    const char* end = begin + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end) throw data_error("not a year: '" + field + "'");
    if (v < min_year || v > max_year)
        throw data_error("year " + s + " outside [" + std::to_string(min_year) + ", " +
                         std::to_string(max_year) + "]");
    return v;
}

// Shared scan loop: reads and validates the header, then hands every data
// row to `row_fn`, which throws data_error to mark the row malformed.
// Strict mode reports the whole batch of bad lines in one exception.
template <typename HeaderFn, typename RowFn>
void scan_rows(std::istream& in, ParseMode mode, const char* what, IngestReport* report,
               HeaderFn&& header_fn, RowFn&& row_fn) {
    std::string line;
    if (!std::getline(in, line)) throw data_error(std::string(what) + ": empty input");
    std::vector<std::string> header = split(line, ',');
    header_fn(header);

    std::vector<parse_error::bad_line> bad;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (strip(line).empty()) continue;
        if (report) ++report->rows_read;
        try {
            std::vector<std::string> fields = split(line, ',');
            if (fields.size() != header.size())
                throw data_error("expected " + std::to_string(header.size()) + " fields, got " +
                                 std::to_string(fields.size()));
            row_fn(fields, lineno);
        } catch (const data_error& e) {
            bad.push_back({lineno, e.what()});
        }
    }
    if (bad.empty()) return;
    if (mode == ParseMode::Strict) {
        std::string message =
            std::string(what) + ": " + std::to_string(bad.size()) + " malformed line(s)";
        throw parse_error(std::move(message), std::move(bad));
    }
    if (report)
        report->skipped.insert(report->skipped.end(), bad.begin(), bad.end());
}

}  // namespace

std::vector<RawRecord> parse_records(std::istream& in, const CsvSchema& schema,
                                     IngestReport* report) {
    std::vector<RawRecord> records;
    std::size_t gi = 0, ai = 0, vi = 0, pi = 0;
    scan_rows(
        in, schema.mode, "records", report,
        [&](const std::vector<std::string>& header) {
            gi = column_index(header, schema.geo_column);
            ai = column_index(header, schema.activity_column);
            vi = column_index(header, schema.value_column);
            pi = column_index(header, schema.period_column);
        },
        [&](const std::vector<std::string>& fields, std::size_t) {
            RawRecord rec;
            rec.geo = strip(fields[gi]);
            if (rec.geo.empty()) throw data_error("empty geo identifier");
            rec.activity = make_code(schema.scheme, fields[ai]);
            rec.value = parse_value(fields[vi]);
            if (rec.value < 0.0) throw data_error("negative value: '" + strip(fields[vi]) + "'");
            rec.period = parse_year(fields[pi], schema.min_year, schema.max_year);
            if (rec.value == 0.0 && report) ++report->zero_value_rows;
            records.push_back(std::move(rec));
            if (report) ++report->records_kept;
        });
    return records;
}

std::vector<PatentRecord> parse_patents(std::istream& in, const PatentSchema& schema,
                                        IngestReport* report) {
    std::vector<PatentRecord> records;
    std::unordered_set<std::string> seen_ids;
    std::size_t ii = 0, pi = 0, ci = 0, li = 0;
    scan_rows(
        in, schema.mode, "patents", report,
        [&](const std::vector<std::string>& header) {
            ii = column_index(header, schema.id_column);
            pi = column_index(header, schema.period_column);
            ci = column_index(header, schema.codes_column);
            li = column_index(header, schema.locations_column);
        },
        [&](const std::vector<std::string>& fields, std::size_t) {
            PatentRecord rec;
            rec.patent_id = strip(fields[ii]);
            if (rec.patent_id.empty()) throw data_error("empty patent id");
            if (seen_ids.contains(rec.patent_id))
                throw data_error("duplicate patent id '" + rec.patent_id + "'");
            rec.period = parse_year(fields[pi], schema.min_year, schema.max_year);
            for (const std::string& c : split(fields[ci], schema.list_delimiter)) {
                if (strip(c).empty()) continue;
                rec.codes.push_back(make_code(schema.scheme, c));
            }
            if (rec.codes.empty()) throw data_error("patent lists no codes");
            for (const std::string& l : split(fields[li], schema.list_delimiter)) {
                std::string loc = strip(l);
                if (!loc.empty()) rec.locations.push_back(std::move(loc));
            }
            if (rec.locations.empty()) throw data_error("patent lists no locations");
            seen_ids.insert(rec.patent_id);
            records.push_back(std::move(rec));
            if (report) ++report->records_kept;
        });
    return records;
}

std::vector<RawRecord> count_patents(const std::vector<PatentRecord>& records, CountMode mode,
                                     int geo_level, int code_digits) {
    // (geo, code, period) -> compensated weight; the map ordering doubles as
    // the deterministic output order.
    std::map<std::tuple<std::string, ActivityCode, int>, CompensatedSum> cells;
    for (const PatentRecord& patent : records) {
        std::map<std::string, int> occurrences;
        for (const std::string& loc : patent.locations) {
            std::string geo = geo_level > 0
                                  ? loc.substr(0, std::min<std::size_t>(
                                                      static_cast<std::size_t>(geo_level), loc.size()))
                                  : loc;
            ++occurrences[geo];
        }
        std::set<ActivityCode> codes;
        for (const ActivityCode& code : patent.codes)
            codes.insert(code_digits > 0 ? truncate_code(code, std::min(code_digits, code.digits))
                                         : code);
        const double per_code = 1.0 / static_cast<double>(codes.size());
        const double total = static_cast<double>(patent.locations.size());
        for (const auto& [geo, occ] : occurrences) {
            const double share =
                mode == CountMode::Fractional ? static_cast<double>(occ) / total : 1.0;
            for (const ActivityCode& code : codes)
                cells[{geo, code, patent.period}].add(share * per_code);
        }
    }
    std::vector<RawRecord> out;
    out.reserve(cells.size());
    for (const auto& [key, sum] : cells)
        out.push_back({std::get<0>(key), std::get<1>(key), sum.value(), std::get<2>(key)});
    return out;
}

WeightedBipartite build_matrix(const std::vector<RawRecord>& records, int period, int digits,
                               const std::string& layer, IngestReport* report) {
    std::set<std::string> geo_set;
    std::set<std::string> activity_set;
    std::vector<std::pair<std::size_t, ActivityCode>> in_period;  // record idx, truncated code
    Scheme scheme = Scheme::Custom;
    bool first = true;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const RawRecord& rec = records[i];
        if (rec.period != period) continue;
        if (first) {
            scheme = rec.activity.scheme;
            first = false;
        } else if (rec.activity.scheme != scheme) {
            throw data_error("mixed classification schemes in one matrix");
        }
        ActivityCode code =
            digits > 0 ? truncate_code(rec.activity, std::min(digits, rec.activity.digits))
                       : rec.activity;
        geo_set.insert(rec.geo);
        activity_set.insert(code.code);
        in_period.emplace_back(i, std::move(code));
    }
    if (in_period.empty())
        throw data_error("no records in period " + std::to_string(period));

    WeightedBipartite m;
    m.geos.assign(geo_set.begin(), geo_set.end());
    m.activities.assign(activity_set.begin(), activity_set.end());
    m.scheme = scheme;
    m.period = period;
    m.layer = layer;

    std::map<std::string, Eigen::Index> geo_idx, act_idx;
    for (std::size_t i = 0; i < m.geos.size(); ++i)
        geo_idx[m.geos[i]] = static_cast<Eigen::Index>(i);
    for (std::size_t i = 0; i < m.activities.size(); ++i)
        act_idx[m.activities[i]] = static_cast<Eigen::Index>(i);

    const Eigen::Index na = static_cast<Eigen::Index>(m.activities.size());
    std::vector<CompensatedSum> sums(m.geos.size() * m.activities.size());
    for (const auto& [idx, code] : in_period) {
        const Eigen::Index g = geo_idx[records[idx].geo];
        const Eigen::Index a = act_idx[code.code];
        sums[static_cast<std::size_t>(g * na + a)].add(records[idx].value);
    }
    m.weights.resize(static_cast<Eigen::Index>(m.geos.size()), na);
    for (Eigen::Index g = 0; g < m.weights.rows(); ++g)
        for (Eigen::Index a = 0; a < na; ++a)
            m.weights(g, a) = sums[static_cast<std::size_t>(g * na + a)].value();

    if (report) {
        for (Eigen::Index g = 0; g < m.weights.rows(); ++g)
            if (m.weights.row(g).sum() == 0.0)
                report->zero_geos.push_back(m.geos[static_cast<std::size_t>(g)]);
        for (Eigen::Index a = 0; a < na; ++a)
            if (m.weights.col(a).sum() == 0.0)
                report->zero_activities.push_back(m.activities[static_cast<std::size_t>(a)]);
    }
    return m;
}

std::vector<bool> tag_green(const WeightedBipartite& matrix,
                            const GreenClassification& classification) {
    const bool any_compatible =
        std::any_of(classification.entries.begin(), classification.entries.end(),
                    [&](const GreenEntry& e) {
                        return schemes_compatible(e.code.scheme, matrix.scheme);
                    });
    if (!any_compatible)
        throw config_error("green list '" + classification.name +
                           "' does not apply to a " + to_string(matrix.scheme) + " matrix");
    std::vector<bool> mask(matrix.activities.size());
    for (std::size_t a = 0; a < matrix.activities.size(); ++a)
        mask[a] = classification.matches(make_code(matrix.scheme, matrix.activities[a]));
    return mask;
}

}  // namespace ecx
