#ifndef ECX_INGEST_HPP
#define ECX_INGEST_HPP

#include <istream>
#include <string>
#include <vector>

#include "ecx/bipartite.hpp"
#include "ecx/codes.hpp"
#include "ecx/records.hpp"

namespace ecx {

// Parses comma-delimited UTF-8 text with a header row into records. Strict
// mode scans the whole stream and throws one parse_error carrying every
// malformed line; lenient mode skips them and lists them in the report.
std::vector<RawRecord> parse_records(std::istream& in, const CsvSchema& schema,
                                     IngestReport* report = nullptr);

// Patent rows carry ';'-separated code and location lists. Duplicate patent
// ids count as malformed rows.
std::vector<PatentRecord> parse_patents(std::istream& in, const PatentSchema& schema,
                                        IngestReport* report = nullptr);

enum class CountMode { Fractional, Full };

// Turns patents into (geo, code, period) weights. Fractional mode splits
// each patent's unit weight across locations by share; full mode gives every
// distinct location weight 1. Either way the weight is divided equally
// across the patent's distinct codes. `geo_level` truncates location ids to
// that many leading characters and `code_digits` truncates codes first, so
// shares are computed at the granularity the matrix will use; 0 keeps ids
// and codes as they are.
std::vector<RawRecord> count_patents(const std::vector<PatentRecord>& records, CountMode mode,
                                     int geo_level = 0, int code_digits = 0);

// Aggregates one period's records into a weight matrix at the requested
// code depth (0 keeps codes as they are). Geos and activities are sorted so
// input order cannot leak into the result; all-zero rows and columns are
// kept and listed in the report.
WeightedBipartite build_matrix(const std::vector<RawRecord>& records, int period, int digits,
                               const std::string& layer, IngestReport* report = nullptr);

// Marks the matrix columns matching the classification. Throws when no
// entry's scheme is compatible with the matrix scheme.
std::vector<bool> tag_green(const WeightedBipartite& matrix,
                            const GreenClassification& classification);

}  // namespace ecx

#endif  // ECX_INGEST_HPP
