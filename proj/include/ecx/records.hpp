#ifndef ECX_RECORDS_HPP
#define ECX_RECORDS_HPP

#include <string>
#include <vector>

#include "ecx/codes.hpp"
#include "ecx/errors.hpp"

namespace ecx {

struct RawRecord {
    std::string geo;
    ActivityCode activity;
    double value = 0.0;
    int period = 0;
};

struct PatentRecord {
    std::string patent_id;
    int period = 0;
    std::vector<ActivityCode> codes;      // non-empty
    std::vector<std::string> locations;   // one per inventor, duplicates allowed
};

enum class ParseMode { Strict, Lenient };

struct CsvSchema {
    std::string geo_column = "geo";
    std::string activity_column = "activity";
    std::string value_column = "value";
    std::string period_column = "period";
    Scheme scheme = Scheme::HS;
    int min_year = 0;
    int max_year = 9999;
    ParseMode mode = ParseMode::Strict;
};

struct PatentSchema {
    std::string id_column = "patent_id";
    std::string period_column = "year";
    std::string codes_column = "codes";
    std::string locations_column = "locations";
    char list_delimiter = ';';
    Scheme scheme = Scheme::CPC;
    int min_year = 0;
    int max_year = 9999;
    ParseMode mode = ParseMode::Strict;
};

struct IngestReport {
    std::size_t rows_read = 0;
    std::size_t records_kept = 0;
    std::size_t zero_value_rows = 0;
    // Malformed rows skipped in lenient mode.
    std::vector<parse_error::bad_line> skipped;
    // All-zero rows/columns retained by matrix construction.
    std::vector<std::string> zero_geos;
    std::vector<std::string> zero_activities;
};

}  // namespace ecx

#endif  // ECX_RECORDS_HPP
