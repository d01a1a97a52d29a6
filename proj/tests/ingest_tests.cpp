#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "ecx/ingest.hpp"
#include "ecx/numeric.hpp"
#include "oracles.hpp"

using namespace ecx;

namespace {

CsvSchema custom_schema() {
    CsvSchema s;
    s.scheme = Scheme::Custom;
    return s;
}

}  // namespace

TEST_CASE("record parsing finds columns by header name") {
    std::istringstream in(
        "period, value ,geo,activity\n"
        "2020,12.5, deu ,cars\n"
        "2021,3,fra,wine\n");
    IngestReport report;
    std::vector<RawRecord> recs = parse_records(in, custom_schema(), &report);
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].geo == "deu");
    CHECK(recs[0].activity.code == "cars");
    CHECK(recs[0].value == 12.5);
    CHECK(recs[0].period == 2020);
    CHECK(recs[1].period == 2021);
    CHECK(report.rows_read == 2);
    CHECK(report.records_kept == 2);
    CHECK(report.skipped.empty());
}

TEST_CASE("strict parsing reports every malformed line at once") {
    std::istringstream in(
        "geo,activity,value,period\n"
        "deu,cars,12.5,2020\n"
        "fra,wine,abc,2020\n"
        "\n"
        "ita,shoes,4.0,notayear\n"
        "esp,oil,-3,2020\n");
    try {
        parse_records(in, custom_schema(), nullptr);
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        REQUIRE(e.lines().size() == 3);
        CHECK(e.lines()[0].line == 3);
        CHECK(e.lines()[1].line == 5);  // the blank line does not count
        CHECK(e.lines()[2].line == 6);
        CHECK(std::string(e.what()).find("3 malformed line(s)") != std::string::npos);
    }
}

TEST_CASE("lenient parsing skips malformed lines and keeps the rest") {
    std::istringstream in(
        "geo,activity,value,period\n"
        "deu,cars,12.5,2020\n"
        "fra,wine,abc,2020\n"
        "ita,shoes,0,2020\n"
        "esp,oil,too,many,fields\n");
    CsvSchema schema = custom_schema();
    schema.mode = ParseMode::Lenient;
    IngestReport report;
    std::vector<RawRecord> recs = parse_records(in, schema, &report);
    REQUIRE(recs.size() == 2);
    CHECK(recs[1].value == 0.0);
    CHECK(report.rows_read == 4);
    CHECK(report.records_kept == 2);
    CHECK(report.zero_value_rows == 1);
    REQUIRE(report.skipped.size() == 2);
    CHECK(report.skipped[0].line == 3);
    CHECK(report.skipped[1].line == 5);
}

TEST_CASE("record parsing rejects structural problems early") {
    CsvSchema schema = custom_schema();
    SUBCASE("empty input") {
        std::istringstream in("");
        CHECK_THROWS_AS(parse_records(in, schema, nullptr), data_error);
    }
    SUBCASE("missing column") {
        std::istringstream in("geo,activity,amount,period\n");
        CHECK_THROWS_AS(parse_records(in, schema, nullptr), config_error);
    }
    SUBCASE("year window") {
        std::istringstream in(
            "geo,activity,value,period\n"
            "deu,cars,1,1990\n"
            "deu,cars,1,2020\n");
        schema.min_year = 2000;
        schema.max_year = 2030;
        CHECK_THROWS_AS(parse_records(in, schema, nullptr), parse_error);
    }
    SUBCASE("scheme-illegal activity codes are malformed rows") {
        std::istringstream in(
            "geo,activity,value,period\n"
            "deu,notanhscode,1,2020\n");
        schema.scheme = Scheme::HS;
        CHECK_THROWS_AS(parse_records(in, schema, nullptr), parse_error);
    }
}

TEST_CASE("patent parsing splits code and location lists") {
    std::istringstream in(
        "patent_id,year,codes,locations\n"
        "p1,2019,Y02E 10/50; H01L31,US-CA;US-NY; DE-BE\n"
        "p2,2020,Y02B10/10;,FR-75\n");
    IngestReport report;
    std::vector<PatentRecord> recs = parse_patents(in, PatentSchema{}, &report);
    REQUIRE(recs.size() == 2);
    REQUIRE(recs[0].codes.size() == 2);
    CHECK(recs[0].codes[0].code == "Y02E10/50");
    CHECK(recs[0].codes[1].code == "H01L31");
    CHECK(recs[0].locations == std::vector<std::string>{"US-CA", "US-NY", "DE-BE"});
    REQUIRE(recs[1].codes.size() == 1);  // the trailing empty entry is dropped
    CHECK(recs[1].period == 2020);
}

TEST_CASE("patent parsing flags duplicates and empty lists") {
    std::istringstream in(
        "patent_id,year,codes,locations\n"
        "p1,2019,Y02E10/50,US\n"
        "p1,2019,Y02E10/50,US\n"
        "p2,2019,;,US\n"
        "p3,2019,Y02E10/50,;\n");
    try {
        parse_patents(in, PatentSchema{}, nullptr);
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        REQUIRE(e.lines().size() == 3);
        CHECK(e.lines()[0].line == 3);
        CHECK(e.lines()[0].message.find("duplicate") != std::string::npos);
        CHECK(e.lines()[1].message.find("no codes") != std::string::npos);
        CHECK(e.lines()[2].message.find("no locations") != std::string::npos);
    }
}

TEST_CASE("fractional counting splits a patent across locations and codes") {
    PatentRecord p;
    p.patent_id = "p1";
    p.period = 2019;
    p.codes = {make_code(Scheme::CPC, "Y02E10/50"), make_code(Scheme::CPC, "H01L31")};
    p.locations = {"US", "US", "DE"};
    std::vector<RawRecord> recs = count_patents({p}, CountMode::Fractional);
    REQUIRE(recs.size() == 4);  // sorted: (DE,H01L31) (DE,Y02E) (US,H01L31) (US,Y02E)
    CHECK(recs[0].geo == "DE");
    CHECK(recs[0].activity.code == "H01L31");
    CHECK(recs[0].value == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
    CHECK(recs[2].geo == "US");
    CHECK(recs[2].value == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    CompensatedSum total;
    for (const RawRecord& r : recs) total.add(r.value);
    CHECK(std::abs(total.value() - 1.0) < 1e-15);
}

TEST_CASE("full counting gives every distinct location one unit") {
    PatentRecord p;
    p.patent_id = "p1";
    p.period = 2019;
    p.codes = {make_code(Scheme::CPC, "Y02E10/50"), make_code(Scheme::CPC, "H01L31")};
    p.locations = {"US", "US", "DE"};
    std::vector<RawRecord> recs = count_patents({p}, CountMode::Full);
    double total = 0.0;
    for (const RawRecord& r : recs) {
        CHECK(r.value == doctest::Approx(0.5).epsilon(1e-15));
        total += r.value;
    }
    CHECK(total == doctest::Approx(2.0).epsilon(1e-15));  // one unit per distinct location
}

TEST_CASE("location shares are computed after geo truncation") {
    PatentRecord p;
    p.patent_id = "p1";
    p.period = 2019;
    p.codes = {make_code(Scheme::CPC, "Y02")};
    p.locations = {"US-CA", "US-NY", "DE-BE"};
    std::vector<RawRecord> recs = count_patents({p}, CountMode::Fractional, 2);
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].geo == "DE");
    CHECK(recs[0].value == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(recs[1].geo == "US");
    CHECK(recs[1].value == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("codes merge before the weight is split") {
    PatentRecord p;
    p.patent_id = "p1";
    p.period = 2019;
    p.codes = {make_code(Scheme::CPC, "Y02E10/50"), make_code(Scheme::CPC, "Y02E10/52")};
    p.locations = {"US"};
    std::vector<RawRecord> recs = count_patents({p}, CountMode::Fractional, 0, 6);
    REQUIRE(recs.size() == 1);  // both truncate to Y02E10
    CHECK(recs[0].activity.code == "Y02E10");
    CHECK(recs[0].value == doctest::Approx(1.0).epsilon(1e-15));

    // Codes shallower than the requested depth are kept as they are.
    p.codes = {make_code(Scheme::CPC, "Y02")};
    recs = count_patents({p}, CountMode::Fractional, 0, 6);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].activity.code == "Y02");
}

TEST_CASE("fractional counting conserves total weight") {
    std::mt19937_64 rng(51);
    std::uniform_int_distribution<int> n_loc(1, 10), n_code(1, 4), pick(0, 25);
    std::vector<PatentRecord> patents;
    for (int i = 0; i < 500; ++i) {
        PatentRecord p;
        p.patent_id = "p" + std::to_string(i);
        p.period = 2019;
        const int nc = n_code(rng);
        for (int c = 0; c < nc; ++c)
            p.codes.push_back(make_code(Scheme::CPC, "Y02A" + std::to_string(10 + pick(rng))));
        const int nl = n_loc(rng);
        for (int l = 0; l < nl; ++l)
            p.locations.push_back(std::string(1, static_cast<char>('A' + pick(rng))) + "-X");
        patents.push_back(std::move(p));
    }
    std::vector<RawRecord> recs = count_patents(patents, CountMode::Fractional, 1);
    CompensatedSum total;
    for (const RawRecord& r : recs) total.add(r.value);
    CHECK(std::abs(total.value() - 500.0) < 1e-12);
}

TEST_CASE("matrix construction aggregates, filters, and sorts") {
    auto rec = [](const char* geo, const char* code, double v, int period) {
        return RawRecord{geo, make_code(Scheme::HS, code), v, period};
    };
    std::vector<RawRecord> recs = {
        rec("fra", "850231", 4, 2020), rec("deu", "010121", 7, 2020),
        rec("deu", "850231", 2, 2020), rec("deu", "850231", 3, 2020),
        rec("fra", "010121", 9, 2021),  // other period
    };
    IngestReport report;
    WeightedBipartite m = build_matrix(recs, 2020, 0, "trade", &report);
    CHECK(m.geos == std::vector<std::string>{"deu", "fra"});
    CHECK(m.activities == std::vector<std::string>{"010121", "850231"});
    CHECK(m.scheme == Scheme::HS);
    CHECK(m.weights(0, 0) == 7.0);
    CHECK(m.weights(0, 1) == 5.0);
    CHECK(m.weights(1, 0) == 0.0);
    CHECK(m.weights(1, 1) == 4.0);
    CHECK(report.zero_geos.empty());
    CHECK(report.zero_activities.empty());

    SUBCASE("digit truncation merges sibling codes") {
        recs.push_back(rec("fra", "850290", 6, 2020));
        WeightedBipartite t = build_matrix(recs, 2020, 4, "trade", nullptr);
        CHECK(t.activities == std::vector<std::string>{"0101", "8502"});
        CHECK(t.weights(1, 1) == 10.0);
    }
    SUBCASE("input order does not leak into the result") {
        std::mt19937_64 rng(52);
        std::shuffle(recs.begin(), recs.end(), rng);
        WeightedBipartite t = build_matrix(recs, 2020, 0, "trade", nullptr);
        CHECK(t.geos == m.geos);
        CHECK(t.activities == m.activities);
        CHECK((t.weights - m.weights).lpNorm<Eigen::Infinity>() == 0.0);
    }
    SUBCASE("empty periods are an error") {
        CHECK_THROWS_AS(build_matrix(recs, 1999, 0, "trade", nullptr), data_error);
    }
}

TEST_CASE("all-zero lines survive construction but are reported") {
    std::vector<RawRecord> recs = {
        {"deu", make_code(Scheme::Custom, "cars"), 5.0, 2020},
        {"fra", make_code(Scheme::Custom, "wine"), 0.0, 2020},
    };
    IngestReport report;
    WeightedBipartite m = build_matrix(recs, 2020, 0, "trade", &report);
    CHECK(m.weights(1, 1) == 0.0);
    CHECK(report.zero_geos == std::vector<std::string>{"fra"});
    CHECK(report.zero_activities == std::vector<std::string>{"wine"});
}

TEST_CASE("mixed classification schemes cannot share a matrix") {
    std::vector<RawRecord> recs = {
        {"deu", make_code(Scheme::HS, "8502"), 5.0, 2020},
        {"fra", make_code(Scheme::Custom, "wine"), 3.0, 2020},
    };
    CHECK_THROWS_AS(build_matrix(recs, 2020, 0, "trade", nullptr), data_error);
}

TEST_CASE("green tagging marks matching matrix columns") {
    std::vector<RawRecord> recs = {
        {"deu", make_code(Scheme::CPC, "Y02E10/50"), 2.0, 2020},
        {"deu", make_code(Scheme::CPC, "H01L31"), 1.0, 2020},
        {"fra", make_code(Scheme::CPC, "Y04S10"), 1.0, 2020},
    };
    WeightedBipartite m = build_matrix(recs, 2020, 0, "patents", nullptr);

    GreenClassification cls;
    cls.name = "y-codes";
    cls.entries.push_back({make_code(Scheme::IPC, "Y02"), MatchMode::Prefix});  // IPC tags CPC
    cls.entries.push_back({make_code(Scheme::IPC, "Y04S10"), MatchMode::Exact});
    std::vector<bool> mask = tag_green(m, cls);
    REQUIRE(mask.size() == 3);  // activities sorted: H01L31, Y02E10/50, Y04S10
    CHECK_FALSE(mask[0]);
    CHECK(mask[1]);
    CHECK(mask[2]);

    SUBCASE("a list with no compatible scheme is a configuration error") {
        GreenClassification hs;
        hs.name = "hs-green";
        hs.entries.push_back({make_code(Scheme::HS, "8502"), MatchMode::Prefix});
        CHECK_THROWS_AS(tag_green(m, hs), config_error);
    }
}
