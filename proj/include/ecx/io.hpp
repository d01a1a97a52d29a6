#ifndef ECX_IO_HPP
#define ECX_IO_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ecx/assist.hpp"
#include "ecx/bicm.hpp"
#include "ecx/bipartite.hpp"
#include "ecx/green.hpp"
#include "ecx/nestedness.hpp"
#include "ecx/proximity.hpp"
#include "ecx/records.hpp"
#include "ecx/score.hpp"
#include "ecx/validate.hpp"

namespace ecx::io {

// 17 significant digits: every finite double round-trips exactly.
std::string format_float(double v);

// FNV-1a over a file's bytes, as a fixed-width hex string.  Used to pin
// input identity in run manifests.
std::string digest_file(const std::filesystem::path& path);

// Matrix artifacts are a CSV grid (corner cell "geo", one column per
// activity) plus a ".meta.json" sidecar carrying scheme, period, layer and
// kind-specific fields.  Cells that are undefined (RCA over a zero marginal)
// are written as empty fields.

void save_weighted(const WeightedBipartite& m, const std::filesystem::path& csv);
WeightedBipartite load_weighted(const std::filesystem::path& csv);

void save_rca(const RcaMatrix& m, const std::filesystem::path& csv);
RcaMatrix load_rca(const std::filesystem::path& csv);

void save_binary(const BinaryBipartite& m, const std::filesystem::path& csv);
BinaryBipartite load_binary(const std::filesystem::path& csv);

// Scores export as CSV (id, value, rank) plus a JSON document with the full
// method and convergence metadata.
void save_scores(const ScoreVector& s, const std::filesystem::path& csv);
ScoreVector load_scores(const std::filesystem::path& csv);

void save_proximity(const ProximityNetwork& net, const std::filesystem::path& csv);
ProximityNetwork load_proximity(const std::filesystem::path& csv);

void save_assist(const AssistMatrix& b, const std::filesystem::path& csv);
AssistMatrix load_assist(const std::filesystem::path& csv);

void save_bicm(const BicmModel& model, const std::filesystem::path& csv);
BicmModel load_bicm(const std::filesystem::path& csv);

// Edge list (source, target, weight, p_value, significant) holding only the
// significant edges, plus a full p-value grid and a JSON graph document.
void save_validated(const ValidatedNetwork& net, const std::filesystem::path& edges_csv);

void save_green(const GreenScores& g, const std::filesystem::path& csv);

void save_nestedness(const NestednessReport& rep, const std::vector<std::string>& geos,
                     const std::vector<std::string>& activities,
                     const std::filesystem::path& json);

// Canonical record dump: geo,activity,value,period with scheme metadata.
void save_records(const std::vector<RawRecord>& records, Scheme scheme,
                  const std::filesystem::path& csv);
std::vector<RawRecord> load_records(const std::filesystem::path& csv);

}  // namespace ecx::io

#endif  // ECX_IO_HPP
