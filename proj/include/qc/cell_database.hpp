#pragma once

// Reading, writing and checking cell databases.

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qc/cell.hpp"

namespace qc {

enum class DbFormat { CanonicalCsv, LegacyFlag, LegacyVolume, Json };

/// Accepts canonical_csv, legacy_flag, legacy_volume, json.
DbFormat parse_db_format(std::string_view name);
std::string_view to_string(DbFormat format);

struct ParseOptions {
    double classify_tol = kDefaultClassifyTol;
    std::string source_name;  ///< recorded as "parsed:<name>" when not empty
};

/// Reads any supported format. JSON is recognised by a leading '{'; everything
/// else is read as a comma/whitespace token stream of 26-token records
/// (index, 24 coordinates, tail). '#' starts a comment running to end of line.
/// Ids are reassigned 1..N; the printed index is kept in source_index.
/// Throws TokenCountMismatch, MalformedNumber or TailInvalid with the location.
CellDatabase parse_database(std::string_view text, const ParseOptions& options = {});
CellDatabase parse_database(std::istream& in, const ParseOptions& options = {});
CellDatabase load_database(const std::string& path, const ParseOptions& options = {});

/// canonical_csv and json round-trip every double exactly.
void write_database(std::ostream& out, const CellDatabase& db, DbFormat format);
std::string write_database(const CellDatabase& db, DbFormat format);

struct Tolerances {
    double geometry = 1e-9;        ///< unit edges, closure, edge directions
    double volume = 1e-9;          ///< tail against determinant
    double classify = kDefaultClassifyTol;
    double golden_ratio = 1e-9;
    double duplicate_quantum = 1e-6;

    /// 5e-4 geometry, 1e-4 on the ratio, 1e-3 duplicate quantum.
    static Tolerances legacy();
    static Tolerances generated();
    /// legacy() for databases read from legacy text, generated() otherwise.
    static Tolerances for_database(const CellDatabase& db);
};

struct CheckResult {
    std::string name;
    bool passed = true;
    double worst = 0.0;  ///< largest deviation seen
    std::vector<std::size_t> failing_ids;
    std::string detail;
};

struct ValidationReport {
    std::vector<CheckResult> checks;  ///< in the order a..g

    bool passed() const;
    const CheckResult& check(std::string_view name) const;
    std::string summary() const;
};

/// Runs: unit_edges, closure, volume, golden_ratio, counters, duplicates, edge_directions.
ValidationReport validate(const CellDatabase& db, const Tolerances& tol);
ValidationReport validate(const CellDatabase& db);

/// Mean |volume| of the fat cells over the mean of the thin cells; nullopt
/// when a class is missing.
std::optional<double> mean_volume_ratio(const std::vector<QCCell>& cells);

}  // namespace qc
