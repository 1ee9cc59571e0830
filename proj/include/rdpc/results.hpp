#pragma once

// Append-only results table of CurvePoints with a stamped header row.
//
//     # rdpc-results schema=1 dataset=<hash> classifier=<fingerprint> version=<v>
//     run_id,mode,objective,dim,L,rate,lambda_c,lambda_p,mse,ce,accuracy,w1_proxy,seed
//
// ce is in nats. w1_proxy is a critic-based estimate, written "nan" for runs
// without a critic.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rdpc/datamodel.hpp"

namespace rdpc {

inline constexpr int kResultsSchema = 1;
inline constexpr std::string_view kResultsColumns =
    "run_id,mode,objective,dim,L,rate,lambda_c,lambda_p,mse,ce,accuracy,w1_proxy,seed";

struct TableMeta {
    int schema = kResultsSchema;
    std::string dataset_hash = "unknown";
    std::string classifier_fingerprint = "unknown";
    std::string version = "0.1.0";

    friend bool operator==(const TableMeta&, const TableMeta&) = default;
};

struct ResultsTable {
    TableMeta meta;
    std::vector<CurvePoint> rows;

    const CurvePoint* find(std::string_view run_id) const;
};

std::string to_csv_row(const CurvePoint& p);
CurvePoint from_csv_row(std::string_view line);

std::string to_csv(const ResultsTable& table);
ResultsTable from_csv(std::string_view text);
std::string to_json(const ResultsTable& table);
ResultsTable from_json(std::string_view text);

/// Reads a table file; a missing file yields an empty table.
ResultsTable read_table(const std::string& path);

/// Appends one row under an exclusive lock, creating the file (with header)
/// when absent. Returns false without writing when run_id is already present.
bool append_row(const std::string& path, const TableMeta& meta, const CurvePoint& point);

enum class ExportFormat { kCsv, kJson };

/// Writes `table` to `path`. Returns false and writes nothing when the table
/// has no rows.
bool export_table(const ResultsTable& table, ExportFormat format, const std::string& path);

}  // namespace rdpc
