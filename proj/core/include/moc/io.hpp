#pragma once

// File formats:
//
//   matrix CSV     one row per line, comma-separated decimals, no header.
//   embedding CSV  header `azimuth_deg,e_0,...,e_{D-1}`, one row per view,
//                  exactly one row at azimuth 0 (the reference).
//   feature stack  directory with stack.json {"height","width","channels","azimuths"}
//                  and one `view_<azimuth>.csv` per view holding 4H rows x W
//                  columns (channels stacked vertically).
//   harness JSON   {"scene": {...}, "optimizer": {...}, "schedule": {...}, "seed"}
//   trace CSV      iter,total,r_svo,r_spd,lambda_svo,lambda_spd,min_gap,lem_dist
//
// Doubles are written in shortest round-trip form.

#include <filesystem>
#include <iosfwd>
#include <string>

#include <Eigen/Dense>

#include "moc/feature_stats.hpp"
#include "moc/harness.hpp"
#include "moc/view_order.hpp"

namespace moc {

std::string format_double(double v);

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m);
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m);

/// Rows are sorted by azimuth; the azimuth-0 row becomes the reference.
ViewEmbeddingSequence read_embeddings_csv(const std::filesystem::path& path);
void write_embeddings_csv(const std::filesystem::path& path, const ViewEmbeddingSequence& vs);

std::string view_file_name(double azimuth);
FeatureMapStack read_feature_stack(const std::filesystem::path& dir);
void write_feature_stack(const std::filesystem::path& dir, const FeatureMapStack& stack);

/// Missing blocks and keys keep their defaults; unknown keys, wrong types and
/// constraint violations raise ConfigError naming every offending key.
HarnessConfig parse_harness_config(const std::string& json_text);
HarnessConfig read_harness_config(const std::filesystem::path& path);

inline constexpr const char* kTraceHeader =
    "iter,total,r_svo,r_spd,lambda_svo,lambda_spd,min_gap,lem_dist";

void write_trace_csv(std::ostream& out, const OptimizationTrace& trace);
void write_trace_csv(const std::filesystem::path& path, const OptimizationTrace& trace);
std::vector<TraceRecord> read_trace_csv(const std::filesystem::path& path);

}  // namespace moc
