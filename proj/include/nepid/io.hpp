#pragma once

/// \file io.hpp
///
/// On-disk formats.
///
/// Trajectory CSV: header `t,c0_re,c0_im,c1_re,c1_im,...`, one row per time
/// step (t starts at 1). Snapshots are columns in memory and rows on disk.
///
/// Metadata sidecar `<stem>.meta.json`:
///   {n, N, dt, generator, ground_truth_index?, seed, format_version: 1}
///
/// Model JSON:
///   {kind, n, s, T, r, poly: {a, b}, matrices: {...}, residuals: {...},
///    params: {eps, delta}, format_version: 1}
/// with matrices as row-major nested arrays of [re, im] pairs.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "nepid/periodicity.hpp"
#include "nepid/pspectra.hpp"
#include "nepid/realization.hpp"

namespace nepid {

inline constexpr int kFormatVersion = 1;

void write_trajectory_csv(std::ostream& os, const Matrix& X);
Matrix read_trajectory_csv(std::istream& is);

struct TrajectoryMeta {
    Index n = 0;
    Index N = 0;
    std::optional<double> dt;
    std::string generator;
    std::optional<EpsIndex> ground_truth;
    std::optional<std::uint64_t> seed;
};

nlohmann::json meta_to_json(const TrajectoryMeta& meta);
TrajectoryMeta meta_from_json(const nlohmann::json& j);

/// traj.csv -> traj.meta.json
std::filesystem::path meta_path_for(const std::filesystem::path& csv_path);

nlohmann::json matrix_to_json(const Matrix& M);
Matrix matrix_from_json(const nlohmann::json& j);

nlohmann::json model_to_json(const Model& model);
Model model_from_json(const nlohmann::json& j);

// File helpers. Writes go to a temporary sibling and are renamed into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

void save_trajectory(const std::filesystem::path& path, const Matrix& X);
Matrix load_trajectory(const std::filesystem::path& path);
void save_model(const std::filesystem::path& path, const Model& model);
Model load_model(const std::filesystem::path& path);
void save_grid(const std::filesystem::path& path, const PseudospectrumGrid& grid);

} // namespace nepid
