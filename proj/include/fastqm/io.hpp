#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fastqm/qmfit.hpp"
#include "fastqm/snapshots.hpp"

namespace fastqm {

/// FQM1 container.
///
/// Layout (all integers unsigned 64-bit little endian):
///   "FQM1" | u64 header length | header bytes (UTF-8 "key=value" lines)
///   then, until end of file, blocks of
///   u64 name length | name bytes | u64 rows | u64 cols | rows*cols IEEE-754 doubles (LE, column-major)
struct Fqm1File {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::pair<std::string, Eigen::MatrixXd>> blocks;

  void set_meta(const std::string& key, const std::string& value);
  std::optional<std::string> meta(const std::string& key) const;

  void add_block(const std::string& name, Eigen::MatrixXd value);
  bool has_block(const std::string& name) const;
  /// IoError when missing.
  const Eigen::MatrixXd& block(const std::string& name) const;
};

void write_fqm1(std::ostream& os, const Fqm1File& file);
Fqm1File read_fqm1(std::istream& is);
void write_fqm1(const std::filesystem::path& path, const Fqm1File& file);
Fqm1File read_fqm1(const std::filesystem::path& path);

/// Maximum number of entries accepted in CSV matrices.
inline constexpr Eigen::Index kCsvMaxEntries = 1'000'000;

/// Comma-separated numbers, one matrix row per line; blank lines and lines starting with '#' are skipped.
Eigen::MatrixXd read_csv_matrix(std::istream& is);
Eigen::MatrixXd read_csv_matrix(const std::filesystem::path& path);
/// `comments` are emitted first, each prefixed with "# ".
void write_csv_matrix(std::ostream& os, const Eigen::Ref<const Eigen::MatrixXd>& M,
                      const std::vector<std::string>& comments = {});
void write_csv_matrix(const std::filesystem::path& path, const Eigen::Ref<const Eigen::MatrixXd>& M,
                      const std::vector<std::string>& comments = {});

/// Snapshot matrix (N x K) from CSV or FQM1 (block "data", else the first block), detected by magic bytes.
Eigen::MatrixXd load_matrix(const std::filesystem::path& path);
/// FQM1 when the extension is .fqm/.fqm1, CSV otherwise.
void save_matrix(const std::filesystem::path& path, const Eigen::Ref<const Eigen::MatrixXd>& M,
                 const std::vector<std::pair<std::string, std::string>>& metadata = {});

Fqm1File basis_to_fqm1(const CandidateBasis& basis);
/// Throws IoError when required blocks are missing or inconsistent.
CandidateBasis basis_from_fqm1(const Fqm1File& file);

Fqm1File model_to_fqm1(const QuadraticManifoldModel& model);
QuadraticManifoldModel model_from_fqm1(const Fqm1File& file);

/// Round-trippable decimal rendering (%.17g).
std::string format_number(double v);

}  // namespace fastqm
