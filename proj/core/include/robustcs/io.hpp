#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace robustcs::io {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Locale-independent shortest round-trip decimal representation.
std::string format_double(double v);

// RFC 4180: fields containing commas, quotes or newlines are quoted, embedded
// quotes doubled.
std::string csv_escape(const std::string& field);
void write_csv_row(std::ostream& out, std::span<const std::string> fields);
std::vector<std::string> parse_csv_row(const std::string& line);

// Binary PGM (P5, maxval 255). Writing quantizes with quantize8; reading
// returns values back on the [0, 1] grid, so a write/read round trip
// reproduces the quantized frame exactly.
void write_pgm(const std::filesystem::path& path, const Eigen::MatrixXd& image);
Eigen::MatrixXd read_pgm(const std::filesystem::path& path);

// Flat "key = value" files with '#' comments; order preserved.
using KeyValues = std::vector<std::pair<std::string, std::string>>;
KeyValues read_key_values(const std::filesystem::path& path);
void write_key_values(const std::filesystem::path& path, const KeyValues& kv);

// Matrices as CSV with a c0..c{N-1} header; vectors as a single "value" column.
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);
void write_vector_csv(const std::filesystem::path& path, const Eigen::VectorXd& v,
                      const std::string& name = "value");
Eigen::VectorXd read_vector_csv(const std::filesystem::path& path);

// FNV-1a over the file bytes, for manifest checksums.
std::uint64_t fnv1a64_file(const std::filesystem::path& path);

}  // namespace robustcs::io
