// Feature and label file formats.
//
// CSV: one row per feature, one column per frame, comma separated. Labels
// are N integers separated by commas and/or newlines.
//
// Binary (little endian):
//   "GCRL" | u32 version (=1) | u32 n | u32 N | f64[n*N] column-major
//   optional: u32 label_count (=N) | i32[N]

#ifndef GCRL_IO_HPP
#define GCRL_IO_HPP

#include "gcrl/core.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>

namespace gcrl {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kBinaryVersion = 1;

Matrix read_csv_matrix(const std::filesystem::path& path);
Labels read_labels_csv(const std::filesystem::path& path);
void write_csv_matrix(const std::filesystem::path& path, const Matrix& m);
void write_labels_csv(const std::filesystem::path& path, const Labels& labels);

/// Raw binary read; no normalization.
FeatureSequence read_binary(const std::filesystem::path& path);
void write_binary(const std::filesystem::path& path, const FeatureSequence& seq);

/// True when the file starts with the binary magic.
bool is_binary_features(const std::filesystem::path& path);

/// Reads CSV or binary features (detected by magic), attaches labels from
/// the optional label CSV, validates and normalizes to [0, 1].
FeatureSequence ingest(const std::filesystem::path& path,
                       const std::optional<std::filesystem::path>& labels_path = std::nullopt);

}  // namespace gcrl

#endif  // GCRL_IO_HPP
