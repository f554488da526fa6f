#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "adaam/linalg.hpp"

namespace adaam {

struct LabeledDataset {
  DenseMatrix x;
  /// Dense ids 0..c'-1 in first-appearance order, when the source had labels.
  std::optional<std::vector<std::size_t>> labels;
  std::string name;

  /// Number of distinct label ids (0 without labels).
  std::size_t class_count() const;
};

/// Label column by zero-based index or by header name.
using LabelColumn = std::variant<std::size_t, std::string>;

/// Parses comma-separated numeric rows. A first row with a non-numeric
/// feature cell is treated as a header (required when the label column is
/// named). Throws RaggedRows, NonNumericCell (with 1-based row/column) or
/// EmptyFile.
LabeledDataset parse_csv(std::string_view text, const std::optional<LabelColumn>& label_column = {},
                         std::string name = {});
LabeledDataset load_csv(const std::string& path, const std::optional<LabelColumn>& label_column = {});

/// Binary layout, little-endian: "AAM1", u64 n, u64 d, u64 has_labels (0/1),
/// n*d f64 row-major, then n u32 labels when flagged.
void save_binary(const LabeledDataset& data, const std::string& path);
LabeledDataset load_binary(const std::string& path);

/// Binary when the file starts with the "AAM1" magic, CSV otherwise.
LabeledDataset load_dataset(const std::string& path, const std::optional<LabelColumn>& label_column = {});

/// Writes rows as CSV with 17 significant digits, optionally appending the
/// label as a last column.
void save_csv(const DenseMatrix& x, const std::optional<std::vector<std::size_t>>& labels,
              const std::string& path);

struct BlobSpec {
  std::size_t clusters = 4;
  std::size_t samples = 400;
  std::size_t features = 20;
  /// Minimum centre distance in units of sigma.
  double separation = 10.0;
  double sigma = 1.0;
  std::uint64_t seed = 7;
};

/// Isotropic Gaussian clusters around seeded random centres scaled so the
/// closest pair of centres is exactly separation * sigma apart. Instance i
/// belongs to cluster i mod c, so sizes differ by at most one.
LabeledDataset synth_blobs(const BlobSpec& spec);

/// Centres used by synth_blobs for the same spec.
DenseMatrix blob_centres(const BlobSpec& spec);

}  // namespace adaam
