#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace amscale {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Respondent-by-stimulus placements. Rows are respondents, columns stimuli.
// Cells flagged in `missing` hold NaN and must not be read as data.
class PlacementMatrix {
 public:
  PlacementMatrix(Matrix values, Mask missing,
                  std::vector<std::string> stimulus_labels,
                  std::vector<std::string> respondent_ids,
                  std::optional<Vector> self_placement = std::nullopt);

  // Complete matrix with default labels (A, B, ...) and ids ("1", "2", ...).
  static PlacementMatrix from_values(Matrix values,
                                     std::optional<Vector> self = std::nullopt);

  std::size_t respondents() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t stimuli() const { return static_cast<std::size_t>(values_.cols()); }

  const Matrix& values() const { return values_; }
  const Mask& missing() const { return missing_; }
  const std::vector<std::string>& stimulus_labels() const { return labels_; }
  const std::vector<std::string>& respondent_ids() const { return ids_; }
  const std::optional<Vector>& self_placement() const { return self_; }

  bool is_missing(std::size_t i, std::size_t j) const {
    return missing_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  bool row_complete(std::size_t i) const;
  bool has_missing() const { return missing_.any(); }

  // Rows in the given order (duplicates allowed, ids suffixed to stay unique).
  PlacementMatrix select_rows(const std::vector<std::size_t>& rows) const;

  // Index of a stimulus by label, or by decimal index when no label matches.
  std::optional<std::size_t> resolve_stimulus(const std::string& key) const;

  friend bool operator==(const PlacementMatrix& a, const PlacementMatrix& b);

 private:
  Matrix values_;
  Mask missing_;
  std::vector<std::string> labels_;
  std::vector<std::string> ids_;
  std::optional<Vector> self_;
};

struct IngestOptions {
  std::set<std::string> missing_tokens{"", "NA", "na", "."};
  std::optional<std::string> self_column;
  std::optional<std::string> id_column;
  char delimiter = ',';
};

struct CompleteCases {
  PlacementMatrix matrix;
  std::vector<std::size_t> dropped;  // input row indices, ascending
};

// Spreadsheet-style column labels: A..Z, AA, AB, ...
std::string default_stimulus_label(std::size_t index);

std::vector<std::string> read_csv_header(const std::filesystem::path& path, char delimiter = ',');
PlacementMatrix load_csv(const std::filesystem::path& path, const IngestOptions& opts = {});
PlacementMatrix parse_csv(const std::string& text, const IngestOptions& opts = {});

// Writes `id,<labels...>[,self]` with 17 significant digits; missing cells are "NA".
std::string to_csv(const PlacementMatrix& p);

CompleteCases complete_cases(const PlacementMatrix& p);

// J x 2 design: a column of ones next to the respondent's placements.
Matrix design_matrix(const Eigen::Ref<const Vector>& row);

}  // namespace amscale
