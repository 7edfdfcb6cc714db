#include "amscale/placements.hpp"

#include "amscale/error.hpp"
#include "amscale/format.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_set>

namespace amscale {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split(const std::string& line, char delimiter) {
  std::vector<std::string> fields;
  std::string::size_type start = 0;
  while (true) {
    auto pos = line.find(delimiter, start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::string trim(const std::string& s) {
  auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
void require_unique(const std::vector<T>& items, const char* what) {
  std::unordered_set<T> seen;
  for (const auto& item : items) {
    if (!seen.insert(item).second) {
      throw ScalingError(ErrorCode::parse_error,
                         std::string("duplicate ") + what + " '" + item + "'");
    }
  }
}

double parse_number(const std::string& cell, std::size_t line_no) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  if (!cell.empty() && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ScalingError(ErrorCode::parse_error,
                       "line " + std::to_string(line_no) + ": non-numeric cell '" + cell + "'");
  }
  if (!std::isfinite(value)) {
    throw ScalingError(ErrorCode::parse_error,
                       "line " + std::to_string(line_no) + ": non-finite cell '" + cell + "'");
  }
  return value;
}

}  // namespace

PlacementMatrix::PlacementMatrix(Matrix values, Mask missing,
                                 std::vector<std::string> stimulus_labels,
                                 std::vector<std::string> respondent_ids,
                                 std::optional<Vector> self_placement)
    : values_(std::move(values)),
      missing_(std::move(missing)),
      labels_(std::move(stimulus_labels)),
      ids_(std::move(respondent_ids)),
      self_(std::move(self_placement)) {
  if (values_.rows() < 1 || values_.cols() < 1) {
    throw ScalingError(ErrorCode::empty_input, "placement matrix needs at least one row and column");
  }
  if (missing_.rows() != values_.rows() || missing_.cols() != values_.cols()) {
    throw ScalingError(ErrorCode::config_error, "missing mask shape does not match values");
  }
  if (labels_.size() != stimuli() || ids_.size() != respondents()) {
    throw ScalingError(ErrorCode::config_error, "label or id count does not match matrix shape");
  }
  if (self_ && static_cast<std::size_t>(self_->size()) != respondents()) {
    throw ScalingError(ErrorCode::config_error, "self placement length does not match respondents");
  }
  require_unique(labels_, "stimulus label");
  require_unique(ids_, "respondent id");
  for (Eigen::Index i = 0; i < values_.rows(); ++i) {
    for (Eigen::Index j = 0; j < values_.cols(); ++j) {
      if (missing_(i, j)) {
        values_(i, j) = kNaN;
      } else if (!std::isfinite(values_(i, j))) {
        throw ScalingError(ErrorCode::parse_error, "non-finite placement at row " +
                                                       std::to_string(i + 1));
      }
    }
  }
}

PlacementMatrix PlacementMatrix::from_values(Matrix values, std::optional<Vector> self) {
  const auto n = static_cast<std::size_t>(values.rows());
  const auto j = static_cast<std::size_t>(values.cols());
  std::vector<std::string> labels(j);
  for (std::size_t k = 0; k < j; ++k) labels[k] = default_stimulus_label(k);
  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = std::to_string(i + 1);
  Mask missing = Mask::Constant(values.rows(), values.cols(), false);
  return PlacementMatrix(std::move(values), std::move(missing), std::move(labels),
                         std::move(ids), std::move(self));
}

bool PlacementMatrix::row_complete(std::size_t i) const {
  return !missing_.row(static_cast<Eigen::Index>(i)).any();
}

PlacementMatrix PlacementMatrix::select_rows(const std::vector<std::size_t>& rows) const {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Matrix values(n, values_.cols());
  Mask missing(n, values_.cols());
  std::vector<std::string> ids;
  ids.reserve(rows.size());
  std::optional<Vector> self;
  if (self_) self = Vector(n);

  std::vector<std::size_t> uses(respondents(), 0);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto src = rows[static_cast<std::size_t>(r)];
    values.row(r) = values_.row(static_cast<Eigen::Index>(src));
    missing.row(r) = missing_.row(static_cast<Eigen::Index>(src));
    const auto k = uses[src]++;
    ids.push_back(k == 0 ? ids_[src] : ids_[src] + "#" + std::to_string(k));
    if (self) (*self)(r) = (*self_)(static_cast<Eigen::Index>(src));
  }
  return PlacementMatrix(std::move(values), std::move(missing), labels_, std::move(ids),
                         std::move(self));
}

std::optional<std::size_t> PlacementMatrix::resolve_stimulus(const std::string& key) const {
  auto it = std::find(labels_.begin(), labels_.end(), key);
  if (it != labels_.end()) return static_cast<std::size_t>(it - labels_.begin());
  std::size_t index = 0;
  auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), index);
  if (ec == std::errc{} && ptr == key.data() + key.size() && index < stimuli()) return index;
  return std::nullopt;
}

bool operator==(const PlacementMatrix& a, const PlacementMatrix& b) {
  if (a.values_.rows() != b.values_.rows() || a.values_.cols() != b.values_.cols()) return false;
  if ((a.missing_ != b.missing_).any()) return false;
  for (Eigen::Index i = 0; i < a.values_.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.values_.cols(); ++j) {
      if (!a.missing_(i, j) && a.values_(i, j) != b.values_(i, j)) return false;
    }
  }
  if (a.self_.has_value() != b.self_.has_value()) return false;
  if (a.self_) {
    for (Eigen::Index i = 0; i < a.self_->size(); ++i) {
      const double x = (*a.self_)(i);
      const double y = (*b.self_)(i);
      if (x != y && !(std::isnan(x) && std::isnan(y))) return false;
    }
  }
  return a.labels_ == b.labels_ && a.ids_ == b.ids_;
}

std::string default_stimulus_label(std::size_t index) {
  std::string label;
  ++index;
  while (index > 0) {
    --index;
    label.insert(label.begin(), static_cast<char>('A' + index % 26));
    index /= 26;
  }
  return label;
}

std::vector<std::string> read_csv_header(const std::filesystem::path& path, char delimiter) {
  std::ifstream in(path);
  if (!in) throw ScalingError(ErrorCode::io_error, "cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) {
    throw ScalingError(ErrorCode::empty_input, "'" + path.string() + "' has no header row");
  }
  auto fields = split(line, delimiter);
  for (auto& f : fields) f = trim(f);
  return fields;
}

PlacementMatrix load_csv(const std::filesystem::path& path, const IngestOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScalingError(ErrorCode::io_error, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str(), opts);
}

PlacementMatrix parse_csv(const std::string& text, const IngestOptions& opts) {
  if (opts.missing_tokens.empty()) {
    throw ScalingError(ErrorCode::config_error, "missing_tokens must not be empty");
  }
  if (!std::isprint(static_cast<unsigned char>(opts.delimiter))) {
    throw ScalingError(ErrorCode::config_error, "delimiter must be a printable character");
  }

  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    throw ScalingError(ErrorCode::empty_input, "input has no header row");
  }
  auto header = split(line, opts.delimiter);
  for (auto& h : header) h = trim(h);
  // Tolerate a UTF-8 byte order mark on the first header cell.
  if (header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);

  auto column_of = [&](const std::optional<std::string>& name) -> std::optional<std::size_t> {
    if (!name) return std::nullopt;
    auto it = std::find(header.begin(), header.end(), *name);
    if (it == header.end()) {
      throw ScalingError(ErrorCode::parse_error, "header has no column '" + *name + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto id_col = column_of(opts.id_column);
  const auto self_col = column_of(opts.self_column);
  if (id_col && self_col && *id_col == *self_col) {
    throw ScalingError(ErrorCode::config_error, "id and self columns must differ");
  }

  std::vector<std::size_t> stimulus_cols;
  std::vector<std::string> labels;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == id_col || c == self_col) continue;
    stimulus_cols.push_back(c);
    labels.push_back(header[c]);
  }
  if (stimulus_cols.empty()) {
    throw ScalingError(ErrorCode::parse_error, "header names no stimulus columns");
  }

  std::vector<std::vector<double>> rows;
  std::vector<std::vector<bool>> missing_rows;
  std::vector<std::string> ids;
  std::vector<double> self_values;
  std::vector<bool> self_missing;

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;
    auto fields = split(line, opts.delimiter);
    if (fields.size() != header.size()) {
      throw ScalingError(ErrorCode::parse_error,
                         "line " + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " fields, found " +
                             std::to_string(fields.size()));
    }
    for (auto& f : fields) f = trim(f);

    std::vector<double> row(stimulus_cols.size());
    std::vector<bool> miss(stimulus_cols.size());
    for (std::size_t k = 0; k < stimulus_cols.size(); ++k) {
      const auto& cell = fields[stimulus_cols[k]];
      if (opts.missing_tokens.count(cell)) {
        miss[k] = true;
        row[k] = kNaN;
      } else {
        row[k] = parse_number(cell, line_no);
      }
    }
    rows.push_back(std::move(row));
    missing_rows.push_back(std::move(miss));
    ids.push_back(id_col ? fields[*id_col] : std::to_string(rows.size()));
    if (self_col) {
      const auto& cell = fields[*self_col];
      const bool is_missing = opts.missing_tokens.count(cell) > 0;
      self_missing.push_back(is_missing);
      self_values.push_back(is_missing ? kNaN : parse_number(cell, line_no));
    }
  }
  if (rows.empty()) throw ScalingError(ErrorCode::empty_input, "input has no data rows");

  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto j = static_cast<Eigen::Index>(stimulus_cols.size());
  Matrix values(n, j);
  Mask missing(n, j);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < j; ++k) {
      values(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
      missing(i, k) = missing_rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
    }
  }
  std::optional<Vector> self;
  if (self_col) {
    self = Vector::Map(self_values.data(), n);
  }
  return PlacementMatrix(std::move(values), std::move(missing), std::move(labels), std::move(ids),
                         std::move(self));
}

std::string to_csv(const PlacementMatrix& p) {
  std::string out = "id";
  for (const auto& label : p.stimulus_labels()) out += "," + label;
  if (p.self_placement()) out += ",self";
  out += "\n";
  for (std::size_t i = 0; i < p.respondents(); ++i) {
    out += p.respondent_ids()[i];
    for (std::size_t j = 0; j < p.stimuli(); ++j) {
      out += ",";
      out += p.is_missing(i, j) ? std::string("NA")
                                : format_real(p.values()(static_cast<Eigen::Index>(i),
                                                         static_cast<Eigen::Index>(j)));
    }
    if (p.self_placement()) {
      const double s = (*p.self_placement())(static_cast<Eigen::Index>(i));
      out += ",";
      out += std::isfinite(s) ? format_real(s) : std::string("NA");
    }
    out += "\n";
  }
  return out;
}

CompleteCases complete_cases(const PlacementMatrix& p) {
  std::vector<std::size_t> keep;
  std::vector<std::size_t> dropped;
  for (std::size_t i = 0; i < p.respondents(); ++i) {
    (p.row_complete(i) ? keep : dropped).push_back(i);
  }
  if (keep.empty()) {
    throw ScalingError(ErrorCode::no_valid_respondents,
                       "every respondent has at least one missing placement");
  }
  if (dropped.empty()) return {p, {}};
  return {p.select_rows(keep), std::move(dropped)};
}

Matrix design_matrix(const Eigen::Ref<const Vector>& row) {
  Matrix d(row.size(), 2);
  d.col(0).setOnes();
  d.col(1) = row;
  return d;
}

}  // namespace amscale
