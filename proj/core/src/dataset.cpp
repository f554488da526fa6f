#include "adaam/dataset.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "adaam/error.hpp"

namespace adaam {
namespace {

constexpr std::array<char, 4> kMagic{'A', 'A', 'M', '1'};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::optional<double> parse_number(std::string_view cell) {
  if (cell.empty()) return std::nullopt;
  if (cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc{} || ptr != cell.data() + cell.size()) return std::nullopt;
  return value;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string stem_of(const std::string& path) {
  const auto slash = path.find_last_of("/\\");
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  const auto dot = base.find_last_of('.');
  return dot == std::string::npos || dot == 0 ? base : base.substr(0, dot);
}

template <typename T>
void put_le(std::string& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  auto bits = std::bit_cast<U>(value);
  for (std::size_t b = 0; b < sizeof(U); ++b) {
    out.push_back(static_cast<char>(bits & 0xFFu));
    bits >>= 8;
  }
}

template <typename T>
T get_le(std::string_view bytes, std::size_t& offset) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  if (bytes.size() - offset < sizeof(U)) throw Error(ErrorCode::TruncatedFile, "unexpected end of data");
  U bits = 0;
  for (std::size_t b = 0; b < sizeof(U); ++b) {
    bits |= static_cast<U>(static_cast<unsigned char>(bytes[offset + b])) << (8 * b);
  }
  offset += sizeof(U);
  return std::bit_cast<T>(bits);
}

}  // namespace

std::size_t LabeledDataset::class_count() const {
  if (!labels || labels->empty()) return 0;
  return *std::max_element(labels->begin(), labels->end()) + 1;
}

LabeledDataset parse_csv(std::string_view text, const std::optional<LabelColumn>& label_column, std::string name) {
  std::vector<std::vector<std::string_view>> rows;
  std::vector<std::size_t> line_numbers;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    const auto line = trim(text.substr(start, nl == std::string_view::npos ? text.npos : nl - start));
    ++line_no;
    if (!line.empty()) {
      rows.push_back(split_cells(line));
      line_numbers.push_back(line_no);
    }
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  if (rows.empty()) throw Error(ErrorCode::EmptyFile, "no rows in CSV input");

  const std::size_t width = rows.front().size();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != width) {
      throw Error(ErrorCode::RaggedRows, "line " + std::to_string(line_numbers[r]) + " has " +
                                             std::to_string(rows[r].size()) + " cells, expected " +
                                             std::to_string(width));
    }
  }

  std::optional<std::size_t> label_index;
  bool header = false;
  if (label_column && std::holds_alternative<std::string>(*label_column)) {
    const auto& wanted = std::get<std::string>(*label_column);
    const auto& first = rows.front();
    const auto it = std::find(first.begin(), first.end(), std::string_view(wanted));
    if (it == first.end()) throw Error(ErrorCode::InvalidParams, "no column named '" + wanted + "'");
    label_index = static_cast<std::size_t>(it - first.begin());
    header = true;
  } else if (label_column) {
    label_index = std::get<std::size_t>(*label_column);
    if (*label_index >= width) {
      throw Error(ErrorCode::InvalidParams, "label column " + std::to_string(*label_index) +
                                                " out of range for " + std::to_string(width) + " columns");
    }
  }
  if (!header) {
    for (std::size_t col = 0; col < width; ++col) {
      if (col != label_index && !parse_number(rows.front()[col])) header = true;
    }
  }

  const std::size_t first_data = header ? 1 : 0;
  const std::size_t n = rows.size() - first_data;
  const std::size_t d = width - (label_index ? 1 : 0);
  if (n == 0) throw Error(ErrorCode::EmptyFile, "CSV input has a header but no data rows");
  if (d == 0) throw Error(ErrorCode::EmptyFile, "CSV input has no feature columns");

  LabeledDataset out;
  out.name = std::move(name);
  out.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  std::vector<std::size_t> labels;
  std::unordered_map<std::string_view, std::size_t> label_ids;
  for (std::size_t r = 0; r < n; ++r) {
    const auto& cells = rows[first_data + r];
    Eigen::Index feature = 0;
    for (std::size_t col = 0; col < width; ++col) {
      if (col == label_index) {
        const auto [it, inserted] = label_ids.try_emplace(cells[col], label_ids.size());
        labels.push_back(it->second);
        continue;
      }
      const auto value = parse_number(cells[col]);
      if (!value || !std::isfinite(*value)) {
        throw Error(ErrorCode::NonNumericCell, "row " + std::to_string(line_numbers[first_data + r]) +
                                                   ", column " + std::to_string(col + 1) + ": '" +
                                                   std::string(cells[col]) + "'");
      }
      out.x(static_cast<Eigen::Index>(r), feature++) = *value;
    }
  }
  if (label_index) out.labels = std::move(labels);
  return out;
}

LabeledDataset load_csv(const std::string& path, const std::optional<LabelColumn>& label_column) {
  return parse_csv(read_file(path), label_column, stem_of(path));
}

void save_binary(const LabeledDataset& data, const std::string& path) {
  const auto n = static_cast<std::uint64_t>(data.x.rows());
  const auto d = static_cast<std::uint64_t>(data.x.cols());
  if (n == 0 || d == 0) throw Error(ErrorCode::EmptyFile, "refusing to write an empty dataset");
  if (data.labels && data.labels->size() != n) {
    throw Error(ErrorCode::LengthMismatch, "label count differs from row count");
  }
  std::string bytes(kMagic.begin(), kMagic.end());
  bytes.reserve(4 + 24 + n * d * 8 + (data.labels ? n * 4 : 0));
  put_le(bytes, n);
  put_le(bytes, d);
  put_le(bytes, static_cast<std::uint64_t>(data.labels ? 1 : 0));
  for (Eigen::Index i = 0; i < data.x.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.x.cols(); ++j) put_le(bytes, data.x(i, j));
  }
  if (data.labels) {
    for (std::size_t label : *data.labels) {
      if (label > std::numeric_limits<std::uint32_t>::max()) {
        throw Error(ErrorCode::InvalidParams, "label exceeds 32 bits");
      }
      put_le(bytes, static_cast<std::uint32_t>(label));
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "write to '" + path + "' failed");
}

LabeledDataset load_binary(const std::string& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw Error(ErrorCode::BadMagic, "'" + path + "' is not an AAM1 file");
  }
  std::size_t offset = kMagic.size();
  const auto n = get_le<std::uint64_t>(bytes, offset);
  const auto d = get_le<std::uint64_t>(bytes, offset);
  const auto flag = get_le<std::uint64_t>(bytes, offset);
  if (n == 0 || d == 0) throw Error(ErrorCode::EmptyFile, "'" + path + "' holds no instances");
  if (flag > 1) throw Error(ErrorCode::BadMagic, "label flag must be 0 or 1");
  const std::uint64_t payload = n * d * 8 + (flag ? n * 4 : 0);
  if ((n * d) / d != n || bytes.size() - offset < payload) {
    throw Error(ErrorCode::TruncatedFile, "'" + path + "' is shorter than its header claims");
  }

  LabeledDataset out;
  out.name = stem_of(path);
  out.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < out.x.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.x.cols(); ++j) out.x(i, j) = get_le<double>(bytes, offset);
  }
  if (flag) {
    std::vector<std::size_t> labels(n);
    for (auto& label : labels) label = get_le<std::uint32_t>(bytes, offset);
    out.labels = std::move(labels);
  }
  return out;
}

LabeledDataset load_dataset(const std::string& path, const std::optional<LabelColumn>& label_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  std::array<char, 4> head{};
  in.read(head.data(), head.size());
  if (in.gcount() == static_cast<std::streamsize>(head.size()) && head == kMagic) return load_binary(path);
  return load_csv(path, label_column);
}

void save_csv(const DenseMatrix& x, const std::optional<std::vector<std::size_t>>& labels,
              const std::string& path) {
  if (labels && labels->size() != static_cast<std::size_t>(x.rows())) {
    throw Error(ErrorCode::LengthMismatch, "label count differs from row count");
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (j) out << ',';
      out << x(i, j);
    }
    if (labels) out << ',' << (*labels)[static_cast<std::size_t>(i)];
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::Io, "write to '" + path + "' failed");
}

namespace {

class Gaussian {
 public:
  explicit Gaussian(std::uint64_t seed) : state_(seed) {}

  double next() {
    if (spare_) {
      const double v = *spare_;
      spare_.reset();
      return v;
    }
    // Box-Muller on (0, 1] uniforms.
    const double u1 = (static_cast<double>(raw() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(raw() >> 11) * 0x1.0p-53;
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    return radius * std::cos(angle);
  }

 private:
  std::uint64_t raw() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
  std::optional<double> spare_;
};

void validate(const BlobSpec& spec) {
  if (spec.clusters == 0 || spec.samples < spec.clusters || spec.features == 0 ||
      !(spec.sigma > 0.0) || !(spec.separation > 0.0) || !std::isfinite(spec.sigma) ||
      !std::isfinite(spec.separation)) {
    throw Error(ErrorCode::InvalidParams,
                "blob generator needs 1 <= c <= n, d >= 1, sigma > 0 and separation > 0");
  }
}

}  // namespace

DenseMatrix blob_centres(const BlobSpec& spec) {
  validate(spec);
  const auto c = static_cast<Eigen::Index>(spec.clusters);
  const auto d = static_cast<Eigen::Index>(spec.features);
  Gaussian gauss(spec.seed);
  DenseMatrix centres(c, d);
  for (Eigen::Index i = 0; i < c; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) centres(i, j) = gauss.next();
  }
  if (c < 2) return DenseMatrix::Zero(c, d);
  double closest = std::numeric_limits<double>::infinity();
  for (Eigen::Index a = 0; a < c; ++a) {
    for (Eigen::Index b = a + 1; b < c; ++b) closest = std::min(closest, (centres.row(a) - centres.row(b)).norm());
  }
  if (!(closest > 0.0)) throw Error(ErrorCode::DegenerateData, "coincident blob centres");
  centres *= spec.separation * spec.sigma / closest;
  return centres;
}

LabeledDataset synth_blobs(const BlobSpec& spec) {
  const DenseMatrix centres = blob_centres(spec);
  // Separate stream from the centres so changing n leaves centres unchanged.
  Gaussian gauss(spec.seed ^ 0xA5A5A5A55A5A5A5AULL);
  LabeledDataset out;
  out.name = "blobs";
  out.x.resize(static_cast<Eigen::Index>(spec.samples), static_cast<Eigen::Index>(spec.features));
  std::vector<std::size_t> labels(spec.samples);
  for (std::size_t i = 0; i < spec.samples; ++i) {
    labels[i] = i % spec.clusters;
    for (Eigen::Index j = 0; j < out.x.cols(); ++j) {
      out.x(static_cast<Eigen::Index>(i), j) =
          centres(static_cast<Eigen::Index>(labels[i]), j) + spec.sigma * gauss.next();
    }
  }
  out.labels = std::move(labels);
  return out;
}

}  // namespace adaam
