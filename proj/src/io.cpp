#include "gcrl/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace gcrl {
namespace {

constexpr std::array<char, 4> kMagic = {'G', 'C', 'R', 'L'};

std::ifstream open_for_read(const std::filesystem::path& path, std::ios::openmode mode) {
  if (!std::filesystem::exists(path)) {
    throw IoError("input file not found: " + path.string());
  }
  std::ifstream in(path, mode);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::ofstream open_for_write(const std::filesystem::path& path, std::ios::openmode mode) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view field, const std::filesystem::path& path, std::size_t row,
                    std::size_t col) {
  // strtod accepts nan/inf spellings, which are then reported as non-finite
  const std::string text(field);
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    std::ostringstream msg;
    msg << path.string() << ": malformed number '" << text << "' at row " << row << ", column "
        << col;
    throw IoError(msg.str());
  }
  if (!std::isfinite(value)) {
    std::ostringstream msg;
    msg << path.string() << ": non-finite entry at row " << row << ", column " << col;
    throw IoError(msg.str());
  }
  return value;
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                                 static_cast<char>((v >> 16) & 0xFF),
                                 static_cast<char>((v >> 24) & 0xFF)};
  out.write(b.data(), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b.data(), 8);
}

bool get_bytes(std::istream& in, char* dst, std::size_t count) {
  in.read(dst, static_cast<std::streamsize>(count));
  return static_cast<std::size_t>(in.gcount()) == count;
}

std::uint32_t get_u32(std::istream& in, const std::filesystem::path& path, const char* what) {
  std::array<unsigned char, 4> b{};
  if (!get_bytes(in, reinterpret_cast<char*>(b.data()), 4)) {
    throw IoError(path.string() + ": malformed header (truncated " + what + ")");
  }
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

Matrix read_csv_matrix(const std::filesystem::path& path) {
  std::ifstream in = open_for_read(path, std::ios::in);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    std::vector<double> row;
    row.reserve(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      row.push_back(parse_double(fields[c], path, rows.size(), c));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      std::ostringstream msg;
      msg << path.string() << ": dimension mismatch, row " << rows.size() << " has "
          << row.size() << " columns but row 0 has " << rows.front().size();
      throw IoError(msg.str());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError(path.string() + ": no data rows");

  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

Labels read_labels_csv(const std::filesystem::path& path) {
  std::ifstream in = open_for_read(path, std::ios::in);
  Labels labels;
  std::string line;
  while (std::getline(in, line)) {
    for (auto field : split(line, ',')) {
      if (field.empty()) continue;
      int value = 0;
      const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
      if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        throw IoError(path.string() + ": malformed label '" + std::string(field) + "'");
      }
      labels.push_back(value);
    }
  }
  if (labels.empty()) throw IoError(path.string() + ": no labels");
  return labels;
}

void write_csv_matrix(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out = open_for_write(path, std::ios::out);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

void write_labels_csv(const std::filesystem::path& path, const Labels& labels) {
  std::ofstream out = open_for_write(path, std::ios::out);
  for (int l : labels) out << l << '\n';
}

FeatureSequence read_binary(const std::filesystem::path& path) {
  std::ifstream in = open_for_read(path, std::ios::in | std::ios::binary);
  std::array<char, 4> magic{};
  if (!get_bytes(in, magic.data(), 4) || magic != kMagic) {
    throw IoError(path.string() + ": malformed header (bad magic)");
  }
  const std::uint32_t version = get_u32(in, path, "version");
  if (version != kBinaryVersion) {
    throw IoError(path.string() + ": malformed header (unsupported version " +
                  std::to_string(version) + ")");
  }
  const std::uint32_t n = get_u32(in, path, "row count");
  const std::uint32_t frames = get_u32(in, path, "column count");
  if (n == 0 || frames == 0) {
    throw IoError(path.string() + ": malformed header (zero dimension)");
  }

  FeatureSequence seq;
  seq.name = path.stem().string();
  seq.features.resize(n, frames);
  for (std::uint32_t j = 0; j < frames; ++j) {
    for (std::uint32_t i = 0; i < n; ++i) {
      std::array<unsigned char, 8> b{};
      if (!get_bytes(in, reinterpret_cast<char*>(b.data()), 8)) {
        std::ostringstream msg;
        msg << path.string() << ": dimension mismatch, header declares " << n << "x" << frames
            << " entries but the data ends early";
        throw IoError(msg.str());
      }
      std::uint64_t bits = 0;
      for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(b[static_cast<std::size_t>(k)]) << (8 * k);
      double v = 0.0;
      std::memcpy(&v, &bits, sizeof v);
      if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << path.string() << ": non-finite entry at row " << i << ", column " << j;
        throw IoError(msg.str());
      }
      seq.features(i, j) = v;
    }
  }

  char probe = 0;
  if (get_bytes(in, &probe, 1)) {
    in.unget();
    const std::uint32_t count = get_u32(in, path, "label count");
    if (count != frames) {
      std::ostringstream msg;
      msg << path.string() << ": dimension mismatch, " << count << " labels for " << frames
          << " frames";
      throw IoError(msg.str());
    }
    Labels labels(count);
    for (auto& l : labels) {
      l = static_cast<std::int32_t>(get_u32(in, path, "label block"));
    }
    seq.labels = std::move(labels);
  }
  return seq;
}

void write_binary(const std::filesystem::path& path, const FeatureSequence& seq) {
  if (seq.features.rows() > std::numeric_limits<std::uint32_t>::max() ||
      seq.features.cols() > std::numeric_limits<std::uint32_t>::max()) {
    throw IoError("matrix too large for the binary format");
  }
  std::ofstream out = open_for_write(path, std::ios::out | std::ios::binary);
  out.write(kMagic.data(), 4);
  put_u32(out, kBinaryVersion);
  put_u32(out, static_cast<std::uint32_t>(seq.features.rows()));
  put_u32(out, static_cast<std::uint32_t>(seq.features.cols()));
  for (Eigen::Index j = 0; j < seq.features.cols(); ++j) {
    for (Eigen::Index i = 0; i < seq.features.rows(); ++i) {
      std::uint64_t bits = 0;
      const double v = seq.features(i, j);
      std::memcpy(&bits, &v, sizeof bits);
      put_u64(out, bits);
    }
  }
  if (seq.labels) {
    put_u32(out, static_cast<std::uint32_t>(seq.labels->size()));
    for (int l : *seq.labels) put_u32(out, static_cast<std::uint32_t>(l));
  }
  if (!out) throw IoError("write failed: " + path.string());
}

bool is_binary_features(const std::filesystem::path& path) {
  std::ifstream in = open_for_read(path, std::ios::in | std::ios::binary);
  std::array<char, 4> magic{};
  return get_bytes(in, magic.data(), 4) && magic == kMagic;
}

FeatureSequence ingest(const std::filesystem::path& path,
                       const std::optional<std::filesystem::path>& labels_path) {
  FeatureSequence seq;
  if (is_binary_features(path)) {
    seq = read_binary(path);
  } else {
    seq.features = read_csv_matrix(path);
    seq.name = path.stem().string();
  }
  if (labels_path) {
    seq.labels = read_labels_csv(*labels_path);
  }
  if (seq.labels && static_cast<Eigen::Index>(seq.labels->size()) != seq.features.cols()) {
    std::ostringstream msg;
    msg << "dimension mismatch: " << seq.labels->size() << " labels for "
        << seq.features.cols() << " frames";
    throw IoError(msg.str());
  }
  validate(seq);
  seq.features = normalize(seq.features);
  return seq;
}

}  // namespace gcrl
