#ifndef STSDEP_PMATRIX_HPP_
#define STSDEP_PMATRIX_HPP_

// The m x k p-value matrix (rows = sequences, columns = battery items in
// canonical order), its two file formats, and parallel computation.
//
// Binary layout ("PVM1"), all integers little-endian:
//   "PVM1" | u64 m | u64 k | k x (u16 len, id bytes) | u64 len, provenance JSON
//   | m*k f64 row-major | u32 CRC-32 of every preceding byte
// CSV layout: "# provenance: <json>" comment, header "seq_index,<ids>", then
// one row per sequence (1-based seq_index, values with 17 significant digits).

#include <algorithm>
#include <atomic>
#include <bit>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>
#include <zlib.h>

#include "stsdep/battery.hpp"
#include "stsdep/bitseq.hpp"
#include "stsdep/errors.hpp"

namespace stsdep {

using nlohmann::json;

inline constexpr std::string_view kMatrixMagic = "PVM1";

class PValueMatrix {
 public:
  PValueMatrix() = default;

  // items: canonical indices, strictly ascending; values row-major m x items.size().
  PValueMatrix(std::vector<std::size_t> items, std::size_t m, std::vector<double> values,
               json provenance = json::object())
      : items_(std::move(items)), m_(m), values_(std::move(values)), provenance_(std::move(provenance)) {
    if (items_.empty()) throw Error(ErrorCode::SizeMismatch, "matrix has no item columns");
    for (std::size_t c = 0; c < items_.size(); ++c) {
      if (items_[c] >= kBatterySize || (c > 0 && items_[c] <= items_[c - 1])) {
        throw Error(ErrorCode::FormatError, "item columns must be distinct and in canonical order");
      }
    }
    if (values_.size() != m_ * items_.size()) {
      throw Error(ErrorCode::SizeMismatch, "expected " + std::to_string(m_ * items_.size()) +
                                               " values, got " + std::to_string(values_.size()));
    }
    for (std::size_t j = 0; j < m_; ++j) {
      for (std::size_t c = 0; c < items_.size(); ++c) {
        const double v = values_[j * items_.size() + c];
        if (!(v >= 0.0 && v <= 1.0)) {
          throw Error(ErrorCode::ValueOutOfRange,
                      "row " + std::to_string(j + 1) + ", column " +
                          canonical_items()[items_[c]].item_id + ": " + std::to_string(v));
        }
      }
    }
  }

  static std::vector<std::size_t> all_items() {
    std::vector<std::size_t> out(kBatterySize);
    for (std::size_t i = 0; i < kBatterySize; ++i) out[i] = i;
    return out;
  }

  std::size_t rows() const noexcept { return m_; }
  std::size_t cols() const noexcept { return items_.size(); }
  const std::vector<std::size_t>& items() const noexcept { return items_; }
  const std::vector<double>& values() const noexcept { return values_; }
  const json& provenance() const noexcept { return provenance_; }

  std::vector<std::string> item_ids() const {
    std::vector<std::string> out;
    for (auto i : items_) out.push_back(canonical_items()[i].item_id);
    return out;
  }

  double operator()(std::size_t j, std::size_t c) const noexcept { return values_[j * items_.size() + c]; }

  std::span<const double> row(std::size_t j) const noexcept {
    return {values_.data() + j * items_.size(), items_.size()};
  }

  // Column position of a canonical item index, if present.
  std::optional<std::size_t> column_of(std::size_t item) const {
    auto it = std::lower_bound(items_.begin(), items_.end(), item);
    if (it == items_.end() || *it != item) return std::nullopt;
    return static_cast<std::size_t>(it - items_.begin());
  }

  friend bool operator==(const PValueMatrix& a, const PValueMatrix& b) {
    return a.m_ == b.m_ && a.items_ == b.items_ && a.values_ == b.values_ &&
           a.provenance_ == b.provenance_;
  }

 private:
  std::vector<std::size_t> items_;
  std::size_t m_ = 0;
  std::vector<double> values_;
  json provenance_ = json::object();
};

// ---------------------------------------------------------------------------
// Provenance

// No timestamps and no worker count: the header must not depend on how or
// when the matrix was computed.
inline json make_provenance(const BatteryParams& params, std::size_t m, json source) {
  json warnings = json::array();
  for (auto& w : params.warnings()) warnings.push_back(w);
  return {{"tool", "stsdep"},
          {"format_version", 1},
          {"m", m},
          {"n", params.n},
          {"params", params.to_json()},
          {"warnings", warnings},
          {"source", std::move(source)}};
}

// ---------------------------------------------------------------------------
// Writers. Output goes to "<path>.partial" and is renamed into place by
// finish(); an unfinished writer deletes its partial file.

enum class MatrixFormat { Binary, Csv };

inline MatrixFormat format_for_path(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? MatrixFormat::Csv : MatrixFormat::Binary;
}

namespace detail {

inline void put_le(std::string& out, std::uint64_t v, int bytes) {
  for (int b = 0; b < bytes; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
}

inline std::uint64_t get_le(std::string_view in, std::size_t pos, int bytes) {
  std::uint64_t v = 0;
  for (int b = 0; b < bytes; ++b) v |= std::uint64_t{static_cast<unsigned char>(in[pos + b])} << (8 * b);
  return v;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

class MatrixWriter {
 public:
  MatrixWriter(std::filesystem::path path, MatrixFormat format, const std::vector<std::size_t>& items,
               std::size_t m, const json& provenance)
      : path_(std::move(path)), partial_(path_), format_(format), k_(items.size()), m_(m) {
    partial_ += ".partial";
    out_.open(partial_, std::ios::binary | std::ios::trunc);
    if (!out_) throw Error(ErrorCode::IoError, "cannot open " + partial_.string() + " for writing");
    std::string head;
    if (format_ == MatrixFormat::Binary) {
      head.append(kMatrixMagic);
      detail::put_le(head, m, 8);
      detail::put_le(head, k_, 8);
      for (auto i : items) {
        const auto& id = canonical_items().at(i).item_id;
        detail::put_le(head, id.size(), 2);
        head += id;
      }
      const std::string prov = provenance.dump();
      detail::put_le(head, prov.size(), 8);
      head += prov;
    } else {
      head = "# provenance: " + provenance.dump() + "\nseq_index";
      for (auto i : items) head += "," + canonical_items().at(i).item_id;
      head += "\n";
    }
    emit(head);
  }

  MatrixWriter(const MatrixWriter&) = delete;
  MatrixWriter& operator=(const MatrixWriter&) = delete;

  ~MatrixWriter() {
    if (!finished_) {
      out_.close();
      std::error_code ec;
      std::filesystem::remove(partial_, ec);
    }
  }

  void write_row(std::span<const double> row) {
    if (row.size() != k_) throw Error(ErrorCode::SizeMismatch, "row width mismatch");
    if (rows_written_ == m_) throw Error(ErrorCode::SizeMismatch, "more rows than declared");
    std::string buf;
    if (format_ == MatrixFormat::Binary) {
      for (double v : row) detail::put_le(buf, std::bit_cast<std::uint64_t>(v), 8);
    } else {
      buf = std::to_string(rows_written_ + 1);
      for (double v : row) buf += "," + detail::format_double(v);
      buf += "\n";
    }
    emit(buf);
    ++rows_written_;
  }

  void finish() {
    if (rows_written_ != m_) {
      throw Error(ErrorCode::SizeMismatch, "wrote " + std::to_string(rows_written_) + " of " +
                                               std::to_string(m_) + " rows");
    }
    if (format_ == MatrixFormat::Binary) {
      std::string tail;
      detail::put_le(tail, crc_, 4);
      out_.write(tail.data(), static_cast<std::streamsize>(tail.size()));
    }
    out_.close();
    if (!out_) throw Error(ErrorCode::IoError, "write failed: " + partial_.string());
    std::error_code ec;
    std::filesystem::rename(partial_, path_, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot rename to " + path_.string() + ": " + ec.message());
    finished_ = true;
  }

 private:
  void emit(const std::string& bytes) {
    if (format_ == MatrixFormat::Binary) {
      crc_ = ::crc32(crc_, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size()));
    }
    out_.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out_) throw Error(ErrorCode::IoError, "write failed: " + partial_.string());
  }

  std::filesystem::path path_;
  std::filesystem::path partial_;
  MatrixFormat format_;
  std::size_t k_;
  std::size_t m_;
  std::size_t rows_written_ = 0;
  std::ofstream out_;
  uLong crc_ = ::crc32(0L, Z_NULL, 0);
  bool finished_ = false;
};

inline void save_matrix(const PValueMatrix& mat, const std::filesystem::path& path,
                        std::optional<MatrixFormat> format = std::nullopt) {
  MatrixWriter writer(path, format.value_or(format_for_path(path)), mat.items(), mat.rows(),
                      mat.provenance());
  for (std::size_t j = 0; j < mat.rows(); ++j) writer.write_row(mat.row(j));
  writer.finish();
}

// ---------------------------------------------------------------------------
// Readers

namespace detail {

inline PValueMatrix parse_binary_matrix(std::string_view data) {
  std::size_t pos = 0;
  auto need = [&](std::size_t bytes, const char* what) {
    if (data.size() < pos + bytes || data.size() - pos - bytes < 4) {
      throw Error(ErrorCode::FormatError, std::string("truncated file reading ") + what +
                                              " at offset " + std::to_string(pos));
    }
  };
  need(4, "magic");
  if (data.substr(0, 4) != kMatrixMagic) throw Error(ErrorCode::FormatError, "bad magic at offset 0");
  pos = 4;
  need(16, "dimensions");
  const std::uint64_t m = get_le(data, pos, 8);
  const std::uint64_t k = get_le(data, pos + 8, 8);
  pos += 16;
  if (k == 0 || k > kBatterySize) throw Error(ErrorCode::FormatError, "bad item count " + std::to_string(k));
  std::vector<std::string> ids;
  for (std::uint64_t c = 0; c < k; ++c) {
    need(2, "item id length");
    const std::size_t len = get_le(data, pos, 2);
    pos += 2;
    need(len, "item id");
    ids.emplace_back(data.substr(pos, len));
    pos += len;
  }
  need(8, "provenance length");
  const std::uint64_t prov_len = get_le(data, pos, 8);
  pos += 8;
  need(prov_len, "provenance");
  json provenance;
  try {
    provenance = json::parse(data.substr(pos, prov_len));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, "bad provenance JSON at offset " + std::to_string(pos));
  }
  pos += prov_len;
  if (m > (data.size() - pos) / 8 / k) {
    throw Error(ErrorCode::FormatError, "truncated file reading values at offset " + std::to_string(pos));
  }
  need(m * k * 8, "values");
  const std::size_t values_at = pos;
  pos += m * k * 8;
  if (data.size() != pos + 4) {
    throw Error(ErrorCode::FormatError, "unexpected trailing bytes at offset " + std::to_string(pos + 4));
  }
  const auto stored = static_cast<uLong>(get_le(data, pos, 4));
  const uLong actual = ::crc32(::crc32(0L, Z_NULL, 0), reinterpret_cast<const Bytef*>(data.data()),
                               static_cast<uInt>(pos));
  if (stored != actual) throw Error(ErrorCode::ChecksumMismatch, "CRC-32 mismatch");

  // Stored column order is canonical for files we write; reorder otherwise.
  std::vector<std::size_t> canon(k);
  for (std::size_t c = 0; c < k; ++c) canon[c] = item_index(ids[c]);
  std::vector<std::size_t> order(k);
  for (std::size_t c = 0; c < k; ++c) order[c] = c;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return canon[a] < canon[b]; });
  std::vector<std::size_t> items(k);
  for (std::size_t c = 0; c < k; ++c) items[c] = canon[order[c]];
  std::vector<double> values(m * k);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t c = 0; c < k; ++c) {
      values[j * k + c] = std::bit_cast<double>(get_le(data, values_at + 8 * (j * k + order[c]), 8));
    }
  }
  return PValueMatrix(std::move(items), m, std::move(values), std::move(provenance));
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  for (auto& cell : out) {
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t')) cell.remove_suffix(1);
  }
  return out;
}

inline PValueMatrix parse_csv_matrix(std::string_view data, const std::string& source_name,
                                     const std::optional<std::vector<std::string>>& expected_items) {
  json provenance;
  std::vector<std::size_t> canon;   // per file column (after seq_index)
  bool have_seq_index = false;
  bool have_header = false;
  std::vector<double> raw;  // file column order
  std::size_t m = 0, line_no = 0, pos = 0;
  while (pos < data.size()) {
    auto nl = data.find('\n', pos);
    std::string_view line = data.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? data.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    if (line.front() == '#') {
      constexpr std::string_view tag = "# provenance: ";
      if (line.starts_with(tag)) {
        try {
          provenance = json::parse(line.substr(tag.size()));
        } catch (const json::exception&) {
          throw Error(ErrorCode::FormatError, "line " + std::to_string(line_no) + ": bad provenance JSON");
        }
      }
      continue;
    }
    auto cells = split_commas(line);
    if (!have_header) {
      have_header = true;
      std::size_t first = 0;
      if (cells[0] == "seq_index") {
        have_seq_index = true;
        first = 1;
      }
      std::vector<bool> seen(kBatterySize, false);
      for (std::size_t c = first; c < cells.size(); ++c) {
        const std::size_t idx = item_index(cells[c]);
        if (seen[idx]) {
          throw Error(ErrorCode::FormatError, "line " + std::to_string(line_no) + ": duplicate column " +
                                                  std::string(cells[c]));
        }
        seen[idx] = true;
        canon.push_back(idx);
      }
      std::vector<std::string> want;
      if (expected_items) {
        want = *expected_items;
      } else {
        for (auto& item : canonical_items()) want.push_back(item.item_id);
      }
      for (auto& id : want) {
        if (!seen[item_index(id)]) throw Error(ErrorCode::FormatError, "missing column " + id);
      }
      if (want.size() != canon.size()) {
        throw Error(ErrorCode::FormatError, "header has " + std::to_string(canon.size()) +
                                                " item columns, expected " + std::to_string(want.size()));
      }
      continue;
    }
    ++m;
    const std::size_t width = canon.size() + (have_seq_index ? 1 : 0);
    if (cells.size() != width) {
      throw Error(ErrorCode::RaggedRow, "row " + std::to_string(m) + " (line " + std::to_string(line_no) +
                                            ") has " + std::to_string(cells.size()) + " cells, expected " +
                                            std::to_string(width));
    }
    for (std::size_t c = have_seq_index ? 1 : 0; c < cells.size(); ++c) {
      const std::string cell(cells[c]);
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size()) {
        throw Error(ErrorCode::FormatError, "line " + std::to_string(line_no) + ": not a number '" + cell + "'");
      }
      if (!(v >= 0.0 && v <= 1.0)) {
        const auto& id = canonical_items()[canon[c - (have_seq_index ? 1 : 0)]].item_id;
        throw Error(ErrorCode::ValueOutOfRange,
                    "row " + std::to_string(m) + ", column " + id + ": " + cell);
      }
      raw.push_back(v);
    }
  }
  if (!have_header) throw Error(ErrorCode::FormatError, "no header row in " + source_name);
  if (m == 0) throw Error(ErrorCode::FormatError, "no data rows in " + source_name);
  if (provenance.is_null()) provenance = {{"source", {{"type", "csv-import"}, {"file", source_name}}}};

  const std::size_t k = canon.size();
  std::vector<std::size_t> order(k);
  for (std::size_t c = 0; c < k; ++c) order[c] = c;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return canon[a] < canon[b]; });
  std::vector<std::size_t> items(k);
  for (std::size_t c = 0; c < k; ++c) items[c] = canon[order[c]];
  std::vector<double> values(m * k);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t c = 0; c < k; ++c) values[j * k + c] = raw[j * k + order[c]];
  }
  return PValueMatrix(std::move(items), m, std::move(values), std::move(provenance));
}

}  // namespace detail

// Columns come back in canonical order. Without expected_items the file must
// carry all 162 battery items.
inline PValueMatrix import_csv(const std::filesystem::path& path,
                               const std::optional<std::vector<std::string>>& expected_items = std::nullopt) {
  const std::string data = stsdep::detail::slurp(path);
  try {
    return detail::parse_csv_matrix(data, path.filename().string(), expected_items);
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

// Detects the format from the magic bytes.
inline PValueMatrix load_matrix(const std::filesystem::path& path) {
  const std::string data = stsdep::detail::slurp(path);
  try {
    if (data.starts_with(kMatrixMagic)) return detail::parse_binary_matrix(data);
    if (path.extension() == ".csv" || data.starts_with("#") || data.starts_with("seq_index")) {
      return detail::parse_csv_matrix(data, path.filename().string(), std::nullopt);
    }
    return detail::parse_binary_matrix(data);
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

// ---------------------------------------------------------------------------
// Computation

// Produces sequence j for j = 0, 1, ... in order.
using SequenceSource = std::function<BitSequence(std::size_t j)>;
using RowSink = std::function<void(std::size_t j, std::span<const double> row)>;

// Rows are computed by `workers` threads in batches; sequences are produced
// and rows delivered strictly in order on the calling thread, so the output
// does not depend on the worker count. The error reported is the one of the
// lowest failing row.
inline void compute_rows(std::size_t m, const SequenceSource& source, const BatteryParams& params,
                         std::size_t workers, const RowSink& sink) {
  const auto items = enumerate_items(params);
  workers = std::max<std::size_t>(1, workers);
  const std::size_t batch = 32 * workers;
  std::vector<BitSequence> seqs;
  std::vector<std::vector<double>> rows(batch);
  std::vector<std::exception_ptr> errors(batch);
  for (std::size_t base = 0; base < m; base += batch) {
    const std::size_t count = std::min(batch, m - base);
    seqs.clear();
    for (std::size_t b = 0; b < count; ++b) seqs.push_back(source(base + b));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t b; (b = next.fetch_add(1)) < count;) {
        try {
          rows[b] = run_row(seqs[b], items, params);
        } catch (const Error& e) {
          errors[b] = std::make_exception_ptr(e.with_context("sequence " + std::to_string(base + b + 1)));
        } catch (...) {
          errors[b] = std::current_exception();
        }
      }
    };
    if (workers == 1) {
      work();
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < std::min(workers, count); ++w) pool.emplace_back(work);
    }
    for (std::size_t b = 0; b < count; ++b) {
      if (errors[b]) std::rethrow_exception(errors[b]);
      sink(base + b, rows[b]);
    }
  }
}

inline void check_sequence_count(std::size_t m) {
  if (m == 0) throw Error(ErrorCode::InvalidParams, "no sequences");
}

inline PValueMatrix compute_matrix(const std::vector<BitSequence>& seqs, const BatteryParams& params,
                                   std::size_t workers = 1, json source = {{"type", "memory"}}) {
  check_sequence_count(seqs.size());
  std::vector<double> values(seqs.size() * kBatterySize);
  compute_rows(
      seqs.size(), [&](std::size_t j) { return seqs[j]; }, params, workers,
      [&](std::size_t j, std::span<const double> row) {
        std::copy(row.begin(), row.end(), values.begin() + static_cast<std::ptrdiff_t>(j * kBatterySize));
      });
  return PValueMatrix(PValueMatrix::all_items(), seqs.size(), std::move(values),
                      make_provenance(params, seqs.size(), std::move(source)));
}

// Streams rows straight to disk; nothing is left at `path` on failure.
inline void compute_matrix_to_file(const std::filesystem::path& path, std::size_t m,
                                   const SequenceSource& source, const BatteryParams& params,
                                   std::size_t workers, const json& source_info,
                                   std::optional<MatrixFormat> format = std::nullopt) {
  check_sequence_count(m);
  MatrixWriter writer(path, format.value_or(format_for_path(path)), PValueMatrix::all_items(), m,
                      make_provenance(params, m, source_info));
  compute_rows(m, source, params, workers,
               [&](std::size_t, std::span<const double> row) { writer.write_row(row); });
  writer.finish();
}

}  // namespace stsdep

#endif  // STSDEP_PMATRIX_HPP_
