#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "mirrorkit/detail/text.hpp"
#include "mirrorkit/errors.hpp"

namespace mirrorkit {

// One stored coordinate. Indices are 1-based, as on disk.
struct Feature {
  std::uint32_t index;
  double value;

  friend bool operator==(const Feature&, const Feature&) = default;
};

// Sparse feature vector: strictly increasing indices, no stored zeros, finite values.
class SparseVector {
 public:
  SparseVector() = default;

  // Validates the invariants; explicit zeros are dropped.
  explicit SparseVector(std::vector<Feature> entries) : entries_(std::move(entries)) {
    std::erase_if(entries_, [](const Feature& f) { return f.value == 0.0; });
    std::uint32_t prev = 0;
    for (const auto& f : entries_) {
      if (f.index == 0) throw std::invalid_argument("feature index must be >= 1");
      if (f.index <= prev) throw std::invalid_argument("feature indices must be strictly increasing");
      if (!std::isfinite(f.value)) throw std::invalid_argument("feature values must be finite");
      prev = f.index;
    }
  }

  SparseVector(std::initializer_list<Feature> entries)
      : SparseVector(std::vector<Feature>(entries)) {}

  std::span<const Feature> entries() const noexcept { return entries_; }
  std::size_t nnz() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  std::uint32_t max_index() const noexcept { return entries_.empty() ? 0 : entries_.back().index; }

  double squared_norm() const noexcept {
    double s = 0.0;
    for (const auto& f : entries_) s += f.value * f.value;
    return s;
  }

  // Divides every stored value; divisor must be nonzero and finite.
  SparseVector divided_by(double divisor) const {
    SparseVector out = *this;
    for (auto& f : out.entries_) f.value /= divisor;
    return out;
  }

  friend bool operator==(const SparseVector&, const SparseVector&) = default;

 private:
  std::vector<Feature> entries_;
};

// Merge-based inner product; the summation order is by index, so dot(x, y) == dot(y, x) bitwise.
inline double dot(const SparseVector& x, const SparseVector& y) noexcept {
  auto a = x.entries();
  auto b = y.entries();
  std::size_t i = 0, j = 0;
  double s = 0.0;
  while (i < a.size() && j < b.size()) {
    if (a[i].index == b[j].index) {
      s += a[i++].value * b[j++].value;
    } else if (a[i].index < b[j].index) {
      ++i;
    } else {
      ++j;
    }
  }
  return s;
}

// ||x - y||^2 over the union of supports, symmetric in its arguments.
inline double squared_distance(const SparseVector& x, const SparseVector& y) noexcept {
  auto a = x.entries();
  auto b = y.entries();
  std::size_t i = 0, j = 0;
  double s = 0.0;
  while (i < a.size() || j < b.size()) {
    double d;
    if (j == b.size() || (i < a.size() && a[i].index < b[j].index)) {
      d = a[i++].value;
    } else if (i == a.size() || b[j].index < a[i].index) {
      d = b[j++].value;
    } else {
      d = a[i++].value - b[j++].value;
    }
    s += d * d;
  }
  return s;
}

enum class Label : int { negative = -1, positive = 1 };

constexpr int sign(Label y) noexcept { return static_cast<int>(y); }
// {0,1} form used by the zero-one formulation.
constexpr int as_binary(Label y) noexcept { return y == Label::positive ? 1 : 0; }

struct LabeledSample {
  SparseVector features;
  Label label;

  friend bool operator==(const LabeledSample&, const LabeledSample&) = default;
};

struct Dataset {
  std::string name;
  std::vector<LabeledSample> samples;
  std::uint32_t feature_dim = 0;

  std::size_t size() const noexcept { return samples.size(); }
  const LabeledSample& operator[](std::size_t i) const { return samples[i]; }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

namespace detail {

inline Label parse_label(std::string_view tok, std::size_t line) {
  double v;
  if (!parse_double(tok, v)) {
    throw ParseError(line, "missing or non-numeric label '" + std::string(tok) + "'");
  }
  if (v == 1.0) return Label::positive;
  if (v == -1.0 || v == 0.0) return Label::negative;
  throw ParseError(line, "label '" + std::string(tok) + "' is not binary (expected +1, 1, -1 or 0)");
}

}  // namespace detail

// Reads the libsvm interchange format. Labels +1/1 -> positive, -1/0 -> negative;
// '#' starts a comment; blank lines are skipped; \r\n is accepted.
inline Dataset parse_libsvm(std::istream& in, std::string name = {}) {
  Dataset ds;
  ds.name = std::move(name);
  std::string raw;
  std::size_t lineno = 0;
  std::vector<Feature> entries;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    std::size_t pos = 0;
    auto next_token = [&]() -> std::string_view {
      while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
      auto start = pos;
      while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') ++pos;
      return line.substr(start, pos - start);
    };

    auto label_tok = next_token();
    if (label_tok.find(':') != std::string_view::npos) {
      throw ParseError(lineno, "sample has no label (unlabeled files are not supported)");
    }
    Label label = detail::parse_label(label_tok, lineno);

    entries.clear();
    std::uint32_t prev = 0;
    for (auto tok = next_token(); !tok.empty(); tok = next_token()) {
      auto colon = tok.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError(lineno, "expected <index>:<value>, got '" + std::string(tok) + "'");
      }
      std::uint32_t idx;
      double val;
      if (!detail::parse_index(tok.substr(0, colon), idx) || idx == 0) {
        throw ParseError(lineno, "bad feature index in '" + std::string(tok) + "'");
      }
      if (!detail::parse_double(tok.substr(colon + 1), val) || !std::isfinite(val)) {
        throw ParseError(lineno, "bad feature value in '" + std::string(tok) + "'");
      }
      if (idx <= prev) {
        throw ParseError(lineno, "feature index " + std::to_string(idx) + " is not increasing");
      }
      prev = idx;
      if (val != 0.0) entries.push_back({idx, val});
    }
    ds.feature_dim = std::max(ds.feature_dim, prev);
    ds.samples.push_back({SparseVector(entries), label});
  }
  if (in.bad()) throw ParseError(0, "read failure");
  if (ds.samples.empty()) throw ParseError(0, "dataset is empty");
  return ds;
}

inline Dataset parse_libsvm(std::string_view text, std::string name = {}) {
  std::istringstream in{std::string(text)};
  return parse_libsvm(in, std::move(name));
}

inline Dataset load_libsvm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::system_error(errno, std::generic_category(), "cannot open " + path.string());
  try {
    return parse_libsvm(in, path.filename().string());
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path.string() + ": " + e.what());
  }
}

// Shortest round-trip formatting, so write -> parse reproduces every value exactly.
inline void write_libsvm(std::ostream& out, const Dataset& ds) {
  char buf[64];
  for (const auto& s : ds.samples) {
    out << (s.label == Label::positive ? "+1" : "-1");
    for (const auto& f : s.features.entries()) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, f.value);
      out << ' ' << f.index << ':' << std::string_view(buf, ptr - buf);
    }
    out << '\n';
  }
}

inline std::string to_libsvm(const Dataset& ds) {
  std::ostringstream out;
  write_libsvm(out, ds);
  return out.str();
}

// Scales every nonzero sample to unit Euclidean norm; zero samples pass through.
inline Dataset normalize_unit(Dataset ds) {
  for (auto& s : ds.samples) {
    double n2 = s.features.squared_norm();
    if (n2 > 0.0) s.features = s.features.divided_by(std::sqrt(n2));
  }
  return ds;
}

struct DatasetStats {
  std::size_t samples = 0;
  std::uint32_t feature_dim = 0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  double negative_fraction = 0.0;
};

inline DatasetStats dataset_stats(const Dataset& ds) {
  DatasetStats st;
  st.samples = ds.size();
  st.feature_dim = ds.feature_dim;
  for (const auto& s : ds.samples) (s.label == Label::positive ? st.positives : st.negatives)++;
  st.negative_fraction = st.samples ? static_cast<double>(st.negatives) / st.samples : 0.0;
  return st;
}

}  // namespace mirrorkit
