#pragma once

// Plain-text persistence. CSV files are UTF-8 with LF line endings, '.' as
// decimal separator and a mandatory header row; metadata precedes the header
// as "# key = value" lines. Reals are written with 17 significant digits so
// every value reads back bit-exact.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "shotlearn/circuit.hpp"
#include "shotlearn/features.hpp"
#include "shotlearn/fourier.hpp"
#include "shotlearn/learner.hpp"
#include "shotlearn/sampling.hpp"

namespace shotlearn::io {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(std::string_view s) {
  s = trim(s);
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
    throw FormatError("not a number: '" + std::string(s) + "'");
  return v;
}

inline std::uint64_t parse_u64(std::string_view s) {
  s = trim(s);
  std::uint64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
    throw FormatError("not an unsigned integer: '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

/// Metadata, header and rows of one of our CSV files.
struct CsvDocument {
  std::map<std::string, std::string, std::less<>> meta;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  const std::string& require(std::string_view key) const {
    const auto it = meta.find(key);
    if (it == meta.end()) throw FormatError("missing metadata '" + std::string(key) + "'");
    return it->second;
  }

  void expect_header(std::initializer_list<std::string_view> names) const {
    if (header.size() != names.size() || !std::equal(header.begin(), header.end(), names.begin()))
      throw FormatError("unexpected CSV header");
  }
};

inline CsvDocument parse_csv(std::string_view text) {
  CsvDocument doc;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(start, end - start));
    start = end + 1;
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (!doc.header.empty()) throw FormatError("metadata after CSV header");
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) continue;  // free-form comment
      doc.meta.emplace(std::string(trim(line.substr(1, eq - 1))), std::string(trim(line.substr(eq + 1))));
      continue;
    }
    std::vector<std::string> cells;
    for (auto c : split(line, ',')) cells.emplace_back(c);
    if (doc.header.empty()) {
      doc.header = std::move(cells);
    } else {
      if (cells.size() != doc.header.size()) throw FormatError("CSV row has wrong number of cells");
      doc.rows.push_back(std::move(cells));
    }
  }
  if (doc.header.empty()) throw FormatError("CSV header missing");
  return doc;
}

inline CsvDocument read_csv(const std::filesystem::path& p) { return parse_csv(read_file(p)); }

// ---------------------------------------------------------------- target

/// A generated target: circuit angles and the seed that produced them.
struct TargetRecord {
  ReuploadingParams params;
  std::uint64_t seed = 0;
};

inline std::string target_to_text(const TargetRecord& t) {
  std::string s = "# data re-uploading target\n";
  s += "layers = " + std::to_string(t.params.layers()) + "\n";
  s += "seed = " + std::to_string(t.seed) + "\n";
  const auto& a = t.params.angles();
  for (std::size_t l = 0; l < a.size(); ++l)
    s += "theta." + std::to_string(l) + " = " + format_double(a[l][0]) + ", " + format_double(a[l][1]) + ", " +
         format_double(a[l][2]) + "\n";
  return s;
}

inline TargetRecord target_from_text(std::string_view text) {
  std::map<std::string, std::string, std::less<>> kv;
  for (auto line : split(text, '\n')) {
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw FormatError("target file: expected key = value");
    kv.emplace(std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))));
  }
  const auto get = [&](const std::string& k) -> const std::string& {
    const auto it = kv.find(k);
    if (it == kv.end()) throw FormatError("target file: missing '" + k + "'");
    return it->second;
  };
  const auto layers = parse_u64(get("layers"));
  if (layers == 0) throw FormatError("target file: layers must be >= 1");
  std::vector<AngleTriple> angles(layers + 1);
  for (std::size_t l = 0; l <= layers; ++l) {
    const auto parts = split(get("theta." + std::to_string(l)), ',');
    if (parts.size() != 3) throw FormatError("target file: angle rows need three entries");
    for (std::size_t k = 0; k < 3; ++k) angles[l][k] = parse_double(parts[k]);
  }
  return {ReuploadingParams(std::move(angles)), parse_u64(get("seed"))};
}

inline void write_target(const std::filesystem::path& p, const TargetRecord& t) { open_out(p) << target_to_text(t); }
inline TargetRecord read_target(const std::filesystem::path& p) { return target_from_text(read_file(p)); }

// ---------------------------------------------------------------- series

inline void write_series(const std::filesystem::path& p, const FourierSeries& s) {
  auto os = open_out(p);
  os << "# c0 = " << format_double(s.c0) << "\n";
  os << "omega,a,b\n";
  for (std::size_t w = 1; w <= s.degree(); ++w)
    os << w << ',' << format_double(s.a[w - 1]) << ',' << format_double(s.b[w - 1]) << '\n';
}

inline FourierSeries read_series(const std::filesystem::path& p) {
  const auto doc = read_csv(p);
  doc.expect_header({"omega", "a", "b"});
  FourierSeries s;
  s.c0 = parse_double(doc.require("c0"));
  for (std::size_t i = 0; i < doc.rows.size(); ++i) {
    if (parse_u64(doc.rows[i][0]) != i + 1) throw FormatError("series: frequencies must be 1..d in order");
    s.a.push_back(parse_double(doc.rows[i][1]));
    s.b.push_back(parse_double(doc.rows[i][2]));
  }
  s.validate();
  return s;
}

// ---------------------------------------------------------------- dataset

inline void write_dataset(const std::filesystem::path& p, const LabeledDataset& d) {
  auto os = open_out(p);
  os << "# seed = " << d.seed << "\n# shots = " << d.shots << "\n# target = " << d.target_ref << "\n";
  os << "x,ybar\n";
  for (std::size_t i = 0; i < d.size(); ++i) os << format_double(d.xs[i]) << ',' << format_double(d.ys[i]) << '\n';
}

inline LabeledDataset read_dataset(const std::filesystem::path& p) {
  const auto doc = read_csv(p);
  doc.expect_header({"x", "ybar"});
  LabeledDataset d;
  d.seed = parse_u64(doc.require("seed"));
  d.shots = parse_u64(doc.require("shots"));
  d.target_ref = doc.require("target");
  for (const auto& r : doc.rows) {
    d.xs.push_back(parse_double(r[0]));
    d.ys.push_back(parse_double(r[1]));
  }
  d.validate();
  return d;
}

// ---------------------------------------------------------------- feature map

inline void write_map(const std::filesystem::path& p, const FeatureMap& m) {
  auto os = open_out(p);
  os << "# kind = " << to_string(m.kind()) << "\n# constant = " << (m.includes_constant() ? 1 : 0) << "\n";
  os << "frequency\n";
  for (std::size_t f : m.frequencies()) os << f << '\n';
}

inline FeatureMap read_map(const std::filesystem::path& p) {
  const auto doc = read_csv(p);
  doc.expect_header({"frequency"});
  std::vector<std::size_t> freqs;
  for (const auto& r : doc.rows) freqs.push_back(parse_u64(r[0]));
  return FeatureMap(parse_map_kind(doc.require("kind")), std::move(freqs), parse_u64(doc.require("constant")) != 0);
}

// ---------------------------------------------------------------- model

/// Writes the model and its feature map; the model references the map file
/// by a path relative to the model's directory.
inline void write_model(const std::filesystem::path& p, const TrainedHypothesis& h,
                        const std::string& map_file = "map.csv") {
  write_map(p.parent_path() / map_file, h.map);
  auto os = open_out(p);
  os << "# map = " << map_file << "\n# link = " << to_string(h.link.kind)
     << "\n# selected_iteration = " << h.selected_iteration << "\n# form = " << (h.is_primal() ? "primal" : "dual")
     << "\n";
  if (h.is_primal()) {
    os << "index,weight\n";
    for (std::size_t j = 0; j < h.weights.size(); ++j) os << j << ',' << format_double(h.weights[j]) << '\n';
  } else {
    os << "x,alpha\n";
    for (std::size_t i = 0; i < h.alphas.size(); ++i)
      os << format_double(h.support_xs[i]) << ',' << format_double(h.alphas[i]) << '\n';
  }
}

inline TrainedHypothesis read_model(const std::filesystem::path& p) {
  const auto doc = read_csv(p);
  TrainedHypothesis h{read_map(p.parent_path() / doc.require("map")),
                      LinkFunction{parse_link_kind(doc.require("link"))},
                      {}, {}, {}, parse_u64(doc.require("selected_iteration")), {}, false};
  const std::string& form = doc.require("form");
  if (form == "primal") {
    doc.expect_header({"index", "weight"});
    for (const auto& r : doc.rows) h.weights.push_back(parse_double(r[1]));
    if (h.weights.size() != h.map.dimension()) throw FormatError("model: weight count does not match map");
  } else if (form == "dual") {
    doc.expect_header({"x", "alpha"});
    for (const auto& r : doc.rows) {
      h.support_xs.push_back(parse_double(r[0]));
      h.alphas.push_back(parse_double(r[1]));
    }
  } else {
    throw FormatError("model: unknown form '" + form + "'");
  }
  return h;
}

/// Streams CSV rows; each row is flushed as soon as it is written.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& p, std::initializer_list<std::string_view> header) : os_(open_out(p)) {
    bool first = true;
    for (auto h : header) {
      if (!first) os_ << ',';
      os_ << h;
      first = false;
    }
    os_ << '\n';
    os_.flush();
  }

  template <class... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    ((os_ << (first ? "" : ",") << cell(cells), first = false), ...);
    os_ << '\n';
    os_.flush();
  }

 private:
  static std::string cell(double v) { return format_double(v); }
  static std::string cell(std::string_view v) { return std::string(v); }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }
  template <class I>
    requires std::is_integral_v<I>
  static std::string cell(I v) { return std::to_string(v); }

  std::ofstream os_;
};

}  // namespace shotlearn::io
