#include "spsched/io.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "spsched/error.h"

namespace spsched {

namespace {

std::vector<std::string_view> splitLines(std::string_view text) {
  std::vector<std::string_view> lines;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == text.size()) break;
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> splitWords(std::string_view line) {
  std::vector<std::string_view> words;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) words.push_back(line.substr(i, j - i));
    i = j;
  }
  return words;
}

bool isBlank(std::string_view line) { return splitWords(line).empty(); }

int64_t parseInt(std::string_view word, int line, ErrorCode code) {
  int64_t value = 0;
  auto [ptr, ec] = std::from_chars(word.data(), word.data() + word.size(), value);
  if (ec != std::errc() || ptr != word.data() + word.size()) {
    throw ParseError(code, line, "expected an integer, got '" + std::string(word) + "'");
  }
  return value;
}

double parseDouble(std::string_view word, int line) {
  std::string s(word);
  char* end = nullptr;
  double value = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw ParseError(ErrorCode::NonNumeric, line,
                     "non-numeric value '" + s + "'");
  }
  return value;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

CooTensor parseMatrixMarket(std::string_view text) {
  auto lines = splitLines(text);
  size_t i = 0;
  if (!lines.empty() && lines[0].starts_with("%%MatrixMarket")) {
    auto words = splitWords(lines[0]);
    if (words.size() != 5 || lower(words[1]) != "matrix" ||
        lower(words[2]) != "coordinate" ||
        (lower(words[3]) != "real" && lower(words[3]) != "integer") ||
        lower(words[4]) != "general") {
      throw ParseError(ErrorCode::MalformedHeader, 1,
                       "expected '%%MatrixMarket matrix coordinate real general'");
    }
    i = 1;
  }
  while (i < lines.size() && (lines[i].starts_with("%") || isBlank(lines[i]))) ++i;
  if (i >= lines.size()) {
    throw ParseError(ErrorCode::MalformedHeader, static_cast<int>(i + 1),
                     "missing size line");
  }
  auto size = splitWords(lines[i]);
  int sizeLine = static_cast<int>(i + 1);
  if (size.size() != 3) {
    throw ParseError(ErrorCode::MalformedHeader, sizeLine,
                     "size line must be 'rows cols nnz'");
  }
  CooTensor coo;
  int64_t rows = parseInt(size[0], sizeLine, ErrorCode::MalformedHeader);
  int64_t cols = parseInt(size[1], sizeLine, ErrorCode::MalformedHeader);
  int64_t nnz = parseInt(size[2], sizeLine, ErrorCode::MalformedHeader);
  if (rows < 0 || cols < 0 || nnz < 0) {
    throw ParseError(ErrorCode::MalformedHeader, sizeLine, "negative size");
  }
  coo.dims = {static_cast<int>(rows), static_cast<int>(cols)};
  ++i;
  int64_t seen = 0;
  for (; i < lines.size(); ++i) {
    int lineNo = static_cast<int>(i + 1);
    if (lines[i].starts_with("%") || isBlank(lines[i])) continue;
    auto words = splitWords(lines[i]);
    if (words.size() != 3) {
      throw ParseError(ErrorCode::MalformedInput, lineNo, "expected 'i j value'");
    }
    int64_t r = parseInt(words[0], lineNo, ErrorCode::MalformedInput);
    int64_t c = parseInt(words[1], lineNo, ErrorCode::MalformedInput);
    double v = parseDouble(words[2], lineNo);
    if (r < 1 || r > rows || c < 1 || c > cols) {
      throw ParseError(ErrorCode::OutOfBounds, lineNo,
                       "coordinate (" + std::to_string(r) + ", " +
                           std::to_string(c) + ") outside declared bounds");
    }
    coo.entries.push_back({{static_cast<int>(r - 1), static_cast<int>(c - 1)}, v});
    ++seen;
  }
  if (seen != nnz) {
    throw ParseError(ErrorCode::MalformedInput, sizeLine,
                     "declared " + std::to_string(nnz) + " entries, found " +
                         std::to_string(seen));
  }
  coo.normalize();
  return coo;
}

CooTensor parseFrostt(std::string_view text,
                      const std::optional<std::vector<int>>& dimsOverride) {
  auto lines = splitLines(text);
  std::optional<std::vector<int>> declared;
  std::vector<std::pair<std::vector<int64_t>, std::pair<double, int>>> raw;
  for (size_t i = 0; i < lines.size(); ++i) {
    int lineNo = static_cast<int>(i + 1);
    std::string_view line = lines[i];
    if (isBlank(line)) continue;
    if (line.starts_with("#")) {
      auto words = splitWords(line.substr(1));
      if (!words.empty() && lower(words[0]) == "dims:") {
        std::vector<int> dims;
        for (size_t w = 1; w < words.size(); ++w) {
          int64_t d = parseInt(words[w], lineNo, ErrorCode::MalformedHeader);
          if (d < 0) throw ParseError(ErrorCode::MalformedHeader, lineNo, "negative dim");
          dims.push_back(static_cast<int>(d));
        }
        declared = dims;
      }
      continue;
    }
    auto words = splitWords(line);
    if (words.size() < 2) {
      throw ParseError(ErrorCode::MalformedInput, lineNo,
                       "expected 'i1 ... ik value'");
    }
    std::vector<int64_t> coord;
    for (size_t w = 0; w + 1 < words.size(); ++w) {
      coord.push_back(parseInt(words[w], lineNo, ErrorCode::MalformedInput));
    }
    double v = parseDouble(words.back(), lineNo);
    if (!raw.empty() && raw.front().first.size() != coord.size()) {
      throw ParseError(ErrorCode::MalformedInput, lineNo,
                       "inconsistent number of coordinates");
    }
    raw.push_back({std::move(coord), {v, lineNo}});
  }

  std::optional<std::vector<int>> dims = dimsOverride ? dimsOverride : declared;
  size_t order = dims ? dims->size() : (raw.empty() ? 0 : raw.front().first.size());
  if (!dims && raw.empty()) {
    throw ParseError(ErrorCode::MalformedInput, 1,
                     "cannot infer tensor order from an empty file without dims");
  }
  CooTensor coo;
  coo.dims.assign(order, 0);
  if (dims) coo.dims = *dims;
  for (auto& [coord, rest] : raw) {
    auto [v, lineNo] = rest;
    if (coord.size() != order) {
      throw ParseError(ErrorCode::MalformedInput, lineNo,
                       "coordinate count does not match declared dims");
    }
    std::vector<int> c0(order);
    for (size_t k = 0; k < order; ++k) {
      if (coord[k] < 1 || (dims && coord[k] > (*dims)[k])) {
        throw ParseError(ErrorCode::OutOfBounds, lineNo,
                         "coordinate " + std::to_string(coord[k]) +
                             " outside dimension " + std::to_string(k + 1));
      }
      c0[k] = static_cast<int>(coord[k] - 1);
      if (!dims) coo.dims[k] = std::max(coo.dims[k], c0[k] + 1);
    }
    coo.entries.push_back({std::move(c0), v});
  }
  coo.normalize();
  return coo;
}

CooTensor parseCoo(std::string_view text, CooFormat format) {
  return format == CooFormat::MatrixMarket ? parseMatrixMarket(text)
                                           : parseFrostt(text);
}

std::string readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void writeFile(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  out << contents;
}

CooTensor readCooFile(const std::string& path) {
  std::string text = readFile(path);
  bool mtx = path.size() >= 4 && path.substr(path.size() - 4) == ".mtx";
  return parseCoo(text, mtx ? CooFormat::MatrixMarket : CooFormat::Frostt);
}

namespace {
std::string formatDouble(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace

std::string writeMatrixMarket(const CooTensor& coo) {
  if (coo.order() != 2) {
    throw Error(ErrorCode::InvalidArgument, "MatrixMarket requires a matrix");
  }
  std::ostringstream out;
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << coo.dims[0] << " " << coo.dims[1] << " " << coo.entries.size() << "\n";
  for (const CooEntry& e : coo.entries) {
    out << e.coord[0] + 1 << " " << e.coord[1] + 1 << " " << formatDouble(e.value) << "\n";
  }
  return out.str();
}

std::string writeFrostt(const CooTensor& coo) {
  std::ostringstream out;
  out << "# dims:";
  for (int d : coo.dims) out << " " << d;
  out << "\n";
  for (const CooEntry& e : coo.entries) {
    for (int c : e.coord) out << c + 1 << " ";
    out << formatDouble(e.value) << "\n";
  }
  return out.str();
}

std::string writeDenseFrostt(const DenseTensor& tensor) {
  std::ostringstream out;
  out << "# dims:";
  for (int d : tensor.dims) out << " " << d;
  out << "\n";
  std::vector<int> coord(tensor.dims.size(), 0);
  for (size_t idx = 0; idx < tensor.vals.size(); ++idx) {
    size_t rem = idx;
    for (size_t k = tensor.dims.size(); k-- > 0;) {
      coord[k] = static_cast<int>(rem % tensor.dims[k]);
      rem /= tensor.dims[k];
    }
    for (int c : coord) out << c + 1 << " ";
    out << formatDouble(tensor.vals[idx]) << "\n";
  }
  return out.str();
}

}  // namespace spsched
