#include "epso/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "epso/random.hpp"

namespace epso::data {

void Dataset::validate() const {
  if (features.rows() != static_cast<Index>(labels.size()))
    throw DatasetError("dataset: label count does not match row count");
  if (static_cast<Index>(feature_names.size()) != features.cols())
    throw DatasetError("dataset: feature name count does not match column count");
  if (!features.allFinite()) throw DatasetError("dataset: non-finite feature value");
  if (class_count() < 2) throw DatasetError("dataset: need at least two classes");
  std::vector<std::size_t> counts(class_names.size(), 0);
  for (const int l : labels) {
    if (l < 0 || l >= class_count()) throw DatasetError("dataset: label id out of range");
    ++counts[static_cast<std::size_t>(l)];
  }
  for (std::size_t c = 0; c < counts.size(); ++c)
    if (counts[c] == 0) throw DatasetError("dataset: class '" + class_names[c] + "' has no rows");
}

LabelColumn parse_label_column(const std::string& spec) {
  if (spec == "first") return FirstColumn{};
  if (spec == "last") return LastColumn{};
  return NamedColumn{spec};
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cell += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(trim(cell));
      cell.clear();
    } else {
      cell += ch;
    }
  }
  cells.push_back(trim(cell));
  return cells;
}

bool parse_real(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

CsvLoad load_csv_report(const std::filesystem::path& path, const LabelColumn& label) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot read '" + path.string() + "'");

  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    rows.push_back(split_csv_line(line));
    line_numbers.push_back(line_no);
  }
  if (rows.empty()) throw DatasetError("'" + path.string() + "' has no rows");

  const std::size_t width = rows.front().size();
  if (width < 2) throw DatasetError("need at least one feature column and one label column");

  // Header: any non-label cell of the first row that is not a number.
  const auto label_index_for = [&](const std::vector<std::string>* header) -> std::size_t {
    if (std::holds_alternative<FirstColumn>(label)) return 0;
    if (std::holds_alternative<LastColumn>(label)) return width - 1;
    const auto& wanted = std::get<NamedColumn>(label).name;
    if (header == nullptr) throw DatasetError("label column '" + wanted + "' requested but file has no header");
    const auto it = std::find(header->begin(), header->end(), wanted);
    if (it == header->end()) throw DatasetError("no column named '" + wanted + "'");
    return static_cast<std::size_t>(it - header->begin());
  };

  bool has_header = std::holds_alternative<NamedColumn>(label);
  if (!has_header) {
    const std::size_t li = label_index_for(nullptr);
    for (std::size_t c = 0; c < rows.front().size(); ++c) {
      double v;
      if (c != li && !parse_real(rows.front()[c], v)) has_header = true;
    }
  }
  const std::vector<std::string>* header = has_header ? &rows.front() : nullptr;
  const std::size_t label_col = label_index_for(header);

  CsvLoad result;
  Dataset& d = result.dataset;
  d.name = path.stem().string();
  for (std::size_t c = 0; c < width; ++c) {
    if (c == label_col) continue;
    d.feature_names.push_back(header ? (*header)[c] : "f" + std::to_string(d.feature_names.size()));
  }

  std::vector<double> values;
  std::unordered_map<std::string, int> class_ids;
  for (std::size_t r = has_header ? 1 : 0; r < rows.size(); ++r) {
    const auto& cells = rows[r];
    if (cells.size() < width || std::any_of(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(width),
                                            [](const std::string& s) { return s.empty(); })) {
      ++result.rejected_rows;
      continue;
    }
    if (cells.size() > width)
      throw ParseError(line_numbers[r], width + 1, "more cells than the first row");
    for (std::size_t c = 0; c < width; ++c) {
      if (c == label_col) continue;
      double v;
      if (!parse_real(cells[c], v)) throw ParseError(line_numbers[r], c + 1, "not a number: '" + cells[c] + "'");
      values.push_back(v);
    }
    const auto [it, inserted] = class_ids.try_emplace(cells[label_col], static_cast<int>(d.class_names.size()));
    if (inserted) d.class_names.push_back(cells[label_col]);
    d.labels.push_back(it->second);
  }

  const auto n_rows = static_cast<Index>(d.labels.size());
  const auto n_cols = static_cast<Index>(d.feature_names.size());
  d.features = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), n_rows, n_cols);
  if (d.class_count() < 2) throw DatasetError("'" + path.string() + "': label column has a single class");
  d.validate();
  return result;
}

Dataset load_csv(const std::filesystem::path& path, const LabelColumn& label) {
  auto loaded = load_csv_report(path, label);
  if (loaded.rejected_rows > 0)
    std::clog << "warning: " << path.string() << ": rejected " << loaded.rejected_rows
              << " row(s) with missing cells\n";
  return std::move(loaded.dataset);
}

Dataset normalize_minmax(const Dataset& d) {
  Dataset out = d;
  for (Index j = 0; j < out.features.cols(); ++j) {
    auto col = out.features.col(j);
    const double lo = col.minCoeff();
    const double hi = col.maxCoeff();
    if (hi > lo)
      col = (col.array() - lo) / (hi - lo);
    else
      col.setZero();
  }
  return out;
}

std::vector<Fold> stratified_folds(const Dataset& d, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ContractViolation("stratified_folds: k must be at least 2");
  const auto n = static_cast<std::size_t>(d.observations());
  require(k <= n, "stratified_folds: k exceeds the number of rows");

  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(d.class_count()));
  for (std::size_t i = 0; i < n; ++i) by_class[static_cast<std::size_t>(d.labels[i])].push_back(i);

  if (k < n) {
    std::size_t smallest = n;
    for (const auto& members : by_class) smallest = std::min(smallest, members.size());
    if (smallest < k) {
      if (smallest < 2) throw DatasetError("stratified_folds: a class has fewer than two rows");
      std::clog << "warning: reducing folds from " << k << " to " << smallest
                << " (smallest class size)\n";
      k = smallest;
    }
  }

  RandomSource rng(seed, 0);
  std::vector<Fold> folds(k);
  std::size_t next = 0;
  for (auto& members : by_class) {
    for (std::size_t i = members.size(); i > 1; --i) std::swap(members[i - 1], members[rng.below(i)]);
    for (const std::size_t idx : members) {
      folds[next].push_back(idx);
      next = (next + 1) % k;
    }
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

double complexity_index(int classes, Index features, Index observations) {
  require(observations > 0, "complexity_index: no observations");
  return static_cast<double>(classes) * static_cast<double>(features) / static_cast<double>(observations);
}

double complexity_index(const Dataset& d) {
  return complexity_index(d.class_count(), d.feature_count(), d.observations());
}

Dataset synth_dataset(std::size_t n_samples, std::size_t n_features, std::size_t n_informative,
                      int class_count, std::uint64_t seed) {
  require(class_count >= 2, "synth_dataset: need at least two classes");
  require(n_informative <= n_features, "synth_dataset: n_informative exceeds n_features");
  require(n_features >= 1, "synth_dataset: need at least one feature");
  require(n_samples >= static_cast<std::size_t>(class_count), "synth_dataset: fewer samples than classes");

  RandomSource rng(seed, 0);
  std::vector<std::size_t> pool(n_features);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < n_informative; ++i) std::swap(pool[i], pool[i + rng.below(n_features - i)]);
  std::vector<std::size_t> informative(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_informative));
  std::sort(informative.begin(), informative.end());

  // Class means for each informative feature: a shuffled ladder over [-1.5, 1.5].
  const auto C = static_cast<std::size_t>(class_count);
  Matrix means = Matrix::Zero(static_cast<Index>(C), static_cast<Index>(n_features));
  for (const std::size_t j : informative) {
    std::vector<double> ladder(C);
    for (std::size_t c = 0; c < C; ++c) ladder[c] = -1.5 + 3.0 * static_cast<double>(c) / static_cast<double>(C - 1);
    for (std::size_t i = C; i > 1; --i) std::swap(ladder[i - 1], ladder[rng.below(i)]);
    for (std::size_t c = 0; c < C; ++c) means(static_cast<Index>(c), static_cast<Index>(j)) = ladder[c];
  }

  Dataset d;
  d.features.resize(static_cast<Index>(n_samples), static_cast<Index>(n_features));
  d.labels.resize(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const int label = static_cast<int>(i % C);
    d.labels[i] = label;
    for (std::size_t j = 0; j < n_features; ++j)
      d.features(static_cast<Index>(i), static_cast<Index>(j)) = means(label, static_cast<Index>(j)) + rng.normal();
  }
  for (std::size_t j = 0; j < n_features; ++j) d.feature_names.push_back("f" + std::to_string(j));
  for (int c = 0; c < class_count; ++c) d.class_names.push_back("class" + std::to_string(c));

  std::ostringstream name;
  name << "synthetic[informative=";
  for (std::size_t i = 0; i < informative.size(); ++i) name << (i ? "," : "") << informative[i];
  name << "]";
  d.name = name.str();
  return d;
}

std::vector<std::size_t> informative_features(const std::string& name) {
  const std::string key = "informative=";
  const auto start = name.find(key);
  if (start == std::string::npos) return {};
  const auto end = name.find(']', start);
  std::vector<std::size_t> out;
  std::stringstream ss(name.substr(start + key.size(), end - start - key.size()));
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stoul(item));
  return out;
}

}  // namespace epso::data
