#include "hscg/problems/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hscg {

namespace {

bool is_missing_sentinel(double v) {
  return std::abs(v - (-99.99)) < 1e-9 || std::abs(v - (-999.0)) < 1e-9;
}

double parse_number(const std::string& tok, int line_no, const char* what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw DataError(std::string("line ") + std::to_string(line_no) +
                    ": malformed " + what + " '" + tok + "'");
  }
}

}  // namespace

Dataset load_libsvm(const std::string& path, int p_override) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file: " + path);

  Dataset data;
  data.source_path = path;
  bool saw_label_2 = false, saw_label_0 = false;
  std::string line;
  int line_no = 0;
  int max_index = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // Strip comments and skip blank lines.
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.resize(hash);
    std::istringstream ss(line);
    std::string tok;
    if (!(ss >> tok)) continue;

    const double label = parse_number(tok, line_no, "label");
    if (label == 2.0) saw_label_2 = true;
    if (label == 0.0) saw_label_0 = true;

    SparseRow row;
    int prev_idx = 0;
    while (ss >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos)
        throw DataError("line " + std::to_string(line_no) +
                        ": expected idx:val, got '" + tok + "'");
      const double idx_d = parse_number(tok.substr(0, colon), line_no, "index");
      const int idx = static_cast<int>(idx_d);
      if (idx_d != idx || idx < 1)
        throw DataError("line " + std::to_string(line_no) +
                        ": feature indices must be positive integers");
      if (idx <= prev_idx)
        throw DataError("line " + std::to_string(line_no) +
                        ": feature indices must be strictly increasing");
      prev_idx = idx;
      const double val = parse_number(tok.substr(colon + 1), line_no, "value");
      row.idx.push_back(idx - 1);
      row.val.push_back(val);
      max_index = std::max(max_index, idx);
    }
    data.rows.push_back(std::move(row));
    data.labels.push_back(label);
  }
  if (data.rows.empty()) throw DataError("empty dataset file: " + path);

  // Normalize 0/1 and 1/2 label schemes to -1/+1.
  for (double& l : data.labels) {
    if (saw_label_0) {
      l = l == 0.0 ? -1.0 : 1.0;
    } else if (saw_label_2) {
      l = l == 2.0 ? -1.0 : 1.0;
    }
    if (l != 1.0 && l != -1.0)
      throw DataError("labels must normalize to -1/+1 in " + path);
  }

  data.p = p_override > 0 ? p_override : max_index;
  for (const SparseRow& r : data.rows)
    for (int idx : r.idx)
      if (idx >= data.p)
        throw DataError("feature index exceeds dimension " +
                        std::to_string(data.p) + " in " + path);
  data.checksum = file_checksum_fnv1a(path);
  return data;
}

void write_libsvm(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write dataset file: " + path);
  char buf[64];
  for (int i = 0; i < data.num_rows(); ++i) {
    out << (data.labels[i] > 0 ? "+1" : "-1");
    const SparseRow& r = data.rows[i];
    for (std::size_t k = 0; k < r.idx.size(); ++k) {
      std::snprintf(buf, sizeof buf, " %d:%.17g", r.idx[k] + 1, r.val[k]);
      out << buf;
    }
    out << '\n';
  }
}

void max_abs_scale(Dataset& data) {
  std::vector<double> max_abs(data.p, 0.0);
  for (const SparseRow& r : data.rows)
    for (std::size_t k = 0; k < r.idx.size(); ++k)
      max_abs[r.idx[k]] = std::max(max_abs[r.idx[k]], std::abs(r.val[k]));
  for (SparseRow& r : data.rows)
    for (std::size_t k = 0; k < r.idx.size(); ++k)
      if (max_abs[r.idx[k]] > 0.0) r.val[k] /= max_abs[r.idx[k]];
  data.scaled = true;
}

Eigen::MatrixXd load_portfolio_csv(const std::string& path,
                                   bool drop_missing_rows) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open returns file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError("empty returns file: " + path);
  // Header row gives the column count.
  int cols = 1;
  for (char c : line)
    if (c == ',') ++cols;

  std::vector<std::vector<double>> kept;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      // Trim spaces.
      const auto a = cell.find_first_not_of(" \t\r");
      const auto b = cell.find_last_not_of(" \t\r");
      if (a == std::string::npos)
        throw DataError("line " + std::to_string(line_no) + ": empty cell");
      row.push_back(parse_number(cell.substr(a, b - a + 1), line_no, "return"));
    }
    if (static_cast<int>(row.size()) != cols)
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(cols) + " columns, got " +
                      std::to_string(row.size()));
    const bool missing = std::any_of(row.begin(), row.end(), is_missing_sentinel);
    if (missing) {
      if (drop_missing_rows) continue;
      throw DataError("line " + std::to_string(line_no) +
                      ": missing-value sentinel (rerun with drop flag)");
    }
    kept.push_back(std::move(row));
  }
  if (kept.empty()) throw DataError("no usable rows in " + path);

  Eigen::MatrixXd r(kept.size(), cols);
  for (std::size_t i = 0; i < kept.size(); ++i)
    for (int j = 0; j < cols; ++j) r(i, j) = kept[i][j];

  // An all-missing column would have been rejected row-wise already unless
  // rows were dropped; ensure some data survived per column.
  for (int j = 0; j < cols; ++j)
    if (!r.col(j).allFinite())
      throw DataError("column " + std::to_string(j) + " unusable in " + path);
  return r;
}

void write_portfolio_csv(const std::string& path, const Eigen::MatrixXd& r) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write returns file: " + path);
  for (int j = 0; j < r.cols(); ++j) out << (j ? ",asset" : "asset") << j;
  out << '\n';
  char buf[64];
  for (int i = 0; i < r.rows(); ++i) {
    for (int j = 0; j < r.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%s%.17g", j ? "," : "", r(i, j));
      out << buf;
    }
    out << '\n';
  }
}

std::string file_checksum_fnv1a(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file for checksum: " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    const std::streamsize n = in.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

}  // namespace hscg
