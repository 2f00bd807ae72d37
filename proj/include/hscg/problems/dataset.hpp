#ifndef HSCG_PROBLEMS_DATASET_HPP
#define HSCG_PROBLEMS_DATASET_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "hscg/errors.hpp"

namespace hscg {

struct SparseRow {
  std::vector<int> idx;  // ascending 0-based feature indices
  std::vector<double> val;
};

/// Sparse labeled dataset (classification examples in LIBSVM layout).
struct Dataset {
  std::vector<SparseRow> rows;
  std::vector<double> labels;  // normalized to {-1, +1}
  int p = 0;

  // Provenance.
  std::string source_path;
  std::string checksum;  // fnv1a64 hex of the source file, when loaded
  bool scaled = false;

  int num_rows() const { return static_cast<int>(rows.size()); }

  double dot(int i, const Eigen::VectorXd& x) const {
    const SparseRow& r = rows[i];
    double s = 0.0;
    for (std::size_t k = 0; k < r.idx.size(); ++k) s += r.val[k] * x[r.idx[k]];
    return s;
  }

  void add_scaled(int i, double w, Eigen::Ref<Eigen::RowVectorXd> acc) const {
    const SparseRow& r = rows[i];
    for (std::size_t k = 0; k < r.idx.size(); ++k) acc[r.idx[k]] += w * r.val[k];
  }
};

// LIBSVM text format: `label idx:val idx:val ...`, 1-based indices.
// 0/1 and 1/2 label schemes are normalized to -1/+1; p defaults to the
// maximum feature index. Malformed lines raise DataError with the line
// number.
Dataset load_libsvm(const std::string& path, int p_override = 0);
void write_libsvm(const std::string& path, const Dataset& data);

// Optional in-place per-feature max-abs scaling; sets data.scaled.
void max_abs_scale(Dataset& data);

// Portfolio CSV: header row of asset names, then one row of real returns per
// period. Sentinels -99.99 / -999 mark missing values; they either reject
// the file or drop the row depending on drop_missing_rows.
Eigen::MatrixXd load_portfolio_csv(const std::string& path,
                                   bool drop_missing_rows = false);
void write_portfolio_csv(const std::string& path, const Eigen::MatrixXd& r);

// FNV-1a 64-bit file checksum (hex string), used for dataset provenance.
std::string file_checksum_fnv1a(const std::string& path);

}  // namespace hscg

#endif
