#pragma once

#include <string>
#include <vector>

#include "mrgp/types.hpp"

namespace mrgp {

// Per-output-dimension affine map learned on the training split only.
struct Standardizer {
  Vector mean;
  Vector std;

  static Standardizer fit(const Eigen::Ref<const Matrix>& y);
  Matrix apply(const Eigen::Ref<const Matrix>& y) const;
  Matrix invert(const Eigen::Ref<const Matrix>& y_std) const;
};

struct Dataset {
  Matrix x;  // n x d_x
  Matrix y;  // n x d_y
  std::vector<std::string> x_names;
  std::vector<std::string> y_names;

  Index n() const { return x.rows(); }
  Index dx() const { return x.cols(); }
  Index dy() const { return y.cols(); }

  // Stable sort of rows by the (single) input column; used by the CLI for
  // 1-D inputs so regions correspond to input intervals.
  void sort_by_input();
};

// CSV with a header row; selected columns must be finite numerics.
Dataset load_csv(const std::string& path, const std::vector<int>& x_cols,
                 const std::vector<int>& y_cols);

struct CsvTable {
  std::vector<std::string> header;
  Matrix values;
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Eigen::Ref<const Matrix>& values);

}  // namespace mrgp
