#pragma once

// CSV ingestion and output.
//
// Returns:  date,<asset1>,...,<assetp>         one row per date
// Realized: date,row_asset,col_asset,value      lower triangle per date
//
// Fields are unquoted; numbers use '.' as decimal point. Row numbers in
// errors are 1-based file lines (the header is line 1).

#include <map>
#include <string>
#include <vector>

#include "mrgarch/model.hpp"

namespace mrg {

struct ReturnsTable {
  std::vector<std::string> dates;
  std::vector<std::string> assets;
  Matrix values;  // T x p, percent
};

ReturnsTable load_returns(const std::string& path);
void write_returns(const std::string& path, const ReturnsTable& table);

/// Realized covariance matrices aligned to `dates`, assets in `assets`
/// order. Matrices are symmetric but not yet checked for definiteness.
std::vector<Matrix> load_realized(const std::string& path, const std::vector<std::string>& dates,
                                  const std::vector<std::string>& assets);
void write_realized(const std::string& path, const std::vector<std::string>& dates,
                    const std::vector<std::string>& assets, const std::vector<Matrix>& rm);

/// Decomposes each RM_t (rejecting or repairing non-PD ones) into log x_t and
/// y_t. Errors name the date.
Dataset build_dataset(const ReturnsTable& returns, const std::vector<Matrix>& rm, NonPdPolicy policy);

/// Loads both files and builds the dataset.
Dataset load_dataset(const std::string& returns_path, const std::string& realized_path, NonPdPolicy policy);

/// Stable reordering of assets so that equal labels are contiguous, blocks
/// ordered by first appearance.
struct AssetGrouping {
  std::vector<int> order;  // new position -> old column
  BlockPartition partition;
};
AssetGrouping group_assets(const std::vector<std::string>& assets,
                           const std::map<std::string, std::string>& labels);

/// Reorders the columns of returns, log_x and the correlation coordinates.
Dataset permute_assets(const Dataset& data, const std::vector<int>& order);

/// Shortest round-trip decimal text of a double.
std::string format_double(double v);
/// Whole-string parse; returns false on trailing garbage or an empty field.
bool parse_double(const std::string& s, double& out);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace mrg
