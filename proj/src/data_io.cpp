#include "mrgarch/data_io.hpp"

#include <charconv>
#include <cmath>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "mrgarch/errors.hpp"

namespace mrg {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    std::string f = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t')) f.pop_back();
    std::size_t lead = 0;
    while (lead < f.size() && (f[lead] == ' ' || f[lead] == '\t')) ++lead;
    out.push_back(f.substr(lead));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

// Lines of a file with trailing CR stripped; blank lines are kept so that
// row numbers match the file.
std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  if (!lines.empty() && lines.front().rfind("\xEF\xBB\xBF", 0) == 0) lines.front().erase(0, 3);
  return lines;
}

bool is_iso_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  int y = 0;
  unsigned m = 0, d = 0;
  if (std::sscanf(s.c_str(), "%4d-%2u-%2u", &y, &m, &d) != 3) return false;
  return std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}}.ok();
}

[[noreturn]] void fail(const std::string& path, long row, const std::string& msg) {
  std::ostringstream os;
  os << path << ": row " << row << ": " << msg;
  throw DataError(os.str(), row);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto res = std::from_chars(first, s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << content;
  if (!out) throw DataError("failed writing '" + path + "'");
}

ReturnsTable load_returns(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw DataError(path + ": empty file");
  const auto header = split_fields(lines[0]);
  if (header.size() < 2 || header[0] != "date") fail(path, 1, "header must be 'date,<asset1>,...'");
  ReturnsTable t;
  t.assets.assign(header.begin() + 1, header.end());
  std::set<std::string> seen_assets;
  for (const auto& a : t.assets)
    if (a.empty() || !seen_assets.insert(a).second) fail(path, 1, "empty or duplicate asset name '" + a + "'");

  const Eigen::Index p = static_cast<Eigen::Index>(t.assets.size());
  std::vector<double> values;
  std::set<std::string> seen_dates;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const long row = static_cast<long>(i + 1);
    if (lines[i].empty()) continue;
    const auto f = split_fields(lines[i]);
    if (static_cast<Eigen::Index>(f.size()) != p + 1)
      fail(path, row, "expected " + std::to_string(p + 1) + " fields, found " + std::to_string(f.size()));
    if (!is_iso_date(f[0])) fail(path, row, "unparseable date '" + f[0] + "'");
    if (!seen_dates.insert(f[0]).second) fail(path, row, "duplicate date " + f[0]);
    for (Eigen::Index j = 0; j < p; ++j) {
      double v = 0.0;
      if (f[j + 1].empty()) fail(path, row, "missing value for " + t.assets[j]);
      if (!parse_double(f[j + 1], v) || !std::isfinite(v))
        fail(path, row, "unparseable value '" + f[j + 1] + "' for " + t.assets[j]);
      values.push_back(v);
    }
    t.dates.push_back(f[0]);
  }
  if (t.dates.empty()) throw DataError(path + ": no data rows");
  const Eigen::Index T = static_cast<Eigen::Index>(t.dates.size());
  t.values = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), T, p);
  return t;
}

void write_returns(const std::string& path, const ReturnsTable& table) {
  std::string s = "date";
  for (const auto& a : table.assets) s += "," + a;
  s += "\n";
  for (Eigen::Index t = 0; t < table.values.rows(); ++t) {
    s += table.dates[t];
    for (Eigen::Index j = 0; j < table.values.cols(); ++j) s += "," + format_double(table.values(t, j));
    s += "\n";
  }
  write_text_file(path, s);
}

std::vector<Matrix> load_realized(const std::string& path, const std::vector<std::string>& dates,
                                  const std::vector<std::string>& assets) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw DataError(path + ": empty file");
  const auto header = split_fields(lines[0]);
  if (header != std::vector<std::string>{"date", "row_asset", "col_asset", "value"})
    fail(path, 1, "header must be 'date,row_asset,col_asset,value'");

  std::unordered_map<std::string, std::size_t> date_index, asset_index;
  for (std::size_t t = 0; t < dates.size(); ++t) date_index[dates[t]] = t;
  for (std::size_t j = 0; j < assets.size(); ++j) asset_index[assets[j]] = j;
  const Eigen::Index p = static_cast<Eigen::Index>(assets.size());

  std::vector<Matrix> rm(dates.size(), Matrix::Zero(p, p));
  // Line on which each lower-triangle entry was set (0 = not yet seen) and
  // whether it came from the upper triangle.
  std::vector<std::vector<long>> set_on(dates.size(), std::vector<long>(p * p, 0));
  std::vector<long> last_row(dates.size(), 0);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const long row = static_cast<long>(i + 1);
    if (lines[i].empty()) continue;
    const auto f = split_fields(lines[i]);
    if (f.size() != 4) fail(path, row, "expected 4 fields, found " + std::to_string(f.size()));
    const auto di = date_index.find(f[0]);
    if (di == date_index.end()) fail(path, row, "date " + f[0] + " is not in the returns file");
    const auto ri = asset_index.find(f[1]);
    const auto ci = asset_index.find(f[2]);
    if (ri == asset_index.end()) fail(path, row, "unknown asset '" + f[1] + "'");
    if (ci == asset_index.end()) fail(path, row, "unknown asset '" + f[2] + "'");
    double v = 0.0;
    if (f[3].empty()) fail(path, row, "missing value");
    if (!parse_double(f[3], v) || !std::isfinite(v)) fail(path, row, "unparseable value '" + f[3] + "'");
    const std::size_t t = di->second;
    const auto a = static_cast<Eigen::Index>(std::max(ri->second, ci->second));
    const auto b = static_cast<Eigen::Index>(std::min(ri->second, ci->second));
    const bool mirrored = ri->second < ci->second;
    long& prev = set_on[t][a * p + b];
    if (prev != 0) {
      if (rm[t](a, b) != v)
        fail(path, row, "asymmetric duplicate for (" + f[1] + "," + f[2] + ") on " + f[0] + ", first set on row " +
                            std::to_string(std::abs(prev)));
      if ((prev < 0) == mirrored)
        fail(path, row, "duplicate entry for (" + f[1] + "," + f[2] + ") on " + f[0]);
      continue;
    }
    prev = mirrored ? -row : row;
    rm[t](a, b) = v;
    rm[t](b, a) = v;
    last_row[t] = std::max(last_row[t], row);
  }
  for (std::size_t t = 0; t < dates.size(); ++t) {
    for (Eigen::Index a = 0; a < p; ++a)
      for (Eigen::Index b = 0; b <= a; ++b)
        if (set_on[t][a * p + b] == 0) {
          const long row = last_row[t] > 0 ? last_row[t] : static_cast<long>(lines.size());
          fail(path, row, "incomplete lower triangle for " + dates[t] + ": missing (" + assets[a] + "," +
                              assets[b] + ")");
        }
  }
  return rm;
}

void write_realized(const std::string& path, const std::vector<std::string>& dates,
                    const std::vector<std::string>& assets, const std::vector<Matrix>& rm) {
  if (rm.size() != dates.size()) throw DimensionError("one realized matrix per date is required");
  std::string s = "date,row_asset,col_asset,value\n";
  const std::size_t p = assets.size();
  for (std::size_t t = 0; t < dates.size(); ++t)
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = 0; b <= a; ++b)
        s += dates[t] + "," + assets[a] + "," + assets[b] + "," +
             format_double(rm[t](static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b))) + "\n";
  write_text_file(path, s);
}

Dataset build_dataset(const ReturnsTable& returns, const std::vector<Matrix>& rm, NonPdPolicy policy) {
  const Eigen::Index T = returns.values.rows();
  const Eigen::Index p = returns.values.cols();
  if (static_cast<Eigen::Index>(rm.size()) != T) throw DataError("realized measures do not cover every date");
  Dataset data;
  data.dates = returns.dates;
  data.assets = returns.assets;
  data.returns = returns.values;
  data.log_x.resize(T, p);
  data.y.resize(T, vecl_size(p));
  for (Eigen::Index t = 0; t < T; ++t) {
    try {
      const auto dec = realized_decompose(rm[t], policy);
      data.log_x.row(t) = dec.x.array().log().matrix().transpose();
      data.y.row(t) = dec.y.transpose();
    } catch (const Error& e) {
      throw DataError("realized measure on " + returns.dates[t] + ": " + e.what(), static_cast<long>(t + 1));
    }
  }
  data.validate();
  return data;
}

Dataset load_dataset(const std::string& returns_path, const std::string& realized_path, NonPdPolicy policy) {
  const ReturnsTable r = load_returns(returns_path);
  return build_dataset(r, load_realized(realized_path, r.dates, r.assets), policy);
}

AssetGrouping group_assets(const std::vector<std::string>& assets,
                           const std::map<std::string, std::string>& labels) {
  std::vector<std::string> groups;
  std::vector<std::vector<int>> members;
  for (std::size_t j = 0; j < assets.size(); ++j) {
    const auto it = labels.find(assets[j]);
    if (it == labels.end()) throw ArgumentError("asset '" + assets[j] + "' has no group label");
    std::size_t g = 0;
    while (g < groups.size() && groups[g] != it->second) ++g;
    if (g == groups.size()) {
      groups.push_back(it->second);
      members.emplace_back();
    }
    members[g].push_back(static_cast<int>(j));
  }
  AssetGrouping out;
  std::vector<int> sizes;
  for (const auto& m : members) {
    out.order.insert(out.order.end(), m.begin(), m.end());
    sizes.push_back(static_cast<int>(m.size()));
  }
  out.partition = BlockPartition(sizes);
  return out;
}

Dataset permute_assets(const Dataset& data, const std::vector<int>& order) {
  const Eigen::Index p = data.p();
  if (static_cast<Eigen::Index>(order.size()) != p) throw DimensionError("permutation has the wrong length");
  std::vector<bool> used(p, false);
  for (int j : order) {
    if (j < 0 || j >= p || used[j]) throw ArgumentError("invalid asset permutation");
    used[j] = true;
  }
  Dataset out;
  out.dates = data.dates;
  out.returns.resize(data.T(), p);
  out.log_x.resize(data.T(), p);
  out.y.resize(data.T(), data.y.cols());
  for (Eigen::Index j = 0; j < p; ++j) {
    if (!data.assets.empty()) out.assets.push_back(data.assets[order[j]]);
    out.returns.col(j) = data.returns.col(order[j]);
    out.log_x.col(j) = data.log_x.col(order[j]);
  }
  const Vector zero_diag = Vector::Zero(p);
  for (Eigen::Index t = 0; t < data.T(); ++t) {
    const Matrix full = unvecl(data.y.row(t).transpose(), zero_diag);
    Matrix perm(p, p);
    for (Eigen::Index a = 0; a < p; ++a)
      for (Eigen::Index b = 0; b < p; ++b) perm(a, b) = full(order[a], order[b]);
    out.y.row(t) = vecl(perm).transpose();
  }
  return out;
}

}  // namespace mrg
