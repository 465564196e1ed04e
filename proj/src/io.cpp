#include "bife/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "bife/error.hpp"

namespace bife {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

/// Non-empty lines with their 1-based line numbers.
std::vector<std::pair<int, std::string>> lines_of(const std::string& text) {
  std::vector<std::pair<int, std::string>> out;
  std::istringstream in(text);
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    out.emplace_back(no, line);
  }
  return out;
}

double parse_number(const std::string& s, int row, const std::string& what) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(b, e, v);
  if (s.empty() || ec != std::errc() || ptr != e || !std::isfinite(v))
    throw DataError("row " + std::to_string(row) + ": cannot parse " + what + " '" + s + "'");
  return v;
}

std::string format_double(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

struct DatedColumn {
  std::vector<std::string> dates;
  std::map<std::string, double> values;
};

DatedColumn load_dated_series(const std::string& path, const std::string& what) {
  const auto lines = lines_of(read_file(path));
  if (lines.empty()) throw DataError(path + " is empty");
  DatedColumn out;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto cells = split(lines[k].second);
    if (cells.size() < 2) throw DataError(path + " row " + std::to_string(lines[k].first) + ": expected date,value");
    const double v = parse_number(cells[1], lines[k].first, what);
    if (!out.values.emplace(cells[0], v).second)
      throw DataError(path + ": duplicate date " + cells[0]);
    out.dates.push_back(cells[0]);
  }
  return out;
}

}  // namespace

PanelData parse_panel_csv(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw DataError("panel CSV is empty");
  const auto header = split(lines[0].second);
  if (header.size() < 3 || header[0] != "unit" || header[1] != "time" || header[2] != "y")
    throw DataError("panel CSV header must start with unit,time,y");
  const std::size_t d_beta = header.size() - 3;

  struct Row {
    double y;
    std::vector<double> x;
  };
  std::map<std::pair<std::string, std::string>, Row> cells;
  std::set<std::string, decltype(&time_label_less)> unit_set(&time_label_less);
  std::set<std::string, decltype(&time_label_less)> time_set(&time_label_less);
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const int row = lines[k].first;
    const auto c = split(lines[k].second);
    if (c.size() != header.size())
      throw DataError("row " + std::to_string(row) + ": expected " + std::to_string(header.size()) + " fields");
    const double y = parse_number(c[2], row, "y");
    if (y != 0.0 && y != 1.0) throw DataError("row " + std::to_string(row) + ": y must be 0 or 1, got " + c[2]);
    Row r{y, {}};
    for (std::size_t j = 0; j < d_beta; ++j) r.x.push_back(parse_number(c[3 + j], row, header[3 + j]));
    if (!cells.emplace(std::make_pair(c[0], c[1]), std::move(r)).second)
      throw DataError("row " + std::to_string(row) + ": duplicate (unit, time) pair (" + c[0] + ", " + c[1] + ")");
    unit_set.insert(c[0]);
    time_set.insert(c[1]);
  }
  if (cells.empty()) throw DataError("panel CSV has no data rows");

  const std::vector<std::string> units(unit_set.begin(), unit_set.end());
  const std::vector<std::string> times(time_set.begin(), time_set.end());
  const int n = static_cast<int>(units.size()), t_n = static_cast<int>(times.size());

  std::vector<std::string> missing;
  for (const auto& u : units)
    for (const auto& t : times)
      if (!cells.count({u, t})) missing.push_back("(" + u + ", " + t + ")");
  if (!missing.empty()) {
    std::string msg = "unbalanced panel; missing (unit, time) pairs:";
    for (std::size_t k = 0; k < missing.size() && k < 50; ++k) msg += " " + missing[k];
    if (missing.size() > 50) msg += " ... (" + std::to_string(missing.size()) + " total)";
    throw DataError(msg);
  }

  MatrixXd y(n, t_n);
  RowMatrix x(static_cast<Eigen::Index>(n) * t_n, static_cast<Eigen::Index>(d_beta));
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < t_n; ++t) {
      const Row& r = cells.at({units[static_cast<std::size_t>(i)], times[static_cast<std::size_t>(t)]});
      y(i, t) = r.y;
      for (std::size_t j = 0; j < d_beta; ++j)
        x(static_cast<Eigen::Index>(i) * t_n + t, static_cast<Eigen::Index>(j)) = r.x[j];
    }
  }
  return PanelData(std::move(y), std::move(x), units, times);
}

PanelData load_panel_csv(const std::string& path) { return parse_panel_csv(read_file(path)); }

std::string format_panel_csv(const PanelData& data) {
  std::ostringstream out;
  out << "unit,time,y";
  for (int j = 0; j < data.d_beta(); ++j) out << ",x" << (j + 1);
  out << '\n';
  for (int i = 0; i < data.n_units(); ++i) {
    for (int t = 0; t < data.n_periods(); ++t) {
      out << data.unit_ids()[static_cast<std::size_t>(i)] << ',' << data.time_ids()[static_cast<std::size_t>(t)]
          << ',' << static_cast<int>(data.y(i, t));
      for (int j = 0; j < data.d_beta(); ++j) out << ',' << format_double(data.x(i, t)(j));
      out << '\n';
    }
  }
  return out.str();
}

void write_panel_csv(const PanelData& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << format_panel_csv(data);
  if (!out) throw DataError("failed writing " + path);
}

MarketLoad load_market_csv(const std::string& prices_path, const std::string& vix_path, const std::string& rfi_path) {
  const auto lines = lines_of(read_file(prices_path));
  if (lines.size() < 2) throw DataError(prices_path + " has no data rows");
  const auto header = split(lines[0].second);
  if (header.size() < 2) throw DataError(prices_path + ": header needs date plus at least one stock");
  const std::size_t n_all = header.size() - 1;

  std::vector<std::string> price_dates;
  std::map<std::string, std::vector<double>> prices;  // NaN marks missing
  for (std::size_t k = 1; k < lines.size(); ++k) {
    auto c = split(lines[k].second);
    if (c.size() > header.size())
      throw DataError(prices_path + " row " + std::to_string(lines[k].first) + ": too many fields");
    c.resize(header.size());
    std::vector<double> row(n_all, std::nan(""));
    for (std::size_t j = 0; j < n_all; ++j) {
      const std::string& cell = c[j + 1];
      if (cell.empty() || cell == "NA" || cell == "NaN") continue;
      const double p = parse_number(cell, lines[k].first, header[j + 1]);
      if (!(p > 0.0)) throw DataError(prices_path + " row " + std::to_string(lines[k].first) + ": price must be > 0");
      row[j] = p;
    }
    if (!prices.emplace(c[0], std::move(row)).second) throw DataError(prices_path + ": duplicate date " + c[0]);
    price_dates.push_back(c[0]);
  }

  const DatedColumn vix = load_dated_series(vix_path, "vix");
  const DatedColumn rfi = load_dated_series(rfi_path, "rfi");

  std::vector<std::string> joined;
  for (const auto& d : price_dates)
    if (vix.values.count(d) && rfi.values.count(d)) joined.push_back(d);
  std::sort(joined.begin(), joined.end(), &time_label_less);
  if (joined.empty()) throw DataError("price, VIX and risk-free files share no dates");
  if (joined.size() < 2) throw DataError("need at least two common dates to form returns");

  MarketLoad out;
  out.price_dates = static_cast<int>(price_dates.size());
  out.vix_dates = static_cast<int>(vix.dates.size());
  out.rfi_dates = static_cast<int>(rfi.dates.size());
  out.joined_dates = static_cast<int>(joined.size());

  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < n_all; ++j) {
    bool complete = true;
    for (const auto& d : joined)
      if (std::isnan(prices.at(d)[j])) complete = false;
    if (complete) keep.push_back(j);
    else out.dropped_stocks.push_back(header[j + 1]);
  }
  if (keep.empty()) throw DataError("every stock has a missing price");

  const int t_n = static_cast<int>(joined.size()) - 1;
  MarketData& m = out.market;
  m.returns.resize(static_cast<Eigen::Index>(keep.size()), t_n);
  m.vix.resize(t_n);
  m.rfi.resize(t_n);
  for (std::size_t k = 0; k < keep.size(); ++k) m.stocks.push_back(header[keep[k] + 1]);
  for (int t = 0; t < t_n; ++t) {
    const std::string& prev = joined[static_cast<std::size_t>(t)];
    const std::string& cur = joined[static_cast<std::size_t>(t) + 1];
    for (std::size_t k = 0; k < keep.size(); ++k)
      m.returns(static_cast<Eigen::Index>(k), t) = prices.at(cur)[keep[k]] / prices.at(prev)[keep[k]] - 1.0;
    const double level = vix.values.at(cur);
    if (!(level > 0.0)) throw DataError("VIX level on " + cur + " must be positive");
    m.vix(t) = std::log(level);
    m.rfi(t) = rfi.values.at(cur);
    m.dates.push_back(cur);
  }
  return out;
}

}  // namespace bife
