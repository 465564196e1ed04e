#pragma once

#include <string>
#include <vector>

#include "bife/core_types.hpp"
#include "bife/portfolio.hpp"

namespace bife {

/// Long-format panel CSV with header `unit,time,y,x1..xk`. Unit and time
/// labels are both sorted with time_label_less.
PanelData load_panel_csv(const std::string& path);
PanelData parse_panel_csv(const std::string& text);
void write_panel_csv(const PanelData& data, const std::string& path);
std::string format_panel_csv(const PanelData& data);

struct MarketLoad {
  MarketData market;
  std::vector<std::string> dropped_stocks;  ///< had at least one missing price
  int price_dates = 0;
  int vix_dates = 0;
  int rfi_dates = 0;
  int joined_dates = 0;  ///< dates present in all three files
};

/// prices: `date,<stock>...` with empty cells for missing prices;
/// vix: `date,vix`; rfi: `date,rfi` in daily decimal rates.
/// Returns on joined date k are p_k / p_{k-1} - 1, so the market axis starts
/// at the second joined date. The VIX column is stored as its natural log.
MarketLoad load_market_csv(const std::string& prices_path, const std::string& vix_path, const std::string& rfi_path);

}  // namespace bife
