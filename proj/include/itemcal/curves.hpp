#pragma once

#include <span>
#include <string>
#include <vector>

#include "itemcal/irt_model.hpp"

namespace itemcal {

struct CurveRow {
  int item_id = 0;
  ItemParams item;
  double theta = 0.0;
  double icc = 0.0;
  // det of the (beta1, beta2) block of the information of the symmetric
  // two-point design {theta, 2b - theta}. The full 3x3 determinant of one or
  // two points is identically zero, so this is the curve that carries the
  // two-peak shape.
  double det_info_ab = 0.0;
  double info_c = 0.0;  // (c, c) entry of the single-point information
};

/// Rows for every item over theta_min, theta_min + step, ..., <= theta_max.
std::vector<CurveRow> emit_curves(std::span<const ItemParams> items, double theta_min,
                                  double theta_max, double step);

void write_curves_csv(const std::vector<CurveRow>& rows, const std::string& path);

/// Parses "a:b:c;a:b:c;...".
std::vector<ItemParams> parse_item_list(const std::string& spec);

}  // namespace itemcal
