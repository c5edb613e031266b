#include "itemcal/curves.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <Eigen/LU>

#include "itemcal/error.hpp"

namespace itemcal {

std::vector<CurveRow> emit_curves(std::span<const ItemParams> items, double theta_min,
                                  double theta_max, double step) {
  if (!(step > 0.0)) throw Error(ErrorCode::Domain, "emit_curves: step must be > 0");
  if (!(theta_min <= theta_max)) throw Error(ErrorCode::Domain, "emit_curves: empty theta range");
  const long points = static_cast<long>(std::floor((theta_max - theta_min) / step + 1e-9)) + 1;

  std::vector<CurveRow> rows;
  for (std::size_t id = 0; id < items.size(); ++id) {
    const ItemParams& item = items[id];
    const Gamma g = to_gamma(item);
    for (long k = 0; k < points; ++k) {
      const double theta = theta_min + step * static_cast<double>(k);
      CurveRow row;
      row.item_id = static_cast<int>(id);
      row.item = item;
      row.theta = theta;
      row.icc = icc(theta, item);
      const Mat3 single = fisher_information_point(g, theta);
      const Mat3 pair = single + fisher_information_point(g, 2.0 * item.b - theta);
      row.det_info_ab = pair.topLeftCorner<2, 2>().determinant();
      row.info_c = single(2, 2);
      rows.push_back(row);
    }
  }
  return rows;
}

void write_curves_csv(const std::vector<CurveRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write curves to '" + path + "'");
  out << "item_id,a,b,c,theta,icc,det_info_ab,info_c\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g\n", r.item_id, r.item.a,
                  r.item.b, r.item.c, r.theta, r.icc, r.det_info_ab, r.info_c);
    out << buf;
  }
  if (!out) throw Error(ErrorCode::Io, "error while writing '" + path + "'");
}

std::vector<ItemParams> parse_item_list(const std::string& spec) {
  std::vector<ItemParams> items;
  std::stringstream ss(spec);
  std::string entry;
  while (std::getline(ss, entry, ';')) {
    if (entry.find_first_not_of(" \t") == std::string::npos) continue;
    ItemParams it;
    char c1 = 0, c2 = 0;
    std::istringstream es(entry);
    if (!(es >> it.a >> c1 >> it.b >> c2 >> it.c) || c1 != ':' || c2 != ':')
      throw Error(ErrorCode::Config, "bad item spec '" + entry + "' (expected a:b:c)");
    validate(it);
    items.push_back(it);
  }
  if (items.empty()) throw Error(ErrorCode::Config, "no items given");
  return items;
}

}  // namespace itemcal
