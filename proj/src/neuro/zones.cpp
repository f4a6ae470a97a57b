#include "handover/core/dataset.hpp"
#include "handover/core/error.hpp"
#include "handover/core/text.hpp"
#include "handover/neuro/neuro.hpp"

#include <fstream>
#include <sstream>

namespace handover::neuro {

namespace {

using Point = std::pair<double, double>;

double cross(const Point& o, const Point& a, const Point& b) {
  return (a.first - o.first) * (b.second - o.second) - (a.second - o.second) * (b.first - o.first);
}

bool segments_cross(const Point& a, const Point& b, const Point& c, const Point& d) {
  const double d1 = cross(c, d, a), d2 = cross(c, d, b), d3 = cross(a, b, c), d4 = cross(a, b, d);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

bool strictly_inside(const Zone& z, const Point& p) {
  // Inside and not on any edge.
  if (!z.contains(p.first, p.second)) return false;
  const auto& v = z.polygon;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point& a = v[i];
    const Point& b = v[(i + 1) % v.size()];
    if (cross(a, b, p) == 0.0 && p.first >= std::min(a.first, b.first) && p.first <= std::max(a.first, b.first) &&
        p.second >= std::min(a.second, b.second) && p.second <= std::max(a.second, b.second))
      return false;
  }
  return true;
}

Point centroid(const Zone& z) {
  double x = 0, y = 0;
  for (const auto& p : z.polygon) {
    x += p.first;
    y += p.second;
  }
  return {x / static_cast<double>(z.polygon.size()), y / static_cast<double>(z.polygon.size())};
}

bool overlap(const Zone& a, const Zone& b) {
  if (a.is_rect && b.is_rect) return a.x0 < b.x1 && b.x0 < a.x1 && a.y0 < b.y1 && b.y0 < a.y1;
  const auto& p = a.polygon;
  const auto& q = b.polygon;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < q.size(); ++j)
      if (segments_cross(p[i], p[(i + 1) % p.size()], q[j], q[(j + 1) % q.size()])) return true;
  for (const auto& v : p)
    if (strictly_inside(b, v)) return true;
  for (const auto& v : q)
    if (strictly_inside(a, v)) return true;
  return strictly_inside(b, centroid(a)) || strictly_inside(a, centroid(b));
}

}  // namespace

Zone Zone::rect(std::string name, double x0, double y0, double x1, double y1) {
  if (!(x1 > x0 && y1 > y0)) throw SpecError("zone '" + name + "' rectangle has no area");
  Zone z;
  z.name = std::move(name);
  z.is_rect = true;
  z.x0 = x0;
  z.y0 = y0;
  z.x1 = x1;
  z.y1 = y1;
  z.polygon = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
  return z;
}

Zone Zone::poly(std::string name, std::vector<std::pair<double, double>> vertices) {
  if (vertices.size() < 3) throw SpecError("zone '" + name + "' polygon needs at least three vertices");
  Zone z;
  z.name = std::move(name);
  z.polygon = std::move(vertices);
  return z;
}

bool Zone::contains(double x, double y) const {
  if (is_rect) return x >= x0 && x < x1 && y >= y0 && y < y1;
  bool inside = false;
  for (std::size_t i = 0, j = polygon.size() - 1; i < polygon.size(); j = i++) {
    const auto [xi, yi] = polygon[i];
    const auto [xj, yj] = polygon[j];
    if ((yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi) inside = !inside;
  }
  return inside;
}

ZoneMap::ZoneMap(std::vector<Zone> zones) : zones_(std::move(zones)) {
  for (std::size_t i = 0; i < zones_.size(); ++i) {
    if (text::lower(zones_[i].name) == text::lower(kOther)) throw SpecError("zone name 'Other' is reserved");
    for (std::size_t j = 0; j < i; ++j) {
      if (zones_[i].name == zones_[j].name) throw SpecError("duplicate zone '" + zones_[i].name + "'");
      if (overlap(zones_[i], zones_[j])) {
        throw SpecError("zones '" + zones_[j].name + "' and '" + zones_[i].name + "' overlap");
      }
    }
  }
}

ZoneMap ZoneMap::defaults() {
  return ZoneMap({Zone::rect("Robot", -200, -250, 200, 250), Zone::rect("PosB", -700, -150, -300, 250),
                  Zone::rect("PosC", 300, -150, 700, 250)});
}

std::size_t ZoneMap::classify(double x, double y) const {
  for (std::size_t i = 0; i < zones_.size(); ++i)
    if (zones_[i].contains(x, y)) return i;
  return zones_.size();
}

std::vector<std::string> ZoneMap::names() const {
  std::vector<std::string> out;
  for (const auto& z : zones_) out.push_back(z.name);
  out.emplace_back(kOther);
  return out;
}

ZoneMap parse_zone_map_text(const std::string& content, const std::string& origin) {
  std::istringstream in(content);
  std::string line;
  std::size_t lineno = 0;
  std::vector<Zone> zones;
  std::vector<std::size_t> lines;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok[0] != "zone" || tok.size() < 3) throw DataError(origin, lineno, "expected 'zone <name> rect|polygon ...'");
    std::vector<double> v;
    for (std::size_t i = 3; i < tok.size(); ++i) {
      const auto d = text::parse_double(tok[i]);
      if (!d) throw DataError(origin, lineno, "not a number: '" + tok[i] + "'");
      v.push_back(*d);
    }
    try {
      if (tok[2] == "rect") {
        if (v.size() != 4) throw DataError(origin, lineno, "rect needs x0 y0 x1 y1");
        zones.push_back(Zone::rect(tok[1], v[0], v[1], v[2], v[3]));
      } else if (tok[2] == "polygon") {
        if (v.size() < 6 || v.size() % 2 != 0) throw DataError(origin, lineno, "polygon needs at least three x y pairs");
        std::vector<std::pair<double, double>> pts;
        for (std::size_t i = 0; i < v.size(); i += 2) pts.emplace_back(v[i], v[i + 1]);
        zones.push_back(Zone::poly(tok[1], std::move(pts)));
      } else {
        throw DataError(origin, lineno, "unknown zone shape '" + tok[2] + "' (rect or polygon)");
      }
    } catch (const SpecError& e) {
      throw DataError(origin, lineno, e.what());
    }
    lines.push_back(lineno);
  }
  if (zones.empty()) throw DataError(origin, lineno, "no zones defined");
  try {
    return ZoneMap(std::move(zones));
  } catch (const SpecError& e) {
    throw DataError(origin, lines.back(), e.what());
  }
}

ZoneMap parse_zone_map(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError(file.string(), 0, "cannot open zone file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_zone_map_text(ss.str(), file.string());
}

ZoneTable gaze_zone_frequencies(const std::vector<features::FeatureSequence>& seqs,
                                const std::vector<Condition>& conditions, const ZoneMap& zones, double t_start,
                                double t_end) {
  if (seqs.size() != conditions.size()) throw DimensionError("one condition per gaze sequence is required");
  if (!(t_end > t_start)) throw SpecError("zone interval is empty");
  ZoneTable table;
  table.zones = zones.names();
  std::map<Condition, std::vector<long>> counts;
  long total = 0;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    const TimeSeries& s = seqs[i].series;
    if (s.dims() != 2) throw DimensionError("gaze sequences must have two columns");
    auto& c = counts[conditions[i]];
    c.resize(table.zones.size(), 0);
    for (Eigen::Index t = 0; t < s.samples(); ++t) {
      const double time = s.time_at(t);
      const double tol = kGridTolerance * s.step_s;
      if (time < t_start - tol || time >= t_end - tol) continue;
      ++c[zones.classify(s.values(t, 0), s.values(t, 1))];
      ++total;
    }
  }
  if (total == 0) throw NumericError("no gaze samples fall inside the zone interval");
  for (const auto& [cond, c] : counts) {
    long n = 0;
    for (long v : c) n += v;
    table.samples[cond] = n;
    if (n == 0) continue;
    std::vector<double> pct;
    for (long v : c) pct.push_back(100.0 * static_cast<double>(v) / static_cast<double>(n));
    table.percent[cond] = std::move(pct);
  }
  return table;
}

}  // namespace handover::neuro
