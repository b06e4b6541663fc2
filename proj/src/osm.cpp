#include "cred/osm.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <queue>
#include <unordered_map>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "cred/error.hpp"

namespace cred {

namespace pt = boost::property_tree;

double haversine_m(double lat1, double lon1, double lat2, double lon2) {
  constexpr double kEarthRadius = 6371008.8;
  constexpr double kRad = std::numbers::pi / 180.0;
  const double dlat = (lat2 - lat1) * kRad;
  const double dlon = (lon2 - lon1) * kRad;
  const double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(lat1 * kRad) * std::cos(lat2 * kRad) * std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kEarthRadius * std::asin(std::min(1.0, std::sqrt(a)));
}

double highway_speed_mps(const std::string& highway) {
  static const std::map<std::string, double> kph{
      {"motorway", 100}, {"motorway_link", 60}, {"trunk", 80},       {"trunk_link", 50},
      {"primary", 50},   {"primary_link", 40},  {"secondary", 45},   {"secondary_link", 35},
      {"tertiary", 40},  {"tertiary_link", 30}, {"unclassified", 30}, {"residential", 30},
      {"living_street", 10}, {"service", 15},   {"road", 30},        {"track", 15},
      {"pedestrian", 5}, {"footway", 5},        {"path", 5},         {"cycleway", 15},
      {"steps", 2}};
  auto it = kph.find(highway);
  return it == kph.end() ? 0.0 : it->second / 3.6;
}

std::pair<double, double> parse_lat_lon(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw ConfigError("expected 'lat,lon', got '" + text + "'");
  try {
    const double lat = std::stod(text.substr(0, comma));
    const double lon = std::stod(text.substr(comma + 1));
    if (lat < -90 || lat > 90 || lon < -180 || lon > 180) throw std::out_of_range("coordinate");
    return {lat, lon};
  } catch (const std::exception&) {
    throw ConfigError("bad coordinate '" + text + "'");
  }
}

namespace {

struct OsmNode {
  double lat = 0.0;
  double lon = 0.0;
  double ele = 0.0;
  bool inside = false;
};

struct OsmWay {
  std::vector<std::int64_t> refs;
  double speed = 0.0;
};

struct Segment {
  double distance = 0.0;
  double time = 0.0;
  double elevation = 0.0;
};

}  // namespace

StreetGraph osm_to_graph(std::istream& xml, const OsmOptions& opts) {
  if (!(opts.radius_m > 0.0)) throw ConfigError("radius must be positive");
  pt::ptree tree;
  try {
    pt::read_xml(xml, tree);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError(std::string("OSM XML: ") + e.what());
  }
  const auto root = tree.get_child_optional("osm");
  if (!root) throw ParseError("OSM XML: missing <osm> root");

  std::unordered_map<std::int64_t, OsmNode> nodes;
  std::vector<OsmWay> ways;
  try {
    for (const auto& [tag, child] : *root) {
      if (tag == "node") {
        OsmNode n;
        const auto id = child.get<std::int64_t>("<xmlattr>.id");
        n.lat = child.get<double>("<xmlattr>.lat");
        n.lon = child.get<double>("<xmlattr>.lon");
        for (const auto& [t, kv] : child)
          if (t == "tag" && kv.get<std::string>("<xmlattr>.k") == "ele")
            n.ele = kv.get<double>("<xmlattr>.v", 0.0);
        n.inside = haversine_m(opts.center_lat, opts.center_lon, n.lat, n.lon) <= opts.radius_m;
        nodes[id] = n;
      } else if (tag == "way") {
        OsmWay w;
        for (const auto& [t, kv] : child) {
          if (t == "nd") w.refs.push_back(kv.get<std::int64_t>("<xmlattr>.ref"));
          else if (t == "tag" && kv.get<std::string>("<xmlattr>.k") == "highway")
            w.speed = highway_speed_mps(kv.get<std::string>("<xmlattr>.v"));
        }
        if (w.speed > 0.0 && w.refs.size() >= 2) ways.push_back(std::move(w));
      }
    }
  } catch (const pt::ptree_error& e) {
    throw ParseError(std::string("OSM XML: ") + e.what());
  }

  // Clip each way to runs of consecutive in-radius nodes.
  std::vector<OsmWay> runs;
  for (const auto& w : ways) {
    OsmWay run{{}, w.speed};
    auto flush = [&] {
      if (run.refs.size() >= 2) runs.push_back(run);
      run.refs.clear();
    };
    for (std::int64_t ref : w.refs) {
      auto it = nodes.find(ref);
      if (it == nodes.end() || !it->second.inside) {
        flush();
        continue;
      }
      run.refs.push_back(ref);
    }
    flush();
  }

  // Intersections: nodes shared by several runs or run endpoints.
  std::unordered_map<std::int64_t, int> uses;
  for (const auto& r : runs) {
    for (std::int64_t ref : r.refs) ++uses[ref];
    uses[r.refs.front()] += 2;
    uses[r.refs.back()] += 2;
  }
  std::map<std::pair<std::int64_t, std::int64_t>, Segment> segments;
  for (const auto& r : runs) {
    std::int64_t from = r.refs.front();
    Segment seg;
    for (std::size_t i = 1; i < r.refs.size(); ++i) {
      const OsmNode& a = nodes.at(r.refs[i - 1]);
      const OsmNode& b = nodes.at(r.refs[i]);
      const double d = haversine_m(a.lat, a.lon, b.lat, b.lon);
      seg.distance += d;
      seg.time += d / r.speed;
      seg.elevation += b.ele - a.ele;
      const std::int64_t to = r.refs[i];
      if (uses[to] < 2) continue;
      if (to != from) {
        // Undirected key; keep the shortest of parallel segments.
        const bool flip = to < from;
        const auto key = flip ? std::pair{to, from} : std::pair{from, to};
        Segment s = seg;
        if (flip) s.elevation = -s.elevation;
        auto [it, inserted] = segments.emplace(key, s);
        if (!inserted && s.distance < it->second.distance) it->second = s;
      }
      from = to;
      seg = Segment{};
    }
  }
  if (segments.empty()) throw InvariantError("no routable street segments inside the radius");

  // Adjacency over contracted nodes for component and distance queries.
  std::map<std::int64_t, std::vector<std::pair<std::int64_t, double>>> adj;
  for (const auto& [key, s] : segments) {
    adj[key.first].push_back({key.second, s.distance});
    adj[key.second].push_back({key.first, s.distance});
  }
  std::int64_t start = 0;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [id, _] : adj) {
    const OsmNode& n = nodes.at(id);
    const double d = haversine_m(opts.center_lat, opts.center_lon, n.lat, n.lon);
    if (d < best) best = d, start = id;
  }
  std::map<std::int64_t, double> dist;
  using Item = std::pair<double, std::int64_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[start] = 0.0;
  heap.push({0.0, start});
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[u]) continue;
    for (const auto& [v, w] : adj[u]) {
      auto it = dist.find(v);
      if (it == dist.end() || d + w < it->second) {
        dist[v] = d + w;
        heap.push({d + w, v});
      }
    }
  }
  std::int64_t goal = start;
  for (const auto& [id, d] : dist)
    if (d > dist[goal]) goal = id;
  if (goal == start) throw InvariantError("street component around the center has a single node");

  StreetGraph g;
  g.directed = false;
  g.start = start;
  g.goal = goal;
  for (const auto& [id, _] : dist) g.nodes.push_back(id);
  for (const auto& [key, s] : segments) {
    if (!dist.count(key.first)) continue;
    g.edges.push_back(StreetEdge{key.first, key.second, s.distance / opts.distance_unit_m,
                                 s.time / opts.time_unit_s, s.elevation / opts.elevation_unit_m});
  }
  return g;
}

StreetGraph osm_to_graph(const std::filesystem::path& xml, const OsmOptions& opts) {
  std::ifstream in(xml);
  if (!in) throw ConfigError("cannot open " + xml.string());
  return osm_to_graph(in, opts);
}

}  // namespace cred
