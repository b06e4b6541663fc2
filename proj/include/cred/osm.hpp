#pragma once

#include <filesystem>
#include <istream>
#include <string>

#include "cred/env.hpp"

namespace cred {

struct OsmOptions {
  double center_lat = 0.0;
  double center_lon = 0.0;
  double radius_m = 500.0;
  // Output units, chosen so typical city blocks land near the training
  // graph's feature ranges.
  double distance_unit_m = 100.0;
  double time_unit_s = 30.0;
  double elevation_unit_m = 5.0;
};

/// Street graph from an OSM XML extract: highway ways clipped to the radius,
/// contracted to intersections and dead ends. Edge time uses a nominal speed
/// per highway class; elevation comes from "ele" node tags (0 when absent).
/// Start is the node nearest the center, goal the reachable node farthest
/// from it by path length.
StreetGraph osm_to_graph(std::istream& xml, const OsmOptions& opts);
StreetGraph osm_to_graph(const std::filesystem::path& xml, const OsmOptions& opts);

/// Great-circle distance in meters.
double haversine_m(double lat1, double lon1, double lat2, double lon2);

/// Nominal speed (m/s) for an OSM highway class; 0 for non-routable classes.
double highway_speed_mps(const std::string& highway);

/// Parses "lat,lon".
std::pair<double, double> parse_lat_lon(const std::string& text);

}  // namespace cred
