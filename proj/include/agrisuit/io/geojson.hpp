#ifndef AGRISUIT_IO_GEOJSON_HPP
#define AGRISUIT_IO_GEOJSON_HPP

#include "agrisuit/practices.hpp"

#include <string>
#include <vector>

namespace agrisuit::io {

// Parcel input: a GeoJSON FeatureCollection of Polygons with properties
// `parcel_id`, `crop`, `year`. Only the exterior ring is used; the
// GeoJSON closing vertex is dropped.
std::vector<practices::Parcel> read_parcels(const std::string& path);

} // namespace agrisuit::io

#endif
