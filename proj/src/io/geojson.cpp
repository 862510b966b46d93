#include "agrisuit/io/geojson.hpp"

#include "agrisuit/io/serialize.hpp"

namespace agrisuit::io {

std::vector<practices::Parcel> read_parcels(const std::string& path) {
    json doc = read_json_file(path);
    if (!doc.contains("type") || doc["type"] != "FeatureCollection" ||
        !doc.contains("features")) {
        throw DataError("MalformedGeoJSON",
                        path + " is not a GeoJSON FeatureCollection");
    }

    std::vector<practices::Parcel> parcels;
    std::size_t index = 0;
    for (const auto& feature : doc["features"]) {
        ++index;
        auto where = [&] { return path + " feature " + std::to_string(index); };
        if (!feature.contains("geometry") || !feature.contains("properties")) {
            throw DataError("MalformedGeoJSON", where() + " lacks geometry/properties");
        }
        const auto& geometry = feature["geometry"];
        if (geometry["type"] != "Polygon") {
            throw DataError("MalformedGeoJSON",
                            where() + " has geometry type '" +
                                geometry["type"].get<std::string>() +
                                "', only Polygon is supported");
        }
        const auto& rings = geometry["coordinates"];
        if (rings.empty() || rings[0].size() < 4) {
            throw DataError("DegeneratePolygon", where() + " exterior ring too short");
        }

        practices::Parcel parcel;
        const auto& properties = feature["properties"];
        if (properties.contains("parcel_id")) {
            const auto& id = properties["parcel_id"];
            parcel.parcel_id = id.is_string() ? id.get<std::string>() : id.dump();
        } else {
            parcel.parcel_id = "feature_" + std::to_string(index);
        }
        if (!properties.contains("crop") || !properties.contains("year")) {
            throw DataError("MissingColumn",
                            where() + " lacks the crop/year properties");
        }
        parcel.crop = properties["crop"].get<std::string>();
        parcel.year = properties["year"].is_string()
                          ? std::stoi(properties["year"].get<std::string>())
                          : properties["year"].get<int>();

        const auto& exterior = rings[0];
        std::size_t n = exterior.size();
        // GeoJSON repeats the first vertex at the end
        const auto& first = exterior[0];
        const auto& last = exterior[n - 1];
        bool closed = first[0].get<double>() == last[0].get<double>() &&
                      first[1].get<double>() == last[1].get<double>();
        std::size_t stop = closed ? n - 1 : n;
        for (std::size_t k = 0; k < stop; ++k) {
            parcel.polygon.push_back({exterior[k][0].get<double>(),
                                      exterior[k][1].get<double>()});
        }
        parcels.push_back(std::move(parcel));
    }
    return parcels;
}

} // namespace agrisuit::io
