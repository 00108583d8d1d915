#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "apstag/grid.hpp"

namespace apstag {

/// Shortest decimal that parses back to the same double.
std::string format_number(double v);

/// Writes `content` to a temporary sibling and renames it over `path`.
/// Throws IoError on failure; the destination is never left truncated.
void write_atomic(const std::filesystem::path& path, std::string_view content);

/// `# plane=<kind> nx= ny= dx= dy=` header, then `i,j,x,y,value` rows.
std::string plane_csv(const Plane<double>& p, const GridGeometry<double>& g, PlaneKind kind);

struct PlaneCsv {
    PlaneKind kind = PlaneKind::vertex;
    Index nx = 0;
    Index ny = 0;
    double dx = 0;
    double dy = 0;
    Plane<double> values;
};

PlaneCsv parse_plane_csv(std::string_view text);

/// Writes <stem>_vertex.csv and <stem>_center.csv into `dir`.
void write_field(const std::filesystem::path& dir, const std::string& stem, const RField<double>& f,
                 const GridGeometry<double>& g);
void write_field(const std::filesystem::path& dir, const std::string& stem, const JField<double>& f,
                 const GridGeometry<double>& g);

}  // namespace apstag
