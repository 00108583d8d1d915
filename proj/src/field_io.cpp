#include "apstag/field_io.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <system_error>

#include "apstag/errors.hpp"

namespace apstag {

std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    std::random_device rd;
    fs::path tmp = path;
    tmp += ".tmp" + std::to_string(rd());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            fs::remove(tmp, ec);
            throw IoError("write failed for " + tmp.string());
        }
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignore;
        fs::remove(tmp, ignore);
        throw IoError("cannot rename onto " + path.string() + ": " + ec.message());
    }
}

std::string plane_csv(const Plane<double>& p, const GridGeometry<double>& g, PlaneKind kind) {
    if (p.rows() != g.ny || p.cols() != g.nx) throw ShapeMismatch("plane_csv: plane does not match the grid");
    std::string out;
    out.reserve(static_cast<std::size_t>(p.size()) * 48 + 128);
    out += "# plane=";
    out += to_string(kind);
    out += " nx=" + std::to_string(g.nx) + " ny=" + std::to_string(g.ny);
    out += " dx=" + format_number(g.dx()) + " dy=" + format_number(g.dy()) + "\n";
    out += "i,j,x,y,value\n";
    for (Index j = 0; j < g.ny; ++j) {
        for (Index i = 0; i < g.nx; ++i) {
            const auto [x, y] = plane_coords(g, kind, i, j);
            out += std::to_string(i);
            out += ',';
            out += std::to_string(j);
            out += ',';
            out += format_number(x);
            out += ',';
            out += format_number(y);
            out += ',';
            out += format_number(p(j, i));
            out += '\n';
        }
    }
    return out;
}

namespace {

PlaneKind parse_kind(const std::string& s) {
    for (auto k : {PlaneKind::vertex, PlaneKind::center, PlaneKind::hface, PlaneKind::vface}) {
        if (s == to_string(k)) return k;
    }
    throw ConfigError("plane csv: unknown plane kind '" + s + "'");
}

template <typename T>
T parse_value(std::string_view s, const char* what) {
    T v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw ConfigError(std::string("plane csv: bad ") + what + " '" + std::string(s) + "'");
    }
    return v;
}

}  // namespace

PlaneCsv parse_plane_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line.rfind("# plane=", 0) != 0) throw ConfigError("plane csv: missing header");
    PlaneCsv out;
    std::istringstream hs(line.substr(2));
    std::string tok;
    while (hs >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw ConfigError("plane csv: bad header token '" + tok + "'");
        const std::string key = tok.substr(0, eq);
        const std::string_view val = std::string_view(tok).substr(eq + 1);
        if (key == "plane") out.kind = parse_kind(std::string(val));
        else if (key == "nx") out.nx = parse_value<Index>(val, "nx");
        else if (key == "ny") out.ny = parse_value<Index>(val, "ny");
        else if (key == "dx") out.dx = parse_value<double>(val, "dx");
        else if (key == "dy") out.dy = parse_value<double>(val, "dy");
    }
    if (out.nx < 1 || out.ny < 1) throw ConfigError("plane csv: header lacks nx/ny");
    if (!std::getline(in, line) || line != "i,j,x,y,value") throw ConfigError("plane csv: missing column line");
    out.values = Plane<double>::Constant(out.ny, out.nx, std::numeric_limits<double>::quiet_NaN());
    Index count = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::string_view rest(line);
        std::string_view cols[5];
        for (int c = 0; c < 5; ++c) {
            const auto comma = rest.find(',');
            if ((comma == std::string_view::npos) != (c == 4)) throw ConfigError("plane csv: bad row '" + line + "'");
            cols[c] = rest.substr(0, comma);
            if (c < 4) rest.remove_prefix(comma + 1);
        }
        const auto i = parse_value<Index>(cols[0], "i");
        const auto j = parse_value<Index>(cols[1], "j");
        if (i < 0 || i >= out.nx || j < 0 || j >= out.ny) throw ConfigError("plane csv: index out of range");
        out.values(j, i) = parse_value<double>(cols[4], "value");
        ++count;
    }
    if (count != out.nx * out.ny) throw ConfigError("plane csv: expected " + std::to_string(out.nx * out.ny) + " rows");
    return out;
}

void write_field(const std::filesystem::path& dir, const std::string& stem, const RField<double>& f,
                 const GridGeometry<double>& g) {
    require_conforms(f, g, "write_field");
    write_atomic(dir / (stem + "_vertex.csv"), plane_csv(f.vertex, g, PlaneKind::vertex));
    write_atomic(dir / (stem + "_center.csv"), plane_csv(f.center, g, PlaneKind::center));
}

void write_field(const std::filesystem::path& dir, const std::string& stem, const JField<double>& f,
                 const GridGeometry<double>& g) {
    require_conforms(f, g, "write_field");
    write_atomic(dir / (stem + "_hface.csv"), plane_csv(f.hface, g, PlaneKind::hface));
    write_atomic(dir / (stem + "_vface.csv"), plane_csv(f.vface, g, PlaneKind::vface));
}

}  // namespace apstag
