#include "trus/cloud_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "trus/num_format.hpp"

namespace trus {

namespace {

[[noreturn]] void io_fail(const std::string& path, const std::string& what) {
    throw std::runtime_error(path + ": " + what);
}

void write_text(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) io_fail(path, "cannot open for writing");
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out) io_fail(path, "write failed");
}

}  // namespace

void write_ply(const PointCloud& pc, const std::string& path) {
    if (pc.empty()) io_fail(path, "refusing to write an empty cloud");
    std::string body;
    body.reserve(64 + pc.size() * 48);
    body += "ply\nformat ascii 1.0\ncomment units mm\nelement vertex ";
    body += std::to_string(pc.size());
    body += "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
    for (const Vec3& p : pc.points) {
        append_double(body, p.x);
        body += ' ';
        append_double(body, p.y);
        body += ' ';
        append_double(body, p.z);
        body += '\n';
    }
    write_text(path, body);
}

PointCloud read_ply(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) io_fail(path, "cannot open");
    std::string line;
    if (!std::getline(in, line) || line.rfind("ply", 0) != 0) io_fail(path, "not a PLY file");
    std::size_t n_vertices = 0;
    bool ascii = false;
    int coord_props = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "format") {
            std::string fmt;
            ls >> fmt;
            ascii = (fmt == "ascii");
        } else if (tok == "element") {
            std::string name;
            ls >> name >> n_vertices;
            if (name != "vertex") io_fail(path, "unsupported element '" + name + "'");
        } else if (tok == "property") {
            std::string type, name;
            ls >> type >> name;
            if (name == "x" || name == "y" || name == "z") {
                ++coord_props;
            } else {
                io_fail(path, "unsupported vertex property '" + name + "'");
            }
        } else if (tok == "end_header") {
            break;
        } else if (tok != "comment" && tok != "obj_info") {
            io_fail(path, "unexpected header line '" + line + "'");
        }
    }
    if (!ascii) io_fail(path, "only ascii PLY is supported");
    if (coord_props != 3) io_fail(path, "vertex must have exactly x y z properties");
    PointCloud pc;
    pc.points.resize(n_vertices);
    for (std::size_t i = 0; i < n_vertices; ++i) {
        if (!(in >> pc.points[i].x >> pc.points[i].y >> pc.points[i].z)) {
            io_fail(path, "truncated vertex data at index " + std::to_string(i));
        }
    }
    return pc;
}

void write_xyz(const PointCloud& pc, const std::string& path) {
    if (pc.empty()) io_fail(path, "refusing to write an empty cloud");
    std::string body;
    body.reserve(pc.size() * 48);
    for (const Vec3& p : pc.points) {
        append_double(body, p.x);
        body += ' ';
        append_double(body, p.y);
        body += ' ';
        append_double(body, p.z);
        body += '\n';
    }
    write_text(path, body);
}

PointCloud read_xyz(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) io_fail(path, "cannot open");
    PointCloud pc;
    Vec3 p;
    while (in >> p.x >> p.y >> p.z) pc.points.push_back(p);
    if (!in.eof() && in.fail()) io_fail(path, "malformed xyz data");
    return pc;
}

void write_cloud(const PointCloud& pc, const std::string& path, CloudFormat format) {
    if (format == CloudFormat::PLY) {
        write_ply(pc, path);
    } else {
        write_xyz(pc, path);
    }
}

PointCloud read_cloud(const std::string& path) {
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".ply") return read_ply(path);
    return read_xyz(path);
}

std::string transform_to_json_array(const RigidTransform& t) {
    std::string s = "[";
    const auto& m = t.row_major();
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (i) s += ", ";
        append_double(s, m[i]);
    }
    s += "]";
    return s;
}

}  // namespace trus
