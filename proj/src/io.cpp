#include "mcss/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mcss {

namespace {

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream f(path, mode);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    return f;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, mode);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    return f;
}

}  // namespace

TriangleMesh read_obj(const std::filesystem::path& path) {
    auto f = open_in(path);
    TriangleMesh mesh;
    std::string line;
    while (std::getline(f, line)) {
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "v") {
            double x, y, z;
            ss >> x >> y >> z;
            mesh.vertices.emplace_back(x, y, z);
        } else if (tag == "f") {
            std::vector<int> idx;
            std::string tok;
            while (ss >> tok) {
                // accept "i", "i/j", "i/j/k"
                idx.push_back(std::stoi(tok.substr(0, tok.find('/'))) - 1);
            }
            for (size_t i = 2; i < idx.size(); ++i)
                mesh.triangles.push_back({idx[0], idx[i - 1], idx[i]});
        }
    }
    mesh.validate_and_clean();
    return mesh;
}

void write_obj(const std::filesystem::path& path, const TriangleMesh& mesh) {
    auto f = open_out(path);
    f.precision(12);
    for (const Vec3& v : mesh.vertices) f << "v " << v.x() << " " << v.y() << " " << v.z() << "\n";
    for (const auto& t : mesh.triangles)
        f << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
}

std::vector<CloudPoint> read_ply(const std::filesystem::path& path) {
    auto f = open_in(path);
    std::string line;
    std::getline(f, line);
    if (line != "ply") throw std::runtime_error(path.string() + ": not a PLY file");
    size_t count = 0;
    std::vector<std::string> props;
    while (std::getline(f, line)) {
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "format") {
            std::string fmt;
            ss >> fmt;
            if (fmt != "ascii") throw std::runtime_error("only ascii PLY supported");
        } else if (tag == "element") {
            std::string what;
            ss >> what >> count;
            if (what != "vertex") throw std::runtime_error("only vertex elements supported");
        } else if (tag == "property") {
            std::string type, name;
            ss >> type >> name;
            props.push_back(name);
        } else if (tag == "end_header") {
            break;
        }
    }
    auto col = [&](const std::string& name) {
        for (size_t i = 0; i < props.size(); ++i)
            if (props[i] == name) return static_cast<int>(i);
        return -1;
    };
    const int cx = col("x"), cy = col("y"), cz = col("z");
    const int cnx = col("nx"), cny = col("ny"), cnz = col("nz");
    const int clabel = col("label");
    if (cx < 0 || cy < 0 || cz < 0 || cnx < 0 || cny < 0 || cnz < 0)
        throw std::runtime_error("PLY must provide x y z nx ny nz");

    std::vector<CloudPoint> points;
    points.reserve(count);
    std::vector<double> vals(props.size());
    for (size_t i = 0; i < count; ++i) {
        for (double& v : vals)
            if (!(f >> v)) throw std::runtime_error("truncated PLY");
        CloudPoint p;
        p.position = Vec3(vals[cx], vals[cy], vals[cz]);
        p.normal = Vec3(vals[cnx], vals[cny], vals[cnz]);
        p.label = clabel >= 0 ? static_cast<int>(vals[clabel]) : 0;
        points.push_back(p);
    }
    return points;
}

void write_ply(const std::filesystem::path& path, const std::vector<CloudPoint>& points) {
    auto f = open_out(path);
    f.precision(9);
    f << "ply\nformat ascii 1.0\nelement vertex " << points.size() << "\n";
    for (const char* n : {"x", "y", "z", "nx", "ny", "nz"}) f << "property float " << n << "\n";
    f << "property int label\nend_header\n";
    for (const CloudPoint& p : points)
        f << p.position.x() << " " << p.position.y() << " " << p.position.z() << " "
          << p.normal.x() << " " << p.normal.y() << " " << p.normal.z() << " " << p.label << "\n";
}

namespace {

void read_pnm_header(std::istream& f, const std::string& magic, int& w, int& h, int& maxval) {
    std::string tag;
    f >> tag;
    if (tag != magic) throw std::runtime_error("bad PNM magic, expected " + magic);
    auto next_int = [&](int& out) {
        // skip whitespace and '#' comments
        char c;
        while (f.get(c)) {
            if (c == '#') {
                std::string skip;
                std::getline(f, skip);
            } else if (!std::isspace(static_cast<unsigned char>(c))) {
                f.unget();
                break;
            }
        }
        f >> out;
    };
    next_int(w);
    next_int(h);
    next_int(maxval);
    f.get();  // single whitespace before raster
}

}  // namespace

Image8 read_pgm8(const std::filesystem::path& path) {
    auto f = open_in(path, std::ios::binary);
    int w, h, maxval;
    read_pnm_header(f, "P5", w, h, maxval);
    if (maxval != 255) throw std::runtime_error("expected 8-bit PGM");
    Image8 img{w, h, std::vector<uint8_t>(static_cast<size_t>(w) * h)};
    f.read(reinterpret_cast<char*>(img.pixels.data()), img.pixels.size());
    if (!f) throw std::runtime_error("truncated PGM");
    return img;
}

void write_pgm8(const std::filesystem::path& path, const Image8& img) {
    auto f = open_out(path, std::ios::binary);
    f << "P5\n" << img.width << " " << img.height << "\n255\n";
    f.write(reinterpret_cast<const char*>(img.pixels.data()), img.pixels.size());
}

Image16 read_pgm16(const std::filesystem::path& path) {
    auto f = open_in(path, std::ios::binary);
    int w, h, maxval;
    read_pnm_header(f, "P5", w, h, maxval);
    if (maxval != 65535) throw std::runtime_error("expected 16-bit PGM");
    Image16 img{w, h, std::vector<uint16_t>(static_cast<size_t>(w) * h)};
    std::vector<uint8_t> raw(img.pixels.size() * 2);
    f.read(reinterpret_cast<char*>(raw.data()), raw.size());
    if (!f) throw std::runtime_error("truncated PGM");
    for (size_t i = 0; i < img.pixels.size(); ++i)
        img.pixels[i] = static_cast<uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
    return img;
}

void write_pgm16(const std::filesystem::path& path, const Image16& img) {
    auto f = open_out(path, std::ios::binary);
    f << "P5\n" << img.width << " " << img.height << "\n65535\n";
    std::vector<uint8_t> raw(img.pixels.size() * 2);
    for (size_t i = 0; i < img.pixels.size(); ++i) {
        raw[2 * i] = static_cast<uint8_t>(img.pixels[i] >> 8);
        raw[2 * i + 1] = static_cast<uint8_t>(img.pixels[i] & 0xff);
    }
    f.write(reinterpret_cast<const char*>(raw.data()), raw.size());
}

void write_ppm(const std::filesystem::path& path, int width, int height,
               const std::vector<std::array<uint8_t, 3>>& rgb) {
    auto f = open_out(path, std::ios::binary);
    f << "P6\n" << width << " " << height << "\n255\n";
    for (const auto& px : rgb) f.write(reinterpret_cast<const char*>(px.data()), 3);
}

std::string read_text_file(const std::filesystem::path& path) {
    auto f = open_in(path, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    auto f = open_out(path, std::ios::binary);
    f << content;
}

}  // namespace mcss
