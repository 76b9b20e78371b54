#pragma once

#include "mcss/geometry.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace mcss {

/// One point of a labeled scan: position, unit normal, integer class label.
struct CloudPoint {
    Vec3 position;
    Vec3 normal;
    int label = 0;
};

// ASCII OBJ, v/f lines only. Faces with >3 vertices are fan-triangulated.
TriangleMesh read_obj(const std::filesystem::path& path);
void write_obj(const std::filesystem::path& path, const TriangleMesh& mesh);

// ASCII PLY with x y z nx ny nz [label] vertex properties.
std::vector<CloudPoint> read_ply(const std::filesystem::path& path);
void write_ply(const std::filesystem::path& path, const std::vector<CloudPoint>& points);

// PGM/PPM (binary variants P5/P6).
struct Image8 {
    int width = 0, height = 0;
    std::vector<uint8_t> pixels;
};
struct Image16 {
    int width = 0, height = 0;
    std::vector<uint16_t> pixels;  // big-endian on disk, host order in memory
};

Image8 read_pgm8(const std::filesystem::path& path);
void write_pgm8(const std::filesystem::path& path, const Image8& img);
Image16 read_pgm16(const std::filesystem::path& path);
void write_pgm16(const std::filesystem::path& path, const Image16& img);
void write_ppm(const std::filesystem::path& path, int width, int height,
               const std::vector<std::array<uint8_t, 3>>& rgb);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace mcss
