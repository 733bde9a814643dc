#include "grid.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace biflab {

GridField::GridField(Box b, int nx_, int ny_) : box(b), nx(nx_), ny(ny_) {
  if (nx < 3 || ny < 3) fail(Errc::Validation, "grid resolution must be >= 3");
  if (box.degenerate()) fail(Errc::Validation, "grid box is degenerate");
  values.assign(static_cast<size_t>(nx) * ny, 0.0);
}

double GridField::sum() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

double GridField::max_value() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, v);
  return m;
}

double GridField::mass() const { return sum() * cell_w() * cell_h(); }

namespace {

constexpr char kMagic[8] = {'B', 'I', 'F', 'G', 'R', 'I', 'D', '1'};

template <typename T>
void put(std::ofstream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

}  // namespace

void grid_write(const GridField& g, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(Errc::Io, "cannot open " + path);
  os.write(kMagic, 8);
  put(os, g.box.x0);
  put(os, g.box.x1);
  put(os, g.box.y0);
  put(os, g.box.y1);
  put<std::uint32_t>(os, g.nx);
  put<std::uint32_t>(os, g.ny);
  os.write(reinterpret_cast<const char*>(g.values.data()),
           static_cast<std::streamsize>(g.values.size() * sizeof(double)));
  if (!os) fail(Errc::Io, "write failed: " + path);
  std::ofstream side(path + ".json");
  side << g.meta.dump(2) << "\n";
}

GridField grid_read(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(Errc::Io, "cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0)
    fail(Errc::UnknownArtifactType, "not a BIFGRID1 file: " + path);
  Box b;
  b.x0 = get<double>(is);
  b.x1 = get<double>(is);
  b.y0 = get<double>(is);
  b.y1 = get<double>(is);
  int nx = static_cast<int>(get<std::uint32_t>(is));
  int ny = static_cast<int>(get<std::uint32_t>(is));
  GridField g(b, nx, ny);
  is.read(reinterpret_cast<char*>(g.values.data()),
          static_cast<std::streamsize>(g.values.size() * sizeof(double)));
  if (!is) fail(Errc::UnknownArtifactType, "truncated BIFGRID1 file: " + path);
  std::ifstream side(path + ".json");
  if (side) {
    try {
      side >> g.meta;
    } catch (...) {
      g.meta = nlohmann::json::object();
    }
  }
  return g;
}

// ------------------------------------------------------------------ PNG

namespace {

std::uint32_t crc32_of(const unsigned char* data, size_t len,
                       std::uint32_t seed = 0) {
  return static_cast<std::uint32_t>(
      ::crc32(seed, data, static_cast<uInt>(len)));
}

void put_be32(std::vector<unsigned char>& v, std::uint32_t x) {
  v.push_back((x >> 24) & 0xff);
  v.push_back((x >> 16) & 0xff);
  v.push_back((x >> 8) & 0xff);
  v.push_back(x & 0xff);
}

void chunk(std::ofstream& os, const char type[4],
           const std::vector<unsigned char>& payload) {
  std::vector<unsigned char> buf;
  put_be32(buf, static_cast<std::uint32_t>(payload.size()));
  buf.insert(buf.end(), type, type + 4);
  buf.insert(buf.end(), payload.begin(), payload.end());
  std::uint32_t crc = crc32_of(buf.data() + 4, buf.size() - 4);
  put_be32(buf, crc);
  os.write(reinterpret_cast<const char*>(buf.data()),
           static_cast<std::streamsize>(buf.size()));
}

}  // namespace

void png_write_gray8(const std::string& path, int w, int h,
                     const std::vector<unsigned char>& pixels) {
  if (static_cast<size_t>(w) * h != pixels.size())
    fail(Errc::Validation, "png pixel buffer size mismatch");
  // filter byte 0 per scanline
  std::vector<unsigned char> raw;
  raw.reserve(static_cast<size_t>(h) * (w + 1));
  for (int y = 0; y < h; ++y) {
    raw.push_back(0);
    raw.insert(raw.end(), pixels.begin() + static_cast<size_t>(y) * w,
               pixels.begin() + static_cast<size_t>(y + 1) * w);
  }
  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<unsigned char> z(bound);
  if (compress2(z.data(), &bound, raw.data(), static_cast<uLong>(raw.size()),
                9) != Z_OK)
    fail(Errc::Io, "png deflate failed");
  z.resize(bound);

  std::ofstream os(path, std::ios::binary);
  if (!os) fail(Errc::Io, "cannot open " + path);
  static const unsigned char sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a,
                                       '\n'};
  os.write(reinterpret_cast<const char*>(sig), 8);
  std::vector<unsigned char> ihdr;
  put_be32(ihdr, static_cast<std::uint32_t>(w));
  put_be32(ihdr, static_cast<std::uint32_t>(h));
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(0);  // grayscale
  ihdr.push_back(0);
  ihdr.push_back(0);
  ihdr.push_back(0);
  chunk(os, "IHDR", ihdr);
  chunk(os, "IDAT", z);
  chunk(os, "IEND", {});
  if (!os) fail(Errc::Io, "write failed: " + path);
}

void grid_write_png(const GridField& g, const std::string& path, bool binary) {
  std::vector<unsigned char> px(g.values.size());
  if (binary) {
    for (size_t i = 0; i < g.values.size(); ++i)
      px[i] = g.values[i] > 0.5 ? 255 : 0;
  } else {
    double m = g.max_value();
    double inv = m > 0.0 ? 255.0 / m : 0.0;
    for (size_t i = 0; i < g.values.size(); ++i) {
      double v = std::clamp(g.values[i] * inv, 0.0, 255.0);
      px[i] = static_cast<unsigned char>(v + 0.5);
    }
  }
  // flip so increasing y is up in the image
  std::vector<unsigned char> flipped(px.size());
  for (int y = 0; y < g.ny; ++y)
    std::copy(px.begin() + static_cast<size_t>(y) * g.nx,
              px.begin() + static_cast<size_t>(y + 1) * g.nx,
              flipped.begin() + static_cast<size_t>(g.ny - 1 - y) * g.nx);
  png_write_gray8(path, g.nx, g.ny, flipped);
}

}  // namespace biflab
