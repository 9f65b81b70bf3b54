#include "moransac/image_io.hpp"

#include <cctype>
#include <fstream>
#include <string>

namespace moransac {

namespace {

// Reads one whitespace-delimited token, skipping '#' comments to end of line.
std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

struct PnmHeader {
  std::string magic;
  int width = 0;
  int height = 0;
  int maxval = 0;
};

PnmHeader read_pnm_header(std::istream& in, const std::filesystem::path& file) {
  PnmHeader h;
  h.magic = next_token(in);
  try {
    h.width = std::stoi(next_token(in));
    h.height = std::stoi(next_token(in));
    h.maxval = std::stoi(next_token(in));
  } catch (const std::exception&) {
    throw FormatError("malformed PNM header in " + file.string());
  }
  if (h.width <= 0 || h.height <= 0) {
    throw FormatError("bad PNM dimensions in " + file.string());
  }
  return h;
}

}  // namespace

DepthImage DepthImage::zeros(int width, int height) {
  DepthImage img;
  img.width = width;
  img.height = height;
  img.pixels.assign(static_cast<std::size_t>(width) * height, 0);
  return img;
}

RgbImage RgbImage::zeros(int width, int height) {
  RgbImage img;
  img.width = width;
  img.height = height;
  img.pixels.assign(static_cast<std::size_t>(width) * height, {0, 0, 0});
  return img;
}

LabelImage LabelImage::filled(int width, int height, int value) {
  LabelImage img;
  img.width = width;
  img.height = height;
  img.pixels.assign(static_cast<std::size_t>(width) * height, value);
  return img;
}

DepthImage read_depth_pgm(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw InputError("cannot open depth image " + file.string());
  const PnmHeader h = read_pnm_header(in, file);
  if (h.magic != "P5") throw FormatError("depth image " + file.string() + " is not binary PGM");
  DepthImage img = DepthImage::zeros(h.width, h.height);
  const std::size_t n = img.pixels.size();
  if (h.maxval > 255) {
    std::vector<unsigned char> raw(n * 2);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!in) throw FormatError("truncated PGM data in " + file.string());
    for (std::size_t i = 0; i < n; ++i) {
      img.pixels[i] = static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
    }
  } else {
    std::vector<unsigned char> raw(n);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!in) throw FormatError("truncated PGM data in " + file.string());
    for (std::size_t i = 0; i < n; ++i) img.pixels[i] = raw[i];
  }
  return img;
}

void write_depth_pgm(const std::filesystem::path& file, const DepthImage& img) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw InputError("cannot write depth image " + file.string());
  out << "P5\n" << img.width << " " << img.height << "\n65535\n";
  std::vector<unsigned char> raw(img.pixels.size() * 2);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    raw[2 * i] = static_cast<unsigned char>(img.pixels[i] >> 8);
    raw[2 * i + 1] = static_cast<unsigned char>(img.pixels[i] & 0xff);
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

RgbImage read_rgb_ppm(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw InputError("cannot open rgb image " + file.string());
  const PnmHeader h = read_pnm_header(in, file);
  if (h.magic != "P6") throw FormatError("rgb image " + file.string() + " is not binary PPM");
  if (h.maxval != 255) throw FormatError("rgb image " + file.string() + " must have maxval 255");
  RgbImage img = RgbImage::zeros(h.width, h.height);
  std::vector<unsigned char> raw(img.pixels.size() * 3);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!in) throw FormatError("truncated PPM data in " + file.string());
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    img.pixels[i] = {raw[3 * i], raw[3 * i + 1], raw[3 * i + 2]};
  }
  return img;
}

void write_rgb_ppm(const std::filesystem::path& file, const RgbImage& img) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw InputError("cannot write rgb image " + file.string());
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  std::vector<unsigned char> raw(img.pixels.size() * 3);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    raw[3 * i] = img.pixels[i][0];
    raw[3 * i + 1] = img.pixels[i][1];
    raw[3 * i + 2] = img.pixels[i][2];
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

LabelImage read_label_pgm(const std::filesystem::path& file) {
  const DepthImage raw = read_depth_pgm(file);
  LabelImage img = LabelImage::filled(raw.width, raw.height, -1);
  for (std::size_t i = 0; i < raw.pixels.size(); ++i) {
    img.pixels[i] = static_cast<int>(raw.pixels[i]) - 1;
  }
  return img;
}

void write_label_pgm(const std::filesystem::path& file, const LabelImage& img) {
  DepthImage raw = DepthImage::zeros(img.width, img.height);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    const int v = img.pixels[i];
    if (v < -1 || v > 65534) {
      throw InputError("label " + std::to_string(v) + " does not fit the 16-bit label image");
    }
    raw.pixels[i] = static_cast<std::uint16_t>(v + 1);
  }
  write_depth_pgm(file, raw);
}

}  // namespace moransac
