#include "moransac/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

namespace moransac {

static_assert(std::endian::native == std::endian::little,
              "model files are little-endian; big-endian hosts are unsupported");

namespace {

constexpr char kMagic[4] = {'M', 'O', 'R', 'N'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t get_u32(std::istream& in, const std::filesystem::path& file) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  if (!in) throw FormatError("truncated model file " + file.string());
  return v;
}

void put_f32_block(std::ostream& out, const double* data, std::size_t n) {
  std::vector<float> buf(n);
  for (std::size_t i = 0; i < n; ++i) buf[i] = static_cast<float>(data[i]);
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(n * sizeof(float)));
}

void get_f32_block(std::istream& in, double* data, std::size_t n,
                   const std::filesystem::path& file) {
  std::vector<float> buf(n);
  in.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(n * sizeof(float)));
  if (!in) throw FormatError("truncated model file " + file.string());
  for (std::size_t i = 0; i < n; ++i) data[i] = buf[i];
}

}  // namespace

void save_model(const std::filesystem::path& file, const ModelFile& model) {
  if (!model.net.initialized()) throw InputError("refusing to save an uninitialized net");
  std::ofstream out(file, std::ios::binary);
  if (!out) throw InputError("cannot write model file " + file.string());
  out.write(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, model.epochs_trained);
  const auto& linears = model.net.linears();
  put_u32(out, static_cast<std::uint32_t>(linears.size()));
  for (const LinearLayer& l : linears) {
    put_u32(out, static_cast<std::uint32_t>(l.weight.cols()));
    put_u32(out, static_cast<std::uint32_t>(l.weight.rows()));
  }
  put_u32(out, 3);  // batch-norm width
  for (const LinearLayer& l : linears) {
    // Row-major weight blob.
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w = l.weight;
    put_f32_block(out, w.data(), static_cast<std::size_t>(w.size()));
    put_f32_block(out, l.bias.data(), static_cast<std::size_t>(l.bias.size()));
  }
  put_f32_block(out, model.net.gamma().data(), 3);
  put_f32_block(out, model.net.beta().data(), 3);
  put_f32_block(out, model.net.running_mean().data(), 3);
  put_f32_block(out, model.net.running_var().data(), 3);
  if (!out) throw InputError("failed writing model file " + file.string());
}

ModelFile load_model(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw InputError("cannot open model file " + file.string());
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError("bad magic in model file " + file.string());
  }
  const std::uint32_t version = get_u32(in, file);
  if (version != kVersion) {
    throw FormatError("unsupported model version " + std::to_string(version) +
                      " in " + file.string());
  }
  ModelFile model;
  model.epochs_trained = get_u32(in, file);
  const std::uint32_t n_linear = get_u32(in, file);
  if (n_linear == 0 || n_linear > 64) {
    throw FormatError("implausible layer count in model file " + file.string());
  }
  std::vector<std::pair<std::uint32_t, std::uint32_t>> shapes;
  for (std::uint32_t l = 0; l < n_linear; ++l) {
    const std::uint32_t in_dim = get_u32(in, file);
    const std::uint32_t out_dim = get_u32(in, file);
    if (in_dim == 0 || out_dim == 0 || in_dim > 65536 || out_dim > 65536) {
      throw FormatError("implausible layer shape in model file " + file.string());
    }
    shapes.emplace_back(in_dim, out_dim);
  }
  const std::uint32_t bn_dim = get_u32(in, file);
  if (bn_dim != 3) {
    throw FormatError("unsupported batch-norm width in model file " + file.string());
  }

  auto& linears = model.net.linears();
  for (auto [in_dim, out_dim] : shapes) {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w(out_dim, in_dim);
    get_f32_block(in, w.data(), static_cast<std::size_t>(w.size()), file);
    LinearLayer layer;
    layer.weight = w;
    layer.bias.resize(out_dim);
    get_f32_block(in, layer.bias.data(), out_dim, file);
    linears.push_back(std::move(layer));
  }
  get_f32_block(in, model.net.gamma().data(), 3, file);
  get_f32_block(in, model.net.beta().data(), 3, file);
  get_f32_block(in, model.net.running_mean().data(), 3, file);
  get_f32_block(in, model.net.running_var().data(), 3, file);
  return model;
}

}  // namespace moransac
