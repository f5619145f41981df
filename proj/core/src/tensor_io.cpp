#include "treecrf/tensor_io.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

namespace treecrf {
namespace {

constexpr std::array<char, 7> kMagic = {'F', 'T', 'N', 'S', 'R', '1', '\0'};
constexpr std::size_t kHeaderFixed = 9;

std::size_t dtype_size(DType dtype) {
  switch (dtype) {
    case DType::kFloat32: return 4;
    case DType::kUInt8: return 1;
    case DType::kUInt32: return 4;
  }
  return 0;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::string dims_text(const std::vector<std::uint32_t>& dims) {
  std::ostringstream os;
  for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? "x" : "") << dims[i];
  return os.str();
}

}  // namespace

std::size_t FlatTensor::element_count() const {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

std::vector<std::uint8_t> encode_tensor(const FlatTensor& tensor) {
  if (tensor.dims.empty() || tensor.dims.size() > 4) {
    throw TensorFormatError(TensorFormatError::Kind::kBadRank, "tensor rank must be in 1..4");
  }
  if (tensor.payload.size() != tensor.element_count() * dtype_size(tensor.dtype)) {
    throw ValidationError("tensor payload size does not match its dims");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderFixed + 4 * tensor.dims.size() + tensor.payload.size());
  out.insert(out.end(), kMagic.begin(), kMagic.end());
  out.push_back(static_cast<std::uint8_t>(tensor.dtype));
  out.push_back(static_cast<std::uint8_t>(tensor.dims.size()));
  for (auto d : tensor.dims) put_u32(out, d);
  out.insert(out.end(), tensor.payload.begin(), tensor.payload.end());
  return out;
}

FlatTensor decode_tensor(const std::vector<std::uint8_t>& bytes) {
  using Kind = TensorFormatError::Kind;
  if (bytes.size() < kHeaderFixed || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw TensorFormatError(Kind::kBadMagic, "bad magic: not a flat tensor file");
  }
  FlatTensor t;
  const auto code = bytes[7];
  if (code < 1 || code > 3) {
    throw TensorFormatError(Kind::kBadDType, "unknown dtype code " + std::to_string(code));
  }
  t.dtype = static_cast<DType>(code);
  const std::size_t ndim = bytes[8];
  if (ndim < 1 || ndim > 4) {
    throw TensorFormatError(Kind::kBadRank, "rank " + std::to_string(ndim) + " outside 1..4");
  }
  if (bytes.size() < kHeaderFixed + 4 * ndim) {
    throw TensorFormatError(Kind::kTruncatedPayload, "truncated header: missing dims");
  }
  t.dims.resize(ndim);
  for (std::size_t i = 0; i < ndim; ++i) t.dims[i] = get_u32(bytes.data() + kHeaderFixed + 4 * i);

  // Checked size computation; any overflow of 64-bit byte counts is rejected.
  std::uint64_t count = 1;
  for (auto d : t.dims) {
    if (d != 0 && count > std::numeric_limits<std::uint64_t>::max() / d) {
      throw TensorFormatError(Kind::kDimOverflow, "dims " + dims_text(t.dims) + " overflow");
    }
    count *= d;
  }
  const std::uint64_t elem = dtype_size(t.dtype);
  if (count > std::numeric_limits<std::uint64_t>::max() / elem) {
    throw TensorFormatError(Kind::kDimOverflow, "dims " + dims_text(t.dims) + " overflow");
  }
  const std::uint64_t payload = count * elem;
  const std::uint64_t available = bytes.size() - kHeaderFixed - 4 * ndim;
  if (payload > available) {
    throw TensorFormatError(Kind::kTruncatedPayload,
                            "truncated payload: dims " + dims_text(t.dims) + " need " +
                                std::to_string(payload) + " bytes, file has " + std::to_string(available));
  }
  if (payload < available) {
    throw TensorFormatError(Kind::kTrailingBytes, "payload has " + std::to_string(available - payload) +
                                                      " trailing bytes beyond dims " + dims_text(t.dims));
  }
  t.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(kHeaderFixed + 4 * ndim), bytes.end());
  return t;
}

FlatTensor read_flat_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on " + path.string());
  return decode_tensor(bytes);
}

void write_flat_tensor(const FlatTensor& tensor, const std::filesystem::path& path) {
  const auto bytes = encode_tensor(tensor);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failure on " + path.string());
}

Raster raster_from_tensor(const FlatTensor& tensor) {
  if (tensor.dtype != DType::kFloat32) throw ValidationError("expected a float32 tensor");
  if (tensor.dims.size() != 2 && tensor.dims.size() != 3) {
    throw ValidationError("raster tensors have rank 2 or 3, got " + std::to_string(tensor.dims.size()));
  }
  const int channels = tensor.dims.size() == 3 ? static_cast<int>(tensor.dims[2]) : 1;
  std::vector<float> values(tensor.element_count());
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = std::bit_cast<float>(get_u32(tensor.payload.data() + 4 * i));
  }
  Raster r(static_cast<int>(tensor.dims[0]), static_cast<int>(tensor.dims[1]), channels, std::move(values));
  if (!r.all_finite()) throw ValidationError("raster contains non-finite values");
  return r;
}

FlatTensor tensor_from_raster(const Raster& raster) {
  if (!raster.all_finite()) throw ValidationError("raster contains non-finite values; refusing to write");
  FlatTensor t;
  t.dtype = DType::kFloat32;
  t.dims = {static_cast<std::uint32_t>(raster.height()), static_cast<std::uint32_t>(raster.width()),
            static_cast<std::uint32_t>(raster.channels())};
  t.payload.reserve(raster.values().size() * 4);
  for (float v : raster.values()) put_u32(t.payload, std::bit_cast<std::uint32_t>(v));
  return t;
}

LabelMap labels_from_tensor(const FlatTensor& tensor) {
  if (tensor.dtype != DType::kUInt8 || tensor.dims.size() != 2) {
    throw ValidationError("label maps are rank-2 uint8 tensors");
  }
  return LabelMap(static_cast<int>(tensor.dims[0]), static_cast<int>(tensor.dims[1]), tensor.payload);
}

FlatTensor tensor_from_labels(const LabelMap& labels) {
  FlatTensor t;
  t.dtype = DType::kUInt8;
  t.dims = {static_cast<std::uint32_t>(labels.height()), static_cast<std::uint32_t>(labels.width())};
  t.payload = labels.labels();
  return t;
}

IdMap ids_from_tensor(const FlatTensor& tensor) {
  if (tensor.dtype != DType::kUInt32 || tensor.dims.size() != 2) {
    throw ValidationError("id maps are rank-2 uint32 tensors");
  }
  IdMap m{static_cast<int>(tensor.dims[0]), static_cast<int>(tensor.dims[1]), {}};
  m.ids.resize(tensor.element_count());
  for (std::size_t i = 0; i < m.ids.size(); ++i) m.ids[i] = get_u32(tensor.payload.data() + 4 * i);
  return m;
}

FlatTensor tensor_from_ids(const IdMap& ids) {
  if (ids.ids.size() != static_cast<std::size_t>(ids.height) * ids.width) {
    throw ValidationError("id map size does not match height*width");
  }
  FlatTensor t;
  t.dtype = DType::kUInt32;
  t.dims = {static_cast<std::uint32_t>(ids.height), static_cast<std::uint32_t>(ids.width)};
  t.payload.reserve(ids.ids.size() * 4);
  for (auto v : ids.ids) put_u32(t.payload, v);
  return t;
}

TensorObject read_tensor(const std::filesystem::path& path) {
  const auto t = read_flat_tensor(path);
  switch (t.dtype) {
    case DType::kFloat32: return raster_from_tensor(t);
    case DType::kUInt8: return labels_from_tensor(t);
    case DType::kUInt32: return ids_from_tensor(t);
  }
  throw ValidationError("unsupported dtype");
}

void write_tensor(const TensorObject& object, const std::filesystem::path& path) {
  const FlatTensor t = std::visit(
      [](const auto& o) -> FlatTensor {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, Raster>) return tensor_from_raster(o);
        else if constexpr (std::is_same_v<T, LabelMap>) return tensor_from_labels(o);
        else return tensor_from_ids(o);
      },
      object);
  write_flat_tensor(t, path);
}

Raster read_raster(const std::filesystem::path& path) { return raster_from_tensor(read_flat_tensor(path)); }
LabelMap read_labels(const std::filesystem::path& path) { return labels_from_tensor(read_flat_tensor(path)); }
IdMap read_ids(const std::filesystem::path& path) { return ids_from_tensor(read_flat_tensor(path)); }

std::vector<double> read_matrix(const std::filesystem::path& path, int& size) {
  const auto t = read_flat_tensor(path);
  if (t.dtype != DType::kFloat32 || t.dims.size() != 2 || t.dims[0] != t.dims[1]) {
    throw ValidationError(path.string() + ": expected a square rank-2 float32 tensor");
  }
  size = static_cast<int>(t.dims[0]);
  std::vector<double> m(t.element_count());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::bit_cast<float>(get_u32(t.payload.data() + 4 * i));
  return m;
}

void write_matrix(const std::vector<double>& matrix, int size, const std::filesystem::path& path) {
  if (matrix.size() != static_cast<std::size_t>(size) * size) throw ValidationError("matrix is not size x size");
  FlatTensor t;
  t.dtype = DType::kFloat32;
  t.dims = {static_cast<std::uint32_t>(size), static_cast<std::uint32_t>(size)};
  for (double v : matrix) {
    const auto f = static_cast<float>(v);
    if (!std::isfinite(f)) throw ValidationError("matrix contains non-finite values; refusing to write");
    put_u32(t.payload, std::bit_cast<std::uint32_t>(f));
  }
  write_flat_tensor(t, path);
}

}  // namespace treecrf
