#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "treecrf/errors.hpp"
#include "treecrf/raster.hpp"

namespace treecrf {

// Flat tensor file layout:
//   bytes 0..6  "FTNSR1\0"
//   byte  7     dtype (1 = float32, 2 = uint8, 3 = uint32)
//   byte  8     ndim (1..4)
//   then ndim little-endian uint32 dims, then the row-major little-endian payload.

enum class DType : std::uint8_t { kFloat32 = 1, kUInt8 = 2, kUInt32 = 3 };

/// Decoded file contents before interpretation as a domain type.
struct FlatTensor {
  DType dtype = DType::kFloat32;
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> payload;  // raw little-endian bytes

  std::size_t element_count() const;
};

class TensorFormatError : public IoError {
 public:
  enum class Kind { kBadMagic, kBadDType, kBadRank, kDimOverflow, kTruncatedPayload, kTrailingBytes };

  TensorFormatError(Kind kind, const std::string& what) : IoError(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

std::vector<std::uint8_t> encode_tensor(const FlatTensor& tensor);
FlatTensor decode_tensor(const std::vector<std::uint8_t>& bytes);

FlatTensor read_flat_tensor(const std::filesystem::path& path);
void write_flat_tensor(const FlatTensor& tensor, const std::filesystem::path& path);

/// float32 tensors of rank 3 (H, W, C); rank 2 reads as C = 1.
Raster raster_from_tensor(const FlatTensor& tensor);
FlatTensor tensor_from_raster(const Raster& raster);

/// uint8 tensors of rank 2 (H, W).
LabelMap labels_from_tensor(const FlatTensor& tensor);
FlatTensor tensor_from_labels(const LabelMap& labels);

IdMap ids_from_tensor(const FlatTensor& tensor);
FlatTensor tensor_from_ids(const IdMap& ids);

using TensorObject = std::variant<Raster, LabelMap, IdMap>;

/// Reads any supported tensor, choosing the domain type from the dtype.
TensorObject read_tensor(const std::filesystem::path& path);
void write_tensor(const TensorObject& object, const std::filesystem::path& path);

Raster read_raster(const std::filesystem::path& path);
LabelMap read_labels(const std::filesystem::path& path);
IdMap read_ids(const std::filesystem::path& path);

/// C x C float matrix stored as a rank-2 float32 tensor.
std::vector<double> read_matrix(const std::filesystem::path& path, int& size);
void write_matrix(const std::vector<double>& matrix, int size, const std::filesystem::path& path);

}  // namespace treecrf
