#include "qmrisim/io.hpp"

#include <zlib.h>

#include <Eigen/Geometry>

#include <algorithm>
#include <cstddef>
#include <cstring>
#include <fstream>
#include <memory>
#include <vector>

namespace qmrisim {
namespace {

struct Nifti1Header {
  std::int32_t sizeof_hdr;
  char data_type[10];
  char db_name[18];
  std::int32_t extents;
  std::int16_t session_error;
  char regular;
  char dim_info;
  std::int16_t dim[8];
  float intent_p1;
  float intent_p2;
  float intent_p3;
  std::int16_t intent_code;
  std::int16_t datatype;
  std::int16_t bitpix;
  std::int16_t slice_start;
  float pixdim[8];
  float vox_offset;
  float scl_slope;
  float scl_inter;
  std::int16_t slice_end;
  char slice_code;
  char xyzt_units;
  float cal_max;
  float cal_min;
  float slice_duration;
  float toffset;
  std::int32_t glmax;
  std::int32_t glmin;
  char descrip[80];
  char aux_file[24];
  std::int16_t qform_code;
  std::int16_t sform_code;
  float quatern_b;
  float quatern_c;
  float quatern_d;
  float qoffset_x;
  float qoffset_y;
  float qoffset_z;
  float srow_x[4];
  float srow_y[4];
  float srow_z[4];
  char intent_name[16];
  char magic[4];
};
static_assert(sizeof(Nifti1Header) == 348);
static_assert(offsetof(Nifti1Header, dim) == 40);
static_assert(offsetof(Nifti1Header, pixdim) == 76);
static_assert(offsetof(Nifti1Header, srow_x) == 280);
static_assert(offsetof(Nifti1Header, magic) == 344);

constexpr int kHeaderSize = 348;
constexpr float kVoxOffset = 352.0f;

template <typename T>
void swapBytes(T& value) {
  auto* p = reinterpret_cast<unsigned char*>(&value);
  std::reverse(p, p + sizeof(T));
}

template <typename T, std::size_t N>
void swapBytes(T (&values)[N]) {
  for (auto& v : values) swapBytes(v);
}

void swapHeader(Nifti1Header& h) {
  swapBytes(h.sizeof_hdr);
  swapBytes(h.extents);
  swapBytes(h.session_error);
  swapBytes(h.dim);
  swapBytes(h.intent_p1);
  swapBytes(h.intent_p2);
  swapBytes(h.intent_p3);
  swapBytes(h.intent_code);
  swapBytes(h.datatype);
  swapBytes(h.bitpix);
  swapBytes(h.slice_start);
  swapBytes(h.pixdim);
  swapBytes(h.vox_offset);
  swapBytes(h.scl_slope);
  swapBytes(h.scl_inter);
  swapBytes(h.slice_end);
  swapBytes(h.cal_max);
  swapBytes(h.cal_min);
  swapBytes(h.slice_duration);
  swapBytes(h.toffset);
  swapBytes(h.glmax);
  swapBytes(h.glmin);
  swapBytes(h.qform_code);
  swapBytes(h.sform_code);
  swapBytes(h.quatern_b);
  swapBytes(h.quatern_c);
  swapBytes(h.quatern_d);
  swapBytes(h.qoffset_x);
  swapBytes(h.qoffset_y);
  swapBytes(h.qoffset_z);
  swapBytes(h.srow_x);
  swapBytes(h.srow_y);
  swapBytes(h.srow_z);
}

int bytesPerVoxel(NiftiDatatype t) {
  switch (t) {
    case NiftiDatatype::UInt8:
    case NiftiDatatype::Int8: return 1;
    case NiftiDatatype::Int16:
    case NiftiDatatype::UInt16: return 2;
    case NiftiDatatype::Int32:
    case NiftiDatatype::UInt32:
    case NiftiDatatype::Float32: return 4;
    case NiftiDatatype::Float64: return 8;
  }
  return 0;
}

bool knownDatatype(std::int16_t code) {
  switch (NiftiDatatype(code)) {
    case NiftiDatatype::UInt8:
    case NiftiDatatype::Int16:
    case NiftiDatatype::Int32:
    case NiftiDatatype::Float32:
    case NiftiDatatype::Float64:
    case NiftiDatatype::Int8:
    case NiftiDatatype::UInt16:
    case NiftiDatatype::UInt32: return true;
  }
  return false;
}

struct GzCloser {
  void operator()(gzFile f) const { gzclose(f); }
};
using GzHandle = std::unique_ptr<gzFile_s, GzCloser>;

// gzread passes uncompressed files through unchanged.
GzHandle openForRead(const std::filesystem::path& path) {
  GzHandle f(gzopen(path.c_str(), "rb"));
  if (!f) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  return f;
}

void readExact(gzFile f, void* dst, std::size_t len, const std::filesystem::path& path) {
  auto* out = static_cast<unsigned char*>(dst);
  while (len > 0) {
    const unsigned chunk = unsigned(std::min<std::size_t>(len, 1u << 30));
    const int got = gzread(f, out, chunk);
    if (got <= 0) throw Error(ErrorCode::Malformed, path.string() + " is truncated");
    out += got;
    len -= std::size_t(got);
  }
}

void skipExact(gzFile f, std::size_t len, const std::filesystem::path& path) {
  std::vector<unsigned char> scratch(len);
  readExact(f, scratch.data(), len, path);
}

struct ParsedHeader {
  Nifti1Header raw;
  bool swapped = false;
  VolumeHeader header;
};

Eigen::Matrix4d qformAffine(const Nifti1Header& h, const Eigen::Vector3d& spacing) {
  const double b = h.quatern_b, c = h.quatern_c, d = h.quatern_d;
  const double a = std::sqrt(std::max(0.0, 1.0 - (b * b + c * c + d * d)));
  Eigen::Matrix3d r;
  r << a * a + b * b - c * c - d * d, 2 * (b * c - a * d), 2 * (b * d + a * c),
      2 * (b * c + a * d), a * a + c * c - b * b - d * d, 2 * (c * d - a * b),
      2 * (b * d - a * c), 2 * (c * d + a * b), a * a + d * d - c * c - b * b;
  const double qfac = h.pixdim[0] < 0 ? -1.0 : 1.0;
  Eigen::Matrix4d affine = Eigen::Matrix4d::Identity();
  affine.topLeftCorner<3, 3>() = r * Eigen::Vector3d(spacing.x(), spacing.y(), spacing.z() * qfac).asDiagonal();
  affine.col(3).head<3>() << h.qoffset_x, h.qoffset_y, h.qoffset_z;
  return affine;
}

ParsedHeader parseHeader(gzFile f, const std::filesystem::path& path) {
  ParsedHeader p;
  readExact(f, &p.raw, kHeaderSize, path);
  Nifti1Header& h = p.raw;
  if (h.sizeof_hdr != kHeaderSize) {
    swapHeader(h);
    p.swapped = true;
    if (h.sizeof_hdr != kHeaderSize) throw Error(ErrorCode::Malformed, path.string() + " is not a NIfTI-1 file");
  }
  if (std::memcmp(h.magic, "n+1", 4) != 0) {
    throw Error(ErrorCode::Malformed, path.string() + ": only single-file NIfTI-1 (n+1) is supported");
  }
  const int ndim = h.dim[0];
  if (ndim < 1 || ndim > 7) throw Error(ErrorCode::Malformed, path.string() + ": bad dim[0]");
  for (int d = 4; d <= ndim; ++d) {
    if (h.dim[d] != 1) {
      throw Error(ErrorCode::UnsupportedDims, path.string() + " has " + std::to_string(ndim) + " dimensions");
    }
  }
  if (!knownDatatype(h.datatype)) {
    throw Error(ErrorCode::UnsupportedDatatype, path.string() + ": datatype " + std::to_string(h.datatype));
  }
  VolumeHeader& out = p.header;
  out.datatype = NiftiDatatype(h.datatype);
  Index3 shape = Index3::Ones();
  Eigen::Vector3d spacing = Eigen::Vector3d::Ones();
  for (int d = 0; d < std::min(ndim, 3); ++d) {
    shape[d] = h.dim[d + 1];
    const double s = std::abs(double(h.pixdim[d + 1]));
    spacing[d] = s > 0.0 ? s : 1.0;
  }
  Eigen::Matrix4d affine = Eigen::Matrix4d::Identity();
  if (h.sform_code > 0) {
    for (int c = 0; c < 4; ++c) {
      affine(0, c) = h.srow_x[c];
      affine(1, c) = h.srow_y[c];
      affine(2, c) = h.srow_z[c];
    }
  } else if (h.qform_code > 0) {
    affine = qformAffine(h, spacing);
  } else {
    affine.diagonal().head<3>() = spacing;
  }
  out.grid = Grid3D(shape, spacing, affine);
  try {
    out.grid.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::Malformed, path.string() + ": " + e.what());
  }
  const std::string intent(h.intent_name, strnlen(h.intent_name, sizeof h.intent_name));
  out.kind = (intent == "mask" || intent == "map") ? volumeKindFromString(intent) : VolumeKind::Intensity;
  if (h.vox_offset < float(kHeaderSize)) throw Error(ErrorCode::Malformed, path.string() + ": bad vox_offset");
  return p;
}

template <typename T>
void convertVoxels(const unsigned char* src, std::int64_t count, bool swapped, Volume::Data& out) {
  for (std::int64_t n = 0; n < count; ++n) {
    T value;
    std::memcpy(&value, src + n * std::int64_t(sizeof(T)), sizeof(T));
    if (swapped) swapBytes(value);
    out[n] = float(value);
  }
}

Nifti1Header makeHeader(const Volume& v, NiftiDatatype datatype) {
  Nifti1Header h{};
  h.sizeof_hdr = kHeaderSize;
  h.regular = 'r';
  h.dim[0] = 3;
  for (int d = 0; d < 3; ++d) h.dim[d + 1] = std::int16_t(v.shape()[d]);
  for (int d = 4; d < 8; ++d) h.dim[d] = 1;
  h.datatype = std::int16_t(datatype);
  h.bitpix = std::int16_t(8 * bytesPerVoxel(datatype));
  h.pixdim[0] = 1.0f;
  for (int d = 0; d < 3; ++d) h.pixdim[d + 1] = float(v.grid().spacing[d]);
  for (int d = 4; d < 8; ++d) h.pixdim[d] = 1.0f;
  h.vox_offset = kVoxOffset;
  h.scl_slope = 1.0f;
  h.xyzt_units = 2 | 8;  // mm, s

  const Eigen::Matrix4d& a = v.grid().affine;
  h.sform_code = 1;
  for (int c = 0; c < 4; ++c) {
    h.srow_x[c] = float(a(0, c));
    h.srow_y[c] = float(a(1, c));
    h.srow_z[c] = float(a(2, c));
  }
  Eigen::Matrix3d r = a.topLeftCorner<3, 3>() * v.grid().spacing.cwiseInverse().asDiagonal();
  if (r.determinant() < 0) {
    h.pixdim[0] = -1.0f;
    r.col(2) = -r.col(2);
  }
  // The qform can only carry a rotation; leave it unset for sheared affines.
  if ((r.transpose() * r).isIdentity(1e-4)) {
    Eigen::Quaterniond q(r);
    q.normalize();
    if (q.w() < 0) q.coeffs() = -q.coeffs();
    h.qform_code = 1;
    h.quatern_b = float(q.x());
    h.quatern_c = float(q.y());
    h.quatern_d = float(q.z());
    h.qoffset_x = float(a(0, 3));
    h.qoffset_y = float(a(1, 3));
    h.qoffset_z = float(a(2, 3));
  }
  const std::string intent = toString(v.kind());
  std::memcpy(h.intent_name, intent.data(), std::min(intent.size(), sizeof h.intent_name - 1));
  std::memcpy(h.descrip, "qmrisim", 7);
  std::memcpy(h.magic, "n+1", 4);
  return h;
}

bool endsWith(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

VolumeHeader readNiftiHeader(const std::filesystem::path& path) {
  GzHandle f = openForRead(path);
  return parseHeader(f.get(), path).header;
}

Volume readNifti(const std::filesystem::path& path) {
  GzHandle f = openForRead(path);
  const ParsedHeader p = parseHeader(f.get(), path);
  skipExact(f.get(), std::size_t(p.raw.vox_offset) - kHeaderSize, path);
  const std::int64_t count = p.header.grid.voxelCount();
  const int width = bytesPerVoxel(p.header.datatype);
  std::vector<unsigned char> bytes(std::size_t(count * width));
  readExact(f.get(), bytes.data(), bytes.size(), path);

  Volume::Data data(count);
  switch (p.header.datatype) {
    case NiftiDatatype::UInt8: convertVoxels<std::uint8_t>(bytes.data(), count, p.swapped, data); break;
    case NiftiDatatype::Int8: convertVoxels<std::int8_t>(bytes.data(), count, p.swapped, data); break;
    case NiftiDatatype::Int16: convertVoxels<std::int16_t>(bytes.data(), count, p.swapped, data); break;
    case NiftiDatatype::UInt16: convertVoxels<std::uint16_t>(bytes.data(), count, p.swapped, data); break;
    case NiftiDatatype::Int32: convertVoxels<std::int32_t>(bytes.data(), count, p.swapped, data); break;
    case NiftiDatatype::UInt32: convertVoxels<std::uint32_t>(bytes.data(), count, p.swapped, data); break;
    case NiftiDatatype::Float32: convertVoxels<float>(bytes.data(), count, p.swapped, data); break;
    case NiftiDatatype::Float64: convertVoxels<double>(bytes.data(), count, p.swapped, data); break;
  }
  const float slope = p.raw.scl_slope, inter = p.raw.scl_inter;
  if (slope != 0.0f && std::isfinite(slope) && (slope != 1.0f || inter != 0.0f)) {
    data = data * slope + inter;
  }
  return Volume(p.header.grid, std::move(data), p.header.kind);
}

void writeNifti(const Volume& v, const std::filesystem::path& path) {
  const NiftiDatatype datatype = v.kind() == VolumeKind::Mask ? NiftiDatatype::UInt8 : NiftiDatatype::Float32;
  for (int d = 0; d < 3; ++d) {
    if (v.shape()[d] > 32767) throw Error(ErrorCode::InvalidArgument, "NIfTI-1 dimensions are limited to 32767");
  }
  const Nifti1Header h = makeHeader(v, datatype);
  std::vector<unsigned char> buffer(std::size_t(kVoxOffset), 0);
  std::memcpy(buffer.data(), &h, kHeaderSize);
  const std::size_t header = buffer.size();
  if (datatype == NiftiDatatype::UInt8) {
    buffer.resize(header + std::size_t(v.size()));
    for (std::int64_t n = 0; n < v.size(); ++n) buffer[header + std::size_t(n)] = std::uint8_t(v[n]);
  } else {
    buffer.resize(header + std::size_t(v.size()) * sizeof(float));
    std::memcpy(buffer.data() + header, v.data().data(), std::size_t(v.size()) * sizeof(float));
  }

  if (endsWith(path.string(), ".gz")) {
    GzHandle f(gzopen(path.c_str(), "wb6"));
    if (!f) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    std::size_t done = 0;
    while (done < buffer.size()) {
      const unsigned chunk = unsigned(std::min<std::size_t>(buffer.size() - done, 1u << 30));
      if (gzwrite(f.get(), buffer.data() + done, chunk) != int(chunk)) {
        throw Error(ErrorCode::IoFailure, "failed writing " + path.string());
      }
      done += chunk;
    }
    if (gzclose(f.release()) != Z_OK) throw Error(ErrorCode::IoFailure, "failed closing " + path.string());
  } else {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(buffer.data()), std::streamsize(buffer.size()));
    if (!out) throw Error(ErrorCode::IoFailure, "failed writing " + path.string());
  }
}

MapFiles findMapFiles(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::IoFailure, dir.string() + " is not a directory");
  }
  const std::map<std::string, std::vector<std::string>> aliases = {
      {"pd", {"pd"}}, {"r1", {"r1"}}, {"r2", {"r2", "r2s", "r2star"}}, {"mt", {"mt"}}, {"b1", {"b1"}}};
  MapFiles files;
  for (const auto& [name, stems] : aliases) {
    for (const std::string& stem : stems) {
      for (const char* ext : {".nii.gz", ".nii"}) {
        const auto candidate = dir / (stem + ext);
        if (!files.contains(name) && std::filesystem::exists(candidate)) files[name] = candidate;
      }
    }
  }
  return files;
}

QMRIMaps readQmriSet(const MapFiles& files) {
  for (const char* required : {"pd", "r1", "r2"}) {
    if (!files.contains(required)) {
      throw Error(ErrorCode::MissingMap, std::string("required map '") + required + "' not found");
    }
  }
  for (const auto& [name, path] : files) {
    if (name != "pd" && name != "r1" && name != "r2" && name != "mt" && name != "b1") {
      throw Error(ErrorCode::InvalidArgument, "unknown map name '" + name + "'");
    }
  }
  auto load = [&](const char* name) {
    const Volume v = readNifti(files.at(name));
    return Volume(v.grid(), v.data(), VolumeKind::Map);
  };
  QMRIMaps maps;
  maps.pd = load("pd");
  maps.r1 = load("r1");
  maps.r2 = load("r2");
  if (files.contains("mt")) maps.mt = load("mt");
  if (files.contains("b1")) maps.b1 = load("b1");
  validateMaps(maps);
  maps.id = fingerprint(maps);
  return maps;
}

QMRIMaps readQmriSet(const std::filesystem::path& dir) { return readQmriSet(findMapFiles(dir)); }

void writeQmriSet(const QMRIMaps& maps, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  writeNifti(maps.pd, dir / "pd.nii.gz");
  writeNifti(maps.r1, dir / "r1.nii.gz");
  writeNifti(maps.r2, dir / "r2.nii.gz");
  if (maps.mt) writeNifti(*maps.mt, dir / "mt.nii.gz");
  if (maps.b1) writeNifti(*maps.b1, dir / "b1.nii.gz");
}

}  // namespace qmrisim
