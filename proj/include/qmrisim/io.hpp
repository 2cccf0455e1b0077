#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "qmrisim/maps.hpp"
#include "qmrisim/volume.hpp"

namespace qmrisim {

/// NIfTI-1 datatype codes this library reads; writes use UInt8 for masks and
/// Float32 otherwise.
enum class NiftiDatatype : short {
  UInt8 = 2,
  Int16 = 4,
  Int32 = 8,
  Float32 = 16,
  Float64 = 64,
  Int8 = 256,
  UInt16 = 512,
  UInt32 = 768,
};

struct VolumeHeader {
  Grid3D grid;
  NiftiDatatype datatype = NiftiDatatype::Float32;
  VolumeKind kind = VolumeKind::Intensity;
};

/// Reads .nii or .nii.gz (detected from content, not the name). The affine
/// comes from the sform when set, else the qform, else pixdim. The volume
/// kind is taken from intent_name when it names one.
Volume readNifti(const std::filesystem::path& path);
VolumeHeader readNiftiHeader(const std::filesystem::path& path);

/// Gzip-compressed when the path ends in ".gz".
void writeNifti(const Volume& v, const std::filesystem::path& path);

/// Map name ("pd", "r1", "r2", "mt", "b1") to file.
using MapFiles = std::map<std::string, std::filesystem::path>;

/// Finds <name>.nii.gz or <name>.nii for each map in a directory. "r2s" and
/// "r2star" are accepted for r2.
MapFiles findMapFiles(const std::filesystem::path& dir);

/// Loads and validates a map set; its id is the content fingerprint.
QMRIMaps readQmriSet(const MapFiles& files);
QMRIMaps readQmriSet(const std::filesystem::path& dir);

void writeQmriSet(const QMRIMaps& maps, const std::filesystem::path& dir);

}  // namespace qmrisim
