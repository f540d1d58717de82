#pragma once

// Fixed-length joint-crop sequences with a validity mask. Patients with
// missing joints get zero crops (mask 0) in the missing positions, so every
// (class, side) pair keeps the same slot across patients.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "artss/core_model.hpp"
#include "artss/imgproc.hpp"

namespace artss {

inline constexpr int kDefaultCropSize = 64;

struct JointSequence {
  std::string image_id;
  int crop_width = kDefaultCropSize;
  int crop_height = kDefaultCropSize;
  std::vector<double> crops;  // slots x crop_height x crop_width, row-major
  std::vector<std::uint8_t> validity_mask;

  std::size_t slots() const { return validity_mask.size(); }
  std::size_t crop_size() const {
    return static_cast<std::size_t>(crop_width) * static_cast<std::size_t>(crop_height);
  }
  std::span<const double> crop(std::size_t slot) const {
    return {crops.data() + slot * crop_size(), crop_size()};
  }
  std::size_t valid_count() const;

  bool operator==(const JointSequence&) const = default;
};

// Largest per-patient detection count. Throws a protocol error on an empty
// dataset.
int max_sequence_length(std::span<const std::vector<JointDetection>> patients);

// Slot count needed for the positional layout: at least max_sequence_length
// and enough to hold the highest canonical slot that occurs.
int positional_sequence_length(std::span<const std::vector<JointDetection>> patients);

// Bilinear crop of a normalized box, resampled to crop_w x crop_h.
std::vector<double> extract_crop(const CanonicalImage& img, const BoundingBox& box,
                                 int crop_w, int crop_h);

// All detections are cropped from `img`.
JointSequence build_sequence(const CanonicalImage& img,
                             std::span<const JointDetection> detections,
                             int max_length, int crop_size = kDefaultCropSize);

// Each detection is cropped from frames.at(detection.image_id); used when a
// patient's hands were cropped into separate `<id>_L` / `<id>_R` images.
JointSequence build_sequence(const std::map<std::string, CanonicalImage>& frames,
                             const std::string& patient_id,
                             std::span<const JointDetection> detections,
                             int max_length, int crop_size = kDefaultCropSize);

// Appends masked zero slots.
JointSequence extend_padding(const JointSequence& seq, std::size_t new_length);

enum class PoolMode { kMean, kMax };

// Pools `features` (slots x dim, row-major) over slots whose mask is 1.
// Throws a pooling error when no slot is valid.
std::vector<double> masked_pool(std::span<const double> features,
                                std::span<const std::uint8_t> mask,
                                std::size_t dim, PoolMode mode);

// Pools the crops themselves (feature = flattened crop).
std::vector<double> masked_pool(const JointSequence& seq, PoolMode mode);

// Little-endian container:
//   "ARTSSEQ1"  8 bytes
//   u32 count
//   per sequence:
//     u32 id_len, id bytes (UTF-8)
//     u32 slots, u32 crop_width, u32 crop_height
//     f64 crops[slots * crop_height * crop_width]   (slot, row, column order)
//     u8  mask[slots]
std::string serialize_sequences(std::span<const JointSequence> sequences);
std::vector<JointSequence> deserialize_sequences(std::string_view bytes);

}  // namespace artss
