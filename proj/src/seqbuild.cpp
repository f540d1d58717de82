#include "artss/seqbuild.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <set>

#include "artss/annot_io.hpp"
#include "artss/error.hpp"
#include "artss/simd/kernels.hpp"

namespace artss {
namespace {

constexpr char kMagic[8] = {'A', 'R', 'T', 'S', 'S', 'E', 'Q', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view take(std::size_t n) {
    if (n > bytes_.size() - pos_) fail(ErrorKind::kParse, "sequence container truncated");
    const auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint32_t u32() {
    const auto b = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[static_cast<std::size_t>(i)])) << (8 * i);
    return v;
  }
  double f64() {
    const auto b = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[static_cast<std::size_t>(i)])) << (8 * i);
    return std::bit_cast<double>(v);
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

using FrameLookup = const CanonicalImage& (*)(const void*, const JointDetection&);

JointSequence build_impl(const std::string& id,
                         std::span<const JointDetection> detections,
                         int max_length, int crop_size, const void* ctx,
                         FrameLookup lookup) {
  if (max_length <= 0) {
    fail(ErrorKind::kProtocol, "sequence length must be >= 1 (got " + std::to_string(max_length) + ")");
  }
  if (crop_size < 1) fail(ErrorKind::kValidation, "crop size must be >= 1");
  if (detections.size() > static_cast<std::size_t>(max_length)) {
    fail(ErrorKind::kProtocol, "'" + id + "' has " + std::to_string(detections.size()) +
                                   " detections but the sequence length is " +
                                   std::to_string(max_length));
  }
  std::map<int, std::size_t> slot_owner;
  std::set<std::string> duplicates;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const auto& d = detections[i];
    const int slot = canonical_slot(d.joint, d.side);
    if (!slot_owner.emplace(slot, i).second) {
      duplicates.insert(std::string(joint_class_name(d.joint)) + "/" + std::string(hand_side_name(d.side)));
    }
  }
  if (!duplicates.empty()) {
    std::string list;
    for (const auto& s : duplicates) list += (list.empty() ? "" : ", ") + s;
    fail(ErrorKind::kAmbiguity, "'" + id + "' has duplicate detections for: " + list);
  }

  JointSequence seq;
  seq.image_id = id;
  seq.crop_width = crop_size;
  seq.crop_height = crop_size;
  seq.validity_mask.assign(static_cast<std::size_t>(max_length), 0);
  seq.crops.assign(static_cast<std::size_t>(max_length) * seq.crop_size(), 0.0);
  for (const auto& [slot, index] : slot_owner) {
    if (slot >= max_length) {
      fail(ErrorKind::kProtocol, "'" + id + "': positional slot " + std::to_string(slot) +
                                     " does not fit a sequence of length " +
                                     std::to_string(max_length));
    }
    const JointDetection& d = detections[index];
    validate(d.box);
    const auto crop = extract_crop(lookup(ctx, d), d.box, crop_size, crop_size);
    std::copy(crop.begin(), crop.end(),
              seq.crops.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(slot) * seq.crop_size()));
    seq.validity_mask[static_cast<std::size_t>(slot)] = 1;
  }
  return seq;
}

}  // namespace

std::size_t JointSequence::valid_count() const {
  return static_cast<std::size_t>(std::count(validity_mask.begin(), validity_mask.end(), std::uint8_t{1}));
}

int max_sequence_length(std::span<const std::vector<JointDetection>> patients) {
  if (patients.empty()) fail(ErrorKind::kProtocol, "dataset has no patients");
  std::size_t best = 0;
  for (const auto& p : patients) best = std::max(best, p.size());
  return static_cast<int>(best);
}

int positional_sequence_length(std::span<const std::vector<JointDetection>> patients) {
  int length = max_sequence_length(patients);
  for (const auto& p : patients) {
    for (const auto& d : p) length = std::max(length, canonical_slot(d.joint, d.side) + 1);
  }
  return length;
}

std::vector<double> extract_crop(const CanonicalImage& img, const BoundingBox& box,
                                 int crop_w, int crop_h) {
  const double bx = box.x0() * img.width;
  const double by = box.y0() * img.height;
  const double step_x = box.w * img.width / crop_w;
  const double step_y = box.h * img.height / crop_h;
  std::vector<double> out(static_cast<std::size_t>(crop_w) * static_cast<std::size_t>(crop_h));
  for (int j = 0; j < crop_h; ++j) {
    const double sy = std::clamp(by + (j + 0.5) * step_y - 0.5, 0.0, img.height - 1.0);
    const int y0 = static_cast<int>(std::floor(sy));
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double ay = sy - y0;
    for (int i = 0; i < crop_w; ++i) {
      const double sx = std::clamp(bx + (i + 0.5) * step_x - 0.5, 0.0, img.width - 1.0);
      const int x0 = static_cast<int>(std::floor(sx));
      const int x1 = std::min(x0 + 1, img.width - 1);
      const double ax = sx - x0;
      const double top = img.at(x0, y0) * (1.0 - ax) + img.at(x1, y0) * ax;
      const double bottom = img.at(x0, y1) * (1.0 - ax) + img.at(x1, y1) * ax;
      out[static_cast<std::size_t>(j) * crop_w + i] = top * (1.0 - ay) + bottom * ay;
    }
  }
  return out;
}

JointSequence build_sequence(const CanonicalImage& img,
                             std::span<const JointDetection> detections,
                             int max_length, int crop_size) {
  const std::string id = detections.empty() ? std::string() : patient_from_stem(detections.front().image_id);
  return build_impl(id, detections, max_length, crop_size, &img,
                    [](const void* ctx, const JointDetection&) -> const CanonicalImage& {
                      return *static_cast<const CanonicalImage*>(ctx);
                    });
}

JointSequence build_sequence(const std::map<std::string, CanonicalImage>& frames,
                             const std::string& patient_id,
                             std::span<const JointDetection> detections,
                             int max_length, int crop_size) {
  for (const auto& d : detections) {
    if (!frames.contains(d.image_id)) {
      fail(ErrorKind::kValidation, "no image for detection frame '" + d.image_id + "'");
    }
  }
  return build_impl(patient_id, detections, max_length, crop_size, &frames,
                    [](const void* ctx, const JointDetection& d) -> const CanonicalImage& {
                      return static_cast<const std::map<std::string, CanonicalImage>*>(ctx)->at(d.image_id);
                    });
}

JointSequence extend_padding(const JointSequence& seq, std::size_t new_length) {
  if (new_length < seq.slots()) {
    fail(ErrorKind::kProtocol, "cannot shrink a sequence by padding");
  }
  JointSequence out = seq;
  out.validity_mask.resize(new_length, 0);
  out.crops.resize(new_length * seq.crop_size(), 0.0);
  return out;
}

std::vector<double> masked_pool(std::span<const double> features,
                                std::span<const std::uint8_t> mask,
                                std::size_t dim, PoolMode mode) {
  if (features.size() != mask.size() * dim) {
    fail(ErrorKind::kValidation, "feature matrix does not match mask length x dim");
  }
  std::vector<double> acc(dim, mode == PoolMode::kMax ? -std::numeric_limits<double>::infinity() : 0.0);
  std::size_t valid = 0;
  for (std::size_t s = 0; s < mask.size(); ++s) {
    if (mask[s] == 0) continue;
    ++valid;
    const auto row = features.subspan(s * dim, dim);
    if (mode == PoolMode::kMean) simd::add_into(row, acc);
    else simd::max_into(row, acc);
  }
  if (valid == 0) fail(ErrorKind::kPooling, "no valid slots to pool");
  if (mode == PoolMode::kMean) {
    const double n = static_cast<double>(valid);
    for (double& v : acc) v /= n;
  }
  return acc;
}

std::vector<double> masked_pool(const JointSequence& seq, PoolMode mode) {
  return masked_pool(seq.crops, seq.validity_mask, seq.crop_size(), mode);
}

std::string serialize_sequences(std::span<const JointSequence> sequences) {
  std::string out(kMagic, sizeof(kMagic));
  put_u32(out, static_cast<std::uint32_t>(sequences.size()));
  for (const auto& s : sequences) {
    if (s.crops.size() != s.slots() * s.crop_size()) {
      fail(ErrorKind::kValidation, "sequence '" + s.image_id + "' has inconsistent crop storage");
    }
    put_u32(out, static_cast<std::uint32_t>(s.image_id.size()));
    out += s.image_id;
    put_u32(out, static_cast<std::uint32_t>(s.slots()));
    put_u32(out, static_cast<std::uint32_t>(s.crop_width));
    put_u32(out, static_cast<std::uint32_t>(s.crop_height));
    for (double v : s.crops) put_f64(out, v);
    for (std::uint8_t m : s.validity_mask) out.push_back(static_cast<char>(m));
  }
  return out;
}

std::vector<JointSequence> deserialize_sequences(std::string_view bytes) {
  Reader r(bytes);
  if (r.take(sizeof(kMagic)) != std::string_view(kMagic, sizeof(kMagic))) {
    fail(ErrorKind::kParse, "not a sequence container (bad magic)");
  }
  const std::uint32_t count = r.u32();
  std::vector<JointSequence> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    JointSequence s;
    const std::uint32_t id_len = r.u32();
    s.image_id = std::string(r.take(id_len));
    const std::uint32_t slots = r.u32();
    const std::uint32_t cw = r.u32();
    const std::uint32_t ch = r.u32();
    if (cw == 0 || ch == 0 || cw > 65536 || ch > 65536) fail(ErrorKind::kParse, "invalid crop dimensions");
    const std::uint64_t values = static_cast<std::uint64_t>(slots) * cw * ch;
    if (values > r.remaining() / 8) fail(ErrorKind::kParse, "sequence container truncated");
    s.crop_width = static_cast<int>(cw);
    s.crop_height = static_cast<int>(ch);
    s.crops.resize(static_cast<std::size_t>(values));
    for (double& v : s.crops) v = r.f64();
    const auto mask = r.take(slots);
    s.validity_mask.assign(mask.begin(), mask.end());
    for (std::uint8_t m : s.validity_mask) {
      if (m > 1) fail(ErrorKind::kParse, "mask byte is not 0 or 1");
    }
    out.push_back(std::move(s));
  }
  if (r.remaining() != 0) fail(ErrorKind::kParse, "trailing bytes after sequence container");
  return out;
}

}  // namespace artss
