#pragma once

// Synthetic hand radiographs with analytically known silhouette and joints.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "artss/core_model.hpp"
#include "artss/maskgen.hpp"
#include "artss/rng.hpp"

namespace artss::testing {

struct PhantomSpec {
  int width = 256;
  int height = 256;
  double rotation_deg = 0.0;  // counter-clockwise on screen, upright hand = 0
  double scale = 1.0;
  double offset_x = 0.0;  // fractions of the frame
  double offset_y = 0.0;
  std::array<double, 4> finger_length{0.25, 0.30, 0.28, 0.22};
  double finger_radius = 0.035;
  double spread_deg = 6.0;
  double foreground = 0.75;
  double background = 0.08;
  double noise = 0.03;
  bool mirror = false;  // right hand
  std::uint64_t noise_seed = 1;
};

struct Phantom {
  ImageRecord image;
  BinaryMask truth;
  std::vector<JointDetection> joints;
  double orientation_deg = 90.0;  // principal axis of the rendered hand
};

PhantomSpec random_phantom_spec(Rng& rng, int width = 256, int height = 256);
Phantom render_phantom(const PhantomSpec& spec, const std::string& id);

}  // namespace artss::testing
