#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "antiuav/fotu.hpp"
#include "antiuav/isp.hpp"

// Labelled synthetic objects for the toy classifier: rotorcraft vs bird-like
// silhouettes for grayscale patches, straight vs erratic paths for trajectories.
namespace antiuav::fixtures {

enum class ObjectClass : int { Uav = 0, NonUav = 1 };

struct LabeledInput {
  ClassifierInput input;
  int label = 0;
};

struct RenderedScene {
  GrayFrame frame;
  Box bbox;  // covers the object including its motion smear
};

// A 64x64 gray scene with one dark object on a bright noisy sky. The object is
// smeared over `blur_px` pixels along a random direction.
RenderedScene render_object_scene(ObjectClass cls, std::mt19937_64& rng, double blur_px = 0.0);

ClassifierInput make_patch_sample(ObjectClass cls, std::mt19937_64& rng, double blur_px = 0.0);

// Path sampled at the trajectory-memory cadence (every step exceeds 4 px).
Trajectory make_trajectory_sample(ObjectClass cls, std::mt19937_64& rng);

// Balanced mix of patches (with mild blur) and trajectory rasters.
std::vector<LabeledInput> make_dataset(std::size_t count, std::uint64_t seed);

// Gray frames integrate motion over this exposure, so blur = speed * exposure.
inline constexpr double kExposureSeconds = 0.2;

struct FastObjectFixture {
  int label = 0;
  double speed = 0.0;
  ClassifierInput blurred_patch;
  ClassifierInput trajectory;
};

std::vector<FastObjectFixture> make_fast_object_fixtures(std::size_t count, double speed, std::uint64_t seed);

}  // namespace antiuav::fixtures
