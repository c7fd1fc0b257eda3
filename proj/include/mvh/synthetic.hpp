#pragma once

#include "mvh/image.hpp"
#include "mvh/trials.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace mvh {

/// Cue-conflict toy task: the label lives in a low-frequency "shape" pattern,
/// a conflicting class's "texture" pattern sits at high frequencies.
struct SyntheticConfig {
    std::size_t size = 64;
    std::size_t classes = 4;
    std::size_t components = 6;  // cosines per class pattern
    double shape_radius_lo = 2.0;
    double shape_radius_hi = 9.0;
    double texture_radius_lo = 21.0;
    double texture_radius_hi = 25.0;
    double shape_amplitude = 0.12;
    double texture_amplitude = 0.12;
    double conflict_texture_amplitude = 0.18;
    bool shift_conflict_texture = false;  // random circular shift of the conflict texture
    double noise = 0.01;
    std::size_t scorer_images_per_class = 40;
    std::vector<std::string> conditions{"weak", "strong"};
    std::vector<double> condition_shape_gain{0.5, 1.0};
    std::size_t stimuli_per_condition = 48;
    std::size_t observers = 4;
    double distractor_strength = 0.4;  // relative to shape_amplitude
    double observer_bias = 0.1;
    double observer_noise = 0.1;
    std::uint64_t seed = 1;
};

struct SyntheticTask {
    std::vector<std::string> classes;
    std::vector<Image> scorer_images;  // cue-consistent
    std::vector<std::size_t> scorer_labels;
    std::vector<TrialRecord> trials;     // human responses to the conflict stimuli
    std::map<std::string, Image> images;  // conflict stimuli by stimulus id
};

SyntheticTask make_synthetic_task(const SyntheticConfig& config = {});

}  // namespace mvh
