#pragma once

#include <cstdint>
#include <string>

namespace wsvod {

struct LossWeights {
    double lambda_coord = 0.05;
    double lambda_conf = 1.0;
    double lambda_f_sup = 1.0;
    double lambda_f_semi = 1.0;
    double lambda_v_weak = 0.05;
};

struct PseudoLabelConfig {
    double beta = 0.5;    // pseudo-label confidence threshold
    double beta_l = 0.1;  // lower fallback threshold, beta_l <= beta
    bool use_weak_filtering = false;
    bool use_soft_weights = false;
};

// Keep rates and shape parameters for the adaptive bidirectional EMA.
struct TSMRConfig {
    double alpha_i = 0.99;        // iteration EMA keep rate
    double alpha_e_fixed = 0.95;  // epoch EMA keep rate when not adaptive
    double alpha_e_min = 0.75;
    double alpha_e_max = 0.99;
    double alpha_inv_min = 0.85;
    double tau0 = 180.0;
    double tau1 = 3.0;
    double tau2 = 180.0;
    bool adaptive = false;
};

struct AugmentationSpec {
    double flip_prob = 0.0;        // horizontal flip probability
    double brightness_delta = 0.0; // additive jitter in [-d, d]
    double contrast_delta = 0.0;   // multiplicative jitter in [1-d, 1+d] around 0.5
    double noise_sigma = 0.0;      // additive Gaussian pixel noise

    bool is_identity() const {
        return flip_prob == 0.0 && brightness_delta == 0.0 && contrast_delta == 0.0 &&
               noise_sigma == 0.0;
    }
};

inline AugmentationSpec strong_augmentation() { return {0.5, 0.2, 0.2, 0.02}; }
inline AugmentationSpec reduced_augmentation() { return {}; }

struct TrainingConfig {
    int frames_per_video = 8;  // N_fpv, sub-clip length for weak videos
    int epochs_burn_in = 40;
    int epochs_mutual = 30;
    int batch_size = 8;
    double learning_rate = 0.05;
    double alpha_e_burn_in = 0.85;  // epoch EMA keep rate during burn-in
    uint64_t seed = 1;
    AugmentationSpec strong_aug = strong_augmentation();
    AugmentationSpec reduced_aug = reduced_augmentation();
};

// Toy single-scale grid detector. Two stride-2 convolutions and a stride-2
// 2x2 head map an SxS frame onto an (S/8)x(S/8) prediction grid.
struct DetectorConfig {
    int image_size = 64;
    int conv1_channels = 8;
    int conv2_channels = 24;
    double box_prior = 0.30;   // prior box side, normalized
    double nms_iou = 0.45;
    double eval_conf_floor = 0.001;
    double match_iou = 0.5;

    int grid() const { return image_size / 8; }
};

struct GeneratorConfig {
    int image_size = 64;
    int frames_per_video = 30;
    int num_fully_labeled = 40;
    int num_weak = 200;
    int num_validation = 30;
    int num_test = 50;
    double weak_positive_fraction = 0.5;
    double labeled_positive_fraction = 1.0;
    double eval_positive_fraction = 0.6;

    double target_sigma_min = 3.0;   // px
    double target_sigma_max = 4.2;
    double target_aspect_max = 1.4;  // sigma_x/sigma_y up to this ratio
    double target_peak_min = 0.46;
    double target_peak_max = 0.85;
    double visibility_min = 0.75;     // fraction of frames the target is present

    int distractors_min = 2;
    int distractors_max = 4;
    double distractor_peak_min = 0.30;
    double distractor_peak_max = 0.50;
    double distractor_hard_fraction = 0.25;  // brightness drawn from the target range

    double drift_speed = 1.0;  // px per frame
    double background = 0.12;
    double noise_sigma = 0.05;
    uint64_t seed = 7;
};

}  // namespace wsvod
