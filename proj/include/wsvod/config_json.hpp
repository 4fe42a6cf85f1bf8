#pragma once

#include <json.hpp>

#include "wsvod/config.hpp"

// JSON overlays: from_json only touches keys present in the document, so a
// partial config file layers over defaults (and CLI flags can layer over
// the file afterwards).
namespace wsvod {

inline void to_json(nlohmann::json& j, const LossWeights& w) {
    j = {{"lambda_coord", w.lambda_coord},
         {"lambda_conf", w.lambda_conf},
         {"lambda_f_sup", w.lambda_f_sup},
         {"lambda_f_semi", w.lambda_f_semi},
         {"lambda_v_weak", w.lambda_v_weak}};
}

inline void from_json(const nlohmann::json& j, LossWeights& w) {
    w.lambda_coord = j.value("lambda_coord", w.lambda_coord);
    w.lambda_conf = j.value("lambda_conf", w.lambda_conf);
    w.lambda_f_sup = j.value("lambda_f_sup", w.lambda_f_sup);
    w.lambda_f_semi = j.value("lambda_f_semi", w.lambda_f_semi);
    w.lambda_v_weak = j.value("lambda_v_weak", w.lambda_v_weak);
}

inline void to_json(nlohmann::json& j, const PseudoLabelConfig& c) {
    j = {{"beta", c.beta},
         {"beta_l", c.beta_l},
         {"use_weak_filtering", c.use_weak_filtering},
         {"use_soft_weights", c.use_soft_weights}};
}

inline void from_json(const nlohmann::json& j, PseudoLabelConfig& c) {
    c.beta = j.value("beta", c.beta);
    c.beta_l = j.value("beta_l", c.beta_l);
    c.use_weak_filtering = j.value("use_weak_filtering", c.use_weak_filtering);
    c.use_soft_weights = j.value("use_soft_weights", c.use_soft_weights);
}

inline void to_json(nlohmann::json& j, const TSMRConfig& c) {
    j = {{"alpha_i", c.alpha_i},
         {"alpha_e_fixed", c.alpha_e_fixed},
         {"alpha_e_min", c.alpha_e_min},
         {"alpha_e_max", c.alpha_e_max},
         {"alpha_inv_min", c.alpha_inv_min},
         {"tau0", c.tau0},
         {"tau1", c.tau1},
         {"tau2", c.tau2},
         {"adaptive", c.adaptive}};
}

inline void from_json(const nlohmann::json& j, TSMRConfig& c) {
    c.alpha_i = j.value("alpha_i", c.alpha_i);
    c.alpha_e_fixed = j.value("alpha_e_fixed", c.alpha_e_fixed);
    c.alpha_e_min = j.value("alpha_e_min", c.alpha_e_min);
    c.alpha_e_max = j.value("alpha_e_max", c.alpha_e_max);
    c.alpha_inv_min = j.value("alpha_inv_min", c.alpha_inv_min);
    c.tau0 = j.value("tau0", c.tau0);
    c.tau1 = j.value("tau1", c.tau1);
    c.tau2 = j.value("tau2", c.tau2);
    c.adaptive = j.value("adaptive", c.adaptive);
}

inline void to_json(nlohmann::json& j, const AugmentationSpec& a) {
    j = {{"flip_prob", a.flip_prob},
         {"brightness_delta", a.brightness_delta},
         {"contrast_delta", a.contrast_delta},
         {"noise_sigma", a.noise_sigma}};
}

inline void from_json(const nlohmann::json& j, AugmentationSpec& a) {
    a.flip_prob = j.value("flip_prob", a.flip_prob);
    a.brightness_delta = j.value("brightness_delta", a.brightness_delta);
    a.contrast_delta = j.value("contrast_delta", a.contrast_delta);
    a.noise_sigma = j.value("noise_sigma", a.noise_sigma);
}

inline void to_json(nlohmann::json& j, const TrainingConfig& t) {
    j = {{"frames_per_video", t.frames_per_video},
         {"epochs_burn_in", t.epochs_burn_in},
         {"epochs_mutual", t.epochs_mutual},
         {"batch_size", t.batch_size},
         {"learning_rate", t.learning_rate},
         {"alpha_e_burn_in", t.alpha_e_burn_in},
         {"seed", t.seed},
         {"strong_aug", t.strong_aug},
         {"reduced_aug", t.reduced_aug}};
}

inline void from_json(const nlohmann::json& j, TrainingConfig& t) {
    t.frames_per_video = j.value("frames_per_video", t.frames_per_video);
    t.epochs_burn_in = j.value("epochs_burn_in", t.epochs_burn_in);
    t.epochs_mutual = j.value("epochs_mutual", t.epochs_mutual);
    t.batch_size = j.value("batch_size", t.batch_size);
    t.learning_rate = j.value("learning_rate", t.learning_rate);
    t.alpha_e_burn_in = j.value("alpha_e_burn_in", t.alpha_e_burn_in);
    t.seed = j.value("seed", t.seed);
    if (j.contains("strong_aug")) j.at("strong_aug").get_to(t.strong_aug);
    if (j.contains("reduced_aug")) j.at("reduced_aug").get_to(t.reduced_aug);
}

inline void to_json(nlohmann::json& j, const DetectorConfig& d) {
    j = {{"image_size", d.image_size},
         {"conv1_channels", d.conv1_channels},
         {"conv2_channels", d.conv2_channels},
         {"box_prior", d.box_prior},
         {"nms_iou", d.nms_iou},
         {"eval_conf_floor", d.eval_conf_floor},
         {"match_iou", d.match_iou}};
}

inline void from_json(const nlohmann::json& j, DetectorConfig& d) {
    d.image_size = j.value("image_size", d.image_size);
    d.conv1_channels = j.value("conv1_channels", d.conv1_channels);
    d.conv2_channels = j.value("conv2_channels", d.conv2_channels);
    d.box_prior = j.value("box_prior", d.box_prior);
    d.nms_iou = j.value("nms_iou", d.nms_iou);
    d.eval_conf_floor = j.value("eval_conf_floor", d.eval_conf_floor);
    d.match_iou = j.value("match_iou", d.match_iou);
}

inline void to_json(nlohmann::json& j, const GeneratorConfig& g) {
    j = {{"image_size", g.image_size},
         {"frames_per_video", g.frames_per_video},
         {"num_fully_labeled", g.num_fully_labeled},
         {"num_weak", g.num_weak},
         {"num_validation", g.num_validation},
         {"num_test", g.num_test},
         {"weak_positive_fraction", g.weak_positive_fraction},
         {"labeled_positive_fraction", g.labeled_positive_fraction},
         {"eval_positive_fraction", g.eval_positive_fraction},
         {"target_sigma_min", g.target_sigma_min},
         {"target_sigma_max", g.target_sigma_max},
         {"target_aspect_max", g.target_aspect_max},
         {"target_peak_min", g.target_peak_min},
         {"target_peak_max", g.target_peak_max},
         {"visibility_min", g.visibility_min},
         {"distractors_min", g.distractors_min},
         {"distractors_max", g.distractors_max},
         {"distractor_peak_min", g.distractor_peak_min},
         {"distractor_peak_max", g.distractor_peak_max},
         {"distractor_hard_fraction", g.distractor_hard_fraction},
         {"drift_speed", g.drift_speed},
         {"background", g.background},
         {"noise_sigma", g.noise_sigma},
         {"seed", g.seed}};
}

inline void from_json(const nlohmann::json& j, GeneratorConfig& g) {
    g.image_size = j.value("image_size", g.image_size);
    g.frames_per_video = j.value("frames_per_video", g.frames_per_video);
    g.num_fully_labeled = j.value("num_fully_labeled", g.num_fully_labeled);
    g.num_weak = j.value("num_weak", g.num_weak);
    g.num_validation = j.value("num_validation", g.num_validation);
    g.num_test = j.value("num_test", g.num_test);
    g.weak_positive_fraction = j.value("weak_positive_fraction", g.weak_positive_fraction);
    g.labeled_positive_fraction =
        j.value("labeled_positive_fraction", g.labeled_positive_fraction);
    g.eval_positive_fraction = j.value("eval_positive_fraction", g.eval_positive_fraction);
    g.target_sigma_min = j.value("target_sigma_min", g.target_sigma_min);
    g.target_sigma_max = j.value("target_sigma_max", g.target_sigma_max);
    g.target_aspect_max = j.value("target_aspect_max", g.target_aspect_max);
    g.target_peak_min = j.value("target_peak_min", g.target_peak_min);
    g.target_peak_max = j.value("target_peak_max", g.target_peak_max);
    g.visibility_min = j.value("visibility_min", g.visibility_min);
    g.distractors_min = j.value("distractors_min", g.distractors_min);
    g.distractors_max = j.value("distractors_max", g.distractors_max);
    g.distractor_peak_min = j.value("distractor_peak_min", g.distractor_peak_min);
    g.distractor_peak_max = j.value("distractor_peak_max", g.distractor_peak_max);
    g.distractor_hard_fraction = j.value("distractor_hard_fraction", g.distractor_hard_fraction);
    g.drift_speed = j.value("drift_speed", g.drift_speed);
    g.background = j.value("background", g.background);
    g.noise_sigma = j.value("noise_sigma", g.noise_sigma);
    g.seed = j.value("seed", g.seed);
}

}  // namespace wsvod
