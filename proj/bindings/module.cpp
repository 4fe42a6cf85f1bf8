#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <optional>

#include "wsvod/augment.hpp"
#include "wsvod/config.hpp"
#include "wsvod/detector.hpp"
#include "wsvod/ema.hpp"
#include "wsvod/errors.hpp"
#include "wsvod/evaluation.hpp"
#include "wsvod/experiment.hpp"
#include "wsvod/io.hpp"
#include "wsvod/losses.hpp"
#include "wsvod/pseudo_labels.hpp"
#include "wsvod/synthetic.hpp"
#include "wsvod/training.hpp"
#include "wsvod/types.hpp"

namespace py = pybind11;
using namespace wsvod;

namespace {

Frame frame_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) throw std::invalid_argument("frame array must be 2-D");
    Frame f(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
    std::memcpy(f.px.data(), a.data(), sizeof(double) * f.px.size());
    return f;
}

py::array_t<double> frame_to_array(const Frame& f) {
    py::array_t<double> a({f.height, f.width});
    std::memcpy(a.mutable_data(), f.px.data(), sizeof(double) * f.px.size());
    return a;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "grid detector, losses, EMA schedules, and training loops";

    py::register_exception<DataError>(m, "DataError");
    py::register_exception<NumericError>(m, "NumericError");

    py::class_<BoundingBox>(m, "BoundingBox")
        .def(py::init<>())
        .def(py::init([](double cx, double cy, double w, double h) {
                 return BoundingBox{cx, cy, w, h};
             }),
             py::arg("cx"), py::arg("cy"), py::arg("w"), py::arg("h"))
        .def_readwrite("cx", &BoundingBox::cx)
        .def_readwrite("cy", &BoundingBox::cy)
        .def_readwrite("w", &BoundingBox::w)
        .def_readwrite("h", &BoundingBox::h)
        .def("__eq__", [](const BoundingBox& a, const BoundingBox& b) { return a == b; })
        .def("__repr__", [](const BoundingBox& b) {
            return "BoundingBox(cx=" + std::to_string(b.cx) + ", cy=" + std::to_string(b.cy) +
                   ", w=" + std::to_string(b.w) + ", h=" + std::to_string(b.h) + ")";
        });

    m.def("iou", &iou, py::arg("a"), py::arg("b"));
    m.def("ciou_loss", &ciou_loss, py::arg("a"), py::arg("b"));
    m.def("box_is_valid", &box_is_valid, py::arg("box"));

    py::class_<Detection>(m, "Detection")
        .def(py::init<>())
        .def(py::init([](const BoundingBox& b, double c) { return Detection{b, c}; }),
             py::arg("box"), py::arg("confidence"))
        .def_readwrite("box", &Detection::box)
        .def_readwrite("confidence", &Detection::confidence);

    py::class_<Frame>(m, "Frame")
        .def(py::init(&frame_from_array), py::arg("pixels"))
        .def_property_readonly("width", [](const Frame& f) { return f.width; })
        .def_property_readonly("height", [](const Frame& f) { return f.height; })
        .def("to_array", &frame_to_array);

    py::class_<FrameAnnotation>(m, "FrameAnnotation")
        .def(py::init<>())
        .def_readwrite("frame_index", &FrameAnnotation::frame_index)
        .def_readwrite("boxes", &FrameAnnotation::boxes);

    py::class_<VideoRecord>(m, "VideoRecord")
        .def(py::init<>())
        .def_readwrite("video_id", &VideoRecord::video_id)
        .def_readwrite("frames", &VideoRecord::frames)
        .def_readwrite("annotations", &VideoRecord::annotations)
        .def_readwrite("video_label", &VideoRecord::video_label);

    py::class_<DatasetSplit>(m, "DatasetSplit")
        .def(py::init<>())
        .def_readwrite("fully_labeled", &DatasetSplit::fully_labeled)
        .def_readwrite("weakly_labeled", &DatasetSplit::weakly_labeled)
        .def_readwrite("validation", &DatasetSplit::validation)
        .def_readwrite("test", &DatasetSplit::test);
    m.def("validate_split", &validate_split, py::arg("split"));

    py::class_<DetectorConfig>(m, "DetectorConfig")
        .def(py::init<>())
        .def_readwrite("image_size", &DetectorConfig::image_size)
        .def_readwrite("conv1_channels", &DetectorConfig::conv1_channels)
        .def_readwrite("conv2_channels", &DetectorConfig::conv2_channels)
        .def_readwrite("box_prior", &DetectorConfig::box_prior)
        .def_readwrite("nms_iou", &DetectorConfig::nms_iou)
        .def_readwrite("eval_conf_floor", &DetectorConfig::eval_conf_floor)
        .def_readwrite("match_iou", &DetectorConfig::match_iou)
        .def("grid", &DetectorConfig::grid);

    py::class_<GeneratorConfig>(m, "GeneratorConfig")
        .def(py::init<>())
        .def_readwrite("image_size", &GeneratorConfig::image_size)
        .def_readwrite("frames_per_video", &GeneratorConfig::frames_per_video)
        .def_readwrite("num_fully_labeled", &GeneratorConfig::num_fully_labeled)
        .def_readwrite("num_weak", &GeneratorConfig::num_weak)
        .def_readwrite("num_validation", &GeneratorConfig::num_validation)
        .def_readwrite("num_test", &GeneratorConfig::num_test)
        .def_readwrite("weak_positive_fraction", &GeneratorConfig::weak_positive_fraction)
        .def_readwrite("labeled_positive_fraction", &GeneratorConfig::labeled_positive_fraction)
        .def_readwrite("eval_positive_fraction", &GeneratorConfig::eval_positive_fraction)
        .def_readwrite("target_sigma_min", &GeneratorConfig::target_sigma_min)
        .def_readwrite("target_sigma_max", &GeneratorConfig::target_sigma_max)
        .def_readwrite("target_aspect_max", &GeneratorConfig::target_aspect_max)
        .def_readwrite("target_peak_min", &GeneratorConfig::target_peak_min)
        .def_readwrite("target_peak_max", &GeneratorConfig::target_peak_max)
        .def_readwrite("visibility_min", &GeneratorConfig::visibility_min)
        .def_readwrite("distractors_min", &GeneratorConfig::distractors_min)
        .def_readwrite("distractors_max", &GeneratorConfig::distractors_max)
        .def_readwrite("distractor_peak_min", &GeneratorConfig::distractor_peak_min)
        .def_readwrite("distractor_peak_max", &GeneratorConfig::distractor_peak_max)
        .def_readwrite("distractor_hard_fraction", &GeneratorConfig::distractor_hard_fraction)
        .def_readwrite("drift_speed", &GeneratorConfig::drift_speed)
        .def_readwrite("background", &GeneratorConfig::background)
        .def_readwrite("noise_sigma", &GeneratorConfig::noise_sigma)
        .def_readwrite("seed", &GeneratorConfig::seed);

    py::class_<LossWeights>(m, "LossWeights")
        .def(py::init<>())
        .def_readwrite("lambda_coord", &LossWeights::lambda_coord)
        .def_readwrite("lambda_conf", &LossWeights::lambda_conf)
        .def_readwrite("lambda_f_sup", &LossWeights::lambda_f_sup)
        .def_readwrite("lambda_f_semi", &LossWeights::lambda_f_semi)
        .def_readwrite("lambda_v_weak", &LossWeights::lambda_v_weak);

    py::class_<PseudoLabelConfig>(m, "PseudoLabelConfig")
        .def(py::init<>())
        .def_readwrite("beta", &PseudoLabelConfig::beta)
        .def_readwrite("beta_l", &PseudoLabelConfig::beta_l)
        .def_readwrite("use_weak_filtering", &PseudoLabelConfig::use_weak_filtering)
        .def_readwrite("use_soft_weights", &PseudoLabelConfig::use_soft_weights);

    py::class_<TSMRConfig>(m, "TSMRConfig")
        .def(py::init<>())
        .def_readwrite("alpha_i", &TSMRConfig::alpha_i)
        .def_readwrite("alpha_e_fixed", &TSMRConfig::alpha_e_fixed)
        .def_readwrite("alpha_e_min", &TSMRConfig::alpha_e_min)
        .def_readwrite("alpha_e_max", &TSMRConfig::alpha_e_max)
        .def_readwrite("alpha_inv_min", &TSMRConfig::alpha_inv_min)
        .def_readwrite("tau0", &TSMRConfig::tau0)
        .def_readwrite("tau1", &TSMRConfig::tau1)
        .def_readwrite("tau2", &TSMRConfig::tau2)
        .def_readwrite("adaptive", &TSMRConfig::adaptive);

    py::class_<AugmentationSpec>(m, "AugmentationSpec")
        .def(py::init<>())
        .def_readwrite("flip_prob", &AugmentationSpec::flip_prob)
        .def_readwrite("brightness_delta", &AugmentationSpec::brightness_delta)
        .def_readwrite("contrast_delta", &AugmentationSpec::contrast_delta)
        .def_readwrite("noise_sigma", &AugmentationSpec::noise_sigma)
        .def("is_identity", &AugmentationSpec::is_identity);
    m.def("strong_augmentation", &strong_augmentation);
    m.def("reduced_augmentation", &reduced_augmentation);

    py::class_<TrainingConfig>(m, "TrainingConfig")
        .def(py::init<>())
        .def_readwrite("frames_per_video", &TrainingConfig::frames_per_video)
        .def_readwrite("epochs_burn_in", &TrainingConfig::epochs_burn_in)
        .def_readwrite("epochs_mutual", &TrainingConfig::epochs_mutual)
        .def_readwrite("batch_size", &TrainingConfig::batch_size)
        .def_readwrite("learning_rate", &TrainingConfig::learning_rate)
        .def_readwrite("alpha_e_burn_in", &TrainingConfig::alpha_e_burn_in)
        .def_readwrite("seed", &TrainingConfig::seed)
        .def_readwrite("strong_aug", &TrainingConfig::strong_aug)
        .def_readwrite("reduced_aug", &TrainingConfig::reduced_aug);

    py::class_<TrainOptions>(m, "TrainOptions")
        .def(py::init<>())
        .def_readwrite("det", &TrainOptions::det)
        .def_readwrite("train", &TrainOptions::train)
        .def_readwrite("weights", &TrainOptions::weights)
        .def_readwrite("pseudo", &TrainOptions::pseudo)
        .def_readwrite("tsmr", &TrainOptions::tsmr)
        .def_readwrite("use_hierarchical_ema", &TrainOptions::use_hierarchical_ema)
        .def_readwrite("use_unlabeled", &TrainOptions::use_unlabeled)
        .def_readwrite("use_weak_loss", &TrainOptions::use_weak_loss)
        .def_readwrite("use_tsmr", &TrainOptions::use_tsmr)
        .def_readwrite("label_fraction", &TrainOptions::label_fraction);

    // detector
    m.def("sigmoid", &sigmoid, py::arg("x"));
    m.def("param_count", &param_count, py::arg("config"));
    m.def("init_params", &init_params, py::arg("config"), py::arg("seed"));

    py::class_<RawPrediction>(m, "RawPrediction")
        .def(py::init<>())
        .def_readonly("grid", &RawPrediction::grid)
        .def("at", [](const RawPrediction& p, int ch, int gy, int gx) { return p.at(ch, gy, gx); })
        .def("set",
             [](RawPrediction& p, int ch, int gy, int gx, double v) { p.at(ch, gy, gx) = v; });

    m.def(
        "forward",
        [](const DetectorConfig& cfg, const ParameterVector& params, const Frame& frame) {
            return forward(cfg, params, frame);
        },
        py::arg("config"), py::arg("params"), py::arg("frame"));
    m.def("decode", &decode, py::arg("config"), py::arg("prediction"), py::arg("conf_threshold"));
    m.def("nms", &nms, py::arg("detections"), py::arg("iou_threshold"));
    m.def(
        "detect",
        [](const DetectorConfig& cfg, const ParameterVector& params, const Frame& frame,
           double conf_threshold) {
            return nms(decode(cfg, forward(cfg, params, frame), conf_threshold), cfg.nms_iou);
        },
        py::arg("config"), py::arg("params"), py::arg("frame"), py::arg("conf_threshold") = 0.25,
        "forward + decode + NMS over one frame");

    // losses
    m.def("binary_cross_entropy", &binary_cross_entropy, py::arg("p"), py::arg("y"));
    m.def("loss_coord", &loss_coord, py::arg("config"), py::arg("prediction"), py::arg("targets"));
    m.def("loss_conf", &loss_conf, py::arg("config"), py::arg("prediction"), py::arg("targets"));
    m.def("loss_f_sup", &loss_f_sup, py::arg("config"), py::arg("params"), py::arg("frames"),
          py::arg("annotations"), py::arg("weights"));
    m.def("loss_f_semi", &loss_f_semi, py::arg("config"), py::arg("params"), py::arg("frames"),
          py::arg("pseudo_labels"), py::arg("weights"), py::arg("soft"));
    m.def("aggregate_video_confidence", &aggregate_video_confidence, py::arg("per_frame"));
    m.def("loss_v_weak", &loss_v_weak, py::arg("video_scores"), py::arg("video_labels"));
    m.def("loss_combined", &loss_combined, py::arg("l_sup"), py::arg("l_semi"), py::arg("l_weak"),
          py::arg("weights"));

    // pseudo labels
    py::class_<PseudoLabel>(m, "PseudoLabel")
        .def(py::init<>())
        .def_readwrite("box", &PseudoLabel::box)
        .def_readwrite("confidence", &PseudoLabel::confidence)
        .def_readwrite("weight", &PseudoLabel::weight);
    m.def("generate_pseudo_labels", &generate_pseudo_labels, py::arg("config"),
          py::arg("teacher_params"), py::arg("frames"), py::arg("pseudo_config"));
    m.def("weak_filter", &weak_filter, py::arg("labels"), py::arg("video_label"),
          py::arg("pseudo_config"));
    m.def("apply_soft_weights", &apply_soft_weights, py::arg("labels"));

    // EMA schedules
    m.def("blend", &blend, py::arg("a"), py::arg("b"), py::arg("alpha"));
    m.def("adaptive_alpha_e", &adaptive_alpha_e, py::arg("m_t"), py::arg("m_s"), py::arg("config"));
    m.def("inverse_alpha", &inverse_alpha, py::arg("m_t"), py::arg("m_s"), py::arg("config"));

    py::class_<ModelState>(m, "ModelState")
        .def(py::init<>())
        .def_readwrite("theta", &ModelState::theta)
        .def_readwrite("theta_iter", &ModelState::theta_iter)
        .def_readwrite("theta_epoch", &ModelState::theta_epoch);
    m.def("ema_iteration", &ema_iteration, py::arg("state"), py::arg("alpha_i"));
    m.def("ema_epoch", &ema_epoch, py::arg("state"), py::arg("alpha_e"));

    py::class_<TSMRRates>(m, "TSMRRates")
        .def_readonly("alpha_e", &TSMRRates::alpha_e)
        .def_readonly("alpha_inv", &TSMRRates::alpha_inv);
    m.def("tsmr_step", &tsmr_step, py::arg("state"), py::arg("m_t"), py::arg("m_s"),
          py::arg("config"));

    // evaluation
    py::class_<ScoredHit>(m, "ScoredHit")
        .def(py::init([](double c, bool t) { return ScoredHit{c, t}; }), py::arg("confidence"),
             py::arg("tp"))
        .def_readwrite("confidence", &ScoredHit::confidence)
        .def_readwrite("tp", &ScoredHit::tp);
    m.def("match_detections", &match_detections, py::arg("detections"), py::arg("ground_truths"),
          py::arg("iou_threshold"));
    m.def("average_precision", &average_precision, py::arg("hits"), py::arg("n_gt"));

    py::class_<PrPoint>(m, "PrPoint")
        .def_readonly("confidence", &PrPoint::confidence)
        .def_readonly("precision", &PrPoint::precision)
        .def_readonly("recall", &PrPoint::recall);
    py::class_<EvalResult>(m, "EvalResult")
        .def_readonly("map50", &EvalResult::map50)
        .def_readonly("n_gt", &EvalResult::n_gt)
        .def_readonly("n_det", &EvalResult::n_det)
        .def_readonly("n_tp", &EvalResult::n_tp)
        .def_readonly("curve", &EvalResult::curve);
    m.def("evaluate_model", &evaluate_model, py::arg("config"), py::arg("params"),
          py::arg("videos"), py::call_guard<py::gil_scoped_release>());

    // synthetic data + dataset io
    m.def(
        "generate_video",
        [](const GeneratorConfig& cfg, const std::string& id, bool positive, uint64_t seed) {
            Rng rng(seed);
            return generate_video(cfg, id, positive, rng);
        },
        py::arg("config"), py::arg("video_id"), py::arg("positive"), py::arg("seed"));
    m.def("generate_splits", &generate_splits, py::arg("config"),
          py::call_guard<py::gil_scoped_release>());
    m.def("save_dataset", &save_dataset, py::arg("dir"), py::arg("split"),
          py::call_guard<py::gil_scoped_release>());
    m.def("load_dataset", &load_dataset, py::arg("dir"),
          py::call_guard<py::gil_scoped_release>());
    m.def("save_params", &save_params, py::arg("path"), py::arg("params"));
    m.def("load_params", [](const std::string& p) { return load_params(p); }, py::arg("path"));

    // augmentation + subclips
    m.def("sample_subclip", &sample_subclip, py::arg("total_frames"), py::arg("n"));
    m.def(
        "apply_augmentation",
        [](const Frame& f, const std::vector<BoundingBox>& boxes, const AugmentationSpec& spec,
           uint64_t seed) {
            Rng rng(seed);
            const AugmentedFrame af = apply_augmentation(f, boxes, spec, rng);
            return py::make_tuple(af.frame, af.boxes);
        },
        py::arg("frame"), py::arg("boxes"), py::arg("spec"), py::arg("seed"));

    // training
    py::class_<EpochLog>(m, "EpochLog")
        .def_readonly("phase", &EpochLog::phase)
        .def_readonly("epoch", &EpochLog::epoch)
        .def_readonly("loss_sup", &EpochLog::loss_sup)
        .def_readonly("loss_semi", &EpochLog::loss_semi)
        .def_readonly("loss_weak", &EpochLog::loss_weak)
        .def_readonly("loss_total", &EpochLog::loss_total)
        .def_readonly("map_theta", &EpochLog::map_theta)
        .def_readonly("map_iter", &EpochLog::map_iter)
        .def_readonly("map_epoch", &EpochLog::map_epoch)
        .def_readonly("alpha_e", &EpochLog::alpha_e)
        .def_readonly("alpha_inv", &EpochLog::alpha_inv);
    py::class_<ScheduleRow>(m, "ScheduleRow")
        .def_readonly("epoch", &ScheduleRow::epoch)
        .def_readonly("m_t", &ScheduleRow::m_t)
        .def_readonly("m_s", &ScheduleRow::m_s)
        .def_readonly("alpha_e", &ScheduleRow::alpha_e)
        .def_readonly("alpha_inv", &ScheduleRow::alpha_inv);

    py::class_<BurnInOutcome>(m, "BurnInOutcome")
        .def_readonly("state", &BurnInOutcome::state)
        .def_readonly("log", &BurnInOutcome::log);
    py::class_<MutualOutcome>(m, "MutualOutcome")
        .def_readonly("state", &MutualOutcome::state)
        .def_readonly("log", &MutualOutcome::log)
        .def_readonly("schedule", &MutualOutcome::schedule);
    py::class_<TrainOutcome>(m, "TrainOutcome")
        .def_readonly("deployed", &TrainOutcome::deployed)
        .def_readonly("val_map", &TrainOutcome::val_map)
        .def_readonly("test_map", &TrainOutcome::test_map)
        .def_readonly("log", &TrainOutcome::log)
        .def_readonly("schedule", &TrainOutcome::schedule);

    m.def("run_burn_in", &run_burn_in, py::arg("options"), py::arg("data"),
          py::arg("run_dir") = std::string(), py::call_guard<py::gil_scoped_release>());
    m.def("run_mutual_learning", &run_mutual_learning, py::arg("options"), py::arg("data"),
          py::arg("init"), py::arg("run_dir") = std::string(), py::arg("epoch_offset") = 0,
          py::call_guard<py::gil_scoped_release>());
    m.def(
        "run_training",
        [](const TrainOptions& opt, const DatasetSplit& data, const std::string& run_dir) {
            return run_training(opt, data, run_dir);
        },
        py::arg("options"), py::arg("data"), py::arg("run_dir") = std::string(),
        py::call_guard<py::gil_scoped_release>());
    m.def("labeled_weak_subset", &labeled_weak_subset, py::arg("n_weak"), py::arg("fraction"),
          py::arg("seed"));

    // experiment helpers
    m.attr("VARIANT_NAMES") = kVariantNames;
    m.def("apply_variant", &apply_variant, py::arg("options"), py::arg("name"));
    m.def("paired_permutation_p", &paired_permutation_p, py::arg("a"), py::arg("b"));
    m.def("spearman_rho", &spearman_rho, py::arg("x"), py::arg("y"));
}
