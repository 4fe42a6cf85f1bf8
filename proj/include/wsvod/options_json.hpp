#pragma once

#include <json.hpp>

#include "wsvod/config_json.hpp"
#include "wsvod/training.hpp"

namespace wsvod {

inline void to_json(nlohmann::json& j, const TrainOptions& o) {
    j = {{"detector", o.det},
         {"training", o.train},
         {"loss_weights", o.weights},
         {"pseudo_labels", o.pseudo},
         {"tsmr", o.tsmr},
         {"use_hierarchical_ema", o.use_hierarchical_ema},
         {"use_unlabeled", o.use_unlabeled},
         {"use_weak_loss", o.use_weak_loss},
         {"use_tsmr", o.use_tsmr},
         {"label_fraction", o.label_fraction}};
}

inline void from_json(const nlohmann::json& j, TrainOptions& o) {
    if (j.contains("detector")) j.at("detector").get_to(o.det);
    if (j.contains("training")) j.at("training").get_to(o.train);
    if (j.contains("loss_weights")) j.at("loss_weights").get_to(o.weights);
    if (j.contains("pseudo_labels")) j.at("pseudo_labels").get_to(o.pseudo);
    if (j.contains("tsmr")) j.at("tsmr").get_to(o.tsmr);
    o.use_hierarchical_ema = j.value("use_hierarchical_ema", o.use_hierarchical_ema);
    o.use_unlabeled = j.value("use_unlabeled", o.use_unlabeled);
    o.use_weak_loss = j.value("use_weak_loss", o.use_weak_loss);
    o.use_tsmr = j.value("use_tsmr", o.use_tsmr);
    o.label_fraction = j.value("label_fraction", o.label_fraction);
}

}  // namespace wsvod
