#pragma once

#include "wsvod/config.hpp"
#include "wsvod/detector.hpp"

namespace wsvod {

// alpha*a + (1-alpha)*b elementwise. alpha 1 and 0 return exact copies of
// a and b so checkpoints stay bit-identical.
ParameterVector blend(const ParameterVector& a, const ParameterVector& b, double alpha);

// Teacher epoch rate from validation mAPs:
// alpha_min + (alpha_max - alpha_min) * sigmoid(tau0*(m_t - m_s) + tau1).
double adaptive_alpha_e(double m_t, double m_s, const TSMRConfig& cfg);

// Teacher-to-student correction rate: 1 (no transfer) when the student is
// at least as good, otherwise
// alpha_inv_min + (2 - 2*alpha_inv_min) * sigmoid(tau2*(m_s - m_t)),
// which approaches 1 continuously as the gap closes.
double inverse_alpha(double m_t, double m_s, const TSMRConfig& cfg);

// The three parameter tiers both stages track. theta is raw and
// backprop-optimized; theta_iter is its per-iteration EMA (the student EMA
// during mutual learning); theta_epoch is the per-epoch tier (the teacher).
struct ModelState {
    ParameterVector theta;
    ParameterVector theta_iter;
    ParameterVector theta_epoch;
};

// theta_iter <- blend(theta_iter, theta, alpha_i), once per iteration.
void ema_iteration(ModelState& s, double alpha_i);

// theta_epoch <- blend(theta_epoch, theta_iter, alpha_e), once per epoch.
void ema_epoch(ModelState& s, double alpha_e);

struct TSMRRates {
    double alpha_e = 0.0;
    double alpha_inv = 1.0;
};

// End-of-epoch mutual-learning update. The teacher (theta_epoch) absorbs
// the student EMA at alpha_e, fixed or adaptive. With adaptive schedules on
// and the teacher ahead, the already-updated teacher then corrects both the
// student EMA and raw theta at alpha_inv.
TSMRRates tsmr_step(ModelState& s, double m_t, double m_s, const TSMRConfig& cfg);

}  // namespace wsvod
